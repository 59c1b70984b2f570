#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "gasnet/scenario.hpp"

namespace {

using namespace gasnet;

std::string g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void print_trace_line(const std::string& name, const ScenarioTrace& trace,
                      const std::vector<std::string>& measured) {
  std::cout << "trace " << name << ": ";
  if (trace.time.size() < 2) {
    std::cout << "no samples\n";
    return;
  }
  try {
    const double bal = steady_state_balance(trace);
    std::cout << "settled, net steady imbalance " << g6(bal);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotSettled) throw;
    std::cout << "not settled";
  }
  const Index last = trace.time.size() - 1;
  for (const auto& mname : measured) {
    for (std::size_t c = 0; c < trace.pressure_names.size(); ++c) {
      if (trace.pressure_names[c] != mname) continue;
      std::cout << ", final " << mname << " "
                << g6(trace.pressures(last, static_cast<Index>(c))) << " Pa";
    }
  }
  std::cout << "\n";
}

void print_pipeline_summary(const PipelineResult& pl) {
  std::cout << "closed network: " << pl.network.closed.order() << " states, "
            << pl.network.closed.num_inputs() << " inputs, "
            << pl.network.closed.num_outputs() << " outputs\n";
  std::cout << "conservation: "
            << (pl.conservation.conserves_mass ? "holds" : "fails")
            << " (recorded, not gating)  qq residual "
            << g6(pl.conservation.qq_row_residual) << "  qp norm "
            << g6(pl.conservation.qp_norm) << "\n";
  std::cout << "integrator: " << pl.integrator.zero_pole_count
            << " pole(s) at zero, "
            << (pl.integrator.detectable ? "detectable" : "undetectable")
            << ", ramp r2 " << g6(pl.integrator.ramp_r2) << "\n";
  std::cout << "filtered plant: " << pl.filtered.order() << " states\n";
  std::cout << "reduced plant: " << pl.reduction.reduced.order() << " states ("
            << pl.reduction.report.unstable_block_order
            << " kept at the stability boundary), error bound "
            << g6(pl.reduction.report.error_bound) << ", achieved "
            << g6(pl.reduction.report.achieved_error) << "\n";
  std::cout << "controller orders: lqg " << pl.lqg.order << ", lqgi "
            << pl.lqgi.order << "\n";
}

int run_check(const std::string& path) {
  ParseResult pr;
  try {
    pr = parse_file(path);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  if (!pr.ok()) {
    std::cerr << format_diagnostics(pr.diagnostics);
    return 1;
  }
  const ValidationResult vr = validate_rules(*pr.description);
  if (!vr.ok()) {
    std::cerr << format_diagnostics(vr.diagnostics);
    return 1;
  }
  const PartitionCounts pc = count_check(*vr.network);
  std::cout << "ok: " << vr.network->desc.components.size() << " components, "
            << vr.network->desc.links.size() << " links, "
            << vr.network->desc.externals.size() << " externals\n";
  std::cout << "external inputs: " << pc.n_up << " pressure, " << pc.n_uq
            << " flow; internal pairs: " << pc.n_yp_internal << "\n";
  return 0;
}

int emit_and_list(const ScenarioArtifacts& artifacts, const std::string& out_dir) {
  for (const auto& path : emit_reports(artifacts, out_dir))
    std::cout << "wrote " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linear gas network modeling, reduction, and control runs"};
  app.require_subcommand(1);

  std::string net_path, cfg_path, out_dir, which = "lqg";

  auto* check = app.add_subcommand(
      "check", "parse a network description and run the connection rules");
  check->add_option("file", net_path, "network description (.net)")->required();

  auto* pipeline = app.add_subcommand(
      "pipeline", "build, analyze, reduce, and design controllers for a scenario");
  pipeline->add_option("config", cfg_path, "scenario config file")->required();
  pipeline->add_option("--out", out_dir, "directory for reports");

  auto* simulate = app.add_subcommand(
      "simulate", "run one controller against the full and reduced plants");
  simulate->add_option("config", cfg_path, "scenario config file")->required();
  simulate->add_option("--controller", which, "lqg or lqgi")
      ->check(CLI::IsMember({"lqg", "lqgi"}));
  simulate->add_option("--out", out_dir, "directory for reports");

  auto* report = app.add_subcommand(
      "report", "full pipeline plus closed-loop traces for both controllers");
  report->add_option("config", cfg_path, "scenario config file")->required();
  report->add_option("--out", out_dir, "directory for reports")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  using namespace gasnet;
  try {
    if (check->parsed()) return run_check(net_path);

    ScenarioConfig cfg;
    try {
      cfg = load_scenario_config(cfg_path);
    } catch (const Error& e) {
      std::cerr << e.what() << "\n";
      return 2;
    }

    const PipelineResult pl = run_pipeline(cfg);
    print_pipeline_summary(pl);

    ScenarioArtifacts artifacts;
    artifacts.pipeline = pl;

    if (pipeline->parsed()) {
      if (!out_dir.empty()) return emit_and_list(artifacts, out_dir);
      return 0;
    }

    const auto trace_against = [&](const ControllerRealization& ctrl,
                                   const std::string& tag) {
      artifacts.traces.emplace_back(
          tag + "_filtered", simulate_closed_loop(pl.filtered, ctrl, cfg));
      artifacts.traces.emplace_back(
          tag + "_unfiltered", simulate_closed_loop(pl.network.closed, ctrl, cfg));
      artifacts.traces.emplace_back(
          tag + "_reduced", simulate_closed_loop(pl.reduction.reduced, ctrl, cfg));
    };

    if (simulate->parsed()) {
      trace_against(which == "lqg" ? pl.lqg : pl.lqgi, which);
    } else {  // report
      trace_against(pl.lqg, "lqg");
      artifacts.traces.emplace_back(
          "lqgi_filtered", simulate_closed_loop(pl.filtered, pl.lqgi, cfg));
    }
    for (const auto& [name, trace] : artifacts.traces)
      print_trace_line(name, trace, cfg.measured);
    if (!out_dir.empty()) return emit_and_list(artifacts, out_dir);
    return 0;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
}
