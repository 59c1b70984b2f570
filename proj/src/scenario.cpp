#include "gasnet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include "gasnet/filters.hpp"
#include "gasnet/netdsl.hpp"

namespace gasnet {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_names(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v))
      fail(ErrorCode::InvalidParams, "bad number for " + key + ": '" + s + "'");
    return v;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidParams, "bad number for " + key + ": '" + s + "'");
  }
}

int parse_int(const std::string& key, const std::string& s) {
  const double v = parse_double(key, s);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    fail(ErrorCode::InvalidParams, "expected an integer for " + key);
  return static_cast<int>(v);
}

Vector parse_vector(const std::string& key, const std::string& s) {
  const auto toks = split_names(s);
  Vector v(static_cast<Index>(toks.size()));
  for (std::size_t i = 0; i < toks.size(); ++i)
    v(static_cast<Index>(i)) = parse_double(key, toks[i]);
  return v;
}

}  // namespace

ScenarioConfig parse_scenario_config(const std::string& text) {
  static const std::map<std::string, std::vector<std::string>> kKnown = {
      {"scenario", {"name"}},
      {"network", {"file"}},
      {"selection", {"measured", "commanded", "tracked"}},
      {"filters", {"order", "cutoff_hz"}},
      {"reduction", {"order"}},
      {"sampling", {"period"}},
      {"weights",
       {"output", "control", "process_noise", "measurement_noise", "integral"}},
      {"disturbance", {"channel", "magnitude", "step_time"}},
      {"simulation", {"horizon", "substeps"}},
  };

  std::map<std::string, std::string> kv;  // "section.key" -> value
  std::istringstream is(text);
  std::string raw, section;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = trim(raw);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(ErrorCode::InvalidParams,
             "config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      if (!kKnown.count(section))
        fail(ErrorCode::InvalidParams, "config line " + std::to_string(lineno) +
                                           ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || section.empty())
      fail(ErrorCode::InvalidParams, "config line " + std::to_string(lineno) +
                                         ": expected key=value inside a section");
    const std::string key = trim(line.substr(0, eq));
    const auto& allowed = kKnown.at(section);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      fail(ErrorCode::InvalidParams, "config line " + std::to_string(lineno) +
                                         ": unknown key '" + key + "' in [" +
                                         section + "]");
    kv[section + "." + key] = trim(line.substr(eq + 1));
  }

  const auto get = [&](const char* k) -> const std::string* {
    const auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };

  ScenarioConfig cfg;
  if (const auto* v = get("scenario.name")) cfg.name = *v;
  if (const auto* v = get("network.file")) cfg.network_file = *v;
  if (const auto* v = get("selection.measured")) cfg.measured = split_names(*v);
  if (const auto* v = get("selection.commanded")) cfg.commanded = split_names(*v);
  if (const auto* v = get("selection.tracked")) cfg.tracked = split_names(*v);
  if (const auto* v = get("filters.order")) cfg.filter_order = parse_int("filters.order", *v);
  if (const auto* v = get("filters.cutoff_hz"))
    cfg.filter_cutoff_hz = parse_double("filters.cutoff_hz", *v);
  if (const auto* v = get("reduction.order"))
    cfg.reduced_order = parse_int("reduction.order", *v);
  if (const auto* v = get("sampling.period"))
    cfg.sample_period = parse_double("sampling.period", *v);
  if (const auto* v = get("weights.output")) cfg.output_weight = parse_vector("weights.output", *v);
  if (const auto* v = get("weights.control"))
    cfg.control_weight = parse_vector("weights.control", *v);
  if (const auto* v = get("weights.process_noise"))
    cfg.process_noise = parse_double("weights.process_noise", *v);
  if (const auto* v = get("weights.measurement_noise"))
    cfg.measurement_noise = parse_vector("weights.measurement_noise", *v);
  if (const auto* v = get("weights.integral"))
    cfg.integral_weight = parse_vector("weights.integral", *v);
  if (const auto* v = get("disturbance.channel")) cfg.disturbance_channel = *v;
  if (const auto* v = get("disturbance.magnitude"))
    cfg.disturbance_magnitude = parse_double("disturbance.magnitude", *v);
  if (const auto* v = get("disturbance.step_time"))
    cfg.disturbance_step_time = parse_double("disturbance.step_time", *v);
  if (const auto* v = get("simulation.horizon"))
    cfg.horizon = parse_double("simulation.horizon", *v);
  if (const auto* v = get("simulation.substeps"))
    cfg.substeps = parse_int("simulation.substeps", *v);

  if (cfg.network_file.empty())
    fail(ErrorCode::InvalidParams, "config requires [network] file=");
  if (cfg.measured.empty())
    fail(ErrorCode::InvalidParams, "config requires [selection] measured=");
  if (cfg.commanded.empty())
    fail(ErrorCode::InvalidParams, "config requires [selection] commanded=");
  if (cfg.tracked.empty()) cfg.tracked = cfg.measured;
  for (const auto& t : cfg.tracked)
    if (std::find(cfg.measured.begin(), cfg.measured.end(), t) == cfg.measured.end())
      fail(ErrorCode::InvalidParams, "tracked signal '" + t + "' is not measured");
  if (cfg.filter_order < 1)
    fail(ErrorCode::InvalidParams, "filters.order must be at least 1");
  if (!(cfg.filter_cutoff_hz > 0))
    fail(ErrorCode::InvalidParams, "filters.cutoff_hz must be positive");
  if (cfg.reduced_order < 1)
    fail(ErrorCode::InvalidParams, "reduction.order must be at least 1");
  if (!(cfg.sample_period > 0))
    fail(ErrorCode::InvalidParams, "sampling.period must be positive");
  if (!(cfg.process_noise > 0))
    fail(ErrorCode::InvalidParams, "weights.process_noise must be positive");
  const auto check_sized = [&](const Vector& v, std::size_t want, const char* key,
                               bool strictly_positive) {
    if (v.size() == 0) return;
    if (static_cast<std::size_t>(v.size()) != want)
      fail(ErrorCode::InvalidParams,
           std::string(key) + " must list one entry per selected signal");
    for (Index i = 0; i < v.size(); ++i)
      if (strictly_positive ? !(v(i) > 0) : !(v(i) >= 0))
        fail(ErrorCode::InvalidParams, std::string(key) + " entries must be positive");
  };
  check_sized(cfg.output_weight, cfg.measured.size(), "weights.output", true);
  check_sized(cfg.control_weight, cfg.commanded.size(), "weights.control", true);
  check_sized(cfg.measurement_noise, cfg.measured.size(), "weights.measurement_noise", true);
  check_sized(cfg.integral_weight, cfg.measured.size(), "weights.integral", false);
  if (!(cfg.disturbance_step_time >= 0))
    fail(ErrorCode::InvalidParams, "disturbance.step_time must be nonnegative");
  if (!(cfg.horizon > cfg.disturbance_step_time))
    fail(ErrorCode::InvalidParams, "simulation.horizon must exceed the disturbance step time");
  if (cfg.substeps < 10)
    fail(ErrorCode::InvalidParams, "simulation.substeps must be at least 10");
  return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  ScenarioConfig cfg = parse_scenario_config(read_text_file(path));
  const std::filesystem::path net(cfg.network_file);
  if (net.is_relative()) {
    const auto resolved = std::filesystem::path(path).parent_path() / net;
    cfg.network_file = resolved.lexically_normal().string();
  }
  return cfg;
}

namespace {

// Re-throws a stage failure with the stage name in front so a run aborts with
// "reduce: ..." rather than a bare message; the code is preserved.
template <class F>
auto staged(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    std::string msg = e.what();
    const std::string pre = std::string(error_code_name(e.code())) + ": ";
    if (msg.rfind(pre, 0) == 0) msg = msg.substr(pre.size());
    throw Error(e.code(), std::string(name) + ": " + msg);
  }
}

}  // namespace

PipelineResult run_pipeline(const ScenarioConfig& config) {
  PipelineResult out;
  out.config = config;

  const NetworkDescription desc = staged("parse", [&] {
    ParseResult pr = parse_file(config.network_file);
    if (!pr.ok())
      fail(ErrorCode::InvalidParams, "\n" + format_diagnostics(pr.diagnostics));
    return *pr.description;
  });
  const ValidatedNetwork net = staged("rules", [&] {
    ValidationResult vr = validate_rules(desc);
    if (!vr.ok())
      fail(ErrorCode::InvalidParams, "\n" + format_diagnostics(vr.diagnostics));
    return *vr.network;
  });
  out.network = staged("build", [&] { return build_network(net); });

  // Physics verdicts are recorded, never gating: a loop fed only by flow
  // externals fails the conservation certificate precisely because it keeps
  // the inventory integrator, and that is what the next stage reports.
  out.conservation =
      staged("conservation", [&] { return check_conservation(out.network.closed); });
  out.integrator =
      staged("integrator", [&] { return detect_integrator(out.network); });

  staged("selection", [&] {
    for (const auto& name : config.measured)
      out.measured_idx.push_back(out.network.closed.output_index(name));
    for (const auto& name : config.commanded)
      out.commanded_idx.push_back(out.network.closed.input_index(name));
    for (const auto& name : config.tracked) {
      const auto it = std::find(config.measured.begin(), config.measured.end(), name);
      if (it == config.measured.end())
        fail(ErrorCode::InvalidParams, "tracked signal '" + name + "' is not measured");
      out.tracked_in_measured.push_back(it - config.measured.begin());
    }
    return 0;
  });

  out.filtered = staged("filters", [&] {
    const LtiSystem filt =
        butterworth_lowpass(config.filter_order, config.filter_cutoff_hz);
    return append_sensor_filters(out.network.closed, filt, out.measured_idx);
  });
  out.reduction = staged("reduce", [&] {
    // Reduce the design view: every external input stays (the disturbance
    // must survive into the reduced simulation model) but only the measured,
    // band-limited outputs. Keeping raw wideband outputs would spend the
    // retained order on dynamics the controller never sees.
    const LtiSystem& f = out.filtered;
    const Index n_meas = static_cast<Index>(out.measured_idx.size());
    Matrix Cm(n_meas, f.order()), Dm(n_meas, f.num_inputs());
    std::vector<SignalLabel> outs;
    for (Index i = 0; i < n_meas; ++i) {
      const Index row = f.output_index(config.measured[i]);
      Cm.row(i) = f.C().row(row);
      Dm.row(i) = f.D().row(row);
      outs.push_back(f.outputs()[row]);
    }
    const LtiSystem view(f.A(), f.B(), Cm, Dm, f.timebase(), f.inputs(), outs);
    return balanced_truncate(view, config.reduced_order);
  });
  out.discrete = staged("discretize", [&] {
    return discretize_zoh(out.reduction.reduced, config.sample_period);
  });

  staged("design", [&] {
    const Index n_meas = static_cast<Index>(config.measured.size());
    const Index n_cmd = static_cast<Index>(config.commanded.size());
    const Vector ow = config.output_weight.size() ? config.output_weight
                                                  : Vector::Constant(n_meas, 1e-9);
    const Vector cw = config.control_weight.size() ? config.control_weight
                                                   : Vector::Constant(n_cmd, 1.0);
    const Vector mn = config.measurement_noise.size()
                          ? config.measurement_noise
                          : Vector::Constant(n_meas, 1e4);
    const Vector iw = config.integral_weight.size() ? config.integral_weight
                                                    : Vector::Constant(n_meas, 1e-9);
    if (ow.size() != n_meas || mn.size() != n_meas || iw.size() != n_meas ||
        cw.size() != n_cmd)
      fail(ErrorCode::InvalidWeights, "weight lists must match the channel selection");

    const LtiSystem& d = out.discrete;
    Matrix Bd(d.order(), n_cmd), Dd(n_meas, n_cmd), Cd(n_meas, d.order());
    std::vector<SignalLabel> ins, outs;
    for (Index j = 0; j < n_cmd; ++j) {
      const Index col = d.input_index(config.commanded[j]);
      Bd.col(j) = d.B().col(col);
      ins.push_back(d.inputs()[col]);
    }
    for (Index i = 0; i < n_meas; ++i) {
      const Index row = d.output_index(config.measured[i]);
      Cd.row(i) = d.C().row(row);
      outs.push_back(d.outputs()[row]);
      for (Index j = 0; j < n_cmd; ++j)
        Dd(i, j) = d.D()(row, d.input_index(config.commanded[j]));
    }
    out.design_plant = LtiSystem(d.A(), Bd, Cd, Dd, d.timebase(), ins, outs);

    out.weights.Q_x = Matrix(ow.asDiagonal());
    out.weights.R_u = Matrix(cw.asDiagonal());
    out.weights.Q_w =
        config.process_noise * Matrix::Identity(d.order(), d.order());
    out.weights.R_v = Matrix(mn.asDiagonal());
    out.weights.integral_weight = iw;

    out.lqg = assemble_lqg(out.design_plant, out.weights);
    out.lqgi = assemble_lqg_integral(out.design_plant, out.weights,
                                     out.tracked_in_measured);
    return 0;
  });
  return out;
}

namespace {

double external_sign(const NetworkDescription& desc, const std::string& signal) {
  for (const auto& e : desc.externals)
    if (e.signal == signal) return e.sign;
  fail(ErrorCode::InvalidParams,
       "signal '" + signal + "' is not an external of the configured network");
}

}  // namespace

ScenarioTrace simulate_closed_loop(const LtiSystem& plant,
                                   const ControllerRealization& controller,
                                   const ScenarioConfig& config) {
  if (plant.timebase().is_discrete)
    fail(ErrorCode::InvalidParams, "closed-loop runs drive a continuous plant");
  const LtiSystem& c = controller.sys;
  if (!c.timebase().is_discrete)
    fail(ErrorCode::InvalidParams, "controller must be discrete");
  if (c.timebase().Ts != config.sample_period)
    fail(ErrorCode::InvalidParams,
         "controller sample period differs from the configured one");
  if (config.disturbance_channel.empty())
    fail(ErrorCode::InvalidParams, "config names no disturbance channel");
  if (config.substeps < 1)
    fail(ErrorCode::InvalidParams, "substeps must be at least 1");

  const Index n_meas = static_cast<Index>(config.measured.size());
  const Index n_cmd = static_cast<Index>(config.commanded.size());
  std::vector<Index> meas_row(n_meas), cmd_col(n_cmd);
  std::vector<Index> ctrl_in(n_meas), ctrl_out(n_cmd);
  for (Index i = 0; i < n_meas; ++i) {
    meas_row[i] = plant.output_index(config.measured[i]);
    ctrl_in[i] = c.input_index(config.measured[i]);
  }
  for (Index j = 0; j < n_cmd; ++j) {
    cmd_col[j] = plant.input_index(config.commanded[j]);
    ctrl_out[j] = c.output_index(config.commanded[j]);
  }
  const Index d_col = plant.input_index(config.disturbance_channel);

  // The sample-instant measurement feeds the command applied over the same
  // interval, so it must not already depend on that command.
  for (Index i = 0; i < n_meas; ++i)
    for (Index j = 0; j < n_cmd; ++j)
      if (plant.D()(meas_row[i], cmd_col[j]) != 0.0)
        fail(ErrorCode::AlgebraicLoop,
             "measured output '" + config.measured[i] +
                 "' feeds through from commanded input '" + config.commanded[j] + "'");

  ParseResult pr = parse_file(config.network_file);
  if (!pr.ok())
    fail(ErrorCode::InvalidParams,
         "network file rejected while resolving signal signs:\n" +
             format_diagnostics(pr.diagnostics));

  const double Ts = config.sample_period;
  const int k = config.substeps;
  const double dt = Ts / k;
  const long long n_samples = std::llround(config.horizon / Ts);
  if (n_samples < 1) fail(ErrorCode::InvalidParams, "horizon shorter than one sample");
  const double t_step = config.disturbance_step_time;
  const double mag = config.disturbance_magnitude;
  const double eps = 1e-9 * dt;

  const Index n = plant.order(), p = plant.num_outputs(), m = plant.num_inputs();
  const auto [Asub, Bsub] = zoh_maps(plant.A(), plant.B(), dt);

  const Index rows = static_cast<Index>(n_samples) * k + 1;
  ScenarioTrace tr;
  tr.time.resize(rows);
  tr.pressures.resize(rows, p);
  tr.commands.resize(rows, n_cmd);
  tr.disturbance.resize(rows);
  tr.controller_norm.resize(rows);
  for (const auto& lab : plant.outputs()) tr.pressure_names.push_back(lab.name);
  tr.command_names = config.commanded;
  tr.command_signs.resize(n_cmd);
  for (Index j = 0; j < n_cmd; ++j)
    tr.command_signs(j) = external_sign(*pr.description, config.commanded[j]);
  tr.disturbance_sign = external_sign(*pr.description, config.disturbance_channel);

  const auto d_at = [&](double t) { return t >= t_step - eps ? mag : 0.0; };

  Vector x = Vector::Zero(n);
  Vector z = Vector::Zero(c.order());
  Vector y_ctrl(n_meas), u_cmd(n_cmd), u(m);
  Index row = 0;
  for (long long s = 0; s < n_samples; ++s) {
    const double t_k = static_cast<double>(s) * Ts;

    // Measure, command, then step the estimator; the command holds over the
    // whole sample interval.
    Vector u_exo = Vector::Zero(m);
    u_exo(d_col) += d_at(t_k);
    const Vector y_now = plant.C() * x + plant.D() * u_exo;
    for (Index i = 0; i < n_meas; ++i) y_ctrl(ctrl_in[i]) = y_now(meas_row[i]);
    const Vector v = c.C() * z + c.D() * y_ctrl;
    for (Index j = 0; j < n_cmd; ++j) u_cmd(j) = v(ctrl_out[j]);
    const double znorm = z.norm();
    z = c.A() * z + c.B() * y_ctrl;

    Vector u_base = Vector::Zero(m);
    for (Index j = 0; j < n_cmd; ++j) u_base(cmd_col[j]) += u_cmd(j);

    if (s == 0) {
      u = u_base;
      u(d_col) += d_at(0.0);
      tr.time(row) = 0.0;
      tr.pressures.row(row) = (plant.C() * x + plant.D() * u).transpose();
      tr.commands.row(row) = u_cmd.transpose();
      tr.disturbance(row) = d_at(0.0);
      tr.controller_norm(row) = znorm;
      ++row;
    }

    for (int j = 0; j < k; ++j) {
      const double g0 = t_k + j * dt;
      const double g1 = t_k + (j + 1) * dt;
      if (t_step <= g0 + eps || d_at(g0) == mag) {
        u = u_base;
        u(d_col) += mag * (t_step <= g0 + eps ? 1.0 : 0.0);
        x = Asub * x + Bsub * u;
      } else if (t_step >= g1 - eps) {
        x = Asub * x + Bsub * u_base;
      } else {
        // The step lands inside this substep: integrate exactly up to the
        // onset with the pre-step input, then to the substep end with the
        // post-step one. Splitting keeps the trace invariant under substep
        // refinement.
        const auto [Aa, Ba] = zoh_maps(plant.A(), plant.B(), t_step - g0);
        const auto [Ab, Bb] = zoh_maps(plant.A(), plant.B(), g1 - t_step);
        x = Aa * x + Ba * u_base;
        u = u_base;
        u(d_col) += mag;
        x = Ab * x + Bb * u;
      }
      u = u_base;
      u(d_col) += d_at(g1);
      tr.time(row) = g1;
      tr.pressures.row(row) = (plant.C() * x + plant.D() * u).transpose();
      tr.commands.row(row) = u_cmd.transpose();
      tr.disturbance(row) = d_at(g1);
      tr.controller_norm(row) = znorm;
      ++row;
    }
  }
  return tr;
}

double steady_state_balance(const ScenarioTrace& trace) {
  const Index rows = trace.time.size();
  if (rows < 2) fail(ErrorCode::InvalidParams, "trace has fewer than two rows");
  const double t0 = trace.time(0), t1 = trace.time(rows - 1);
  const double w_start = t1 - 0.1 * (t1 - t0);
  Index first = rows - 1;
  while (first > 0 && trace.time(first - 1) >= w_start) --first;
  const Index w = rows - first;

  const auto require_flat = [&](const Matrix& cols,
                                const std::vector<std::string>& names) {
    for (Index j = 0; j < cols.cols(); ++j) {
      const double peak = cols.col(j).cwiseAbs().maxCoeff();
      const auto win = cols.col(j).segment(first, w);
      const double drift = win.maxCoeff() - win.minCoeff();
      if (drift > 1e-6 * std::max(peak, 1e-12))
        fail(ErrorCode::NotSettled,
             "'" + names[static_cast<std::size_t>(j)] +
                 "' still drifts over the averaging window");
    }
  };
  require_flat(trace.pressures, trace.pressure_names);
  require_flat(trace.commands, trace.command_names);

  double net = 0.0;
  for (Index j = 0; j < trace.commands.cols(); ++j)
    net += trace.command_signs(j) * trace.commands.col(j).segment(first, w).mean();
  net += trace.disturbance_sign * trace.disturbance.segment(first, w).mean();
  return std::abs(net);
}

Json conservation_report_json(const ConservationReport& rep) {
  Json j;
  j["conserves_mass"] = rep.conserves_mass;
  j["qq_row_residual"] = rep.qq_row_residual;
  j["qp_norm"] = rep.qp_norm;
  j["epsilons"] = rep.epsilons;
  j["qq_residuals"] = rep.qq_residuals;
  j["qp_norms"] = rep.qp_norms;
  j["qq_tolerance"] = rep.qq_tolerance;
  j["qp_tolerance"] = rep.qp_tolerance;
  return j;
}

Json integrator_report_json(const IntegratorReport& rep) {
  Json j;
  j["zero_pole_count"] = rep.zero_pole_count;
  j["zero_pole_tolerance"] = rep.zero_pole_tolerance;
  j["left_direction"] = std::vector<double>(
      rep.left_direction.data(), rep.left_direction.data() + rep.left_direction.size());
  j["detectable"] = rep.detectable;
  j["ramp_verified"] = rep.ramp_verified;
  j["ramp_r2"] = rep.ramp_r2;
  j["ramp_slope"] = rep.ramp_slope;
  j["balanced_bounded"] = rep.balanced_bounded;
  return j;
}

namespace {

std::string g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += " ";
    out += n;
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> w(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    w[static_cast<std::size_t>(i)] =
        lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return w;
}

double sigma_max(const ComplexMatrix& M) {
  return Eigen::JacobiSVD<ComplexMatrix>(M).singularValues()(0);
}

}  // namespace

std::vector<std::string> emit_reports(const ScenarioArtifacts& artifacts,
                                      const std::string& out_dir) {
  const PipelineResult& pl = artifacts.pipeline;
  namespace fs = std::filesystem;
  const fs::path root = fs::path(out_dir) / pl.config.name;
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + root.string());

  std::vector<std::string> written;
  const auto emit_text = [&](const std::string& name, const std::string& body) {
    const std::string path = (root / name).string();
    write_text_file(path, body);
    written.push_back(path);
  };
  const auto emit_json = [&](const std::string& name, const Json& j) {
    emit_text(name, j.dump(2) + "\n");
  };

  std::ostringstream sum;
  const LtiSystem& closed = pl.network.closed;
  sum << "scenario: " << pl.config.name << "\n";
  sum << "network file: " << pl.config.network_file << "\n";
  sum << "closed network: " << closed.order() << " states, " << closed.num_inputs()
      << " inputs, " << closed.num_outputs() << " outputs\n";
  sum << "conservation: " << (pl.conservation.conserves_mass ? "holds" : "fails")
      << " (recorded, not gating)  qq residual " << g6(pl.conservation.qq_row_residual)
      << "  qp norm " << g6(pl.conservation.qp_norm) << "\n";
  sum << "integrator: " << pl.integrator.zero_pole_count << " pole(s) at zero, "
      << (pl.integrator.detectable ? "detectable" : "undetectable")
      << ", ramp r2 " << g6(pl.integrator.ramp_r2) << ", slope "
      << g6(pl.integrator.ramp_slope) << " Pa/s per kg/s\n";
  sum << "filtered plant: " << pl.filtered.order() << " states ("
      << pl.config.filter_order << "th order sensor filters at "
      << g6(pl.config.filter_cutoff_hz) << " Hz)\n";
  sum << "reduced plant: " << pl.reduction.reduced.order() << " states ("
      << pl.reduction.report.unstable_block_order
      << " kept at the stability boundary), error bound "
      << g6(pl.reduction.report.error_bound) << ", achieved "
      << g6(pl.reduction.report.achieved_error) << "\n";
  sum << "sample period: " << g6(pl.config.sample_period) << " s\n";
  sum << "measured: " << join(pl.config.measured) << "\n";
  sum << "commanded: " << join(pl.config.commanded) << "\n";
  sum << "tracked: " << join(pl.config.tracked) << "\n";
  sum << "controller orders: lqg " << pl.lqg.order << ", lqgi " << pl.lqgi.order
      << "\n";
  for (const auto& [name, trace] : artifacts.traces) {
    sum << "trace " << name << ": ";
    if (trace.time.size() < 2) {
      sum << "no samples\n";
      continue;
    }
    try {
      const double bal = steady_state_balance(trace);
      sum << "settled, net steady imbalance " << g6(bal);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotSettled) throw;
      sum << "not settled";
    }
    const Index last = trace.time.size() - 1;
    for (const auto& mname : pl.config.measured) {
      const auto it = std::find(trace.pressure_names.begin(),
                                trace.pressure_names.end(), mname);
      if (it == trace.pressure_names.end()) continue;
      const Index col = it - trace.pressure_names.begin();
      sum << ", final " << mname << " " << g6(trace.pressures(last, col)) << " Pa";
    }
    sum << "\n";
  }
  emit_text("summary.txt", sum.str());

  emit_text("network.net", emit(pl.network.network.desc));
  emit_json("closed.json", system_to_json(closed));
  emit_json("conservation.json", conservation_report_json(pl.conservation));
  emit_json("integrator.json", integrator_report_json(pl.integrator));
  emit_json("filtered.json", system_to_json(pl.filtered));
  emit_json("reduction.json", reduction_report_json(pl.reduction.report));
  emit_json("reduced.json", system_to_json(pl.reduction.reduced));
  emit_json("discrete.json", system_to_json(pl.discrete));

  Json design;
  design["measured"] = pl.config.measured;
  design["commanded"] = pl.config.commanded;
  design["tracked"] = pl.config.tracked;
  design["plant"] = system_to_json(pl.design_plant);
  design["Q_x"] = matrix_to_json(pl.weights.Q_x);
  design["R_u"] = matrix_to_json(pl.weights.R_u);
  design["Q_w"] = matrix_to_json(pl.weights.Q_w);
  design["R_v"] = matrix_to_json(pl.weights.R_v);
  design["integral_weight"] = std::vector<double>(
      pl.weights.integral_weight.data(),
      pl.weights.integral_weight.data() + pl.weights.integral_weight.size());
  emit_json("design.json", design);
  emit_json("controller_lqg.json", system_to_json(pl.lqg.sys));
  emit_json("controller_lqgi.json", system_to_json(pl.lqgi.sys));

  const auto& hsv = pl.reduction.report.hankel_singular_values;
  Matrix hs(static_cast<Index>(hsv.size()), 2);
  for (Index i = 0; i < hs.rows(); ++i) {
    hs(i, 0) = static_cast<double>(i);
    hs(i, 1) = hsv[static_cast<std::size_t>(i)];
  }
  {
    const std::string path = (root / "hsv.csv").string();
    write_csv(path, {"index", "hankel_singular_value"}, hs);
    written.push_back(path);
  }

  // Bode comparison on the channels both models share: the reduced model
  // carries only the measured outputs.
  std::vector<Index> meas_in_filtered;
  for (const auto& name : pl.config.measured)
    meas_in_filtered.push_back(pl.filtered.output_index(name));
  const auto grid = log_grid(1e-4, M_PI, 200);
  Matrix bode(static_cast<Index>(grid.size()), 4);
  for (Index i = 0; i < bode.rows(); ++i) {
    const double w = grid[static_cast<std::size_t>(i)];
    const Complex s(0.0, w);
    const ComplexMatrix Hf_all = eval_tf(pl.filtered, s);
    ComplexMatrix Hf(meas_in_filtered.size(), Hf_all.cols());
    for (std::size_t r = 0; r < meas_in_filtered.size(); ++r)
      Hf.row(static_cast<Index>(r)) = Hf_all.row(meas_in_filtered[r]);
    const ComplexMatrix Hr = eval_tf(pl.reduction.reduced, s);
    bode(i, 0) = w;
    bode(i, 1) = sigma_max(Hf);
    bode(i, 2) = sigma_max(Hr);
    bode(i, 3) = sigma_max(Hf - Hr);
  }
  {
    const std::string path = (root / "bode.csv").string();
    write_csv(path, {"omega_rad_s", "sigma_full", "sigma_reduced", "sigma_error"},
              bode);
    written.push_back(path);
  }

  // Impulse responses of the closed network, one column per output/input
  // pair: x(t_k) = expm(A k dt) B e_j sampled exactly, fine enough for the
  // acoustic modes, long enough to show the inventory mode's flat tail.
  {
    const double dt = 0.05;
    const Index steps = 1200;
    const auto [Ad, Bd0] = zoh_maps(closed.A(), closed.B(), dt);
    (void)Bd0;
    const Index p = closed.num_outputs(), m = closed.num_inputs();
    std::vector<std::string> header{"t"};
    for (Index j = 0; j < m; ++j)
      for (Index i = 0; i < p; ++i)
        header.push_back(closed.outputs()[i].name + "__" + closed.inputs()[j].name);
    Matrix imp(steps + 1, 1 + p * m);
    for (Index k = 0; k <= steps; ++k) imp(k, 0) = k * dt;
    for (Index j = 0; j < m; ++j) {
      Vector x = closed.B().col(j);
      for (Index k = 0; k <= steps; ++k) {
        imp.block(k, 1 + j * p, 1, p) = (closed.C() * x).transpose();
        x = Ad * x;
      }
    }
    const std::string path = (root / "impulse.csv").string();
    write_csv(path, header, imp);
    written.push_back(path);
  }

  for (const auto& [name, trace] : artifacts.traces) {
    std::vector<std::string> header{"t"};
    for (const auto& pn : trace.pressure_names) header.push_back(pn);
    for (const auto& cn : trace.command_names) header.push_back("cmd_" + cn);
    header.push_back("disturbance");
    header.push_back("controller_norm");
    const Index rows = trace.time.size();
    Matrix table(rows, static_cast<Index>(header.size()));
    if (rows > 0) {
      Index col = 0;
      table.col(col++) = trace.time;
      for (Index j = 0; j < trace.pressures.cols(); ++j)
        table.col(col++) = trace.pressures.col(j);
      for (Index j = 0; j < trace.commands.cols(); ++j)
        table.col(col++) = trace.commands.col(j);
      table.col(col++) = trace.disturbance;
      table.col(col++) = trace.controller_norm;
    }
    const std::string path = (root / ("trace_" + name + ".csv")).string();
    write_csv(path, header, table);
    written.push_back(path);
  }
  return written;
}

}  // namespace gasnet
