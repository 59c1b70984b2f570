#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <string>

#include "gasnet/netdsl.hpp"
#include "support/random_networks.hpp"

using namespace gasnet;

namespace {

const char* kPipeParams =
    "X=10 Dm=0.2 lambda=0.02 c=392.7 p_bar=2e6 q_bar=5";

std::string pipe_line(const std::string& name) {
  return "component pipe " + name + " { " + kPipeParams + " }\n";
}

bool has_rule(const std::vector<ParseDiagnostic>& diags, const std::string& rule,
              int line) {
  for (const auto& d : diags)
    if (d.rule == rule && d.line == line) return true;
  return false;
}

int count_rule(const std::vector<ParseDiagnostic>& diags, const std::string& rule) {
  int n = 0;
  for (const auto& d : diags) n += d.rule == rule;
  return n;
}

}  // namespace

TEST_CASE("well-formed source parses to the declared structure") {
  const std::string src =
      "# single segment fed on the left\n" + pipe_line("P1") +
      "external pressure_in p_src P1.left\n"
      "external flow_in q_d P1.right sign=-1 out=pr\n";
  const ParseResult r = parse(src);
  REQUIRE(r.ok());
  CHECK(r.diagnostics.empty());

  const NetworkDescription& d = *r.description;
  REQUIRE(d.components.size() == 1);
  CHECK(d.components[0].kind == "pipe");
  CHECK(d.components[0].name == "P1");
  CHECK(d.components[0].line == 2);
  REQUIRE(d.components[0].params.size() == 6);
  CHECK(d.components[0].params.at("X") == 10.0);
  CHECK(d.components[0].params.at("p_bar") == 2e6);

  REQUIRE(d.externals.size() == 2);
  CHECK(d.externals[0].kind == SignalKind::Pressure);
  CHECK(d.externals[0].signal == "p_src");
  CHECK(d.externals[0].port.instance == "P1");
  CHECK(d.externals[0].port.port == "left");
  CHECK(d.externals[0].sign == 1.0);
  CHECK(d.externals[0].out_name == "p_src_out");  // defaulted
  CHECK(d.externals[1].sign == -1.0);
  CHECK(d.externals[1].out_name == "pr");
  CHECK(d.externals[1].line == 4);
}

TEST_CASE("every malformed line is reported, sorted by position") {
  const std::string src =
      pipe_line("P1") +
      "component pump X9 { R=1 }\n"
      "link P1.right\n"
      "external pressure_in p P1.left extra\n"
      "junk line\n";
  const ParseResult r = parse(src);
  CHECK(!r.ok());
  REQUIRE(r.diagnostics.size() == 4);
  CHECK(r.diagnostics[0].rule == "unknown-kind");
  CHECK(r.diagnostics[0].line == 2);
  CHECK(r.diagnostics[0].column == 11);  // the kind token
  CHECK(r.diagnostics[1].rule == "grammar");
  CHECK(r.diagnostics[1].line == 3);
  CHECK(r.diagnostics[2].line == 4);
  CHECK(r.diagnostics[2].column ==
        static_cast<int>(src.find("extra") - src.find("external p")) + 1);
  CHECK(r.diagnostics[3].line == 5);
  CHECK(r.diagnostics[3].message.find("junk") != std::string::npos);
  const std::string text = format_diagnostics(r.diagnostics);
  CHECK(text.find("2:11: [unknown-kind]") != std::string::npos);
}

TEST_CASE("name and parameter collisions are caught in the grammar") {
  CHECK(has_rule(parse("component valve V1 { R=10 }\n"
                       "component valve V1 { R=20 }\n")
                     .diagnostics,
                 "duplicate-name", 2));
  CHECK(has_rule(parse("component valve V1 { R=10 R=20 }\n").diagnostics,
                 "grammar", 1));
  CHECK(has_rule(parse("component valve V1 { R=10\n").diagnostics, "grammar", 1));
  // A defaulted output name colliding with an explicit one is still a clash.
  CHECK(has_rule(parse("component valve V1 { R=10 }\n"
                       "external pressure_in p1 V1.left out=q1_out\n"
                       "external flow_in q1 V1.right\n")
                     .diagnostics,
                 "duplicate-name", 3));
}

TEST_CASE("factory rejections surface as params diagnostics") {
  const ParseResult r = parse("component pipe P1 { X=10 }\n");
  REQUIRE(r.ok());  // grammatically fine
  const ValidationResult v = validate_rules(*r.description);
  CHECK(!v.ok());
  REQUIRE(v.diagnostics.size() == 1);
  CHECK(v.diagnostics[0].rule == "params");
  CHECK(v.diagnostics[0].line == 1);
  CHECK(v.diagnostics[0].message.find("P1") != std::string::npos);
}

TEST_CASE("dangling references are reported with their position") {
  const ParseResult r = parse(
      "component valve V1 { R=10 }\n"
      "link V1.right P9.left\n");
  REQUIRE(r.ok());
  const ValidationResult v = validate_rules(*r.description);
  CHECK(!v.ok());
  CHECK(has_rule(v.diagnostics, "ref", 2));
  // the bad token's column: "link V1.right " is 14 chars, P9 starts at 15
  for (const auto& d : v.diagnostics)
    if (d.rule == "ref") CHECK(d.column == 15);

  const ValidationResult v2 = validate_rules(
      *parse("component valve V1 { R=10 }\nlink V1.top V1.left\n").description);
  CHECK(!v2.ok());
  CHECK(has_rule(v2.diagnostics, "ref", 2));
}

TEST_CASE("links must pair one p-port with one q-port") {
  const ValidationResult v = validate_rules(
      *parse("component valve V1 { R=10 }\n"
             "component valve V2 { R=20 }\n"
             "link V1.left V2.left\n")
           .description);
  CHECK(!v.ok());
  CHECK(has_rule(v.diagnostics, "I", 3));
  CHECK(count_rule(v.diagnostics, "IV") == 4);  // all four ports stay unbound
}

TEST_CASE("external kind must match the port kind and sign stays on flows") {
  const ValidationResult v = validate_rules(
      *parse("component valve V1 { R=10 }\n"
             "external flow_in q V1.left\n"
             "external pressure_in p V1.right\n")
           .description);
  CHECK(!v.ok());
  CHECK(has_rule(v.diagnostics, "I", 2));
  CHECK(has_rule(v.diagnostics, "I", 3));

  const ValidationResult vs = validate_rules(
      *parse("component valve V1 { R=10 }\n"
             "external pressure_in p V1.left sign=-1\n"
             "external flow_in q V1.right\n")
           .description);
  CHECK(!vs.ok());
  CHECK(has_rule(vs.diagnostics, "I", 2));
}

TEST_CASE("binding a port twice cites the earlier binding") {
  const ValidationResult v = validate_rules(
      *parse("component valve V1 { R=10 }\n"
             "external pressure_in p1 V1.left\n"
             "external pressure_in p2 V1.left\n"
             "external flow_in q1 V1.right\n")
           .description);
  CHECK(!v.ok());
  REQUIRE(count_rule(v.diagnostics, "duplicate-port") == 1);
  for (const auto& d : v.diagnostics)
    if (d.rule == "duplicate-port") {
      CHECK(d.line == 3);
      CHECK(d.message.find("line 2") != std::string::npos);
    }
}

TEST_CASE("unbound ports are named at the component declaration") {
  const ValidationResult v = validate_rules(
      *parse("component valve V1 { R=10 }\n"
             "external pressure_in p1 V1.left\n")
           .description);
  CHECK(!v.ok());
  REQUIRE(count_rule(v.diagnostics, "IV") == 1);
  CHECK(v.diagnostics[0].line == 1);
  CHECK(v.diagnostics[0].message.find("V1.right") != std::string::npos);
}

TEST_CASE("a delay-free ring of feedthrough elements is rejected") {
  const ValidationResult v = validate_rules(
      *parse("component valve V1 { R=100 }\n"
             "component valve V2 { R=200 }\n"
             "link V1.right V2.left\n"
             "link V2.right V1.left\n")
           .description);
  CHECK(!v.ok());
  REQUIRE(v.diagnostics.size() == 1);
  CHECK(v.diagnostics[0].rule == "IV");
  CHECK(v.diagnostics[0].line == 3);
  CHECK(v.diagnostics[0].message.find("algebraic loop") != std::string::npos);

  // A state-bearing element in the ring breaks every static path.
  const ValidationResult ok = validate_rules(
      *parse(pipe_line("P1") +
             "component valve V1 { R=100 }\n"
             "link P1.right V1.left\n"
             "link V1.right P1.left\n")
           .description);
  CHECK(ok.ok());
}

TEST_CASE("links are stored p-port first regardless of written order") {
  const ValidationResult v = validate_rules(
      *parse(pipe_line("P1") +
             "component valve V1 { R=1200 }\n"
             "link P1.right V1.left\n"  // q-side written first
             "external pressure_in ps P1.left\n"
             "external flow_in qd V1.right\n")
           .description);
  REQUIRE(v.ok());
  REQUIRE(v.network->links.size() == 1);
  CHECK(v.network->links[0].comp_a == 1);  // valve carries the p-port
  CHECK(v.network->links[0].comp_b == 0);
  CHECK(v.network->components[1].kind == "valve");
}

TEST_CASE("paired external and internal counts obey the walk identities") {
  const ValidationResult single = validate_rules(
      *parse(pipe_line("P1") +
             "external pressure_in ps P1.left\n"
             "external flow_in qd P1.right\n")
           .description);
  REQUIRE(single.ok());
  PartitionCounts c = count_check(*single.network);
  CHECK(c.n_up == 1);
  CHECK(c.n_uq == 1);
  CHECK(c.n_zp == 1);
  CHECK(c.n_zq == 1);
  CHECK(c.n_yp_internal == 0);
  CHECK(c.n_yq_internal == 0);

  const ValidationResult series = validate_rules(
      *parse(pipe_line("P1") + pipe_line("P2") +
             "link P1.right P2.left\n"
             "external pressure_in ps P1.left\n"
             "external flow_in qd P2.right\n")
           .description);
  REQUIRE(series.ok());
  c = count_check(*series.network);
  CHECK(c.n_up == 1);
  CHECK(c.n_uq == 1);
  CHECK(c.n_yp_internal == 1);
  CHECK(c.n_yq_internal == 1);

  // Hand-built partial binding violates input coverage.
  ValidatedNetwork broken;
  broken.components.push_back(make_component(
      "valve", std::map<std::string, double>{{"R", 5.0}}));
  broken.externals.push_back(
      {0, 0, SignalKind::Pressure, 1.0, "p", "p_out"});
  CHECK_THROWS_AS((void)count_check(broken), Error);
}

TEST_CASE("canonical emission round-trips hand-written descriptions") {
  const std::string src =
      pipe_line("P1") +
      "component valve V1 { R=1200.5 }\n"
      "link P1.right V1.left\n"
      "external pressure_in ps P1.left\n"
      "external flow_in qd V1.right sign=-1 out=pv\n";
  const ParseResult first = parse(src);
  REQUIRE(first.ok());
  const std::string canon = emit(*first.description);
  const ParseResult second = parse(canon);
  REQUIRE(second.ok());
  CHECK(*second.description == *first.description);
  // defaults are omitted in the canonical form
  CHECK(canon.find("sign=-1") != std::string::npos);
  CHECK(canon.find("out=pv") != std::string::npos);
  CHECK(canon.find("out=ps_out") == std::string::npos);
}

TEST_CASE("generated networks validate, round-trip, and keep the identities") {
  std::mt19937 rng(606);
  for (int trial = 0; trial < 30; ++trial) {
    const NetworkDescription d =
        netgen::random_conservative_network(rng, 3, 8);
    CAPTURE(trial);
    const ValidationResult v = validate_rules(d);
    REQUIRE_MESSAGE(v.ok(), format_diagnostics(v.diagnostics));
    const PartitionCounts c = count_check(*v.network);
    CHECK(c.n_up == c.n_zq);
    CHECK(c.n_uq == c.n_zp);
    CHECK(c.n_yp_internal == c.n_yq_internal);
    CHECK(c.n_yq_internal == static_cast<Index>(v.network->links.size()));

    const ParseResult round = parse(emit(d));
    REQUIRE(round.ok());
    CHECK(*round.description == d);
  }
}
