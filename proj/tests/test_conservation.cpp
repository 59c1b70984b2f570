#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "gasnet/conservation.hpp"
#include "support/random_networks.hpp"

using namespace gasnet;

namespace {

const char* kPipeNet =
    "component pipe P1 { X=10 Dm=0.2 lambda=0.02 c=392.7 p_bar=2e6 q_bar=5 }\n"
    "external pressure_in ps P1.left\n"
    "external flow_in qd P1.right\n";

NetworkArtifacts built(const std::string& src) {
  const ParseResult r = parse(src);
  REQUIRE_MESSAGE(r.ok(), format_diagnostics(r.diagnostics));
  return build_network(*r.description);
}

LtiSystem static_map(Matrix D, std::vector<SignalLabel> ins,
                     std::vector<SignalLabel> outs) {
  const Index p = D.rows(), m = D.cols();
  return LtiSystem(Matrix(0, 0), Matrix(0, m), Matrix(p, 0), std::move(D),
                   Timebase::continuous(), std::move(ins), std::move(outs));
}

}  // namespace

TEST_CASE("a closed pipe segment certifies as mass conserving") {
  const ConservationReport rep = check_conservation(built(kPipeNet).closed);
  CHECK(rep.conserves_mass);
  CHECK(rep.qq_residuals[2] <= 1e-6);
  CHECK(rep.qp_norms[2] <= 1e-5);
  // residuals shrink roughly linearly with the probe offset
  CHECK(rep.qq_residuals[2] <= rep.qq_residuals[0]);
  CHECK(rep.qq_row_residual == rep.qq_residuals[0]);  // the sweep maximum
}

TEST_CASE("valve chains conserve exactly at every probe") {
  const ConservationReport rep = check_conservation(
      built("component valve V1 { R=700 }\n"
            "component valve V2 { R=1300 }\n"
            "link V1.right V2.left\n"
            "external pressure_in ps V1.left\n"
            "external flow_in qd V2.right\n")
          .closed);
  CHECK(rep.conserves_mass);
  CHECK(rep.qq_row_residual <= 1e-14);
  CHECK(rep.qp_norm <= 1e-14);
}

TEST_CASE("a leaking flow map fails the column sums") {
  const LtiSystem leak = static_map((Matrix(1, 1) << 0.5).finished(),
                                    {flow_signal("q_in")}, {flow_signal("q_out")});
  const ConservationReport rep = check_conservation(leak);
  CHECK(!rep.conserves_mass);
  CHECK(rep.qq_row_residual == doctest::Approx(0.5));
}

TEST_CASE("accumulated mass with no flow exit fails the certificate") {
  // two source ports filling one volume: flow columns have no exit rows
  const NetworkArtifacts art = built(
      "component manifold M1 { V=0.1 c=360 sources=2 }\n"
      "external flow_in q1 M1.src1\n"
      "external flow_in q2 M1.src2\n");
  const ConservationReport rep = check_conservation(art.closed);
  CHECK(!rep.conserves_mass);
  CHECK(rep.qq_residuals[2] == doctest::Approx(1.0));
}

TEST_CASE("a zero pole confined to pressure blocks does not fail it") {
  // state integrates the pressure input; the flow path is a clean unit map
  Matrix A = Matrix::Zero(1, 1), B(1, 2), C(2, 1), D(2, 2);
  B << 1.0, 0.0;
  C << 1.0, 0.0;
  D << 0.0, 0.0, 0.0, 1.0;
  const LtiSystem sys(A, B, C, D, Timebase::continuous(),
                      {pressure_signal("p_in"), flow_signal("q_in")},
                      {pressure_signal("p_out"), flow_signal("q_out")});
  const ConservationReport rep = check_conservation(sys);
  CHECK(rep.conserves_mass);
  // while the pressure response itself is blowing up at the probe
  CHECK(std::abs(eval_tf(sys, Complex(1e-6, 0))(0, 0)) == doctest::Approx(1e6));
}

TEST_CASE("random conservative networks keep the certificate") {
  std::mt19937 rng(909);
  for (int trial = 0; trial < 25; ++trial) {
    CAPTURE(trial);
    const NetworkDescription d = netgen::random_conservative_network(rng, 3, 8);
    const ConservationReport rep = check_conservation(build_network(d).closed);
    CHECK_MESSAGE(rep.conserves_mass, "qq=", rep.qq_residuals[2],
                  " qp=", rep.qp_norms[2]);
  }
}

TEST_CASE("pressure inputs lose their DC grip one decade per decade") {
  const BlockingZeroReport rep = check_blocking_zero_qp(built(kPipeNet).closed);
  CHECK(rep.verdict == BlockingZeroReport::Verdict::Pass);
  CHECK(rep.slope == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(rep.norms[1] == doctest::Approx(rep.norms[0] / 10).epsilon(1e-3));

  // identically decoupled: a valve passes with nothing to decay
  const BlockingZeroReport zero = check_blocking_zero_qp(
      built("component valve V1 { R=700 }\n"
            "external pressure_in ps V1.left\n"
            "external flow_in qd V1.right\n")
          .closed);
  CHECK(zero.verdict == BlockingZeroReport::Verdict::Pass);
  CHECK(zero.norms[2] <= 1e-12);
}

TEST_CASE("static pressure-to-flow coupling is flagged, absence is n/a") {
  const LtiSystem bad = static_map((Matrix(1, 1) << 2.0).finished(),
                                   {pressure_signal("p")}, {flow_signal("q")});
  CHECK(check_blocking_zero_qp(bad).verdict == BlockingZeroReport::Verdict::Fail);
  CHECK(check_blocking_zero_qp(bad).slope == doctest::Approx(0.0));

  const LtiSystem na = static_map((Matrix(1, 1) << 1.0).finished(),
                                  {flow_signal("q_in")}, {flow_signal("q_out")});
  CHECK(check_blocking_zero_qp(na).verdict ==
        BlockingZeroReport::Verdict::NotApplicable);
}

TEST_CASE("friction keeps the flow-to-pressure rank, frictionless drops it") {
  const NetworkArtifacts damped = built(kPipeNet);
  const DetectabilityReport ok =
      check_detectability_rank(damped.aggregate_sys, damped.partition);
  CHECK(ok.full_rank);
  CHECK(ok.rows == 1);
  CHECK(ok.cols == 1);
  CHECK(ok.sigma_max > 100.0);  // the DC draw/pressure trade is O(R)

  const NetworkArtifacts frictionless = built(
      "component pipe P1 { X=10 Dm=0.2 lambda=0 c=392.7 p_bar=2e6 q_bar=5 }\n"
      "external pressure_in ps P1.left\n"
      "external flow_in qd P1.right\n");
  const DetectabilityReport drop =
      check_detectability_rank(frictionless.aggregate_sys, frictionless.partition);
  CHECK(!drop.full_rank);
  CHECK(drop.sigma_max <= 1e-6);

  SignalPartition empty;
  CHECK_THROWS_AS(
      (void)check_detectability_rank(damped.aggregate_sys, empty), Error);
}

TEST_CASE("grounded networks report no integrator") {
  std::mt19937 rng(1010);
  const NetworkArtifacts art =
      build_network(netgen::random_supply_tree(rng, 4, 7));
  const IntegratorReport rep = detect_integrator(art);
  CHECK(rep.zero_pole_count == 0);
  CHECK(rep.left_direction.size() == 0);
  CHECK(!rep.ramp_verified);  // oracle only runs when a zero pole exists
}

TEST_CASE("an isolated ring carries exactly one integrator and shows it") {
  const NetworkArtifacts art = built(
      "component manifold M1 { V=0.1 c=360 inlets=1 outlets=1 sources=1 "
      "Rin1=800 }\n"
      "component manifold M2 { V=0.25 c=390 inlets=1 outlets=1 sources=1 "
      "Rin1=1500 }\n"
      "link M1.out1 M2.in1\n"
      "link M2.out1 M1.in1\n"
      "external flow_in q1 M1.src1\n"
      "external flow_in q2 M2.src1 sign=-1\n");
  const IntegratorReport rep = detect_integrator(art);
  CHECK(rep.zero_pole_count == 1);
  REQUIRE(rep.left_direction.size() == 2);
  // left null direction of the closed A, normalized with a positive peak
  CHECK((rep.left_direction.transpose() * art.closed.A()).norm() <= 1e-8);
  CHECK(rep.left_direction.norm() == doctest::Approx(1.0));
  CHECK(rep.left_direction.maxCoeff() > 0.0);
  CHECK(rep.detectable);
  CHECK(rep.ramp_verified);
  CHECK(rep.ramp_r2 >= 0.999);
  CHECK(rep.balanced_bounded);
}
