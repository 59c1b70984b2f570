#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "gasnet/filters.hpp"
#include "gasnet/reduction.hpp"

using namespace gasnet;

namespace {

Matrix randn(std::mt19937& rng, Index r, Index c) {
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

// Gershgorin shift pushes every eigenvalue left of -0.5.
Matrix stable_randn(std::mt19937& rng, Index n) {
  Matrix a = randn(rng, n, n);
  a.diagonal().array() -= a.cwiseAbs().rowwise().sum().maxCoeff() + 0.5;
  return a;
}

Matrix random_orthogonal(std::mt19937& rng, Index n) {
  return Eigen::HouseholderQR<Matrix>(randn(rng, n, n))
      .householderQ() * Matrix::Identity(n, n);
}

// Symmetric realization with prescribed Hankel singular values: with
// A = -1/(s_i+s_j), b = c^T = ones, both gramians equal diag(s).
LtiSystem cauchy_balanced(const Vector& s) {
  const Index n = s.size();
  Matrix A(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) A(i, j) = -1.0 / (s(i) + s(j));
  return make_system(A, Matrix::Ones(n, 1), Matrix::Ones(1, n),
                     Matrix::Zero(1, 1));
}

double rel_err(const ComplexMatrix& got, const ComplexMatrix& want) {
  return (got - want).norm() / std::max(1.0, want.norm());
}

}  // namespace

TEST_CASE("butterworth prototype hits the textbook pole ring") {
  const LtiSystem f = butterworth_lowpass(8, 0.4);
  CHECK(f.order() == 8);
  CHECK(f.D()(0, 0) == 0.0);
  CHECK(std::abs(dc_gain(f).value(0, 0) - 1.0) <= 1e-12);

  const double wc = 2.0 * std::numbers::pi * 0.4;
  const double edge = std::abs(eval_tf(f, Complex(0.0, wc))(0, 0));
  CHECK(std::abs(edge - 1.0 / std::sqrt(2.0)) <= 1e-9);

  const Complex expected[8] = {
      {-0.490315457945868, 2.464982265331035},
      {-0.490315457945868, -2.464982265331035},
      {-1.396300290086041, 2.089711060554264},
      {-1.396300290086041, -2.089711060554264},
      {-2.089711060554264, 1.396300290086041},
      {-2.089711060554264, -1.396300290086041},
      {-2.464982265331035, 0.490315457945869},
      {-2.464982265331035, -0.490315457945869}};
  const auto ps = poles(f);
  REQUIRE(ps.size() == 8);
  for (const Complex& want : expected) {
    double best = 1e300;
    for (const Complex& got : ps) best = std::min(best, std::abs(got - want));
    CHECK(best <= 1e-9);
  }
  for (const Complex& got : ps) {
    CHECK(got.real() < 0.0);
    CHECK(std::abs(std::abs(got) - wc) <= 1e-9);
  }
}

TEST_CASE("odd filter orders keep the half-power edge") {
  const LtiSystem f = butterworth_lowpass(5, 2.0);
  CHECK(f.order() == 5);
  CHECK(std::abs(dc_gain(f).value(0, 0) - 1.0) <= 1e-12);
  const double wc = 4.0 * std::numbers::pi;
  CHECK(std::abs(std::abs(eval_tf(f, Complex(0.0, wc))(0, 0)) -
                 1.0 / std::sqrt(2.0)) <= 1e-9);

  CHECK_THROWS_AS((void)butterworth_lowpass(0, 1.0), Error);
  CHECK_THROWS_AS((void)butterworth_lowpass(4, 0.0), Error);
}

TEST_CASE("sensor filters chain onto the chosen outputs only") {
  std::mt19937 rng(1212);
  const LtiSystem plant =
      make_system(stable_randn(rng, 3), randn(rng, 3, 2), randn(rng, 3, 3),
                  Matrix::Zero(3, 2));
  const LtiSystem filt = butterworth_lowpass(2, 0.5);

  const LtiSystem app = append_sensor_filters(plant, filt, {0, 2});
  CHECK(app.order() == 7);
  CHECK(app.num_outputs() == 3);
  CHECK(app.outputs()[2].name == plant.outputs()[2].name);

  // unity-DC filtering leaves every DC gain alone
  CHECK((dc_gain(app).value - dc_gain(plant).value).cwiseAbs().maxCoeff() <= 1e-9);

  const Complex s(0.3, 1.0);
  const ComplexMatrix hp = eval_tf(plant, s), ha = eval_tf(app, s);
  const Complex hf = eval_tf(filt, s)(0, 0);
  CHECK((ha.row(0) - hf * hp.row(0)).norm() <= 1e-12);
  CHECK((ha.row(2) - hf * hp.row(2)).norm() <= 1e-12);
  CHECK((ha.row(1) - hp.row(1)).norm() <= 1e-12);  // untouched passthrough

  const LtiSystem same = append_sensor_filters(plant, filt, {});
  CHECK((same.A() - plant.A()).norm() == 0.0);
  CHECK((same.C() - plant.C()).norm() == 0.0);

  CHECK_THROWS_AS((void)append_sensor_filters(plant, filt, {3}), Error);
  CHECK_THROWS_AS((void)append_sensor_filters(plant, filt, {0, 0}), Error);
  CHECK_THROWS_AS((void)append_sensor_filters(plant, plant, {0}), Error);
  CHECK_THROWS_AS(
      (void)append_sensor_filters(plant, discretize_zoh(filt, 0.1), {0}),
      Error);
}

TEST_CASE("the stability split severs a diagonal pair cleanly") {
  const LtiSystem sys = make_system(
      (Matrix(2, 2) << -1.0, 0.0, 0.0, 0.0).finished(), Matrix::Ones(2, 1),
      Matrix::Ones(1, 2), (Matrix(1, 1) << 3.0).finished());
  const SpectralSplit sp = stable_unstable_decompose(sys);
  CHECK(sp.stable.order() == 1);
  CHECK(sp.unstable.order() == 1);
  CHECK(sp.stable.A()(0, 0) == doctest::Approx(-1.0));
  CHECK(std::abs(sp.unstable.A()(0, 0)) <= 1e-12);
  CHECK(sp.stable.D()(0, 0) == 3.0);   // feedthrough rides the stable block
  CHECK(sp.unstable.D()(0, 0) == 0.0);
  const Matrix back = sp.T.inverse() * sys.A() * sp.T;
  CHECK(std::abs(back(0, 0) + 1.0) <= 1e-12);
  CHECK(std::abs(back(1, 1)) <= 1e-12);
  CHECK(std::abs(back(0, 1)) + std::abs(back(1, 0)) <= 1e-12);
}

TEST_CASE("hidden mixed spectra split and the transfers add back") {
  std::mt19937 rng(1313);
  Matrix Ablk = Matrix::Zero(7, 7);
  Ablk.topLeftCorner(4, 4) = stable_randn(rng, 4);
  Ablk(4, 4) = 0.0;  // integrator
  Ablk.block(5, 5, 2, 2) << 0.1, 2.0, -2.0, 0.1;
  const Matrix U = random_orthogonal(rng, 7);
  const LtiSystem sys =
      make_system(U * Ablk * U.transpose(), randn(rng, 7, 2), randn(rng, 2, 7),
                  randn(rng, 2, 2));

  const SpectralSplit sp = stable_unstable_decompose(sys);
  CHECK(sp.stable.order() == 4);
  CHECK(sp.unstable.order() == 3);
  for (const Complex& lam : poles(sp.stable)) CHECK(lam.real() < -1e-7);
  for (const Complex& lam : poles(sp.unstable)) CHECK(lam.real() >= -1e-7);

  Matrix blk = Matrix::Zero(7, 7);
  blk.topLeftCorner(4, 4) = sp.stable.A();
  blk.bottomRightCorner(3, 3) = sp.unstable.A();
  CHECK((sp.T.inverse() * sys.A() * sp.T - blk).norm() <=
        1e-8 * sys.A().norm());

  std::uniform_real_distribution<double> re(0.5, 2.5), im(-3.0, 3.0);
  for (int i = 0; i < 10; ++i) {
    const Complex s(re(rng), im(rng));
    const ComplexMatrix sum = eval_tf(sp.stable, s) + eval_tf(sp.unstable, s);
    CHECK(rel_err(sum, eval_tf(sys, s)) <= 1e-8);
  }
}

TEST_CASE("the boundary band is refused, moving it resolves the call") {
  const LtiSystem sys = make_system(
      (Matrix(2, 2) << -1.0, 0.0, 0.0, 1.5e-7).finished(), Matrix::Ones(2, 1),
      Matrix::Ones(1, 2), Matrix::Zero(1, 1));
  CHECK_THROWS_AS((void)stable_unstable_decompose(sys), Error);
  try {
    (void)stable_unstable_decompose(sys);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AmbiguousBoundary);
  }
  const SpectralSplit sp = stable_unstable_decompose(sys, 1e-6);
  CHECK(sp.stable.order() == 1);
  CHECK(sp.unstable.order() == 1);

  CHECK_THROWS_AS(
      (void)stable_unstable_decompose(discretize_zoh(sys, 1.0), 1e-6), Error);
}

TEST_CASE("an all-stable system splits into itself plus nothing") {
  std::mt19937 rng(1414);
  const LtiSystem sys = make_system(stable_randn(rng, 3), randn(rng, 3, 1),
                                    randn(rng, 1, 3), randn(rng, 1, 1));
  const SpectralSplit sp = stable_unstable_decompose(sys);
  CHECK(sp.unstable.order() == 0);
  CHECK(sp.stable.order() == 3);
  const Complex s(0.7, 0.9);
  CHECK(rel_err(eval_tf(sp.stable, s), eval_tf(sys, s)) <= 1e-12);
  CHECK(eval_tf(sp.unstable, s).norm() == 0.0);
}

TEST_CASE("sylvester back-substitution leaves no residual") {
  std::mt19937 rng(1515);
  Matrix A = randn(rng, 4, 4), B = randn(rng, 3, 3);
  A.diagonal().array() -= 10.0;  // spectra of A and -B stay apart
  const Matrix C = randn(rng, 4, 3);
  const Matrix X = solve_sylvester(A, B, C);
  CHECK((A * X + X * B - C).norm() <=
        1e-10 * (A.norm() + B.norm()) * std::max(1.0, X.norm()));

  const Matrix one = Matrix::Ones(1, 1);
  CHECK_THROWS_AS((void)solve_sylvester(one, -one, one), Error);
  CHECK_THROWS_AS((void)solve_sylvester(one, Matrix(2, 2), one), Error);
}

TEST_CASE("scalar gramians match the closed forms") {
  const LtiSystem a = make_system((Matrix(1, 1) << -1.0).finished(),
                                  Matrix::Ones(1, 1), 2.0 * Matrix::Ones(1, 1),
                                  Matrix::Zero(1, 1));
  const Gramians g = gramians(a);
  CHECK(std::abs(g.P(0, 0) - 0.5) <= 1e-12);
  CHECK(std::abs(g.Q(0, 0) - 2.0) <= 1e-12);
}

TEST_CASE("random stable gramians satisfy both equations") {
  std::mt19937 rng(1616);
  const LtiSystem sys = make_system(stable_randn(rng, 5), randn(rng, 5, 2),
                                    randn(rng, 2, 5), Matrix::Zero(2, 2));
  const Gramians g = gramians(sys);
  const Matrix bbt = sys.B() * sys.B().transpose();
  const Matrix ctc = sys.C().transpose() * sys.C();
  CHECK((sys.A() * g.P + g.P * sys.A().transpose() + bbt).norm() <=
        1e-9 * (sys.A().norm() * g.P.norm() + bbt.norm()));
  CHECK((sys.A().transpose() * g.Q + g.Q * sys.A() + ctc).norm() <=
        1e-9 * (sys.A().norm() * g.Q.norm() + ctc.norm()));
  Eigen::SelfAdjointEigenSolver<Matrix> ep(g.P), eq(g.Q);
  CHECK(ep.eigenvalues().minCoeff() >= -1e-12);
  CHECK(eq.eigenvalues().minCoeff() >= -1e-12);

  const LtiSystem marginal = make_system(
      Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
      Matrix::Zero(1, 1));
  CHECK_THROWS_AS((void)gramians(marginal), Error);
  CHECK_THROWS_AS((void)gramians(discretize_zoh(sys, 0.5)), Error);
}

TEST_CASE("prescribed hankel values come back out of the balancing") {
  const LtiSystem sys = cauchy_balanced((Vector(3) << 3.0, 1.0, 0.01).finished());
  const ReductionResult full = balanced_truncate(sys, 3);
  REQUIRE(full.report.hankel_singular_values.size() == 3);
  CHECK(full.report.hankel_singular_values[0] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(full.report.hankel_singular_values[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(full.report.hankel_singular_values[2] == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(full.report.error_bound == 0.0);
  CHECK(full.report.achieved_error <= 1e-10);  // full order is a similarity

  const ReductionResult cut = balanced_truncate(sys, 2);
  CHECK(cut.reduced.order() == 2);
  CHECK(cut.report.unstable_block_order == 0);
  CHECK(cut.report.error_bound == doctest::Approx(0.02).epsilon(1e-9));
  CHECK(cut.report.achieved_error <= 0.02 * (1.0 + 1e-6));
  CHECK(cut.report.achieved_error >= 0.019);  // the bound is nearly tight here
  for (const Complex& lam : poles(cut.reduced)) CHECK(lam.real() < 0.0);

  const Json j = reduction_report_json(cut.report);
  CHECK(j.at("retained_order").get<Index>() == 2);
  CHECK(j.at("hankel_singular_values").size() == 3);
}

TEST_CASE("truncation keeps the integrator and the exact feedthrough") {
  std::mt19937 rng(1717);
  Matrix Ablk = Matrix::Zero(5, 5);
  Ablk.topLeftCorner(4, 4) = stable_randn(rng, 4);
  const Matrix U = random_orthogonal(rng, 5);
  const LtiSystem sys =
      make_system(U * Ablk * U.transpose(), randn(rng, 5, 2), randn(rng, 2, 5),
                  Matrix::Zero(2, 2));

  auto zero_count = [](const LtiSystem& s) {
    int c = 0;
    for (const Complex& lam : poles(s))
      if (std::abs(lam) <= 1e-8) ++c;
    return c;
  };
  REQUIRE(zero_count(sys) == 1);

  const ReductionResult red = balanced_truncate(sys, 3);
  CHECK(red.reduced.order() == 3);
  CHECK(red.report.unstable_block_order == 1);
  CHECK(zero_count(red.reduced) == 1);
  CHECK(red.reduced.D().norm() == 0.0);
  CHECK(red.report.hankel_singular_values.size() == 4);
  CHECK(red.report.achieved_error <=
        red.report.error_bound * (1.0 + 1e-6) + 1e-12);

  CHECK_THROWS_AS((void)balanced_truncate(sys, 0), Error);
  try {
    (void)balanced_truncate(sys, 0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TargetTooSmall);
  }
  CHECK_THROWS_AS((void)balanced_truncate(sys, 6), Error);

  // Hankel values are a similarity invariant
  const Matrix V = random_orthogonal(rng, 5);
  const LtiSystem moved =
      make_system(V * sys.A() * V.transpose(), V * sys.B(),
                  sys.C() * V.transpose(), sys.D());
  const ReductionResult again = balanced_truncate(moved, 3);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(again.report.hankel_singular_values[i] ==
          doctest::Approx(red.report.hankel_singular_values[i]).epsilon(1e-8));
}

TEST_CASE("the error bound holds across random stable systems") {
  std::mt19937 rng(1818);
  for (int trial = 0; trial < 5; ++trial) {
    CAPTURE(trial);
    const LtiSystem sys = make_system(stable_randn(rng, 8), randn(rng, 8, 2),
                                      randn(rng, 2, 8), Matrix::Zero(2, 2));
    const ReductionResult red = balanced_truncate(sys, 4);
    CHECK(red.reduced.order() == 4);
    CHECK(red.report.achieved_error <=
          red.report.error_bound * (1.0 + 1e-6) + 1e-12);
    std::vector<double> hsv = red.report.hankel_singular_values;
    CHECK(std::is_sorted(hsv.rbegin(), hsv.rend()));
    CHECK(hsv.back() >= 0.0);
  }
}
