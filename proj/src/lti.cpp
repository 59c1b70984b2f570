#include "gasnet/lti.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <unsupported/Eigen/MatrixFunctions>

namespace gasnet {

SignalLabel pressure_signal(std::string name, SignalScope scope) {
  return {std::move(name), SignalKind::Pressure, scope};
}

SignalLabel flow_signal(std::string name, SignalScope scope) {
  return {std::move(name), SignalKind::Flow, scope};
}

Timebase Timebase::discrete(double Ts) {
  if (!(Ts > 0.0) || !std::isfinite(Ts))
    fail(ErrorCode::InvalidParams, "discrete timebase needs Ts > 0");
  return {true, Ts};
}

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

std::vector<SignalLabel> default_labels(Index count, const char* prefix) {
  std::vector<SignalLabel> labels;
  labels.reserve(static_cast<size_t>(count));
  for (Index i = 0; i < count; ++i)
    labels.push_back(pressure_signal(prefix + std::to_string(i)));
  return labels;
}

}  // namespace

LtiSystem::LtiSystem(Matrix A, Matrix B, Matrix C, Matrix D, Timebase tb,
                     std::vector<SignalLabel> inputs,
                     std::vector<SignalLabel> outputs)
    : A_(std::move(A)),
      B_(std::move(B)),
      C_(std::move(C)),
      D_(std::move(D)),
      tb_(tb),
      inputs_(std::move(inputs)),
      outputs_(std::move(outputs)) {
  const Index n = A_.rows();
  if (A_.cols() != n)
    fail(ErrorCode::DimensionMismatch, "A must be square");
  if (B_.rows() != n)
    fail(ErrorCode::DimensionMismatch, "B row count must match A");
  if (C_.cols() != n)
    fail(ErrorCode::DimensionMismatch, "C column count must match A");
  if (D_.rows() != C_.rows() || D_.cols() != B_.cols())
    fail(ErrorCode::DimensionMismatch, "D must be outputs x inputs");
  if (!all_finite(A_) || !all_finite(B_) || !all_finite(C_) || !all_finite(D_))
    fail(ErrorCode::NonFiniteEntry, "state-space matrices must be finite");
  if (inputs_.empty()) inputs_ = default_labels(B_.cols(), "u");
  if (outputs_.empty()) outputs_ = default_labels(C_.rows(), "y");
  if (static_cast<Index>(inputs_.size()) != B_.cols())
    fail(ErrorCode::DimensionMismatch, "input label count must match B");
  if (static_cast<Index>(outputs_.size()) != C_.rows())
    fail(ErrorCode::DimensionMismatch, "output label count must match C");
}

Index LtiSystem::input_index(const std::string& name) const {
  for (size_t i = 0; i < inputs_.size(); ++i)
    if (inputs_[i].name == name) return static_cast<Index>(i);
  fail(ErrorCode::InvalidParams, "no input named '" + name + "'");
}

Index LtiSystem::output_index(const std::string& name) const {
  for (size_t i = 0; i < outputs_.size(); ++i)
    if (outputs_[i].name == name) return static_cast<Index>(i);
  fail(ErrorCode::InvalidParams, "no output named '" + name + "'");
}

LtiSystem make_system(Matrix A, Matrix B, Matrix C, Matrix D, Timebase tb,
                      std::vector<SignalLabel> inputs,
                      std::vector<SignalLabel> outputs) {
  return LtiSystem(std::move(A), std::move(B), std::move(C), std::move(D), tb,
                   std::move(inputs), std::move(outputs));
}

ComplexMatrix eval_tf(const LtiSystem& sys, Complex s) {
  const Index n = sys.order();
  if (n == 0) return sys.D().cast<Complex>();

  ComplexMatrix M = -sys.A().cast<Complex>();
  M.diagonal().array() += s;
  const ComplexMatrix Bc = sys.B().cast<Complex>();

  Eigen::PartialPivLU<ComplexMatrix> lu(M);
  const auto& U = lu.matrixLU();
  double umax = 0.0, umin = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    const double d = std::abs(U(i, i));
    umax = std::max(umax, d);
    umin = std::min(umin, d);
  }
  if (umin == 0.0 || umin < umax * 1e-15)
    fail(ErrorCode::SingularAtS, "sI - A is singular at the requested s");

  ComplexMatrix X = lu.solve(Bc);
  const double bnorm = Bc.norm();
  if (bnorm > 0.0) {
    // Backward-error scale: a stable solve leaves (M X - B) small relative to
    // |M||X| + |B|, even when the response itself is huge near a pole.
    const double residual =
        (M * X - Bc).norm() / (M.norm() * X.norm() + bnorm);
    if (!(residual <= 1e-10))
      fail(ErrorCode::SingularAtS, "transfer solve residual " +
                                       std::to_string(residual) +
                                       " exceeds 1e-10; s is at or near a pole");
  }
  return sys.C().cast<Complex>() * X + sys.D().cast<Complex>();
}

std::vector<Complex> poles(const LtiSystem& sys) {
  const Index n = sys.order();
  std::vector<Complex> out;
  if (n == 0) return out;

  Eigen::EigenSolver<Matrix> es(sys.A());
  if (es.info() != Eigen::Success)
    fail(ErrorCode::EigenFailure, "eigenvalue iteration did not converge");

  const double anorm = std::max(sys.A().norm(), 1e-300);
  for (Index k = 0; k < n; ++k) {
    const Complex lambda = es.eigenvalues()(k);
    const Eigen::VectorXcd v = es.eigenvectors().col(k);
    const double res = (sys.A().cast<Complex>() * v - lambda * v).norm();
    if (!(res <= 1e-8 * anorm))
      fail(ErrorCode::EigenFailure, "eigenpair backward error above 1e-8");
    out.push_back(lambda);
  }
  std::sort(out.begin(), out.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  return out;
}

DcGain dc_gain(const LtiSystem& sys, double tol_zero) {
  const Index p = sys.num_outputs(), m = sys.num_inputs();
  DcGain g;
  g.value.resize(p, m);
  g.finite.resize(p, m);
  g.finite.setConstant(true);

  const Complex s0 = sys.timebase().is_discrete ? Complex(1.0, 0.0)
                                                : Complex(0.0, 0.0);
  bool pole_at_dc = false;
  if (sys.order() > 0) {
    Eigen::VectorXcd eigs = sys.A().eigenvalues();
    for (Index i = 0; i < eigs.size(); ++i)
      if (std::abs(eigs(i) - s0) <= tol_zero) pole_at_dc = true;
  }

  if (!pole_at_dc) {
    if (sys.order() == 0) {
      g.value = sys.D();
    } else {
      Matrix M = (sys.timebase().is_discrete
                      ? Matrix(Matrix::Identity(sys.order(), sys.order()) -
                               sys.A())
                      : Matrix(-sys.A()));
      g.value = sys.C() * M.partialPivLu().solve(sys.B()) + sys.D();
    }
    return g;
  }

  // Pole at DC: probe along a shrinking offset. Regular entries approach
  // their limit linearly in the offset, so Richardson-extrapolate consecutive
  // probe pairs (offset ratio 10) and keep entries whose extrapolated limits
  // agree to 1e-6 relative; diverging entries get markers instead.
  const double eps[] = {1e-4, 1e-5, 1e-6};
  ComplexMatrix probes[3];
  for (int k = 0; k < 3; ++k) probes[k] = eval_tf(sys, s0 + Complex(eps[k], 0));
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < m; ++j) {
      const Complex r12 = (10.0 * probes[1](i, j) - probes[0](i, j)) / 9.0;
      const Complex r23 = (10.0 * probes[2](i, j) - probes[1](i, j)) / 9.0;
      const double scale = std::max(std::abs(r23), 1.0);
      if (std::abs(r23 - r12) <= 1e-6 * scale) {
        g.value(i, j) = r23.real();
      } else {
        g.value(i, j) = std::numeric_limits<double>::quiet_NaN();
        g.finite(i, j) = false;
      }
    }
  }
  return g;
}

LtiSystem direct_sum(const std::vector<LtiSystem>& systems) {
  if (systems.empty())
    fail(ErrorCode::EmptyAggregate, "direct sum of zero systems");
  const Timebase tb = systems.front().timebase();
  Index n = 0, m = 0, p = 0;
  for (const auto& s : systems) {
    if (!(s.timebase() == tb))
      fail(ErrorCode::MixedTimebase, "direct sum requires one timebase");
    n += s.order();
    m += s.num_inputs();
    p += s.num_outputs();
  }
  Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, m);
  Matrix C = Matrix::Zero(p, n), D = Matrix::Zero(p, m);
  std::vector<SignalLabel> inputs, outputs;
  inputs.reserve(static_cast<size_t>(m));
  outputs.reserve(static_cast<size_t>(p));
  Index in = 0, im = 0, ip = 0;
  for (const auto& s : systems) {
    A.block(in, in, s.order(), s.order()) = s.A();
    B.block(in, im, s.order(), s.num_inputs()) = s.B();
    C.block(ip, in, s.num_outputs(), s.order()) = s.C();
    D.block(ip, im, s.num_outputs(), s.num_inputs()) = s.D();
    inputs.insert(inputs.end(), s.inputs().begin(), s.inputs().end());
    outputs.insert(outputs.end(), s.outputs().begin(), s.outputs().end());
    in += s.order();
    im += s.num_inputs();
    ip += s.num_outputs();
  }
  return LtiSystem(std::move(A), std::move(B), std::move(C), std::move(D), tb,
                   std::move(inputs), std::move(outputs));
}

std::pair<Matrix, Matrix> zoh_maps(const Eigen::Ref<const Matrix>& A,
                                   const Eigen::Ref<const Matrix>& B,
                                   double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    fail(ErrorCode::InvalidParams, "ZOH step must be positive");
  const Index n = A.rows(), m = B.cols();
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = A * dt;
  aug.topRightCorner(n, m) = B * dt;
  const Matrix e = aug.exp();
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

LtiSystem discretize_zoh(const LtiSystem& sys, double Ts) {
  if (sys.timebase().is_discrete)
    fail(ErrorCode::MixedTimebase, "system is already discrete");
  auto [Ad, Bd] = zoh_maps(sys.A(), sys.B(), Ts);
  return LtiSystem(std::move(Ad), std::move(Bd), sys.C(), sys.D(),
                   Timebase::discrete(Ts), sys.inputs(), sys.outputs());
}

SimTrace simulate(const LtiSystem& sys, const Eigen::Ref<const Matrix>& u,
                  double dt, const Vector& x0) {
  const Index n = sys.order(), m = sys.num_inputs(), p = sys.num_outputs();
  if (u.cols() != m)
    fail(ErrorCode::DimensionMismatch, "input trace must have one column per input");
  Vector x = x0.size() ? x0 : Vector(Vector::Zero(n));
  if (x.size() != n)
    fail(ErrorCode::DimensionMismatch, "initial state size must match order");

  Matrix Ad, Bd;
  if (sys.timebase().is_discrete) {
    if (std::abs(dt - sys.timebase().Ts) > 1e-12 * sys.timebase().Ts)
      fail(ErrorCode::MixedTimebase, "dt must equal the sample period");
    Ad = sys.A();
    Bd = sys.B();
  } else {
    std::tie(Ad, Bd) = zoh_maps(sys.A(), sys.B(), dt);
  }

  const Index N = u.rows();
  SimTrace tr;
  tr.time.resize(N);
  tr.inputs = u;
  tr.outputs.resize(N, p);
  tr.states.resize(N, n);
  for (Index k = 0; k < N; ++k) {
    tr.time(k) = static_cast<double>(k) * dt;
    tr.states.row(k) = x.transpose();
    tr.outputs.row(k) =
        (sys.C() * x + sys.D() * u.row(k).transpose()).transpose();
    x = Ad * x + Bd * u.row(k).transpose();
  }
  tr.final_state = x;
  return tr;
}

}  // namespace gasnet
