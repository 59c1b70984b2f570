#include "gasnet/lqg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace gasnet {

namespace {

constexpr int kMaxDoublingSteps = 80;

void require_symmetric(const Matrix& m, const char* name) {
  if (m.rows() != m.cols() ||
      (m - m.transpose()).cwiseAbs().maxCoeff() >
          1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::InvalidWeights,
                std::string(name) + " must be symmetric");
}

void require_psd(const Matrix& m, const char* name, bool strict) {
  require_symmetric(m, name);
  if (m.rows() == 0) {
    if (strict)
      throw Error(ErrorCode::InvalidWeights,
                  std::string(name) + " must not be empty");
    return;
  }
  const double lo =
      Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues().minCoeff();
  if (strict ? !(lo > 0.0) : lo < -1e-12 * std::max(1.0, m.norm()))
    throw Error(ErrorCode::InvalidWeights,
                std::string(name) +
                    (strict ? " must be positive definite"
                            : " must be positive semidefinite"));
}

double spectral_radius(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  return Eigen::EigenSolver<Matrix>(m, false)
      .eigenvalues()
      .cwiseAbs()
      .maxCoeff();
}

// State weight from Q_x, which may be given per state or per output.
Matrix state_weight(const LtiSystem& plant, const Matrix& qx) {
  if (qx.rows() == plant.order()) return qx;
  if (qx.rows() == plant.num_outputs())
    return plant.C().transpose() * qx * plant.C();
  throw Error(ErrorCode::InvalidWeights,
              "Q_x must be sized by state or by output");
}

void require_design_plant(const LtiSystem& plant) {
  if (!plant.timebase().is_discrete)
    throw Error(ErrorCode::InvalidParams,
                "controller synthesis expects a discrete-time plant");
  if (!plant.D().isZero(0.0))
    throw Error(ErrorCode::NotStrictlyProper,
                "the current-form estimator needs D = 0, found feedthrough");
}

std::vector<SignalLabel> relabeled(std::vector<SignalLabel> ls) {
  for (SignalLabel& l : ls) l.scope = SignalScope::External;
  return ls;
}

}  // namespace

Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q,
                  const Matrix& R) {
  const Index n = A.rows(), m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || R.rows() != m)
    throw Error(ErrorCode::DimensionMismatch, "riccati blocks do not fit");
  require_psd(Q, "Q", false);
  require_psd(R, "R", true);
  if (n == 0) return Matrix(0, 0);

  const Matrix G0 = B * Eigen::LLT<Matrix>(R).solve(B.transpose());
  Matrix Ak = A, G = G0, H = Q;
  const Matrix I = Matrix::Identity(n, n);
  bool converged = false;
  for (int it = 0; it < kMaxDoublingSteps; ++it) {
    const Eigen::PartialPivLU<Matrix> lu(I + G * H);
    const Matrix W = lu.solve(Ak);   // (I + G H)^-1 A_k
    const Matrix V = lu.solve(G);    // (I + G H)^-1 G_k, symmetric
    const Matrix Hn = H + Ak.transpose() * H * W;
    G += Ak * V * Ak.transpose();
    Ak *= W;
    const double step = (Hn - H).norm();
    H = 0.5 * (Hn + Hn.transpose());
    G = 0.5 * (G + G.transpose());
    if (!H.allFinite() || !G.allFinite() || !Ak.allFinite())
      throw Error(ErrorCode::NotStabilizable, "doubling iteration diverged");
    if (step <= 1e-15 * std::max(1.0, H.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw Error(ErrorCode::NotStabilizable,
                "doubling iteration did not converge");

  const Matrix BtPB = B.transpose() * H * B;
  const Matrix K = Eigen::LLT<Matrix>(R + BtPB).solve(B.transpose() * H * A);
  const Matrix resid =
      A.transpose() * H * A - A.transpose() * H * B * K + Q - H;
  if (resid.norm() > 1e-9 * std::max(H.norm(), 1e-300))
    throw Error(ErrorCode::NotStabilizable, "riccati residual above tolerance");
  if (spectral_radius(A - B * K) >= 1.0)
    throw Error(ErrorCode::NotStabilizable,
                "closed loop is not contractive at the fixed point");
  return H;
}

Matrix lqr_gain(const Matrix& A, const Matrix& B, const Matrix& Q,
                const Matrix& R) {
  const Matrix P = solve_dare(A, B, Q, R);
  return Eigen::LLT<Matrix>(R + B.transpose() * P * B)
      .solve(B.transpose() * P * A);
}

Matrix kalman_gain_current(const Matrix& A, const Matrix& C, const Matrix& Q_w,
                           const Matrix& R_v) {
  const Matrix S = solve_dare(A.transpose(), C.transpose(), Q_w, R_v);
  return Eigen::LLT<Matrix>(C * S * C.transpose() + R_v)
      .solve(C * S)
      .transpose();
}

ControllerRealization assemble_lqg(const LtiSystem& plant_d,
                                   const LqgWeights& weights) {
  require_design_plant(plant_d);
  const Matrix& A = plant_d.A();
  const Matrix& B = plant_d.B();
  const Matrix& C = plant_d.C();
  const Matrix K = lqr_gain(A, B, state_weight(plant_d, weights.Q_x),
                            weights.R_u);
  const Matrix L = kalman_gain_current(A, C, weights.Q_w, weights.R_v);
  const Matrix predict = Matrix::Identity(plant_d.order(), plant_d.order()) -
                         L * C;  // applied before the measurement lands
  const Matrix AmBK = A - B * K;

  ControllerRealization out;
  out.sys = LtiSystem(AmBK * predict, AmBK * L, -K * predict, -K * L,
                      plant_d.timebase(), relabeled(plant_d.outputs()),
                      relabeled(plant_d.inputs()));
  out.structure = ControllerRealization::Structure::Lqg;
  out.order = plant_d.order();
  return out;
}

ControllerRealization assemble_lqg_integral(const LtiSystem& plant_d,
                                            const LqgWeights& weights,
                                            const std::vector<Index>& tracked) {
  require_design_plant(plant_d);
  const Index n = plant_d.order(), p = plant_d.num_outputs();
  const Index m = plant_d.num_inputs();
  const Index nt = static_cast<Index>(tracked.size());
  if (weights.integral_weight.size() != p)
    throw Error(ErrorCode::InvalidWeights,
                "integral_weight needs one entry per measured output");
  Matrix S = Matrix::Zero(nt, p);  // picks the tracked measurements
  Matrix W = Matrix::Zero(nt, nt);
  for (Index i = 0; i < nt; ++i) {
    const Index ch = tracked[i];
    if (ch < 0 || ch >= p)
      throw Error(ErrorCode::DimensionMismatch,
                  "tracked output index out of range");
    if (!(weights.integral_weight(ch) > 0.0))
      throw Error(ErrorCode::InvalidWeights,
                  "tracked channels need a positive integral weight");
    S(i, ch) = 1.0;
    W(i, i) = weights.integral_weight(ch);
  }

  // accumulators x_I <- x_I - y_tracked ride on top of the plant state
  Matrix Aa = Matrix::Identity(n + nt, n + nt);
  Aa.topLeftCorner(n, n) = plant_d.A();
  Aa.bottomLeftCorner(nt, n) = -S * plant_d.C();
  Matrix Ba = Matrix::Zero(n + nt, m);
  Ba.topRows(n) = plant_d.B();
  Matrix Qa = Matrix::Zero(n + nt, n + nt);
  Qa.topLeftCorner(n, n) = state_weight(plant_d, weights.Q_x);
  Qa.bottomRightCorner(nt, nt) = W;

  const Matrix Ka = lqr_gain(Aa, Ba, Qa, weights.R_u);
  const Matrix Kx = Ka.leftCols(n), Ki = Ka.rightCols(nt);
  const Matrix L =
      kalman_gain_current(plant_d.A(), plant_d.C(), weights.Q_w, weights.R_v);
  const Matrix predict = Matrix::Identity(n, n) - L * plant_d.C();
  const Matrix AmBK = plant_d.A() - plant_d.B() * Kx;

  Matrix Ac = Matrix::Identity(n + nt, n + nt);
  Ac.topLeftCorner(n, n) = AmBK * predict;
  Ac.topRightCorner(n, nt) = -plant_d.B() * Ki;
  Matrix Bc(n + nt, p);
  Bc.topRows(n) = AmBK * L;
  Bc.bottomRows(nt) = -S;
  Matrix Cc(m, n + nt);
  Cc.leftCols(n) = -Kx * predict;
  Cc.rightCols(nt) = -Ki;

  ControllerRealization out;
  out.sys = LtiSystem(Ac, Bc, Cc, -Kx * L, plant_d.timebase(),
                      relabeled(plant_d.outputs()), relabeled(plant_d.inputs()));
  out.structure = ControllerRealization::Structure::LqgIntegral;
  out.order = n + nt;
  return out;
}

LtiSystem close_loop(const LtiSystem& plant_d,
                     const ControllerRealization& ctrl,
                     const std::vector<Index>& commanded,
                     const std::vector<Index>& measured) {
  require_design_plant(plant_d);
  if (!(plant_d.timebase() == ctrl.sys.timebase()))
    throw Error(ErrorCode::MixedTimebase,
                "plant and controller share one sample period");
  const Index n = plant_d.order(), nc = ctrl.sys.order();
  const Index m = plant_d.num_inputs(), p = plant_d.num_outputs();
  if (static_cast<Index>(commanded.size()) != ctrl.sys.num_outputs() ||
      static_cast<Index>(measured.size()) != ctrl.sys.num_inputs())
    throw Error(ErrorCode::DimensionMismatch,
                "controller width does not match the picked channels");
  Matrix Sc = Matrix::Zero(m, commanded.size());
  for (std::size_t j = 0; j < commanded.size(); ++j) {
    if (commanded[j] < 0 || commanded[j] >= m)
      throw Error(ErrorCode::DimensionMismatch, "commanded index out of range");
    Sc(commanded[j], j) = 1.0;
  }
  Matrix Cm = Matrix::Zero(measured.size(), n);
  for (std::size_t i = 0; i < measured.size(); ++i) {
    if (measured[i] < 0 || measured[i] >= p)
      throw Error(ErrorCode::DimensionMismatch, "measured index out of range");
    Cm.row(i) = plant_d.C().row(measured[i]);
  }

  const Matrix BSc = plant_d.B() * Sc;
  Matrix A = Matrix::Zero(n + nc, n + nc);
  A.topLeftCorner(n, n) = plant_d.A() + BSc * ctrl.sys.D() * Cm;
  A.topRightCorner(n, nc) = BSc * ctrl.sys.C();
  A.bottomLeftCorner(nc, n) = ctrl.sys.B() * Cm;
  A.bottomRightCorner(nc, nc) = ctrl.sys.A();
  Matrix B = Matrix::Zero(n + nc, m);
  B.topRows(n) = plant_d.B();
  Matrix C = Matrix::Zero(p + ctrl.sys.num_outputs(), n + nc);
  C.topLeftCorner(p, n) = plant_d.C();
  C.bottomLeftCorner(ctrl.sys.num_outputs(), n) = ctrl.sys.D() * Cm;
  C.bottomRightCorner(ctrl.sys.num_outputs(), nc) = ctrl.sys.C();
  const Matrix D = Matrix::Zero(p + ctrl.sys.num_outputs(), m);

  std::vector<SignalLabel> outs = relabeled(plant_d.outputs());
  for (const SignalLabel& l : ctrl.sys.outputs()) outs.push_back(l);
  return LtiSystem(A, B, C, D, plant_d.timebase(), relabeled(plant_d.inputs()),
                   std::move(outs));
}

}  // namespace gasnet
