#include "gasnet/reduction.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace gasnet {

namespace {

void require_continuous(const LtiSystem& sys, const char* what) {
  if (sys.timebase().is_discrete)
    throw Error(ErrorCode::InvalidParams,
                std::string(what) + " operates on continuous-time systems");
}

// Real orthonormal basis of the invariant subspace spanned by the selected
// eigenvalues; conjugate pairs contribute their real and imaginary parts.
Matrix selected_eigenbasis(const Eigen::EigenSolver<Matrix>& eig,
                           const std::vector<bool>& pick) {
  const Index n = eig.eigenvalues().size();
  Index cols = 0;
  for (Index i = 0; i < n; ++i)
    if (pick[i]) ++cols;
  Matrix X(n, cols);
  Index at = 0;
  for (Index i = 0; i < n; ++i) {
    if (!pick[i]) continue;
    const Complex lam = eig.eigenvalues()(i);
    if (lam.imag() > 0.0) {
      X.col(at++) = eig.eigenvectors().col(i).real();
      X.col(at++) = eig.eigenvectors().col(i).imag();
    } else if (lam.imag() == 0.0) {
      X.col(at++) = eig.eigenvectors().col(i).real();
    }  // negative-imag halves ride along with their conjugates
  }
  return X.leftCols(at).eval();
}

double sigma_max(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<ComplexMatrix>(m).singularValues()(0);
}

// Symmetric square root factor with negative ripple clipped away.
Matrix psd_factor(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sym + sym.transpose()));
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::EigenFailure, "gramian eigendecomposition failed");
  Vector lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

}  // namespace

Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C) {
  const Index n = A.rows(), m = B.rows();
  if (A.cols() != n || B.cols() != m || C.rows() != n || C.cols() != m)
    throw Error(ErrorCode::DimensionMismatch, "sylvester blocks do not fit");
  if (n == 0 || m == 0) return Matrix(n, m);
  const Eigen::ComplexSchur<Matrix> sa(A), sb(B);
  if (sa.info() != Eigen::Success || sb.info() != Eigen::Success)
    throw Error(ErrorCode::EigenFailure, "schur reduction failed");
  const ComplexMatrix& Ta = sa.matrixT();
  const ComplexMatrix& Tb = sb.matrixT();
  ComplexMatrix Y = sa.matrixU().adjoint() * C * sb.matrixU();
  const double scale = Ta.norm() + Tb.norm();
  for (Index k = 0; k < m; ++k) {
    if (k > 0) Y.col(k) -= Y.leftCols(k) * Tb.block(0, k, k, 1);
    ComplexMatrix Tk = Ta;
    Tk.diagonal().array() += Tb(k, k);
    for (Index i = 0; i < n; ++i)
      if (std::abs(Tk(i, i)) <= 1e-14 * scale)
        throw Error(ErrorCode::EigenFailure,
                    "sylvester spectra overlap, no unique solution");
    Y.col(k) = Tk.triangularView<Eigen::Upper>().solve(Y.col(k).eval());
  }
  return (sa.matrixU() * Y * sb.matrixU().adjoint()).real();
}

SpectralSplit stable_unstable_decompose(const LtiSystem& sys,
                                        double boundary_tol) {
  require_continuous(sys, "spectral split");
  if (!(boundary_tol > 0.0))
    throw Error(ErrorCode::InvalidParams, "boundary tolerance must be positive");
  const Index n = sys.order();
  const Matrix& A = sys.A();
  if (n == 0) {
    SpectralSplit out;
    out.stable = sys;
    out.unstable = LtiSystem(Matrix(0, 0), Matrix(0, sys.num_inputs()),
                             Matrix(sys.num_outputs(), 0),
                             Matrix::Zero(sys.num_outputs(), sys.num_inputs()),
                             sys.timebase(), sys.inputs(), sys.outputs());
    out.T = Matrix(0, 0);
    return out;
  }

  Eigen::EigenSolver<Matrix> eig(A);
  if (eig.info() != Eigen::Success)
    throw Error(ErrorCode::EigenFailure, "eigendecomposition failed");
  std::vector<bool> unstable(n, false);
  Index k = 0;
  for (Index i = 0; i < n; ++i) {
    const double re = eig.eigenvalues()(i).real();
    if (std::abs(re) > boundary_tol && std::abs(re) < 2.0 * boundary_tol)
      throw Error(ErrorCode::AmbiguousBoundary,
                  "eigenvalue real part inside the boundary band");
    if (re >= -boundary_tol) {
      unstable[i] = true;
      ++k;
    }
  }

  const Matrix zero_d = Matrix::Zero(sys.num_outputs(), sys.num_inputs());
  SpectralSplit out;
  if (k == 0 || k == n) {
    const LtiSystem whole(A, sys.B(), sys.C(), k == 0 ? sys.D() : zero_d,
                          sys.timebase(), sys.inputs(), sys.outputs());
    const LtiSystem empty(Matrix(0, 0), Matrix(0, sys.num_inputs()),
                          Matrix(sys.num_outputs(), 0),
                          k == 0 ? zero_d : sys.D(), sys.timebase(),
                          sys.inputs(), sys.outputs());
    out.stable = k == 0 ? whole : empty;
    out.unstable = k == 0 ? empty : whole;
    out.T = Matrix::Identity(n, n);
    return out;
  }

  // orthogonal frame [unstable subspace | complement], then a Sylvester
  // step wipes the remaining cross-coupling block
  const Matrix Xu = selected_eigenbasis(eig, unstable);
  if (Xu.cols() != k)
    throw Error(ErrorCode::EigenFailure, "conjugate pair split across the boundary");
  const Eigen::HouseholderQR<Matrix> qr(Xu);
  const Matrix Q = qr.householderQ();
  const Matrix M = Q.transpose() * A * Q;
  const Matrix Auu = M.topLeftCorner(k, k);
  const Matrix Ass = M.bottomRightCorner(n - k, n - k);
  const double drift = M.bottomLeftCorner(n - k, k).norm();
  if (drift > 1e-8 * std::max(1.0, A.norm()))
    throw Error(ErrorCode::EigenFailure, "invariant subspace residual too large");
  const Matrix Z = solve_sylvester(Auu, -Ass, -M.topRightCorner(k, n - k));

  // T0 = Q * [[I, Z], [0, I]] splits unstable-first; columns are swapped so
  // the published similarity is stable-first like the reattach order
  Matrix T0 = Q;
  T0.rightCols(n - k) += Q.leftCols(k) * Z;
  Matrix Binv = Q.transpose() * sys.B();
  Binv.topRows(k) -= Z * Binv.bottomRows(n - k);
  const Matrix Ct = sys.C() * T0;

  // The eigenbasis fixes the unstable coordinates only up to scale, which can
  // leave the block's input and output maps wildly mismatched. Equilibrate
  // each state so both sides carry comparable weight; a pure similarity, so
  // the published T and the block transfer stay exact.
  Matrix Bu = Binv.topRows(k);
  Matrix Cu = Ct.leftCols(k);
  Matrix Auu_eq = Auu;
  Vector d = Vector::Ones(k);
  const double ref = std::max({Bu.norm(), Cu.norm(), 1e-300});
  for (Index i = 0; i < k; ++i) {
    const double bi = std::max(Bu.row(i).norm(), 1e-12 * ref);
    const double ci = std::max(Cu.col(i).norm(), 1e-12 * ref);
    d(i) = std::sqrt(bi / ci);
  }
  Bu.array().colwise() /= d.array();
  Cu.array().rowwise() *= d.transpose().array();
  Auu_eq.array().colwise() /= d.array();
  Auu_eq.array().rowwise() *= d.transpose().array();
  T0.leftCols(k) *= d.asDiagonal();

  out.stable = LtiSystem(Ass, Binv.bottomRows(n - k), Ct.rightCols(n - k),
                         sys.D(), sys.timebase(), sys.inputs(), sys.outputs());
  out.unstable = LtiSystem(Auu_eq, Bu, Cu, zero_d, sys.timebase(),
                           sys.inputs(), sys.outputs());
  out.T = Matrix(n, n);
  out.T.leftCols(n - k) = T0.rightCols(n - k);
  out.T.rightCols(k) = T0.leftCols(k);
  return out;
}

Gramians gramians(const LtiSystem& sys) {
  require_continuous(sys, "gramian solve");
  for (const Complex& lam : poles(sys))
    if (lam.real() >= 0.0)
      throw Error(ErrorCode::UnstableInput,
                  "gramians need a strictly stable system");
  Gramians g;
  const Matrix BBt = sys.B() * sys.B().transpose();
  const Matrix CtC = sys.C().transpose() * sys.C();
  g.P = solve_sylvester(sys.A(), sys.A().transpose(), -BBt);
  g.Q = solve_sylvester(sys.A().transpose(), sys.A(), -CtC);
  g.P = 0.5 * (g.P + g.P.transpose()).eval();
  g.Q = 0.5 * (g.Q + g.Q.transpose()).eval();
  const double rp = (sys.A() * g.P + g.P * sys.A().transpose() + BBt).norm();
  const double rq = (sys.A().transpose() * g.Q + g.Q * sys.A() + CtC).norm();
  if (rp > 1e-9 * (sys.A().norm() * g.P.norm() + BBt.norm()) ||
      rq > 1e-9 * (sys.A().norm() * g.Q.norm() + CtC.norm()))
    throw Error(ErrorCode::EigenFailure, "lyapunov residual above tolerance");
  return g;
}

ReductionResult balanced_truncate(const LtiSystem& sys, Index target_order) {
  require_continuous(sys, "balanced truncation");
  if (target_order < 0 || target_order > sys.order())
    throw Error(ErrorCode::InvalidParams,
                "target order must lie within [0, order]");
  const SpectralSplit split = stable_unstable_decompose(sys);
  const Index k = split.unstable.order();
  if (target_order < k)
    throw Error(ErrorCode::TargetTooSmall,
                "target order " + std::to_string(target_order) + " cannot hold the " +
                    std::to_string(k) + " non-truncatable boundary modes");
  const Index rs = target_order - k;
  const Index ns = split.stable.order();

  ReductionResult out;
  out.report.retained_order = target_order;
  out.report.unstable_block_order = k;

  Matrix Ar = split.stable.A(), Br = split.stable.B(), Cr = split.stable.C();
  if (ns > 0) {
    const Gramians g = gramians(split.stable);
    const Matrix Rp = psd_factor(g.P), Rq = psd_factor(g.Q);
    Eigen::JacobiSVD<Matrix> svd(Rq.transpose() * Rp,
                                 Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector hsv = svd.singularValues();
    out.report.hankel_singular_values.assign(hsv.data(), hsv.data() + hsv.size());
    for (Index i = rs; i < ns; ++i) out.report.error_bound += 2.0 * hsv(i);
    if (rs > 0 && hsv(rs - 1) <= 1e-14 * std::max(hsv(0), 1e-300))
      throw Error(ErrorCode::EigenFailure,
                  "retained states reach numerically zero Hankel values");
    const Vector scale = hsv.head(rs).cwiseSqrt().cwiseInverse();
    const Matrix W = Rq * svd.matrixU().leftCols(rs) * scale.asDiagonal();
    const Matrix V = Rp * svd.matrixV().leftCols(rs) * scale.asDiagonal();
    Ar = W.transpose() * split.stable.A() * V;
    Br = W.transpose() * split.stable.B();
    Cr = split.stable.C() * V;
  }

  const Index m = sys.num_inputs(), p = sys.num_outputs();
  Matrix A = Matrix::Zero(target_order, target_order);
  Matrix B(target_order, m), C(p, target_order);
  A.topLeftCorner(rs, rs) = Ar;
  A.bottomRightCorner(k, k) = split.unstable.A();
  B.topRows(rs) = Br;
  B.bottomRows(k) = split.unstable.B();
  C.leftCols(rs) = Cr;
  C.rightCols(k) = split.unstable.C();
  out.reduced = LtiSystem(A, B, C, sys.D(), sys.timebase(), sys.inputs(),
                          sys.outputs());

  // independent check of the bound on a log-spaced imaginary-axis grid
  const double lo = std::log10(1e-4), hi = std::log10(std::numbers::pi);
  for (int i = 0; i < 200; ++i) {
    const double w = std::pow(10.0, lo + (hi - lo) * i / 199.0);
    const Complex s(0.0, w);
    out.report.achieved_error = std::max(
        out.report.achieved_error,
        sigma_max(eval_tf(sys, s) - eval_tf(out.reduced, s)));
  }
  return out;
}

Json reduction_report_json(const ReductionReport& rep) {
  return Json{{"hankel_singular_values", rep.hankel_singular_values},
              {"retained_order", rep.retained_order},
              {"unstable_block_order", rep.unstable_block_order},
              {"error_bound", rep.error_bound},
              {"achieved_error", rep.achieved_error}};
}

}  // namespace gasnet
