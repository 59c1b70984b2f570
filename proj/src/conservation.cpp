#include "gasnet/conservation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gasnet/errors.hpp"

namespace gasnet {

namespace {

std::vector<Index> kind_rows(const std::vector<SignalLabel>& labels, SignalKind k) {
  std::vector<Index> idx;
  for (Index i = 0; i < static_cast<Index>(labels.size()); ++i)
    if (labels[i].kind == k) idx.push_back(i);
  return idx;
}

ComplexMatrix take_block(const ComplexMatrix& T, const std::vector<Index>& rows,
                         const std::vector<Index>& cols) {
  ComplexMatrix blk(rows.size(), cols.size());
  for (Index i = 0; i < blk.rows(); ++i)
    for (Index j = 0; j < blk.cols(); ++j) blk(i, j) = T(rows[i], cols[j]);
  return blk;
}

// Probe point a distance eps from the DC point of the timebase.
Complex dc_probe(const LtiSystem& sys, double eps) {
  return sys.timebase().is_discrete ? Complex(1.0 + eps, 0.0) : Complex(eps, 0.0);
}

double max_abs(const ComplexMatrix& M) {
  return M.size() ? M.cwiseAbs().maxCoeff() : 0.0;
}

struct LineFit {
  double slope = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  const double xm = x.mean(), ym = y.mean();
  const double sxx = (x.array() - xm).square().sum();
  const double sxy = ((x.array() - xm) * (y.array() - ym)).sum();
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  const double ss_tot = (y.array() - ym).square().sum();
  const double ss_res = (y.array() - ym - f.slope * (x.array() - xm)).square().sum();
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
  return f;
}

}  // namespace

ConservationReport check_conservation(const LtiSystem& sys) {
  ConservationReport rep;
  const auto rows_q = kind_rows(sys.outputs(), SignalKind::Flow);
  const auto cols_q = kind_rows(sys.inputs(), SignalKind::Flow);
  const auto cols_p = kind_rows(sys.inputs(), SignalKind::Pressure);

  for (std::size_t k = 0; k < rep.epsilons.size(); ++k) {
    double rqq = std::numeric_limits<double>::infinity();
    double rqp = std::numeric_limits<double>::infinity();
    try {
      const ComplexMatrix T = eval_tf(sys, dc_probe(sys, rep.epsilons[k]));
      const ComplexMatrix Tqq = take_block(T, rows_q, cols_q);
      rqq = 0.0;
      for (Index j = 0; j < Tqq.cols(); ++j)
        rqq = std::max(rqq, std::abs(Tqq.col(j).sum() - Complex(1.0, 0.0)));
      rqp = max_abs(take_block(T, rows_q, cols_p));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularAtS) throw;  // probe sits on a pole: keep +inf
    }
    rep.qq_residuals[k] = rqq;
    rep.qp_norms[k] = rqp;
    rep.qq_row_residual = std::max(rep.qq_row_residual, rqq);
    rep.qp_norm = std::max(rep.qp_norm, rqp);
  }

  // Decide at the smallest epsilon; a residual that grows as the probe
  // approaches DC is not converging and cannot certify conservation.
  const auto shrinking = [](const std::array<double, 3>& r) {
    return r[2] <= r[1] * 1.05 + 1e-14 && r[1] <= r[0] * 1.05 + 1e-14;
  };
  rep.conserves_mass = rep.qq_residuals[2] <= rep.qq_tolerance &&
                       rep.qp_norms[2] <= rep.qp_tolerance &&
                       shrinking(rep.qq_residuals) && shrinking(rep.qp_norms);
  return rep;
}

BlockingZeroReport check_blocking_zero_qp(const LtiSystem& sys) {
  BlockingZeroReport rep;
  const auto rows_q = kind_rows(sys.outputs(), SignalKind::Flow);
  const auto cols_p = kind_rows(sys.inputs(), SignalKind::Pressure);
  if (cols_p.empty() || rows_q.empty()) {
    rep.verdict = BlockingZeroReport::Verdict::NotApplicable;
    return rep;
  }
  for (std::size_t k = 0; k < rep.epsilons.size(); ++k) {
    const ComplexMatrix T = eval_tf(sys, dc_probe(sys, rep.epsilons[k]));
    rep.norms[k] = max_abs(take_block(T, rows_q, cols_p));
  }
  const double peak = *std::max_element(rep.norms.begin(), rep.norms.end());
  if (peak <= 1e-12) {  // identically zero coupling: nothing left to decay
    rep.verdict = BlockingZeroReport::Verdict::Pass;
    rep.slope = 0.0;
    return rep;
  }
  Vector lx(3), ly(3);
  for (int k = 0; k < 3; ++k) {
    lx(k) = std::log10(rep.epsilons[k]);
    ly(k) = std::log10(std::max(rep.norms[k], 1e-300));
  }
  rep.slope = fit_line(lx, ly).slope;
  rep.verdict = rep.slope >= 0.9 ? BlockingZeroReport::Verdict::Pass
                                 : BlockingZeroReport::Verdict::Fail;
  return rep;
}

DetectabilityReport check_detectability_rank(const LtiSystem& agg,
                                             const SignalPartition& part) {
  const std::vector<Index>& rows = part.z_p;
  const std::vector<Index>& cols = part.w_int_q.empty() ? part.u_q : part.w_int_q;
  if (rows.empty())
    fail(ErrorCode::InvalidParams, "rank check needs at least one pressure output");
  if (cols.empty())
    fail(ErrorCode::InvalidParams, "rank check needs at least one flow input");

  const ComplexMatrix T1 = take_block(eval_tf(agg, dc_probe(agg, 1e-5)), rows, cols);
  const ComplexMatrix T2 = take_block(eval_tf(agg, dc_probe(agg, 1e-6)), rows, cols);
  const ComplexMatrix limit = (10.0 * T2 - T1) / 9.0;  // cancels O(eps) fade-outs

  DetectabilityReport rep;
  rep.rows = static_cast<Index>(rows.size());
  rep.cols = static_cast<Index>(cols.size());
  Eigen::JacobiSVD<ComplexMatrix> svd(limit);
  rep.sigma_max = svd.singularValues()(0);
  rep.sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
  const double floor = 1e-9 * std::max(1.0, max_abs(T2));
  rep.full_rank = rep.sigma_max > floor && rep.sigma_min > 1e-8 * rep.sigma_max;
  return rep;
}

IntegratorReport detect_integrator(const NetworkArtifacts& art) {
  const LtiSystem& sys = art.closed;
  IntegratorReport rep;

  const std::vector<Complex> ps = poles(sys);
  const Complex origin = sys.timebase().is_discrete ? Complex(1, 0) : Complex(0, 0);
  double slowest_stable = 0.0;  // largest Re among strictly stable poles
  bool any_unstable = false;
  for (const Complex& p : ps) {
    const double dist = std::abs(p - origin);
    if (dist <= rep.zero_pole_tolerance) {
      ++rep.zero_pole_count;
    } else if (p.real() < 0.0) {
      slowest_stable =
          slowest_stable == 0.0 ? p.real() : std::max(slowest_stable, p.real());
    } else {
      any_unstable = true;
    }
  }

  if (rep.zero_pole_count > 0) {
    // Left near-null direction: eigenvector of A^T at the eigenvalue nearest 0.
    Eigen::EigenSolver<Matrix> es(sys.A().transpose());
    if (es.info() != Eigen::Success)
      fail(ErrorCode::EigenFailure, "left eigenvector iteration did not converge");
    Index best = 0;
    for (Index i = 1; i < es.eigenvalues().size(); ++i)
      if (std::abs(es.eigenvalues()(i) - origin) <
          std::abs(es.eigenvalues()(best) - origin))
        best = i;
    Vector v = es.eigenvectors().col(best).real();
    if (v.norm() == 0.0) v = es.eigenvectors().col(best).imag();
    v.normalize();
    Index peak = 0;
    v.cwiseAbs().maxCoeff(&peak);
    if (v(peak) < 0) v = -v;
    rep.left_direction = v;
  }

  try {
    rep.detectable =
        check_detectability_rank(art.aggregate_sys, art.partition).full_rank;
  } catch (const Error&) {
    rep.detectable = false;
  }

  // Physical cross-check, meaningful only for a continuous network whose
  // non-zero modes are all stable.
  if (rep.zero_pole_count == 0 || sys.timebase().is_discrete || any_unstable)
    return rep;

  std::vector<Index> flow_in, press_out;
  std::vector<double> flow_sign;
  for (std::size_t j = 0; j < art.partition.externals.size(); ++j) {
    const ExternalBinding& b = art.partition.externals[j];
    if (b.in_kind == SignalKind::Flow) {
      flow_in.push_back(static_cast<Index>(j));
      flow_sign.push_back(b.sign);
    }
  }
  for (Index i = 0; i < sys.num_outputs(); ++i)
    if (sys.outputs()[i].kind == SignalKind::Pressure) press_out.push_back(i);
  if (flow_in.empty() || press_out.empty()) return rep;

  const auto tail_fit = [&](const SimTrace& tr) {
    Index which = press_out[0];
    double best = -1.0;
    for (Index i : press_out) {
      const double mag = std::abs(tr.outputs(tr.outputs.rows() - 1, i));
      if (mag > best) { best = mag; which = i; }
    }
    const Index N = tr.time.size(), tail = N / 2;
    return std::pair<LineFit, double>(
        fit_line(tr.time.segment(tail, N - tail),
                 tr.outputs.col(which).segment(tail, N - tail)),
        tr.outputs.col(which).cwiseAbs().maxCoeff());
  };

  {  // unit net inflow on every flow port: pure ramp once transients settle
    const double T_end = 50.0, dt = T_end / 2000.0;
    Matrix u = Matrix::Zero(2000, sys.num_inputs());
    for (std::size_t k = 0; k < flow_in.size(); ++k)
      u.col(flow_in[k]).setConstant(flow_sign[k]);
    const auto [fit, peak] = tail_fit(simulate(sys, u, dt, Vector()));
    (void)peak;
    rep.ramp_r2 = fit.r2;
    rep.ramp_slope = fit.slope;
    rep.ramp_verified = fit.r2 >= 0.999 && std::abs(fit.slope) > 1e-12;
  }

  if (flow_in.size() >= 2) {  // equal in and out: every pressure must settle
    const double tau = slowest_stable < 0 ? 1.0 / -slowest_stable : 1.0;
    const double T_end = 10.0 * std::max(tau, 1.0), dt = T_end / 2000.0;
    Matrix u = Matrix::Zero(2000, sys.num_inputs());
    u.col(flow_in[0]).setConstant(flow_sign[0]);
    u.col(flow_in[1]).setConstant(-flow_sign[1]);
    const auto [fit, peak] = tail_fit(simulate(sys, u, dt, Vector()));
    rep.balanced_bounded = std::abs(fit.slope) * T_end <= 1e-3 * std::max(1.0, peak);
  }
  return rep;
}

}  // namespace gasnet
