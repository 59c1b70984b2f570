#pragma once

#include <vector>

#include "gasnet/io.hpp"
#include "gasnet/lti.hpp"

namespace gasnet {

// Split of a continuous system at the stability boundary. The strictly
// stable block keeps the feedthrough, the marginal/unstable block is
// strictly proper, so the two transfer functions add back to the original.
struct SpectralSplit {
  LtiSystem stable;
  LtiSystem unstable;
  Matrix T;  // similarity with T^-1 A T = blkdiag(stable.A(), unstable.A())
};

struct Gramians {
  Matrix P;  // controllability: A P + P A^T + B B^T = 0
  Matrix Q;  // observability:   A^T Q + Q A + C^T C = 0
};

struct ReductionReport {
  std::vector<double> hankel_singular_values;  // of the stable block, descending
  Index retained_order = 0;
  Index unstable_block_order = 0;
  double error_bound = 0.0;     // twice the discarded tail sum
  double achieved_error = 0.0;  // max sigma(G - G_r) over the frequency grid
};

struct ReductionResult {
  LtiSystem reduced;
  ReductionReport report;
};

// Solves A X + X B = C by Schur back-substitution; the spectra of A and -B
// must be disjoint.
Matrix solve_sylvester(const Matrix& A, const Matrix& B, const Matrix& C);

// Eigenvalues with real part below -boundary_tol go to the stable block,
// the rest to the marginal/unstable one. Real parts inside the open band
// (boundary_tol, 2*boundary_tol) in magnitude are ambiguous and rejected.
SpectralSplit stable_unstable_decompose(const LtiSystem& sys,
                                        double boundary_tol = 1e-7);

Gramians gramians(const LtiSystem& sys);

// Square-root balanced truncation of the stable block. States are dropped,
// never residualized, so the feedthrough is carried over exactly; modes at
// or beyond the stability boundary are reattached untouched.
ReductionResult balanced_truncate(const LtiSystem& sys, Index target_order);

Json reduction_report_json(const ReductionReport& rep);

}  // namespace gasnet
