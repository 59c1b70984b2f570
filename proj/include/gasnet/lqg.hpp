#pragma once

#include <vector>

#include "gasnet/lti.hpp"

namespace gasnet {

// Quadratic design data. Q_x may be sized by state or by output (the latter
// is mapped through C); integral_weight holds one entry per measured output,
// consulted only for the channels picked as tracked.
struct LqgWeights {
  Matrix Q_x;
  Matrix R_u;
  Matrix Q_w;
  Matrix R_v;
  Vector integral_weight;
};

struct ControllerRealization {
  enum class Structure { Lqg, LqgIntegral };
  LtiSystem sys;  // discrete, measurements in, commands out
  Structure structure = Structure::Lqg;
  Index order = 0;
};

// Fixed point of P = A'PA - A'PB (R + B'PB)^-1 B'PA + Q via the
// structure-preserving doubling iteration; the result is certified by its
// residual and a contractive A - BK before it is returned.
Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q,
                  const Matrix& R);

Matrix lqr_gain(const Matrix& A, const Matrix& B, const Matrix& Q,
                const Matrix& R);

// Current-form (filter) gain: the time-k measurement corrects the time-k
// estimate, so the loop through a strictly proper plant stays delay-free.
Matrix kalman_gain_current(const Matrix& A, const Matrix& C, const Matrix& Q_w,
                           const Matrix& R_v);

ControllerRealization assemble_lqg(const LtiSystem& plant_d,
                                   const LqgWeights& weights);

// Augments the plant with one discrete accumulator per tracked output before
// the state-feedback design; the estimator still runs on the original plant.
ControllerRealization assemble_lqg_integral(const LtiSystem& plant_d,
                                            const LqgWeights& weights,
                                            const std::vector<Index>& tracked);

// Negative feedback of the controller around the plant. Commands add onto
// the picked input channels, every plant input stays exposed as an exogenous
// disturbance, and the outputs are the plant outputs followed by the
// commands.
LtiSystem close_loop(const LtiSystem& plant_d,
                     const ControllerRealization& ctrl,
                     const std::vector<Index>& commanded,
                     const std::vector<Index>& measured);

}  // namespace gasnet
