#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "gasnet/errors.hpp"

namespace gasnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;
using Index = Eigen::Index;

enum class SignalKind { Pressure, Flow };
enum class SignalScope { External, Internal };

// Physical label attached to one input or output channel. Units follow the
// kind: pressures are Pa, flows kg/s (voltage/current analogs reuse them).
struct SignalLabel {
  std::string name;
  SignalKind kind = SignalKind::Pressure;
  SignalScope scope = SignalScope::External;

  const char* units() const {
    return kind == SignalKind::Pressure ? "Pa" : "kg/s";
  }
};

SignalLabel pressure_signal(std::string name,
                            SignalScope scope = SignalScope::External);
SignalLabel flow_signal(std::string name,
                        SignalScope scope = SignalScope::External);

struct Timebase {
  bool is_discrete = false;
  double Ts = 0.0;  // sample period, seconds; 0 for continuous time

  static Timebase continuous() { return {false, 0.0}; }
  static Timebase discrete(double Ts);

  bool operator==(const Timebase& other) const {
    return is_discrete == other.is_discrete && Ts == other.Ts;
  }
};

// Dense state-space model x' = A x + B u, y = C x + D u over one timebase.
// Validated on construction (shapes, finiteness, label counts) and
// immutable afterwards; all operations below return new systems.
class LtiSystem {
 public:
  // Empty continuous system (0 states, 0 signals); a placeholder that keeps
  // aggregate types default-constructible.
  LtiSystem()
      : A_(0, 0), B_(0, 0), C_(0, 0), D_(0, 0), tb_(Timebase::continuous()) {}

  LtiSystem(Matrix A, Matrix B, Matrix C, Matrix D, Timebase tb,
            std::vector<SignalLabel> inputs, std::vector<SignalLabel> outputs);

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  const Matrix& C() const { return C_; }
  const Matrix& D() const { return D_; }
  const Timebase& timebase() const { return tb_; }
  const std::vector<SignalLabel>& inputs() const { return inputs_; }
  const std::vector<SignalLabel>& outputs() const { return outputs_; }

  Index order() const { return A_.rows(); }
  Index num_inputs() const { return B_.cols(); }
  Index num_outputs() const { return C_.rows(); }

  Index input_index(const std::string& name) const;
  Index output_index(const std::string& name) const;

 private:
  Matrix A_, B_, C_, D_;
  Timebase tb_;
  std::vector<SignalLabel> inputs_, outputs_;
};

// Convenience factory; unlabeled channels get "u0".., "y0.." pressure labels.
LtiSystem make_system(Matrix A, Matrix B, Matrix C, Matrix D,
                      Timebase tb = Timebase::continuous(),
                      std::vector<SignalLabel> inputs = {},
                      std::vector<SignalLabel> outputs = {});

// Transfer matrix C (sI - A)^-1 B + D through one linear solve.
// s is interpreted on the system's own timebase (z for discrete systems).
// Throws SingularAtS when s sits on a pole (solve residual > 1e-10 relative
// or the factorization is numerically singular).
ComplexMatrix eval_tf(const LtiSystem& sys, Complex s);

// DC gain with per-entry finiteness. Entries spanned by a pole at s=0
// (z=1 in discrete time) are flagged non-finite instead of being reported.
struct DcGain {
  Matrix value;                                    // poisoned entries are NaN
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> finite;

  bool all_finite() const { return finite.all(); }
};

DcGain dc_gain(const LtiSystem& sys, double tol_zero = 1e-9);

// Eigenvalues of A sorted by descending real part, ties by descending
// imaginary part. Each eigenpair is verified to backward error 1e-8.
std::vector<Complex> poles(const LtiSystem& sys);

// Block-diagonal direct sum; inputs/outputs are concatenated in order.
// All systems must share one timebase.
LtiSystem direct_sum(const std::vector<LtiSystem>& systems);

// Zero-order-hold maps (Ad, Bd) over one step dt, from the exponential of
// the augmented matrix [[A, B],[0, 0]] * dt.
std::pair<Matrix, Matrix> zoh_maps(const Eigen::Ref<const Matrix>& A,
                                   const Eigen::Ref<const Matrix>& B,
                                   double dt);

// Exact ZOH discretization: same C, D and labels, discrete timebase Ts.
LtiSystem discretize_zoh(const LtiSystem& sys, double Ts);

struct SimTrace {
  Vector time;     // N samples
  Matrix inputs;   // N x m
  Matrix outputs;  // N x p, y_k = C x_k + D u_k
  Matrix states;   // N x n, state at each sample instant
  Vector final_state;
};

// Simulate under piecewise-constant inputs (one row per step of width dt).
// Continuous systems are discretized exactly over dt; discrete systems
// require dt to equal their sample period.
SimTrace simulate(const LtiSystem& sys, const Eigen::Ref<const Matrix>& u,
                  double dt, const Vector& x0 = Vector());

}  // namespace gasnet
