#include "gasnet/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gasnet {

namespace {

struct Section {
  Matrix A, B, C, D;
};

// Series chain u -> sections[0] -> ... -> sections.back() -> y. The input of
// section i is tracked as a linear functional of the accumulated state and u.
LtiSystem cascade(const std::vector<Section>& sections) {
  Index n = 0;
  for (const Section& s : sections) n += s.A.rows();
  Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, 1);
  Matrix F = Matrix::Zero(1, n);  // current section input, state part
  double g = 1.0;                 // current section input, u part
  Index at = 0;
  for (const Section& s : sections) {
    const Index k = s.A.rows();
    A.block(at, 0, k, n) = s.B * F;
    A.block(at, at, k, k) = s.A;
    B.block(at, 0, k, 1) = s.B * g;
    Matrix Fn = s.D(0, 0) * F;
    Fn.block(0, at, 1, k) = s.C;
    F = Fn;
    g *= s.D(0, 0);
    at += k;
  }
  return make_system(A, B, F, (Matrix(1, 1) << g).finished());
}

}  // namespace

LtiSystem butterworth_lowpass(int order, double cutoff_hz) {
  if (order < 1 || !(cutoff_hz > 0.0))
    throw Error(ErrorCode::InvalidParams,
                "filter needs order >= 1 and a positive cutoff");
  const double wc = 2.0 * std::numbers::pi * cutoff_hz;
  std::vector<Section> sections;
  for (int k = 1; 2 * k <= order; ++k) {
    const double theta =
        std::numbers::pi * (2.0 * k + order - 1.0) / (2.0 * order);
    Section s;
    s.A = (Matrix(2, 2) << 0.0, 1.0, -wc * wc, 2.0 * wc * std::cos(theta))
              .finished();
    s.B = (Matrix(2, 1) << 0.0, 1.0).finished();
    s.C = (Matrix(1, 2) << wc * wc, 0.0).finished();
    s.D = Matrix::Zero(1, 1);
    sections.push_back(std::move(s));
  }
  if (order % 2) {
    Section s;
    s.A = (Matrix(1, 1) << -wc).finished();
    s.B = (Matrix(1, 1) << 1.0).finished();
    s.C = (Matrix(1, 1) << wc).finished();
    s.D = Matrix::Zero(1, 1);
    sections.push_back(std::move(s));
  }
  return cascade(sections);
}

LtiSystem append_sensor_filters(const LtiSystem& plant, const LtiSystem& filter,
                                const std::vector<Index>& sensors) {
  if (filter.num_inputs() != 1 || filter.num_outputs() != 1)
    throw Error(ErrorCode::DimensionMismatch, "sensor filter must be SISO");
  if (!(plant.timebase() == filter.timebase()))
    throw Error(ErrorCode::MixedTimebase,
                "plant and filter share one timebase");
  std::vector<bool> seen(plant.num_outputs(), false);
  for (Index i : sensors) {
    if (i < 0 || i >= plant.num_outputs())
      throw Error(ErrorCode::DimensionMismatch,
                  "sensor index " + std::to_string(i) + " out of range");
    if (seen[i])
      throw Error(ErrorCode::DimensionMismatch,
                  "sensor index " + std::to_string(i) + " listed twice");
    seen[i] = true;
  }

  const Index np = plant.order(), nf = filter.order();
  const Index m = plant.num_inputs(), p = plant.num_outputs();
  const Index s = static_cast<Index>(sensors.size());
  const Index n = np + nf * s;

  Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, m);
  Matrix C = Matrix::Zero(p, n), D = Matrix::Zero(p, m);
  A.topLeftCorner(np, np) = plant.A();
  B.topRows(np) = plant.B();
  for (Index i = 0; i < p; ++i) {
    C.block(i, 0, 1, np) = plant.C().row(i);
    D.row(i) = plant.D().row(i);
  }
  // each filter copy is driven by its sensor's raw output and replaces it
  for (Index j = 0; j < s; ++j) {
    const Index at = np + j * nf;
    const Index i = sensors[j];
    A.block(at, 0, nf, np) = filter.B() * plant.C().row(i);
    A.block(at, at, nf, nf) = filter.A();
    B.block(at, 0, nf, m) = filter.B() * plant.D().row(i);
    C.row(i).setZero();
    C.block(i, 0, 1, np) = filter.D()(0, 0) * plant.C().row(i);
    C.block(i, at, 1, nf) = filter.C();
    D.row(i) = filter.D()(0, 0) * plant.D().row(i);
  }
  return LtiSystem(A, B, C, D, plant.timebase(), plant.inputs(),
                   plant.outputs());
}

}  // namespace gasnet
