#pragma once

#include <map>
#include <string>
#include <vector>

#include "gasnet/lti.hpp"

namespace gasnet {

// Port polarity. A p-port receives a pressure and emits a flow; a q-port
// receives a flow and emits a pressure. Interconnection always pairs one
// p-port with one q-port, so every boundary carries exactly one pressure
// and one flow signal.
enum class PortKind { P, Q };

struct PortSpec {
  std::string id;
  PortKind kind;
  Index input_index;   // into the component's input vector
  Index output_index;  // into the component's output vector
};

struct Component {
  std::string kind;
  LtiSystem sys;
  std::vector<PortSpec> ports;

  const PortSpec* find_port(const std::string& id) const {
    for (const auto& p : ports)
      if (p.id == id) return &p;
    return nullptr;
  }
};

// Distributed pipe segment linearized about a nominal operating point
// (p_bar, q_bar), lumped to one cell: states (p_r, q_l), inputs (p_l, q_r),
// outputs equal to the states. Left boundary is pressure-driven (p-port),
// right boundary flow-driven (q-port). Flow is measured positive from the
// left end toward the right end.
struct PipeParams {
  double X;        // length, m
  double Dm;       // diameter, m
  double lambda;   // Darcy friction factor
  double c;        // speed of sound, m/s
  double p_bar;    // nominal pressure, Pa
  double q_bar;    // nominal mass flow, kg/s
  double A = -1.0; // cross-section, m^2; computed from Dm when negative
};

Component pipe(const PipeParams& params);

// Static gain of the pipe: [[1 + lam c^2 X qb^2 / (2 D A^2 pb^2),
// -X lam c^2 qb / (D A^2 pb)], [0, 1]] over inputs (p_l, q_r).
Matrix pipe_dc_gain_closed_form(const PipeParams& params);

// Lossy electrical transmission-line cell, the pipe's circuit analog:
// series R-L, shunt C per unit length X. States (v_r, i_l).
struct TxLineParams {
  double R;  // series resistance per unit length
  double L;  // series inductance per unit length
  double C;  // shunt capacitance per unit length
  double X;  // length
};

Component transmission_line(const TxLineParams& params);

// Terminal volume node. Each of the k q-ports takes a flow counted INTO the
// volume (external fill/vent sources, sign adapters apply); each of the j
// p-ports discharges (p - p_ext_i)/R_i toward an attached pressure, counted
// out of the volume. Junction q-ports suit external bindings and links fed
// by another junction's p-port; for volumes linked in line with pipes use
// manifold(), whose ports are oriented for chain use.
Component junction(double volume, double c, int q_ports,
                   const std::vector<double>& resistances);

// In-line volume node. Inlet p-ports draw (p_ext_i - p)/R_i from upstream
// neighbors (counted into the volume), outlet q-ports serve downstream
// demands (counted out), and source q-ports take external flows counted
// into the volume, so fill sign=+1 / vent sign=-1 keep their meaning.
Component manifold(double volume, double c, int inlets, int outlets,
                   int sources, const std::vector<double>& inlet_resistances);

// Static pressure drop p_r = p_l - R q, flow passed through unchanged.
Component resistive_valve(double resistance);

// Static linearized compressor map p_r = gain * p_l + k_q * q, q passed
// through; k_q <= 0 models pressure-ratio droop with flow.
Component compressor_linear(double gain, double k_q);

// Boundary adapter declaration: one external input plus the paired port
// output. sign scales flow inputs only (-1 models outflow as negated
// inflow); out_name labels the paired output signal.
struct ExternalSpec {
  std::string name;
  SignalKind input_kind;
  double sign = 1.0;
  std::string out_name;
};

ExternalSpec external_flow_source(const std::string& name, double sign = 1.0);
ExternalSpec external_pressure_source(const std::string& name);

// Factory registry used by the network DSL. Throws InvalidParams on unknown
// kind, unknown key, missing key, or out-of-range values.
Component make_component(const std::string& kind,
                         const std::map<std::string, double>& params);

const std::vector<std::string>& component_kinds();

}  // namespace gasnet
