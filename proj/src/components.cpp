#include "gasnet/components.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace gasnet {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::InvalidParams, what);
}

void check_port_typing(const Component& comp) {
  for (const auto& port : comp.ports) {
    const SignalKind in = comp.sys.inputs()[port.input_index].kind;
    const SignalKind out = comp.sys.outputs()[port.output_index].kind;
    const bool ok = port.kind == PortKind::P
                        ? (in == SignalKind::Pressure && out == SignalKind::Flow)
                        : (in == SignalKind::Flow && out == SignalKind::Pressure);
    require(ok, "port '" + port.id + "' violates p/q signal typing");
  }
}

Component finish(Component comp) {
  check_port_typing(comp);
  return comp;
}

double resolved_area(const PipeParams& p) {
  const double nominal = std::numbers::pi * p.Dm * p.Dm / 4.0;
  if (p.A < 0.0) return nominal;
  require(std::abs(p.A - nominal) <= 0.01 * nominal,
          "cross-section A deviates more than 1% from pi Dm^2/4");
  return p.A;
}

}  // namespace

Component pipe(const PipeParams& params) {
  require(params.X > 0 && params.Dm > 0 && params.c > 0 && params.p_bar > 0,
          "pipe geometry, sound speed and nominal pressure must be positive");
  require(params.lambda >= 0 && params.q_bar >= 0,
          "friction factor and nominal flow must be nonnegative");
  const double A = resolved_area(params);
  const double c2 = params.c * params.c;
  const double a = c2 / (A * params.X);
  const double b = A / params.X;
  const double fric = params.lambda * c2 / (params.Dm * A);
  const double d = fric * params.q_bar / params.p_bar;
  const double e =
      0.5 * fric * params.q_bar * params.q_bar / (params.p_bar * params.p_bar);

  Matrix Am(2, 2), Bm(2, 2);
  Am << 0.0, a,
        -b, -d;
  Bm << 0.0,  -a,
        b + e, 0.0;

  Component comp{"pipe",
                 make_system(Am, Bm, Matrix::Identity(2, 2), Matrix::Zero(2, 2),
                             Timebase::continuous(),
                             {pressure_signal("p_l"), flow_signal("q_r")},
                             {pressure_signal("p_r"), flow_signal("q_l")}),
                 {{"left", PortKind::P, 0, 1}, {"right", PortKind::Q, 1, 0}}};
  return finish(std::move(comp));
}

Matrix pipe_dc_gain_closed_form(const PipeParams& params) {
  const double A = resolved_area(params);
  const double c2 = params.c * params.c;
  Matrix g(2, 2);
  g << 1.0 + params.lambda * c2 * params.X * params.q_bar * params.q_bar /
           (2.0 * params.Dm * A * A * params.p_bar * params.p_bar),
      -params.X * params.lambda * c2 * params.q_bar /
          (params.Dm * A * A * params.p_bar),
      0.0, 1.0;
  return g;
}

Component transmission_line(const TxLineParams& params) {
  require(params.L > 0 && params.C > 0 && params.X > 0,
          "transmission line L, C and length must be positive");
  require(params.R >= 0, "transmission line R must be nonnegative");
  Matrix Am(2, 2), Bm(2, 2);
  Am << 0.0, 1.0 / (params.C * params.X),
        -1.0 / (params.L * params.X), -params.R / params.L;
  Bm << 0.0, -1.0 / (params.C * params.X),
        1.0 / (params.L * params.X), 0.0;

  Component comp{"txline",
                 make_system(Am, Bm, Matrix::Identity(2, 2), Matrix::Zero(2, 2),
                             Timebase::continuous(),
                             {pressure_signal("v_l"), flow_signal("i_r")},
                             {pressure_signal("v_r"), flow_signal("i_l")}),
                 {{"left", PortKind::P, 0, 1}, {"right", PortKind::Q, 1, 0}}};
  return finish(std::move(comp));
}

Component junction(double volume, double c, int q_ports,
                   const std::vector<double>& resistances) {
  require(volume > 0 && c > 0, "junction volume and sound speed must be positive");
  require(q_ports >= 1, "junction needs at least one q-port");
  const int j = static_cast<int>(resistances.size());
  for (double r : resistances)
    require(r > 0, "junction discharge resistances must be positive");

  const double gain = c * c / volume;
  double leak = 0.0;
  for (double r : resistances) leak += 1.0 / r;

  const Index m = q_ports + j, p = q_ports + j;
  Matrix Am(1, 1), Bm(1, m), Cm(p, 1), Dm = Matrix::Zero(p, m);
  Am(0, 0) = -gain * leak;
  std::vector<SignalLabel> ins, outs;
  std::vector<PortSpec> ports;
  for (int i = 0; i < q_ports; ++i) {
    Bm(0, i) = gain;  // flow into the volume
    Cm(i, 0) = 1.0;   // q-port reports the node pressure
    ins.push_back(flow_signal("q" + std::to_string(i + 1)));
    outs.push_back(pressure_signal("p_q" + std::to_string(i + 1)));
    ports.push_back({"q" + std::to_string(i + 1), PortKind::Q, i, i});
  }
  for (int i = 0; i < j; ++i) {
    const Index col = q_ports + i, row = q_ports + i;
    Bm(0, col) = gain / resistances[i];   // attached pressure pushes back in
    Cm(row, 0) = 1.0 / resistances[i];    // discharge (p - p_ext)/R
    Dm(row, col) = -1.0 / resistances[i];
    ins.push_back(pressure_signal("p_ext" + std::to_string(i + 1)));
    outs.push_back(flow_signal("q_out" + std::to_string(i + 1)));
    ports.push_back({"p" + std::to_string(i + 1), PortKind::P, col, row});
  }
  Component comp{"junction",
                 make_system(Am, Bm, Cm, Dm, Timebase::continuous(),
                             std::move(ins), std::move(outs)),
                 std::move(ports)};
  return finish(std::move(comp));
}

Component manifold(double volume, double c, int inlets, int outlets,
                   int sources, const std::vector<double>& inlet_resistances) {
  require(volume > 0 && c > 0, "manifold volume and sound speed must be positive");
  require(inlets >= 0 && outlets >= 0 && sources >= 0,
          "manifold port counts must be nonnegative");
  require(inlets + outlets + sources >= 1, "manifold needs at least one port");
  require(static_cast<int>(inlet_resistances.size()) == inlets,
          "manifold needs one resistance per inlet");
  for (double r : inlet_resistances)
    require(r > 0, "manifold inlet resistances must be positive");

  const double gain = c * c / volume;
  double leak = 0.0;
  for (double r : inlet_resistances) leak += 1.0 / r;

  const Index m = inlets + outlets + sources, p = m;
  Matrix Am(1, 1), Bm(1, m), Cm(p, 1), Dm = Matrix::Zero(p, m);
  Am(0, 0) = -gain * leak;
  std::vector<SignalLabel> ins, outs;
  std::vector<PortSpec> ports;
  Index col = 0;
  for (int i = 0; i < inlets; ++i, ++col) {
    Bm(0, col) = gain / inlet_resistances[i];  // draw (p_ext - p)/R fills the volume
    Cm(col, 0) = -1.0 / inlet_resistances[i];
    Dm(col, col) = 1.0 / inlet_resistances[i];
    ins.push_back(pressure_signal("p_in" + std::to_string(i + 1)));
    outs.push_back(flow_signal("q_in" + std::to_string(i + 1)));
    ports.push_back({"in" + std::to_string(i + 1), PortKind::P, col, col});
  }
  for (int i = 0; i < outlets; ++i, ++col) {
    Bm(0, col) = -gain;  // downstream demand drains the volume
    Cm(col, 0) = 1.0;
    ins.push_back(flow_signal("q_out" + std::to_string(i + 1)));
    outs.push_back(pressure_signal("p_out" + std::to_string(i + 1)));
    ports.push_back({"out" + std::to_string(i + 1), PortKind::Q, col, col});
  }
  for (int i = 0; i < sources; ++i, ++col) {
    Bm(0, col) = gain;  // external source counted into the volume
    Cm(col, 0) = 1.0;
    ins.push_back(flow_signal("q_src" + std::to_string(i + 1)));
    outs.push_back(pressure_signal("p_src" + std::to_string(i + 1)));
    ports.push_back({"src" + std::to_string(i + 1), PortKind::Q, col, col});
  }
  Component comp{"manifold",
                 make_system(Am, Bm, Cm, Dm, Timebase::continuous(),
                             std::move(ins), std::move(outs)),
                 std::move(ports)};
  return finish(std::move(comp));
}

Component resistive_valve(double resistance) {
  require(resistance >= 0, "valve resistance must be nonnegative");
  Matrix Dm(2, 2);
  Dm << 1.0, -resistance,
        0.0, 1.0;
  Component comp{"valve",
                 make_system(Matrix(0, 0), Matrix(0, 2), Matrix(2, 0), Dm,
                             Timebase::continuous(),
                             {pressure_signal("p_l"), flow_signal("q_r")},
                             {pressure_signal("p_r"), flow_signal("q_l")}),
                 {{"left", PortKind::P, 0, 1}, {"right", PortKind::Q, 1, 0}}};
  return finish(std::move(comp));
}

Component compressor_linear(double gain, double k_q) {
  require(gain > 0, "compressor pressure gain must be positive");
  require(std::isfinite(k_q), "compressor flow sensitivity must be finite");
  Matrix Dm(2, 2);
  Dm << gain, k_q,
        0.0, 1.0;
  Component comp{"compressor",
                 make_system(Matrix(0, 0), Matrix(0, 2), Matrix(2, 0), Dm,
                             Timebase::continuous(),
                             {pressure_signal("p_l"), flow_signal("q_r")},
                             {pressure_signal("p_r"), flow_signal("q_l")}),
                 {{"left", PortKind::P, 0, 1}, {"right", PortKind::Q, 1, 0}}};
  return finish(std::move(comp));
}

ExternalSpec external_flow_source(const std::string& name, double sign) {
  if (!(sign == 1.0 || sign == -1.0))
    fail(ErrorCode::InvalidParams, "flow source sign must be +1 or -1");
  return {name, SignalKind::Flow, sign, name};
}

ExternalSpec external_pressure_source(const std::string& name) {
  return {name, SignalKind::Pressure, 1.0, name};
}

namespace {

class ParamReader {
 public:
  explicit ParamReader(const std::map<std::string, double>& params)
      : params_(params) {}

  double get(const std::string& key) {
    auto it = params_.find(key);
    if (it == params_.end())
      fail(ErrorCode::InvalidParams, "missing parameter '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  double get_or(const std::string& key, double fallback) {
    auto it = params_.find(key);
    if (it == params_.end()) return fallback;
    used_.insert(key);
    return it->second;
  }

  bool has(const std::string& key) const { return params_.count(key) > 0; }

  int get_count(const std::string& key, int fallback = -1) {
    const double v = fallback >= 0 ? get_or(key, fallback) : get(key);
    const int n = static_cast<int>(std::lround(v));
    if (std::abs(v - n) > 1e-9 || n < 0)
      fail(ErrorCode::InvalidParams, "'" + key + "' must be a nonnegative integer");
    return n;
  }

  void finish() const {
    for (const auto& [key, value] : params_) {
      (void)value;
      if (!used_.count(key))
        fail(ErrorCode::InvalidParams, "unknown parameter '" + key + "'");
    }
  }

 private:
  const std::map<std::string, double>& params_;
  std::set<std::string> used_;
};

std::vector<double> indexed_values(ParamReader& reader, const std::string& stem,
                                   int count) {
  std::vector<double> values;
  values.reserve(static_cast<size_t>(count));
  for (int i = 1; i <= count; ++i) values.push_back(reader.get(stem + std::to_string(i)));
  return values;
}

}  // namespace

Component make_component(const std::string& kind,
                         const std::map<std::string, double>& params) {
  ParamReader reader(params);
  Component comp = [&]() -> Component {
    if (kind == "pipe") {
      PipeParams p;
      p.X = reader.get("X");
      p.Dm = reader.get("Dm");
      p.lambda = reader.get("lambda");
      p.c = reader.get("c");
      p.p_bar = reader.get("p_bar");
      p.q_bar = reader.get("q_bar");
      p.A = reader.get_or("A", -1.0);
      return pipe(p);
    }
    if (kind == "txline") {
      TxLineParams p{reader.get("R"), reader.get("L"), reader.get("C"),
                     reader.get("X")};
      return transmission_line(p);
    }
    if (kind == "junction") {
      const double V = reader.get("V"), c = reader.get("c");
      const int k = reader.get_count("q_ports");
      const int j = reader.get_count("p_ports", 0);
      return junction(V, c, k, indexed_values(reader, "R", j));
    }
    if (kind == "manifold") {
      const double V = reader.get("V"), c = reader.get("c");
      const int in = reader.get_count("inlets", 0);
      const int out = reader.get_count("outlets", 0);
      const int src = reader.get_count("sources", 0);
      return manifold(V, c, in, out, src, indexed_values(reader, "Rin", in));
    }
    if (kind == "valve") return resistive_valve(reader.get("R"));
    if (kind == "compressor")
      return compressor_linear(reader.get("gain"), reader.get_or("k_q", 0.0));
    fail(ErrorCode::InvalidParams, "unknown component kind '" + kind + "'");
  }();
  reader.finish();
  return comp;
}

const std::vector<std::string>& component_kinds() {
  static const std::vector<std::string> kinds = {
      "pipe", "txline", "junction", "manifold", "valve", "compressor"};
  return kinds;
}

}  // namespace gasnet
