#include "gasnet/interconnect.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace gasnet {

std::pair<LtiSystem, SignalPartition> aggregate(const ValidatedNetwork& net) {
  std::vector<LtiSystem> systems;
  systems.reserve(net.components.size());
  for (const auto& comp : net.components) systems.push_back(comp.sys);
  LtiSystem agg = direct_sum(systems);

  std::vector<Index> in_base(net.components.size()),
      out_base(net.components.size());
  Index nin = 0, nout = 0;
  for (size_t i = 0; i < net.components.size(); ++i) {
    in_base[i] = nin;
    out_base[i] = nout;
    nin += net.components[i].sys.num_inputs();
    nout += net.components[i].sys.num_outputs();
  }

  // Instance-qualified labels, external until a link claims them.
  std::vector<SignalLabel> inputs = agg.inputs(), outputs = agg.outputs();
  for (size_t i = 0; i < net.components.size(); ++i) {
    const std::string& name = net.desc.components[i].name;
    for (Index k = 0; k < net.components[i].sys.num_inputs(); ++k)
      inputs[static_cast<size_t>(in_base[i] + k)].name =
          name + "." + net.components[i].sys.inputs()[static_cast<size_t>(k)].name;
    for (Index k = 0; k < net.components[i].sys.num_outputs(); ++k)
      outputs[static_cast<size_t>(out_base[i] + k)].name =
          name + "." +
          net.components[i].sys.outputs()[static_cast<size_t>(k)].name;
  }

  SignalPartition part;
  for (const auto& link : net.links) {
    const PortSpec& pp = net.components[static_cast<size_t>(link.comp_a)]
                             .ports[static_cast<size_t>(link.port_a)];
    const PortSpec& qq = net.components[static_cast<size_t>(link.comp_b)]
                             .ports[static_cast<size_t>(link.port_b)];
    const Index p_in = in_base[static_cast<size_t>(link.comp_a)] + pp.input_index;
    const Index p_out =
        out_base[static_cast<size_t>(link.comp_a)] + pp.output_index;
    const Index q_in = in_base[static_cast<size_t>(link.comp_b)] + qq.input_index;
    const Index q_out =
        out_base[static_cast<size_t>(link.comp_b)] + qq.output_index;
    part.w_int_p.push_back(p_in);   // pressure into the p-port
    part.y_int_p.push_back(q_out);  // pressure out of the q-port
    part.w_int_q.push_back(q_in);   // flow into the q-port
    part.y_int_q.push_back(p_out);  // flow out of the p-port
    inputs[static_cast<size_t>(p_in)].scope = SignalScope::Internal;
    inputs[static_cast<size_t>(q_in)].scope = SignalScope::Internal;
    outputs[static_cast<size_t>(p_out)].scope = SignalScope::Internal;
    outputs[static_cast<size_t>(q_out)].scope = SignalScope::Internal;
  }
  for (const auto& ext : net.externals) {
    const PortSpec& spec = net.components[static_cast<size_t>(ext.comp)]
                               .ports[static_cast<size_t>(ext.port)];
    ExternalBinding b;
    b.input = in_base[static_cast<size_t>(ext.comp)] + spec.input_index;
    b.output = out_base[static_cast<size_t>(ext.comp)] + spec.output_index;
    b.sign = ext.sign;
    b.in_kind = ext.kind;
    b.signal = ext.signal;
    b.out_name = ext.out_name;
    (ext.kind == SignalKind::Pressure ? part.u_p : part.u_q).push_back(b.input);
    (spec.kind == PortKind::P ? part.z_q : part.z_p).push_back(b.output);
    part.externals.push_back(std::move(b));
  }

  return {make_system(agg.A(), agg.B(), agg.C(), agg.D(), agg.timebase(),
                      std::move(inputs), std::move(outputs)),
          part};
}

ConnectionMatrices build_connection_matrices(const LtiSystem& agg,
                                             const SignalPartition& part) {
  const Index n_w = agg.num_inputs(), n_y = agg.num_outputs();
  const Index n_u = static_cast<Index>(part.externals.size());

  if (part.w_int_p.size() != part.y_int_p.size() ||
      part.w_int_p.size() != part.w_int_q.size() ||
      part.w_int_p.size() != part.y_int_q.size())
    fail(ErrorCode::DimensionMismatch,
         "internal pairings must come as one pressure and one flow per link");

  ConnectionMatrices conn;
  conn.F = Matrix::Zero(n_w, n_y);
  for (size_t l = 0; l < part.w_int_p.size(); ++l) {
    conn.F(part.w_int_p[l], part.y_int_p[l]) = 1.0;
    conn.F(part.w_int_q[l], part.y_int_q[l]) = 1.0;
  }
  conn.G = Matrix::Zero(n_w, n_u);
  conn.Sy = Matrix::Zero(n_u, n_y);
  for (Index j = 0; j < n_u; ++j) {
    const auto& ext = part.externals[static_cast<size_t>(j)];
    conn.G(ext.input, j) = ext.sign;
    conn.Sy(j, ext.output) = 1.0;
  }

  const Matrix closure = Matrix::Identity(n_w, n_w) - agg.D() * conn.F;
  Eigen::JacobiSVD<Matrix> svd(closure);
  const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 1.0;
  const double smin = svd.singularValues().size()
                          ? svd.singularValues()(svd.singularValues().size() - 1)
                          : 1.0;
  conn.cond_closure =
      smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  conn.well_posed = std::isfinite(conn.cond_closure) && conn.cond_closure < 1e12;

  if (conn.well_posed) {
    const Eigen::PartialPivLU<Matrix> lu(closure);
    const Matrix MC = lu.solve(agg.C());
    const Matrix MDG = lu.solve(agg.D() * conn.G);
    conn.H = conn.Sy * MC;
    conn.J = conn.Sy * MDG;
  } else {
    conn.H = Matrix::Zero(n_u, agg.order());
    conn.J = Matrix::Zero(n_u, n_u);
  }
  return conn;
}

LtiSystem close_network(const LtiSystem& agg, const SignalPartition& part,
                        const ConnectionMatrices& conn) {
  if (!conn.well_posed)
    fail(ErrorCode::AlgebraicLoop,
         "closure matrix I - D F is singular or has condition number above "
         "1e12");
  const Index n_w = agg.num_inputs();
  const Matrix closure = Matrix::Identity(n_w, n_w) - agg.D() * conn.F;
  const Eigen::PartialPivLU<Matrix> lu(closure);
  const Matrix MC = lu.solve(agg.C());
  const Matrix MDG = lu.solve(agg.D() * conn.G);

  Matrix A_cl = agg.A() + agg.B() * conn.F * MC;
  Matrix B_cl = agg.B() * (conn.G + conn.F * MDG);
  Matrix C_cl = conn.Sy * MC;
  Matrix D_cl = conn.Sy * MDG;

  std::vector<SignalLabel> inputs, outputs;
  for (const auto& ext : part.externals) {
    inputs.push_back({ext.signal, ext.in_kind, SignalScope::External});
    const SignalKind out_kind =
        agg.outputs()[static_cast<size_t>(ext.output)].kind;
    outputs.push_back({ext.out_name, out_kind, SignalScope::External});
  }
  return make_system(std::move(A_cl), std::move(B_cl), std::move(C_cl),
                     std::move(D_cl), agg.timebase(), std::move(inputs),
                     std::move(outputs));
}

TfBlocks connected_tf_blocks(const LtiSystem& closed, Complex s) {
  TfBlocks blocks;
  for (Index i = 0; i < closed.num_outputs(); ++i)
    (closed.outputs()[static_cast<size_t>(i)].kind == SignalKind::Pressure
         ? blocks.rows_p
         : blocks.rows_q)
        .push_back(i);
  for (Index j = 0; j < closed.num_inputs(); ++j)
    (closed.inputs()[static_cast<size_t>(j)].kind == SignalKind::Pressure
         ? blocks.cols_p
         : blocks.cols_q)
        .push_back(j);

  const ComplexMatrix T = eval_tf(closed, s);
  auto take = [&](const std::vector<Index>& rows,
                  const std::vector<Index>& cols) {
    ComplexMatrix block(rows.size(), cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t j = 0; j < cols.size(); ++j)
        block(static_cast<Index>(i), static_cast<Index>(j)) =
            T(rows[i], cols[j]);
    return block;
  };
  blocks.pp = take(blocks.rows_p, blocks.cols_p);
  blocks.pq = take(blocks.rows_p, blocks.cols_q);
  blocks.qp = take(blocks.rows_q, blocks.cols_p);
  blocks.qq = take(blocks.rows_q, blocks.cols_q);
  return blocks;
}

NetworkArtifacts build_network(const ValidatedNetwork& net) {
  NetworkArtifacts art{net, LtiSystem(), SignalPartition(), ConnectionMatrices(),
                       LtiSystem()};
  std::tie(art.aggregate_sys, art.partition) = aggregate(net);
  art.connection = build_connection_matrices(art.aggregate_sys, art.partition);
  art.closed = close_network(art.aggregate_sys, art.partition, art.connection);
  return art;
}

NetworkArtifacts build_network(const NetworkDescription& desc) {
  ValidationResult vr = validate_rules(desc);
  if (!vr.ok())
    fail(ErrorCode::InvalidParams,
         "network rejected:\n" + format_diagnostics(vr.diagnostics));
  return build_network(*vr.network);
}

NetworkArtifacts build_network_from_file(const std::string& path) {
  ParseResult pr = parse_file(path);
  if (!pr.ok())
    fail(ErrorCode::InvalidParams,
         "parse failed:\n" + format_diagnostics(pr.diagnostics));
  return build_network(*pr.description);
}

}  // namespace gasnet
