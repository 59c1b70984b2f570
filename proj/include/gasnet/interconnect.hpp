#pragma once

#include <utility>

#include "gasnet/netdsl.hpp"

namespace gasnet {

// One declared external: where it enters and leaves the aggregate signal
// vectors, plus its sign adapter and user-facing names.
struct ExternalBinding {
  Index input = 0;   // aggregate input column
  Index output = 0;  // aggregate output row (the paired sensor signal)
  double sign = 1.0;
  SignalKind in_kind = SignalKind::Flow;
  std::string signal, out_name;
};

// Index sets grouping the aggregate inputs/outputs by pressure vs flow and
// external vs linked. Sets are disjoint and cover every signal once.
struct SignalPartition {
  std::vector<Index> u_p, u_q;          // external inputs
  std::vector<Index> w_int_p, w_int_q;  // linked inputs, one pair per link
  std::vector<Index> z_p, z_q;          // external outputs
  std::vector<Index> y_int_p, y_int_q;  // linked outputs, aligned with links
  std::vector<ExternalBinding> externals;  // declaration order
};

// Direct sum of every component in declaration order; labels are
// instance-qualified and scoped internal/external from the bindings.
std::pair<LtiSystem, SignalPartition> aggregate(const ValidatedNetwork& net);

struct ConnectionMatrices {
  Matrix F;   // aggregate-input x aggregate-output: routes linked outputs back
  Matrix G;   // aggregate-input x external-input: 0/+1/-1 sign adapters
  Matrix Sy;  // external-output x aggregate-output row selection
  // Closed-network output maps z = H x + J u. They reduce to 0-1 selections
  // whenever the selected outputs are plain states (C rows of an identity,
  // no feedthrough); static elements make them dense instead.
  Matrix H;
  Matrix J;
  bool well_posed = false;
  double cond_closure = 0.0;  // condition number of I - D F
};

ConnectionMatrices build_connection_matrices(const LtiSystem& agg,
                                             const SignalPartition& part);

// Closed realization: with M = (I - D F)^-1,
//   A_cl = A + B F M C,  B_cl = B (G + F M D G),
//   C_cl = Sy M C,       D_cl = Sy M D G.
// The state count never changes; inputs/outputs are the declared externals in
// declaration order.
LtiSystem close_network(const LtiSystem& agg, const SignalPartition& part,
                        const ConnectionMatrices& conn);

// External transfer-function blocks grouped by signal kind; `pq` maps flow
// inputs to pressure outputs, `qp` pressure inputs to flow outputs.
struct TfBlocks {
  ComplexMatrix pp, pq, qp, qq;
  std::vector<Index> rows_p, rows_q, cols_p, cols_q;
};

TfBlocks connected_tf_blocks(const LtiSystem& closed, Complex s);

struct NetworkArtifacts {
  ValidatedNetwork network;
  LtiSystem aggregate_sys;
  SignalPartition partition;
  ConnectionMatrices connection;
  LtiSystem closed;
};

// parse + validate + aggregate + close in one step; throws with the collected
// diagnostics in the message if the description is rejected.
NetworkArtifacts build_network(const NetworkDescription& desc);
NetworkArtifacts build_network(const ValidatedNetwork& net);
NetworkArtifacts build_network_from_file(const std::string& path);

}  // namespace gasnet
