#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gasnet/components.hpp"

namespace gasnet {

// A `<instance>.<port>` reference as written in the source text.
struct PortRef {
  std::string instance, port;
  int line = 0, column = 0;
};

struct ComponentDecl {
  std::string kind, name;
  std::map<std::string, double> params;
  int line = 0;
};

struct LinkDecl {
  PortRef a, b;
  int line = 0;
};

struct ExternalDecl {
  std::string signal;                   // declared input signal name
  SignalKind kind = SignalKind::Flow;   // flow_in or pressure_in
  PortRef port;
  double sign = 1.0;                    // -1 models vent/disturbance outflow
  std::string out_name;                 // name of the paired output signal
  int line = 0;
};

struct NetworkDescription {
  std::vector<ComponentDecl> components;
  std::vector<LinkDecl> links;
  std::vector<ExternalDecl> externals;
};

// Structural equality; source positions are ignored.
bool operator==(const PortRef& a, const PortRef& b);
bool operator==(const ComponentDecl& a, const ComponentDecl& b);
bool operator==(const LinkDecl& a, const LinkDecl& b);
bool operator==(const ExternalDecl& a, const ExternalDecl& b);
bool operator==(const NetworkDescription& a, const NetworkDescription& b);

struct ParseDiagnostic {
  int line = 0, column = 0;
  std::string rule;     // grammar production or connection rule that failed
  std::string message;
};

std::string format_diagnostics(const std::vector<ParseDiagnostic>& diags);

struct ParseResult {
  std::optional<NetworkDescription> description;
  std::vector<ParseDiagnostic> diagnostics;  // sorted by line, then column
  bool ok() const { return description.has_value(); }
};

// Line-oriented grammar:
//   component <kind> <name> { key=value ... }
//   link <instance>.<port> <instance>.<port>
//   external <pressure_in|flow_in> <signal> <instance>.<port> [sign=-1] [out=<name>]
//   # comment
// All diagnostics are collected, never just the first.
ParseResult parse(const std::string& source);
ParseResult parse_file(const std::string& path);

struct ResolvedLink {
  Index comp_a = 0, port_a = 0;  // p-port side
  Index comp_b = 0, port_b = 0;  // q-port side
  int line = 0;
};

struct ResolvedExternal {
  Index comp = 0, port = 0;
  SignalKind kind = SignalKind::Flow;
  double sign = 1.0;
  std::string signal, out_name;
};

// A description that passed every connection rule, with the component
// instances it was checked against (declaration order).
struct ValidatedNetwork {
  NetworkDescription desc;
  std::vector<Component> components;
  std::vector<ResolvedLink> links;       // oriented p-port first
  std::vector<ResolvedExternal> externals;
};

struct ValidationResult {
  std::optional<ValidatedNetwork> network;
  std::vector<ParseDiagnostic> diagnostics;
  bool ok() const { return network.has_value(); }
};

// Connection rules: every link joins one p-port to one q-port; flow externals
// bind q-ports and pressure externals bind p-ports; every port is bound
// exactly once; the static feedthrough graph has no cycle.
ValidationResult validate_rules(const NetworkDescription& desc);

struct PartitionCounts {
  Index n_up = 0, n_uq = 0;                    // external pressure/flow inputs
  Index n_zp = 0, n_zq = 0;                    // external pressure/flow outputs
  Index n_yp_internal = 0, n_yq_internal = 0;  // linked pressure/flow outputs
};

// Computes the partition counts from input-side and output-side walks
// independently and cross-checks the pairing identities
// (n_up = n_zq, n_uq = n_zp, internal pressure count = internal flow count).
PartitionCounts count_check(const ValidatedNetwork& net);

// Canonical text form; parse(emit(d)) reproduces d exactly.
std::string emit(const NetworkDescription& desc);

}  // namespace gasnet
