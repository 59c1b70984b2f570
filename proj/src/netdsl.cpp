#include "gasnet/netdsl.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace gasnet {

bool operator==(const PortRef& a, const PortRef& b) {
  return a.instance == b.instance && a.port == b.port;
}
bool operator==(const ComponentDecl& a, const ComponentDecl& b) {
  return a.kind == b.kind && a.name == b.name && a.params == b.params;
}
bool operator==(const LinkDecl& a, const LinkDecl& b) {
  return a.a == b.a && a.b == b.b;
}
bool operator==(const ExternalDecl& a, const ExternalDecl& b) {
  return a.signal == b.signal && a.kind == b.kind && a.port == b.port &&
         a.sign == b.sign && a.out_name == b.out_name;
}
bool operator==(const NetworkDescription& a, const NetworkDescription& b) {
  return a.components == b.components && a.links == b.links &&
         a.externals == b.externals;
}

std::string format_diagnostics(const std::vector<ParseDiagnostic>& diags) {
  std::ostringstream out;
  for (const auto& d : diags)
    out << d.line << ":" << d.column << ": [" << d.rule << "] " << d.message
        << "\n";
  return out.str();
}

namespace {

struct Token {
  std::string text;
  int column = 0;  // 1-based
};

std::vector<Token> tokenize(const std::string& line) {
  std::vector<Token> tokens;
  size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    if (line[i] == '{' || line[i] == '}') {
      tokens.push_back({std::string(1, line[i]), static_cast<int>(i + 1)});
      ++i;
      continue;
    }
    size_t j = i;
    while (j < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[j])) &&
           line[j] != '{' && line[j] != '}' && line[j] != '#')
      ++j;
    tokens.push_back({line.substr(i, j - i), static_cast<int>(i + 1)});
    i = j;
  }
  return tokens;
}

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_')
    return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

class DiagnosticSink {
 public:
  void add(int line, int column, std::string rule, std::string message) {
    diags_.push_back({line, column, std::move(rule), std::move(message)});
  }
  std::vector<ParseDiagnostic> sorted() {
    std::stable_sort(diags_.begin(), diags_.end(),
                     [](const ParseDiagnostic& a, const ParseDiagnostic& b) {
                       if (a.line != b.line) return a.line < b.line;
                       return a.column < b.column;
                     });
    return diags_;
  }
  bool empty() const { return diags_.empty(); }

 private:
  std::vector<ParseDiagnostic> diags_;
};

bool parse_portref(const Token& tok, int line, PortRef& out,
                   DiagnosticSink& sink) {
  const size_t dot = tok.text.find('.');
  if (dot == std::string::npos ||
      tok.text.find('.', dot + 1) != std::string::npos || dot == 0 ||
      dot + 1 == tok.text.size()) {
    sink.add(line, tok.column, "grammar",
             "expected <instance>.<port>, got '" + tok.text + "'");
    return false;
  }
  out.instance = tok.text.substr(0, dot);
  out.port = tok.text.substr(dot + 1);
  out.line = line;
  out.column = tok.column;
  if (!is_identifier(out.instance) || !is_identifier(out.port)) {
    sink.add(line, tok.column, "grammar",
             "instance and port must be identifiers in '" + tok.text + "'");
    return false;
  }
  return true;
}

}  // namespace

ParseResult parse(const std::string& source) {
  NetworkDescription desc;
  DiagnosticSink sink;
  std::set<std::string> component_names, external_names, output_names;
  const auto& kinds = component_kinds();

  std::istringstream stream(source);
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::vector<Token> toks = tokenize(raw);
    if (toks.empty()) continue;
    const std::string& head = toks[0].text;

    if (head == "component") {
      if (toks.size() < 4 || toks[3].text != "{") {
        sink.add(line_no, toks[0].column, "grammar",
                 "expected: component <kind> <name> { key=value ... }");
        continue;
      }
      ComponentDecl decl;
      decl.kind = toks[1].text;
      decl.name = toks[2].text;
      decl.line = line_no;
      if (std::find(kinds.begin(), kinds.end(), decl.kind) == kinds.end()) {
        sink.add(line_no, toks[1].column, "unknown-kind",
                 "unknown component kind '" + decl.kind + "'");
        continue;
      }
      if (!is_identifier(decl.name)) {
        sink.add(line_no, toks[2].column, "grammar",
                 "component name must be an identifier");
        continue;
      }
      if (!component_names.insert(decl.name).second) {
        sink.add(line_no, toks[2].column, "duplicate-name",
                 "component '" + decl.name + "' is already declared");
        continue;
      }
      size_t i = 4;
      bool closed = false, bad = false;
      for (; i < toks.size(); ++i) {
        if (toks[i].text == "}") {
          closed = true;
          ++i;
          break;
        }
        const size_t eq = toks[i].text.find('=');
        double value = 0.0;
        if (eq == std::string::npos ||
            !is_identifier(toks[i].text.substr(0, eq)) ||
            !parse_number(toks[i].text.substr(eq + 1), value)) {
          sink.add(line_no, toks[i].column, "grammar",
                   "expected key=value, got '" + toks[i].text + "'");
          bad = true;
          break;
        }
        const std::string key = toks[i].text.substr(0, eq);
        if (!decl.params.emplace(key, value).second) {
          sink.add(line_no, toks[i].column, "grammar",
                   "duplicate parameter '" + key + "'");
          bad = true;
          break;
        }
      }
      if (bad) continue;
      if (!closed) {
        sink.add(line_no, toks.back().column, "grammar",
                 "missing closing '}'");
        continue;
      }
      if (i != toks.size()) {
        sink.add(line_no, toks[i].column, "grammar",
                 "unexpected text after '}'");
        continue;
      }
      desc.components.push_back(std::move(decl));
    } else if (head == "link") {
      if (toks.size() != 3) {
        sink.add(line_no, toks[0].column, "grammar",
                 "expected: link <instance>.<port> <instance>.<port>");
        continue;
      }
      LinkDecl decl;
      decl.line = line_no;
      if (parse_portref(toks[1], line_no, decl.a, sink) &&
          parse_portref(toks[2], line_no, decl.b, sink))
        desc.links.push_back(std::move(decl));
    } else if (head == "external") {
      if (toks.size() < 4) {
        sink.add(line_no, toks[0].column, "grammar",
                 "expected: external <pressure_in|flow_in> <signal> "
                 "<instance>.<port> [sign=-1] [out=<name>]");
        continue;
      }
      ExternalDecl decl;
      decl.line = line_no;
      if (toks[1].text == "pressure_in") {
        decl.kind = SignalKind::Pressure;
      } else if (toks[1].text == "flow_in") {
        decl.kind = SignalKind::Flow;
      } else {
        sink.add(line_no, toks[1].column, "grammar",
                 "external kind must be pressure_in or flow_in");
        continue;
      }
      decl.signal = toks[2].text;
      if (!is_identifier(decl.signal)) {
        sink.add(line_no, toks[2].column, "grammar",
                 "signal name must be an identifier");
        continue;
      }
      if (!external_names.insert(decl.signal).second) {
        sink.add(line_no, toks[2].column, "duplicate-name",
                 "external signal '" + decl.signal + "' is already declared");
        continue;
      }
      if (!parse_portref(toks[3], line_no, decl.port, sink)) continue;
      bool bad = false;
      for (size_t i = 4; i < toks.size(); ++i) {
        const std::string& t = toks[i].text;
        if (t == "sign=-1") {
          decl.sign = -1.0;
        } else if (t == "sign=1" || t == "sign=+1") {
          decl.sign = 1.0;
        } else if (t.rfind("out=", 0) == 0 && is_identifier(t.substr(4))) {
          decl.out_name = t.substr(4);
        } else {
          sink.add(line_no, toks[i].column, "grammar",
                   "expected sign=-1 or out=<name>, got '" + t + "'");
          bad = true;
          break;
        }
      }
      if (bad) continue;
      if (decl.out_name.empty()) decl.out_name = decl.signal + "_out";
      if (!output_names.insert(decl.out_name).second) {
        sink.add(line_no, toks[2].column, "duplicate-name",
                 "external output '" + decl.out_name + "' is already declared");
        continue;
      }
      desc.externals.push_back(std::move(decl));
    } else {
      sink.add(line_no, toks[0].column, "grammar",
               "unknown directive '" + head + "'");
    }
  }

  ParseResult result;
  result.diagnostics = sink.sorted();
  if (result.diagnostics.empty()) result.description = std::move(desc);
  return result;
}

ParseResult parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

namespace {

// Nodes of the static-path graph: one per aggregate input and output signal.
// Edges: input -> output inside a component wherever D is nonzero, and
// output -> linked input across every connection.
struct PathGraph {
  std::vector<std::vector<int>> adj;
  int nodes = 0;
  int add_node() {
    adj.emplace_back();
    return nodes++;
  }
};

}  // namespace

ValidationResult validate_rules(const NetworkDescription& desc) {
  DiagnosticSink sink;
  ValidatedNetwork net;
  net.desc = desc;

  std::map<std::string, Index> instance_index;
  for (const auto& decl : desc.components) {
    try {
      net.components.push_back(make_component(decl.kind, decl.params));
      instance_index[decl.name] = static_cast<Index>(net.components.size()) - 1;
    } catch (const Error& e) {
      sink.add(decl.line, 1, "params",
               "component '" + decl.name + "': " + e.what());
    }
  }
  if (!sink.empty()) {
    ValidationResult r;
    r.diagnostics = sink.sorted();
    return r;
  }

  auto resolve = [&](const PortRef& ref,
                     std::pair<Index, Index>& out) -> bool {
    auto it = instance_index.find(ref.instance);
    if (it == instance_index.end()) {
      sink.add(ref.line, ref.column, "ref",
               "unknown instance '" + ref.instance + "'");
      return false;
    }
    const Component& comp = net.components[static_cast<size_t>(it->second)];
    for (size_t k = 0; k < comp.ports.size(); ++k) {
      if (comp.ports[k].id == ref.port) {
        out = {it->second, static_cast<Index>(k)};
        return true;
      }
    }
    sink.add(ref.line, ref.column, "ref",
             "instance '" + ref.instance + "' has no port '" + ref.port + "'");
    return false;
  };

  // Rule III is structural in this grammar: a binding always covers both
  // signals of a port, so it only remains to police multiplicity (Rule IV).
  std::map<std::pair<Index, Index>, std::pair<int, int>> bound_at;
  auto claim = [&](std::pair<Index, Index> port, int line, int column) {
    auto [it, fresh] = bound_at.emplace(port, std::make_pair(line, column));
    if (!fresh)
      sink.add(line, column, "duplicate-port",
               "port already bound at line " + std::to_string(it->second.first));
    return fresh;
  };

  for (const auto& link : desc.links) {
    std::pair<Index, Index> pa, pb;
    if (!resolve(link.a, pa) || !resolve(link.b, pb)) continue;
    const PortSpec& sa =
        net.components[static_cast<size_t>(pa.first)].ports[static_cast<size_t>(pa.second)];
    const PortSpec& sb =
        net.components[static_cast<size_t>(pb.first)].ports[static_cast<size_t>(pb.second)];
    if (sa.kind == sb.kind) {
      sink.add(link.line, link.a.column, "I",
               "links must join a p-port to a q-port");
      continue;
    }
    // Rule II: the implied signal pairing must be pressure-to-pressure and
    // flow-to-flow; guaranteed by port typing, asserted against the labels.
    const Component& ca = net.components[static_cast<size_t>(pa.first)];
    const Component& cb = net.components[static_cast<size_t>(pb.first)];
    const SignalKind a_in = ca.sys.inputs()[sa.input_index].kind;
    const SignalKind b_out = cb.sys.outputs()[sb.output_index].kind;
    if (a_in != b_out) {
      sink.add(link.line, link.a.column, "II",
               "paired signals disagree in kind");
      continue;
    }
    const bool fresh_a = claim(pa, link.line, link.a.column);
    const bool fresh_b = claim(pb, link.line, link.b.column);
    if (!fresh_a || !fresh_b) continue;
    ResolvedLink r;
    r.line = link.line;
    if (sa.kind == PortKind::P) {
      r.comp_a = pa.first; r.port_a = pa.second;
      r.comp_b = pb.first; r.port_b = pb.second;
    } else {
      r.comp_a = pb.first; r.port_a = pb.second;
      r.comp_b = pa.first; r.port_b = pa.second;
    }
    net.links.push_back(r);
  }

  for (const auto& ext : desc.externals) {
    std::pair<Index, Index> p;
    if (!resolve(ext.port, p)) continue;
    const PortSpec& spec =
        net.components[static_cast<size_t>(p.first)].ports[static_cast<size_t>(p.second)];
    const bool want_q = ext.kind == SignalKind::Flow;
    if (want_q != (spec.kind == PortKind::Q)) {
      sink.add(ext.line, ext.port.column, "I",
               want_q ? "flow_in externals must bind a q-port"
                      : "pressure_in externals must bind a p-port");
      continue;
    }
    if (ext.kind == SignalKind::Pressure && ext.sign != 1.0) {
      sink.add(ext.line, ext.port.column, "I",
               "sign adapters apply to flow externals only");
      continue;
    }
    if (!claim(p, ext.line, ext.port.column)) continue;
    net.externals.push_back(
        {p.first, p.second, ext.kind, ext.sign, ext.signal, ext.out_name});
  }

  // Rule IV, completeness: every port of every instance is bound.
  for (size_t ci = 0; ci < net.components.size(); ++ci) {
    for (size_t pi = 0; pi < net.components[ci].ports.size(); ++pi) {
      if (!bound_at.count({static_cast<Index>(ci), static_cast<Index>(pi)})) {
        sink.add(desc.components[ci].line, 1, "IV",
                 "port '" + desc.components[ci].name + "." +
                     net.components[ci].ports[pi].id + "' is not bound");
      }
    }
  }

  // Rule IV, algebraic loops: cycle over the static feedthrough paths.
  if (sink.empty()) {
    std::vector<Index> in_base(net.components.size()),
        out_base(net.components.size());
    Index nin = 0, nout = 0;
    for (size_t i = 0; i < net.components.size(); ++i) {
      in_base[i] = nin;
      out_base[i] = nout;
      nin += net.components[i].sys.num_inputs();
      nout += net.components[i].sys.num_outputs();
    }
    PathGraph g;
    for (Index i = 0; i < nin + nout; ++i) g.add_node();
    const Index out_offset = nin;
    for (size_t i = 0; i < net.components.size(); ++i) {
      const Matrix& D = net.components[i].sys.D();
      for (Index r = 0; r < D.rows(); ++r)
        for (Index c = 0; c < D.cols(); ++c)
          if (D(r, c) != 0.0)
            g.adj[static_cast<size_t>(in_base[i] + c)].push_back(
                static_cast<int>(out_offset + out_base[i] + r));
    }
    for (const auto& link : net.links) {
      const PortSpec& pp =
          net.components[static_cast<size_t>(link.comp_a)].ports[static_cast<size_t>(link.port_a)];
      const PortSpec& qq =
          net.components[static_cast<size_t>(link.comp_b)].ports[static_cast<size_t>(link.port_b)];
      g.adj[static_cast<size_t>(out_offset + out_base[link.comp_a] + pp.output_index)]
          .push_back(static_cast<int>(in_base[link.comp_b] + qq.input_index));
      g.adj[static_cast<size_t>(out_offset + out_base[link.comp_b] + qq.output_index)]
          .push_back(static_cast<int>(in_base[link.comp_a] + pp.input_index));
    }
    // Iterative three-color DFS; any back edge is a delay-free cycle.
    std::vector<int> color(static_cast<size_t>(g.nodes), 0);
    bool loop = false;
    for (int start = 0; start < g.nodes && !loop; ++start) {
      if (color[static_cast<size_t>(start)] != 0) continue;
      std::vector<std::pair<int, size_t>> stack{{start, 0}};
      color[static_cast<size_t>(start)] = 1;
      while (!stack.empty() && !loop) {
        auto& [node, next] = stack.back();
        if (next < g.adj[static_cast<size_t>(node)].size()) {
          const int to = g.adj[static_cast<size_t>(node)][next++];
          if (color[static_cast<size_t>(to)] == 1) loop = true;
          else if (color[static_cast<size_t>(to)] == 0) {
            color[static_cast<size_t>(to)] = 1;
            stack.push_back({to, 0});
          }
        } else {
          color[static_cast<size_t>(node)] = 2;
          stack.pop_back();
        }
      }
    }
    if (loop) {
      const int line = net.links.empty() ? 1 : net.links.front().line;
      sink.add(line, 1, "IV",
               "static feedthrough paths form an algebraic loop");
    }
  }

  ValidationResult result;
  result.diagnostics = sink.sorted();
  if (result.diagnostics.empty()) result.network = std::move(net);
  return result;
}

PartitionCounts count_check(const ValidatedNetwork& net) {
  PartitionCounts c;
  // Input-side walk.
  for (const auto& ext : net.externals)
    (ext.kind == SignalKind::Pressure ? c.n_up : c.n_uq)++;
  // Output-side walk: a bound p-port emits an external flow, a bound q-port
  // an external pressure.
  for (const auto& ext : net.externals) {
    const PortSpec& spec =
        net.components[static_cast<size_t>(ext.comp)].ports[static_cast<size_t>(ext.port)];
    (spec.kind == PortKind::P ? c.n_zq : c.n_zp)++;
  }
  for (const auto& link : net.links) {
    (void)link;
    c.n_yq_internal++;  // the p-port side emits the linked flow
    c.n_yp_internal++;  // the q-port side emits the linked pressure
  }
  if (c.n_up != c.n_zq || c.n_uq != c.n_zp)
    fail(ErrorCode::CountMismatch,
         "external pairing identities violated on validated input");
  const Index total_in = [&] {
    Index t = 0;
    for (const auto& comp : net.components) t += comp.sys.num_inputs();
    return t;
  }();
  if (c.n_up + c.n_uq + c.n_yp_internal + c.n_yq_internal != total_in)
    fail(ErrorCode::CountMismatch,
         "partition does not cover the aggregate inputs");
  return c;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string emit(const NetworkDescription& desc) {
  std::ostringstream out;
  for (const auto& comp : desc.components) {
    out << "component " << comp.kind << " " << comp.name << " {";
    for (const auto& [key, value] : comp.params)
      out << " " << key << "=" << fmt_double(value);
    out << " }\n";
  }
  for (const auto& link : desc.links)
    out << "link " << link.a.instance << "." << link.a.port << " "
        << link.b.instance << "." << link.b.port << "\n";
  for (const auto& ext : desc.externals) {
    out << "external "
        << (ext.kind == SignalKind::Pressure ? "pressure_in" : "flow_in")
        << " " << ext.signal << " " << ext.port.instance << "."
        << ext.port.port;
    if (ext.sign == -1.0) out << " sign=-1";
    if (ext.out_name != ext.signal + "_out") out << " out=" << ext.out_name;
    out << "\n";
  }
  return out.str();
}

}  // namespace gasnet
