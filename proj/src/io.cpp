#include "gasnet/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gasnet {

namespace {

const char* kind_name(SignalKind k) {
  return k == SignalKind::Pressure ? "pressure" : "flow";
}

const char* scope_name(SignalScope s) {
  return s == SignalScope::External ? "external" : "internal";
}

SignalKind kind_from(const std::string& s) {
  if (s == "pressure") return SignalKind::Pressure;
  if (s == "flow") return SignalKind::Flow;
  throw Error(ErrorCode::IoError, "unknown signal kind '" + s + "'");
}

SignalScope scope_from(const std::string& s) {
  if (s == "external") return SignalScope::External;
  if (s == "internal") return SignalScope::Internal;
  throw Error(ErrorCode::IoError, "unknown signal scope '" + s + "'");
}

Json labels_to_json(const std::vector<SignalLabel>& labels) {
  Json arr = Json::array();
  for (const SignalLabel& l : labels)
    arr.push_back(Json{{"name", l.name},
                       {"kind", kind_name(l.kind)},
                       {"scope", scope_name(l.scope)}});
  return arr;
}

std::vector<SignalLabel> labels_from_json(const Json& arr) {
  std::vector<SignalLabel> labels;
  for (const Json& j : arr)
    labels.push_back({j.at("name").get<std::string>(),
                      kind_from(j.at("kind").get<std::string>()),
                      scope_from(j.at("scope").get<std::string>())});
  return labels;
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json data = Json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const Json& j) {
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const Json& data = j.at("data");
  if (rows < 0 || cols < 0 ||
      static_cast<Index>(data.size()) != rows * cols)
    throw Error(ErrorCode::DimensionMismatch,
                "matrix data length does not match rows*cols");
  Matrix m(rows, cols);
  Index k = 0;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
  return m;
}

Json system_to_json(const LtiSystem& sys) {
  Json tb;
  if (sys.timebase().is_discrete)
    tb = Json{{"type", "discrete"}, {"Ts", sys.timebase().Ts}};
  else
    tb = Json{{"type", "continuous"}};
  return Json{{"A", matrix_to_json(sys.A())},
              {"B", matrix_to_json(sys.B())},
              {"C", matrix_to_json(sys.C())},
              {"D", matrix_to_json(sys.D())},
              {"timebase", std::move(tb)},
              {"inputs", labels_to_json(sys.inputs())},
              {"outputs", labels_to_json(sys.outputs())}};
}

LtiSystem system_from_json(const Json& j) {
  const Json& tb = j.at("timebase");
  const std::string type = tb.at("type").get<std::string>();
  Timebase base = Timebase::continuous();
  if (type == "discrete")
    base = Timebase::discrete(tb.at("Ts").get<double>());
  else if (type != "continuous")
    throw Error(ErrorCode::IoError, "unknown timebase '" + type + "'");
  return LtiSystem(matrix_from_json(j.at("A")), matrix_from_json(j.at("B")),
                   matrix_from_json(j.at("C")), matrix_from_json(j.at("D")),
                   base, labels_from_json(j.at("inputs")),
                   labels_from_json(j.at("outputs")));
}

void save_system(const std::string& path, const LtiSystem& sys) {
  write_text_file(path, system_to_json(sys).dump(2) + "\n");
}

LtiSystem load_system(const std::string& path) {
  return system_from_json(Json::parse(read_text_file(path)));
}

void write_matrix(std::ostream& os, const Matrix& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  char buf[40];
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      os << (c ? " " : "") << buf;
    }
    os << '\n';
  }
}

Matrix read_matrix(std::istream& is) {
  Index rows = -1, cols = -1;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0)
    throw Error(ErrorCode::IoError, "matrix block needs a 'rows cols' header");
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      if (!(is >> m(r, c)))
        throw Error(ErrorCode::IoError, "matrix block ended early");
  return m;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& rows) {
  if (static_cast<Index>(header.size()) != rows.cols() && rows.rows() > 0)
    throw Error(ErrorCode::DimensionMismatch,
                "csv header width does not match the trace");
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i)
    os << (i ? "," : "") << header[i];
  os << '\n';
  char buf[40];
  for (Index r = 0; r < rows.rows(); ++r) {
    for (Index c = 0; c < rows.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", rows(r, c));
      os << (c ? "," : "") << buf;
    }
    os << '\n';
  }
  write_text_file(path, os.str());
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace gasnet
