#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "gasnet/lti.hpp"

namespace gasnet {

// Key order is fixed everywhere so identical inputs serialize to identical
// bytes; doubles use the shortest exact decimal form the library emits.
using Json = nlohmann::ordered_json;

Json matrix_to_json(const Matrix& m);   // {"rows", "cols", "data" row-major}
Matrix matrix_from_json(const Json& j);

Json system_to_json(const LtiSystem& sys);
LtiSystem system_from_json(const Json& j);

void save_system(const std::string& path, const LtiSystem& sys);
LtiSystem load_system(const std::string& path);

// Plain-text block: "rows cols" line, then one whitespace-separated row per
// line, full double precision.
void write_matrix(std::ostream& os, const Matrix& m);
Matrix read_matrix(std::istream& is);

// One row per time point; an empty trace still gets its header line.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace gasnet
