#pragma once

#include <string>

#include <json.hpp>

namespace specmap {

/// Deterministic JSON serialization: insertion-ordered keys, 2-space indent,
/// every floating-point number printed with 17 significant digits so that
/// repeated runs produce byte-identical files.
std::string dump_deterministic(const nlohmann::ordered_json& value, int indent = 2);

/// The same fixed formatting for a single double (CSV cells share it).
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace specmap
