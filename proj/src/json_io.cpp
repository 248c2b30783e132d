#include "specmap/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "specmap/errors.hpp"

namespace specmap {

std::string format_double(double v) {
    if (std::isnan(v)) return "null";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void escape_string(const std::string& s, std::string& out) {
    out.push_back('"');
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                    out += buf;
                } else {
                    out.push_back(ch);
                }
        }
    }
    out.push_back('"');
}

void dump(const nlohmann::ordered_json& v, int indent, int depth, std::string& out) {
    const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    const std::string closing_pad(static_cast<std::size_t>(indent) * depth, ' ');
    switch (v.type()) {
        case nlohmann::ordered_json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [key, child] : v.items()) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                escape_string(key, out);
                out += ": ";
                dump(child, indent, depth + 1, out);
            }
            out += "\n" + closing_pad + "}";
            return;
        }
        case nlohmann::ordered_json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& child : v) {
                if (!first) out += ",\n";
                first = false;
                out += pad;
                dump(child, indent, depth + 1, out);
            }
            out += "\n" + closing_pad + "]";
            return;
        }
        case nlohmann::ordered_json::value_t::string:
            escape_string(v.get<std::string>(), out);
            return;
        case nlohmann::ordered_json::value_t::number_float:
            out += format_double(v.get<double>());
            return;
        case nlohmann::ordered_json::value_t::number_integer:
            out += std::to_string(v.get<std::int64_t>());
            return;
        case nlohmann::ordered_json::value_t::number_unsigned:
            out += std::to_string(v.get<std::uint64_t>());
            return;
        case nlohmann::ordered_json::value_t::boolean:
            out += v.get<bool>() ? "true" : "false";
            return;
        default:
            out += "null";
            return;
    }
}

}  // namespace

std::string dump_deterministic(const nlohmann::ordered_json& value, int indent) {
    std::string out;
    dump(value, indent, 0, out);
    out += "\n";
    return out;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ScenarioError("cannot open output file for writing: " + path);
    out << contents;
    if (!out) throw ScenarioError("failed while writing output file: " + path);
}

}  // namespace specmap
