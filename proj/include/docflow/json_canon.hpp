#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <json.hpp>

namespace docflow {

using json = nlohmann::json;

// Canonical JSON rendering used for every persisted byte in the project:
// object keys in sorted order (nlohmann's default map iteration), floating
// point numbers fixed to 3 decimal places, integers unscaled, strings as raw
// UTF-8 with only the mandatory escapes. Two structurally equal values always
// produce identical bytes, and the bytes parse back to an equal value.

namespace detail {

inline void canon_escape(const std::string& s, std::string& out) {
    out.push_back('"');
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out.push_back(static_cast<char>(c));
                }
        }
    }
    out.push_back('"');
}

inline void canon_float(double v, std::string& out) {
    if (!std::isfinite(v)) { // canonical form has no room for inf/nan
        out += "null";
        return;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    // -0.000 and 0.000 are the same value; keep one spelling.
    if (buf[0] == '-' && std::strtod(buf, nullptr) == 0.0) {
        out += buf + 1;
    } else {
        out += buf;
    }
}

inline void canon_write(const json& j, std::string& out) {
    switch (j.type()) {
        case json::value_t::null: out += "null"; break;
        case json::value_t::boolean: out += (j.get<bool>() ? "true" : "false"); break;
        case json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); break;
        case json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); break;
        case json::value_t::number_float: canon_float(j.get<double>(), out); break;
        case json::value_t::string: canon_escape(j.get_ref<const std::string&>(), out); break;
        case json::value_t::array: {
            out.push_back('[');
            bool first = true;
            for (const auto& el : j) {
                if (!first) out.push_back(',');
                first = false;
                canon_write(el, out);
            }
            out.push_back(']');
            break;
        }
        case json::value_t::object: {
            out.push_back('{');
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out.push_back(',');
                first = false;
                canon_escape(it.key(), out);
                out.push_back(':');
                canon_write(it.value(), out);
            }
            out.push_back('}');
            break;
        }
        default: out += "null"; break;
    }
}

} // namespace detail

inline std::string canonical_dump(const json& j) {
    std::string out;
    out.reserve(256);
    detail::canon_write(j, out);
    return out;
}

} // namespace docflow
