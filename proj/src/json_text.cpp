#include "scensim/json_text.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace scensim {

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

std::string format_int(std::int64_t value) {
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

void append_json_escaped(std::string& out, std::string_view text) {
    for (unsigned char c : text) {
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
                    char hex[8];
                    std::snprintf(hex, sizeof(hex), "\\u%04x", c);
                    out += hex;
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
}

namespace {

void dump_value(std::string& out, const nlohmann::json& v) {
    using value_t = nlohmann::json::value_t;
    switch (v.type()) {
        case value_t::null: out += "null"; break;
        case value_t::boolean: out += v.get<bool>() ? "true" : "false"; break;
        case value_t::number_integer: out += format_int(v.get<std::int64_t>()); break;
        case value_t::number_unsigned: {
            std::array<char, 32> buf{};
            auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v.get<std::uint64_t>());
            out.append(buf.data(), res.ptr);
            break;
        }
        case value_t::number_float: out += format_double(v.get<double>()); break;
        case value_t::string:
            out += '"';
            append_json_escaped(out, v.get_ref<const std::string&>());
            out += '"';
            break;
        case value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& item : v) {
                if (!first) out += ',';
                first = false;
                dump_value(out, item);
            }
            out += ']';
            break;
        }
        case value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out += ',';
                first = false;
                out += '"';
                append_json_escaped(out, it.key());
                out += "\":";
                dump_value(out, it.value());
            }
            out += '}';
            break;
        }
        default: out += "null"; break;
    }
}

} // namespace

std::string canonical_dump(const nlohmann::json& value) {
    std::string out;
    dump_value(out, value);
    return out;
}

} // namespace scensim
