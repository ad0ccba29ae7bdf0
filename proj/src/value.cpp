#include "scensim/value.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <map>

#include "scensim/json_text.hpp"

namespace scensim {

const char* data_type_name(DataType t) {
    switch (t) {
        case DataType::Boolean: return "Boolean";
        case DataType::Integer: return "Integer";
        case DataType::Double: return "Double";
        case DataType::String: return "String";
        case DataType::Position: return "Position";
        case DataType::Route: return "Route";
    }
    return "?";
}

std::optional<DataType> data_type_from_name(const std::string& name) {
    static const std::map<std::string, DataType> table = {
        {"Boolean", DataType::Boolean},
        {"java.lang.Boolean", DataType::Boolean},
        {"Integer", DataType::Integer},
        {"java.lang.Integer", DataType::Integer},
        {"java.lang.Long", DataType::Integer},
        {"Double", DataType::Double},
        {"java.lang.Double", DataType::Double},
        {"String", DataType::String},
        {"java.lang.String", DataType::String},
        {"Position", DataType::Position},
        {"Route", DataType::Route},
    };
    auto it = table.find(name);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

bool is_scalar(DataType t) {
    return t == DataType::Boolean || t == DataType::Integer || t == DataType::Double ||
           t == DataType::String;
}

DataType AttributeValue::kind() const {
    switch (v_.index()) {
        case 0: return DataType::Boolean;
        case 1: return DataType::Integer;
        case 2: return DataType::Double;
        case 3: return DataType::String;
        case 4: return DataType::Position;
        default: return DataType::Route;
    }
}

bool bits_equal(double a, double b) {
    return std::memcmp(&a, &b, sizeof(double)) == 0;
}

bool operator==(const Position& a, const Position& b) {
    return bits_equal(a.latitude, b.latitude) && bits_equal(a.longitude, b.longitude) &&
           bits_equal(a.altitude, b.altitude);
}

bool operator!=(const Position& a, const Position& b) { return !(a == b); }

bool operator==(const Route& a, const Route& b) {
    if (a.waypoints.size() != b.waypoints.size()) return false;
    for (size_t i = 0; i < a.waypoints.size(); ++i)
        if (!(a.waypoints[i] == b.waypoints[i])) return false;
    return true;
}

bool operator==(const AttributeValue& a, const AttributeValue& b) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case DataType::Boolean: return a.as_bool() == b.as_bool();
        case DataType::Integer: return a.as_int() == b.as_int();
        case DataType::Double: return bits_equal(a.as_double(), b.as_double());
        case DataType::String: return a.as_string() == b.as_string();
        case DataType::Position: return a.as_position() == b.as_position();
        case DataType::Route: return a.as_route() == b.as_route();
    }
    return false;
}

AttributeValue default_value(DataType t) {
    switch (t) {
        case DataType::Boolean: return AttributeValue(false);
        case DataType::Integer: return AttributeValue(std::int64_t{0});
        case DataType::Double: return AttributeValue(0.0);
        case DataType::String: return AttributeValue(std::string());
        case DataType::Position: return AttributeValue(Position{});
        case DataType::Route: return AttributeValue(Route{});
    }
    return AttributeValue(false);
}

std::string render_position_json(const Position& p) {
    std::string out = "{\"Lat\":";
    out += format_double(p.latitude);
    out += ",\"Lon\":";
    out += format_double(p.longitude);
    out += ",\"Alt\":";
    out += format_double(p.altitude);
    out += "}";
    return out;
}

std::string render_route_json(const Route& r) {
    std::string out = "[";
    for (size_t i = 0; i < r.waypoints.size(); ++i) {
        if (i) out += ',';
        out += render_position_json(r.waypoints[i]);
    }
    out += "]";
    return out;
}

Route parse_route_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_array())
        throw Error(ErrorCode::DecodeError, "route text is not a JSON array");
    Route route;
    for (const auto& item : j) {
        if (!item.is_object() || !item.contains("Lat") || !item.contains("Lon"))
            throw Error(ErrorCode::DecodeError, "route waypoint missing Lat/Lon");
        Position p;
        p.latitude = item.at("Lat").get<double>();
        p.longitude = item.at("Lon").get<double>();
        p.altitude = item.value("Alt", 0.0);
        route.waypoints.push_back(p);
    }
    return route;
}

nlohmann::json encode_scalar(const AttributeValue& v) {
    switch (v.kind()) {
        case DataType::Boolean: return v.as_bool();
        case DataType::Integer: return v.as_int();
        case DataType::Double: return v.as_double();
        case DataType::String: return v.as_string();
        default:
            throw Error(ErrorCode::DecodeError,
                        std::string("composite value cannot be wire-encoded directly: ") +
                            data_type_name(v.kind()));
    }
}

AttributeValue decode_scalar(DataType t, const nlohmann::json& j) {
    switch (t) {
        case DataType::Boolean:
            if (!j.is_boolean()) throw Error(ErrorCode::DecodeError, "expected boolean");
            return AttributeValue(j.get<bool>());
        case DataType::Integer:
            if (!j.is_number_integer() && !j.is_number_unsigned())
                throw Error(ErrorCode::DecodeError, "expected integer");
            return AttributeValue(j.get<std::int64_t>());
        case DataType::Double:
            if (!j.is_number()) throw Error(ErrorCode::DecodeError, "expected number");
            return AttributeValue(j.get<double>());
        case DataType::String:
            if (!j.is_string()) throw Error(ErrorCode::DecodeError, "expected string");
            return AttributeValue(j.get<std::string>());
        default:
            throw Error(ErrorCode::DecodeError, "composite type has no direct wire form");
    }
}

namespace {

std::string trimmed(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

AttributeValue parse_scalar_text(DataType t, const std::string& text, const std::string& path) {
    const std::string body = (t == DataType::String) ? text : trimmed(text);
    switch (t) {
        case DataType::Boolean: {
            if (body == "true" || body == "1") return AttributeValue(true);
            if (body == "false" || body == "0") return AttributeValue(false);
            throw Error(ErrorCode::ValueTypeMismatch, "'" + body + "' is not a Boolean", path);
        }
        case DataType::Integer: {
            std::int64_t out = 0;
            auto res = std::from_chars(body.data(), body.data() + body.size(), out);
            if (res.ec != std::errc{} || res.ptr != body.data() + body.size())
                throw Error(ErrorCode::ValueTypeMismatch, "'" + body + "' is not an Integer", path);
            return AttributeValue(out);
        }
        case DataType::Double: {
            if (body.empty())
                throw Error(ErrorCode::ValueTypeMismatch, "empty Double value", path);
            char* end = nullptr;
            errno = 0;
            double out = std::strtod(body.c_str(), &end);
            if (end != body.c_str() + body.size() || !std::isfinite(out))
                throw Error(ErrorCode::ValueTypeMismatch, "'" + body + "' is not a finite Double",
                            path);
            return AttributeValue(out);
        }
        case DataType::String:
            return AttributeValue(body);
        default:
            throw Error(ErrorCode::ValueTypeMismatch,
                        std::string(data_type_name(t)) + " is not parsed from plain text", path);
    }
}

std::string render_scalar_text(const AttributeValue& v) {
    switch (v.kind()) {
        case DataType::Boolean: return v.as_bool() ? "true" : "false";
        case DataType::Integer: return format_int(v.as_int());
        case DataType::Double: return format_double(v.as_double());
        case DataType::String: return v.as_string();
        default:
            throw Error(ErrorCode::ValueTypeMismatch, "composite value has no plain text form");
    }
}

} // namespace scensim
