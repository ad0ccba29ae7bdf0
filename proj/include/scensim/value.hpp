#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "scensim/error.hpp"

namespace scensim {

enum class DataType { Boolean, Integer, Double, String, Position, Route };

const char* data_type_name(DataType t);

/// Resolves a type name, accepting fully-qualified aliases such as
/// "java.lang.String" alongside the plain names.
std::optional<DataType> data_type_from_name(const std::string& name);

bool is_scalar(DataType t);

struct Position {
    double latitude = 0.0;  // degrees
    double longitude = 0.0; // degrees
    double altitude = 0.0;  // meters
};

struct Route {
    std::vector<Position> waypoints;
};

/// Tagged union holding a typed attribute value. Double comparison is
/// bit-exact so that values surviving an encode/decode round trip compare
/// equal to their originals and nothing else.
class AttributeValue {
public:
    AttributeValue() : v_(false) {}
    AttributeValue(bool b) : v_(b) {}
    AttributeValue(std::int64_t i) : v_(i) {}
    AttributeValue(double d) : v_(d) {}
    AttributeValue(std::string s) : v_(std::move(s)) {}
    AttributeValue(const char* s) : v_(std::string(s)) {}
    AttributeValue(Position p) : v_(p) {}
    AttributeValue(Route r) : v_(std::move(r)) {}

    DataType kind() const;

    bool as_bool() const { return std::get<bool>(v_); }
    std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
    double as_double() const { return std::get<double>(v_); }
    const std::string& as_string() const { return std::get<std::string>(v_); }
    const Position& as_position() const { return std::get<Position>(v_); }
    const Route& as_route() const { return std::get<Route>(v_); }

    Position& as_position() { return std::get<Position>(v_); }

    friend bool operator==(const AttributeValue& a, const AttributeValue& b);
    friend bool operator!=(const AttributeValue& a, const AttributeValue& b) { return !(a == b); }

private:
    std::variant<bool, std::int64_t, double, std::string, Position, Route> v_;
};

bool bits_equal(double a, double b);
bool operator==(const Position& a, const Position& b);
bool operator!=(const Position& a, const Position& b);
bool operator==(const Route& a, const Route& b);

/// Default value for an attribute that a scenario leaves unspecified:
/// numeric zero, false, empty string, origin position.
AttributeValue default_value(DataType t);

/// {"Lat":...,"Lon":...,"Alt":...} with shortest round-trip decimals.
std::string render_position_json(const Position& p);

/// JSON array of position objects; the canonical text form of a route.
std::string render_route_json(const Route& r);

Route parse_route_json(const std::string& text);

/// Scalar wire encoding (Boolean/Integer/Double/String only).
nlohmann::json encode_scalar(const AttributeValue& v);

/// Decodes a wire scalar, enforcing the declared type exactly.
AttributeValue decode_scalar(DataType t, const nlohmann::json& j);

/// Parses typed text as it appears in scenario documents.
AttributeValue parse_scalar_text(DataType t, const std::string& text, const std::string& path);

std::string render_scalar_text(const AttributeValue& v);

} // namespace scensim
