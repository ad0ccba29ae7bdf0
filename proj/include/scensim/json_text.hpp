#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

namespace scensim {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

std::string format_int(std::int64_t value);

/// Appends `text` with JSON string escaping (no surrounding quotes).
void append_json_escaped(std::string& out, std::string_view text);

/// Serializes a JSON value with deterministic bytes: object keys in map
/// order, doubles via format_double, no whitespace.
std::string canonical_dump(const nlohmann::json& value);

} // namespace scensim
