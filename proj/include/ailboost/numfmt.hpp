#pragma once

#include <string>
#include <string_view>

namespace ailboost {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Strict parse of a whole token; throws Error on trailing garbage.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

}  // namespace ailboost
