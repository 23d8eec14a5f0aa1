#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace odmforge::core {

/// Shortest decimal representation that round-trips the value exactly.
std::string format_double(double value);

/// Fixed-point with round-half-to-even at `decimals` digits; trailing
/// zeros (and a bare trailing dot) are trimmed.
std::string format_fixed(double value, int decimals);

/// Strict double parse: the whole token must be consumed.
double parse_double(std::string_view text);

/// Strict integer parse.
long long parse_int(std::string_view text);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ull);

std::vector<std::string> split(std::string_view text, char sep);

std::string to_lower(std::string_view text);

} // namespace odmforge::core
