#include "odmforge/core/text.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "odmforge/core/error.hpp"

namespace odmforge::core {

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    return std::string(buf, ptr);
}

std::string format_fixed(double value, int decimals) {
    if (!std::isfinite(value)) return format_double(value);
    char buf[80];
    // glibc printf rounds the exact binary value to nearest, ties to even.
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s(buf);
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') s.pop_back();
        if (s.back() == '.') s.pop_back();
    }
    if (s == "-0") s = "0";
    return s;
}

double parse_double(std::string_view text) {
    double value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        fail(Errc::malformed_row, "bad number '" + std::string(text) + "'");
    return value;
}

long long parse_int(std::string_view text) {
    long long value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        fail(Errc::malformed_row, "bad integer '" + std::string(text) + "'");
    return value;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    size_t begin = 0;
    while (true) {
        size_t pos = text.find(sep, begin);
        if (pos == std::string_view::npos) {
            out.emplace_back(text.substr(begin));
            return out;
        }
        out.emplace_back(text.substr(begin, pos - begin));
        begin = pos + 1;
    }
}

std::string to_lower(std::string_view text) {
    std::string out(text);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

} // namespace odmforge::core
