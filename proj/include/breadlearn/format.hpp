#pragma once

#include <charconv>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace breadlearn {

// Shortest decimal text that parses back to the identical double.
struct Exact {
    double value;
};

inline Exact exact(double v) noexcept { return Exact{v}; }

inline std::ostream& operator<<(std::ostream& os, Exact e) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, e.value);
    return os.write(buf, ptr - buf);
}

inline std::string to_exact_string(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    }
    return v;
}

inline long long parse_int(std::string_view text) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace breadlearn
