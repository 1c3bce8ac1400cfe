#pragma once

#include <charconv>
#include <optional>
#include <string>

namespace smaepa {

// Shortest round-trip decimal form; identical bytes on every run.
inline std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, ptr};
}

// Undefined values print as an empty CSV cell.
inline std::string format_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string{}; }

} // namespace smaepa
