#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace dsm {

/// 17 significant digits, enough for a double to survive a text round trip.
[[nodiscard]] std::string format_real(double v);

[[nodiscard]] std::string trim(std::string_view s);

/// Parses a full-field double; throws std::runtime_error naming file and line on failure.
[[nodiscard]] double parse_real(std::string_view field, const std::string& file, std::size_t line);

}  // namespace dsm
