#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace dsm::cli {

using Json = nlohmann::ordered_json;

// Serializes with two-space indentation; floating-point values use 17 significant digits
// and non-finite values become null.
[[nodiscard]] std::string dump_report(const Json& value);

void write_report(const std::filesystem::path& path, const Json& value);

}  // namespace dsm::cli
