#include "dsm/text.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace dsm {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

double parse_real(std::string_view field, const std::string& file, std::size_t line) {
    const std::string text = trim(field);
    if (text.empty()) {
        throw std::runtime_error(file + ":" + std::to_string(line) + ": empty field");
    }
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v)) {
        throw std::runtime_error(file + ":" + std::to_string(line) + ": not a finite number: '" +
                                 text + "'");
    }
    return v;
}

}  // namespace dsm
