#include "report.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "dsm/text.hpp"

namespace dsm::cli {

namespace {

void emit(const Json& v, int depth, std::string& out) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(2 * depth), ' ');
    switch (v.type()) {
    case Json::value_t::object: {
        if (v.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto& [key, item] : v.items()) {
            if (!first) {
                out += ",\n";
            }
            first = false;
            out += pad + Json(key).dump() + ": ";
            emit(item, depth + 1, out);
        }
        out += "\n" + close_pad + "}";
        return;
    }
    case Json::value_t::array: {
        if (v.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i > 0) {
                out += ",\n";
            }
            out += pad;
            emit(v[i], depth + 1, out);
        }
        out += "\n" + close_pad + "]";
        return;
    }
    case Json::value_t::number_float: {
        const double d = v.get<double>();
        out += std::isfinite(d) ? format_real(d) : "null";
        return;
    }
    default:
        out += v.dump();
        return;
    }
}

}  // namespace

std::string dump_report(const Json& value) {
    std::string out;
    emit(value, 0, out);
    out += '\n';
    return out;
}

void write_report(const std::filesystem::path& path, const Json& value) {
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    file << dump_report(value);
    if (!file) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

}  // namespace dsm::cli
