#include "dsm/scale.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dsm/text.hpp"

namespace dsm {

ScaleIndex::ScaleIndex(int value) : value_(value) {
    if (value < 0 || value > max_supported) {
        throw std::invalid_argument("unsupported Sobolev index " + std::to_string(value) +
                                    " (supported: 0, 1, 2)");
    }
}

GridFunction::GridFunction(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 3) {
        throw std::invalid_argument("grid function needs at least 3 nodes, got " +
                                    std::to_string(values_.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw NonFiniteValue("grid function value at node " + std::to_string(i) +
                                 " is not finite");
        }
    }
}

GridFunction GridFunction::sample(std::size_t n, const std::function<double(double)>& fn) {
    if (n < 3) {
        throw std::invalid_argument("grid needs at least 3 nodes");
    }
    std::vector<double> v(n);
    const double dx = 1.0 / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = fn(static_cast<double>(i) * dx);
    }
    return GridFunction(std::move(v));
}

GridFunction GridFunction::constant(std::size_t n, double c) {
    if (n < 3) {
        throw std::invalid_argument("grid needs at least 3 nodes");
    }
    return GridFunction(std::vector<double>(n, c));
}

double GridFunction::node(std::size_t i) const noexcept {
    return static_cast<double>(i) * spacing();
}

double GridFunction::min_value() const noexcept {
    return *std::min_element(values_.begin(), values_.end());
}

double GridFunction::max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

GridFunction GridFunction::map(const std::function<double(double, double)>& fn) const {
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        out[i] = fn(node(i), values_[i]);
    }
    return GridFunction(std::move(out));
}

void require_same_grid(const GridFunction& lhs, const GridFunction& rhs) {
    if (lhs.size() != rhs.size()) {
        throw GridMismatch("grid mismatch: " + std::to_string(lhs.size()) + " vs " +
                           std::to_string(rhs.size()) + " nodes");
    }
}

namespace {

template <typename Op>
GridFunction zip(const GridFunction& lhs, const GridFunction& rhs, Op op) {
    require_same_grid(lhs, rhs);
    std::vector<double> out(lhs.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = op(lhs[i], rhs[i]);
    }
    return GridFunction(std::move(out));
}

}  // namespace

GridFunction operator+(const GridFunction& lhs, const GridFunction& rhs) {
    return zip(lhs, rhs, [](double a, double b) { return a + b; });
}

GridFunction operator-(const GridFunction& lhs, const GridFunction& rhs) {
    return zip(lhs, rhs, [](double a, double b) { return a - b; });
}

GridFunction operator*(const GridFunction& lhs, const GridFunction& rhs) {
    return zip(lhs, rhs, [](double a, double b) { return a * b; });
}

GridFunction operator/(const GridFunction& lhs, const GridFunction& rhs) {
    return zip(lhs, rhs, [](double a, double b) { return a / b; });
}

GridFunction operator*(double s, const GridFunction& f) {
    std::vector<double> out(f.values().begin(), f.values().end());
    for (double& v : out) {
        v *= s;
    }
    return GridFunction(std::move(out));
}

GridFunction operator-(const GridFunction& f) {
    std::vector<double> out(f.values().begin(), f.values().end());
    for (double& v : out) {
        v = -v;
    }
    return GridFunction(std::move(out));
}

GridFunction derivative(const GridFunction& f) {
    const std::size_t n = f.size();
    const double inv_2h = 0.5 / f.spacing();
    std::vector<double> d(n);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * inv_2h;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        d[i] = (f[i + 1] - f[i - 1]) * inv_2h;
    }
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * inv_2h;
    return GridFunction(std::move(d));
}

GridFunction integrate_from_zero(const GridFunction& f) {
    const double half_h = 0.5 * f.spacing();
    std::vector<double> out(f.size());
    out[0] = 0.0;
    // Neumaier-compensated running sum; differences F(u) - F(v) of nearby arguments would
    // otherwise carry O(n·eps) accumulated rounding.
    double sum = 0.0;
    double carry = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i) {
        const double term = half_h * (f[i - 1] + f[i]);
        const double next = sum + term;
        carry += std::abs(sum) >= std::abs(term) ? (sum - next) + term : (term - next) + sum;
        sum = next;
        out[i] = sum + carry;
    }
    return GridFunction(std::move(out));
}

double trapezoid(const GridFunction& f) {
    const std::size_t n = f.size();
    double interior = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        interior += f[i];
    }
    return f.spacing() * (0.5 * (f[0] + f[n - 1]) + interior);
}

namespace {

double squared_l2(const GridFunction& f) {
    const std::size_t n = f.size();
    double interior = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        interior += f[i] * f[i];
    }
    return f.spacing() * (0.5 * (f[0] * f[0] + f[n - 1] * f[n - 1]) + interior);
}

}  // namespace

double sobolev_norm(const GridFunction& f, ScaleIndex a) {
    double sum = squared_l2(f);
    if (a.value() >= 1) {
        GridFunction d = derivative(f);
        sum += squared_l2(d);
        if (a.value() >= 2) {
            sum += squared_l2(derivative(d));
        }
    }
    return std::sqrt(sum);
}

double ball_distance(const GridFunction& u, const GridFunction& center, ScaleIndex a) {
    return sobolev_norm(u - center, a);
}

double max_norm(const GridFunction& f) {
    return f.max_abs();
}

void write_grid_csv(const std::filesystem::path& path, const GridFunction& f) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << "x,value\n";
    for (std::size_t i = 0; i < f.size(); ++i) {
        out << format_real(f.node(i)) << ',' << format_real(f[i]) << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

GridFunction read_grid_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || trim(line) != "x,value") {
        throw std::runtime_error(path.string() + ": expected header 'x,value'");
    }
    std::vector<double> xs;
    std::vector<double> vs;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string row = trim(line);
        if (row.empty()) {
            continue;
        }
        const auto comma = row.find(',');
        if (comma == std::string::npos || row.find(',', comma + 1) != std::string::npos) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected two columns");
        }
        xs.push_back(parse_real(row.substr(0, comma), path.string(), line_no));
        vs.push_back(parse_real(row.substr(comma + 1), path.string(), line_no));
    }
    if (xs.size() < 3) {
        throw std::runtime_error(path.string() + ": need at least 3 rows");
    }
    const double h = 1.0 / static_cast<double>(xs.size() - 1);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double expected = static_cast<double>(i) * h;
        if (std::abs(xs[i] - expected) > 1e-9 * h) {
            throw std::runtime_error(path.string() + ": row " + std::to_string(i + 1) +
                                     " is off the uniform grid on [0,1] (x=" + format_real(xs[i]) +
                                     ", expected " + format_real(expected) + ")");
        }
    }
    return GridFunction(std::move(vs));
}

}  // namespace dsm
