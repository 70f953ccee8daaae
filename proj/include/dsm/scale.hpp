#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsm {

/// Raised when two grid functions (or a grid function and an operator) disagree on the grid size.
class GridMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a grid function would hold a NaN or infinite value.
class NonFiniteValue : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Integer Sobolev index on (0,1). Only H_0, H_1 and H_2 are supported.
class ScaleIndex {
public:
    explicit ScaleIndex(int value);

    [[nodiscard]] int value() const noexcept { return value_; }
    [[nodiscard]] ScaleIndex shifted(int delta) const { return ScaleIndex(value_ + delta); }

    friend bool operator==(ScaleIndex, ScaleIndex) = default;

    static constexpr int max_supported = 2;

private:
    int value_;
};

/// Real function sampled on the uniform grid x_i = i/(n-1), i = 0..n-1.
///
/// Values are immutable once constructed; every operation returns a new instance.
class GridFunction {
public:
    /// Throws std::invalid_argument if values.size() < 3, NonFiniteValue if any value is NaN/Inf.
    explicit GridFunction(std::vector<double> values);

    /// Samples fn at the n grid nodes.
    static GridFunction sample(std::size_t n, const std::function<double(double)>& fn);
    static GridFunction constant(std::size_t n, double c);

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double spacing() const noexcept { return 1.0 / static_cast<double>(values_.size() - 1); }
    [[nodiscard]] double node(std::size_t i) const noexcept;
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return values_[i]; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    [[nodiscard]] double min_value() const noexcept;
    [[nodiscard]] double max_abs() const noexcept;

    /// Elementwise map with the node coordinate available.
    [[nodiscard]] GridFunction map(const std::function<double(double x, double v)>& fn) const;

    friend GridFunction operator+(const GridFunction& lhs, const GridFunction& rhs);
    friend GridFunction operator-(const GridFunction& lhs, const GridFunction& rhs);
    /// Pointwise product.
    friend GridFunction operator*(const GridFunction& lhs, const GridFunction& rhs);
    /// Pointwise quotient; the caller guarantees rhs has no zero nodes.
    friend GridFunction operator/(const GridFunction& lhs, const GridFunction& rhs);
    friend GridFunction operator*(double s, const GridFunction& f);
    friend GridFunction operator-(const GridFunction& f);

    friend bool operator==(const GridFunction&, const GridFunction&) = default;

private:
    std::vector<double> values_;
};

/// Throws GridMismatch unless both functions live on the same grid.
void require_same_grid(const GridFunction& lhs, const GridFunction& rhs);

/// Second-order derivative: central differences inside, one-sided three-point stencils at both ends.
[[nodiscard]] GridFunction derivative(const GridFunction& f);

/// Cumulative trapezoid integral from x = 0; result[0] == 0.
[[nodiscard]] GridFunction integrate_from_zero(const GridFunction& f);

/// Trapezoid quadrature of f over [0,1].
[[nodiscard]] double trapezoid(const GridFunction& f);

/// (sum_{j<=a} ||f^(j)||_0^2)^(1/2), with ||.||_0 the trapezoid L2(0,1) norm and f^(j) the j-fold discrete derivative.
[[nodiscard]] double sobolev_norm(const GridFunction& f, ScaleIndex a);

/// ||u - center||_a
[[nodiscard]] double ball_distance(const GridFunction& u, const GridFunction& center, ScaleIndex a);

/// Largest |f_i| over the nodes.
[[nodiscard]] double max_norm(const GridFunction& f);

// Grid-function CSV: header `x,value`, one row per node in increasing x.

void write_grid_csv(const std::filesystem::path& path, const GridFunction& f);

/// Rejects a missing header, unsorted rows, a non-uniform grid (relative spacing deviation above 1e-9),
/// grids not starting at 0 and ending at 1, and non-finite values.
[[nodiscard]] GridFunction read_grid_csv(const std::filesystem::path& path);

}  // namespace dsm
