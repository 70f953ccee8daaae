#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dsm/scale.hpp"

namespace dsm {

/// A⁻¹(u) was requested at a point where the coefficient it divides by is too small.
class DegenerateCoefficient : public std::runtime_error {
public:
    DegenerateCoefficient(double min_value, double guard);

    [[nodiscard]] double min_value() const noexcept { return min_value_; }
    [[nodiscard]] double guard() const noexcept { return guard_; }

private:
    double min_value_;
    double guard_;
};

/// Nonlinear map F: H_a -> H_{a+delta} on a fixed grid, with its Fréchet derivative A(u) = F'(u)
/// and an explicit inverse A⁻¹(u).
///
/// The public methods check grids and forward to the do_* hooks. Instances are immutable.
class ScaleOperator {
public:
    ScaleOperator(std::size_t grid_size, ScaleIndex domain, int smoothing_gain);
    virtual ~ScaleOperator() = default;

    ScaleOperator(const ScaleOperator&) = delete;
    ScaleOperator& operator=(const ScaleOperator&) = delete;

    [[nodiscard]] virtual std::string_view id() const noexcept = 0;

    [[nodiscard]] std::size_t grid_size() const noexcept { return grid_size_; }
    [[nodiscard]] ScaleIndex domain_index() const noexcept { return domain_; }
    [[nodiscard]] int smoothing_gain() const noexcept { return gain_; }
    [[nodiscard]] ScaleIndex image_index() const { return domain_.shifted(gain_); }

    /// F(u)
    [[nodiscard]] GridFunction eval(const GridFunction& u) const;
    /// A(u)q, linear in q.
    [[nodiscard]] GridFunction apply_derivative(const GridFunction& u, const GridFunction& q) const;
    /// A⁻¹(u)ψ. May throw DegenerateCoefficient.
    [[nodiscard]] GridFunction solve_derivative(const GridFunction& u, const GridFunction& psi) const;

protected:
    virtual GridFunction do_eval(const GridFunction& u) const = 0;
    virtual GridFunction do_apply_derivative(const GridFunction& u, const GridFunction& q) const = 0;
    virtual GridFunction do_solve_derivative(const GridFunction& u, const GridFunction& psi) const = 0;

private:
    void check_grid(const GridFunction& f) const;

    std::size_t grid_size_;
    ScaleIndex domain_;
    int gain_;
};

/// F(u) = ∫₀ˣ u², A(u)q = 2∫₀ˣ u q, A⁻¹(u)ψ = ψ'/(2u). Fixed at a = 1, delta = 1.
class QuadraticVolterra final : public ScaleOperator {
public:
    static constexpr double default_u_min = 0.1;

    explicit QuadraticVolterra(std::size_t grid_size, double u_min = default_u_min);

    [[nodiscard]] std::string_view id() const noexcept override { return "volterra-quadratic"; }
    [[nodiscard]] double u_min() const noexcept { return u_min_; }

protected:
    GridFunction do_eval(const GridFunction& u) const override;
    GridFunction do_apply_derivative(const GridFunction& u, const GridFunction& q) const override;
    GridFunction do_solve_derivative(const GridFunction& u, const GridFunction& psi) const override;

private:
    double u_min_;
};

/// Linear diagnostic operator: F(u) = ∫₀ˣ u, A(u) = F for every u, A⁻¹ψ = ψ'. a = 1, delta = 1.
class LinearSmoothing final : public ScaleOperator {
public:
    explicit LinearSmoothing(std::size_t grid_size);

    [[nodiscard]] std::string_view id() const noexcept override { return "linear-smoothing"; }

protected:
    GridFunction do_eval(const GridFunction& u) const override;
    GridFunction do_apply_derivative(const GridFunction& u, const GridFunction& q) const override;
    GridFunction do_solve_derivative(const GridFunction& u, const GridFunction& psi) const override;
};

/// Builds an operator from its CLI id (`volterra-quadratic`, `linear-smoothing`).
/// u_min only applies to the Volterra operator.
[[nodiscard]] std::shared_ptr<const ScaleOperator> make_operator(std::string_view id, std::size_t grid_size,
                                                                 double u_min = QuadraticVolterra::default_u_min);

/// Operator, reference solution U, cached f = F(U), and the working ball B_a(U, R).
class ProblemSetup {
public:
    ProblemSetup(std::shared_ptr<const ScaleOperator> op, GridFunction reference, double radius);
    /// Accepts a precomputed f; throws if ||F(U) - f||_{a+delta} > 1e-10.
    ProblemSetup(std::shared_ptr<const ScaleOperator> op, GridFunction reference, GridFunction image,
                 double radius);

    [[nodiscard]] const ScaleOperator& op() const noexcept { return *op_; }
    [[nodiscard]] std::shared_ptr<const ScaleOperator> op_ptr() const noexcept { return op_; }
    [[nodiscard]] const GridFunction& reference() const noexcept { return reference_; }
    [[nodiscard]] const GridFunction& image() const noexcept { return image_; }
    [[nodiscard]] double radius() const noexcept { return radius_; }
    [[nodiscard]] ScaleIndex domain_index() const noexcept { return op_->domain_index(); }
    [[nodiscard]] ScaleIndex image_index() const { return op_->image_index(); }
    [[nodiscard]] std::size_t grid_size() const noexcept { return op_->grid_size(); }

private:
    std::shared_ptr<const ScaleOperator> op_;
    GridFunction reference_;
    GridFunction image_;
    double radius_;
};

/// -A⁻¹(u)(F(u) - h), the right-hand side of the Newton flow.
[[nodiscard]] GridFunction dsm_vector_field(const ProblemSetup& p, const GridFunction& u, const GridFunction& h);

}  // namespace dsm
