#include "dsm/operators.hpp"

#include "dsm/text.hpp"

namespace dsm {

DegenerateCoefficient::DegenerateCoefficient(double min_value, double guard)
    : std::runtime_error("degenerate coefficient: min u = " + format_real(min_value) +
                         " is below the guard " + format_real(guard)),
      min_value_(min_value),
      guard_(guard) {}

ScaleOperator::ScaleOperator(std::size_t grid_size, ScaleIndex domain, int smoothing_gain)
    : grid_size_(grid_size), domain_(domain), gain_(smoothing_gain) {
    if (grid_size < 3) {
        throw std::invalid_argument("operator grid needs at least 3 nodes");
    }
    if (smoothing_gain <= 0) {
        throw std::invalid_argument("smoothing gain must be a positive integer");
    }
    (void)image_index();
}

void ScaleOperator::check_grid(const GridFunction& f) const {
    if (f.size() != grid_size_) {
        throw GridMismatch("operator " + std::string(id()) + " is configured for " +
                           std::to_string(grid_size_) + " nodes, got " + std::to_string(f.size()));
    }
}

GridFunction ScaleOperator::eval(const GridFunction& u) const {
    check_grid(u);
    return do_eval(u);
}

GridFunction ScaleOperator::apply_derivative(const GridFunction& u, const GridFunction& q) const {
    check_grid(u);
    check_grid(q);
    return do_apply_derivative(u, q);
}

GridFunction ScaleOperator::solve_derivative(const GridFunction& u, const GridFunction& psi) const {
    check_grid(u);
    check_grid(psi);
    return do_solve_derivative(u, psi);
}

QuadraticVolterra::QuadraticVolterra(std::size_t grid_size, double u_min)
    : ScaleOperator(grid_size, ScaleIndex(1), 1), u_min_(u_min) {
    if (!(u_min > 0.0)) {
        throw std::invalid_argument("u_min guard must be positive");
    }
}

GridFunction QuadraticVolterra::do_eval(const GridFunction& u) const {
    return integrate_from_zero(u * u);
}

GridFunction QuadraticVolterra::do_apply_derivative(const GridFunction& u, const GridFunction& q) const {
    return 2.0 * integrate_from_zero(u * q);
}

GridFunction QuadraticVolterra::do_solve_derivative(const GridFunction& u, const GridFunction& psi) const {
    const double lowest = u.min_value();
    if (lowest < u_min_) {
        throw DegenerateCoefficient(lowest, u_min_);
    }
    return derivative(psi) / (2.0 * u);
}

LinearSmoothing::LinearSmoothing(std::size_t grid_size) : ScaleOperator(grid_size, ScaleIndex(1), 1) {}

GridFunction LinearSmoothing::do_eval(const GridFunction& u) const {
    return integrate_from_zero(u);
}

GridFunction LinearSmoothing::do_apply_derivative(const GridFunction&, const GridFunction& q) const {
    return integrate_from_zero(q);
}

GridFunction LinearSmoothing::do_solve_derivative(const GridFunction&, const GridFunction& psi) const {
    return derivative(psi);
}

std::shared_ptr<const ScaleOperator> make_operator(std::string_view id, std::size_t grid_size, double u_min) {
    if (id == "volterra-quadratic") {
        return std::make_shared<QuadraticVolterra>(grid_size, u_min);
    }
    if (id == "linear-smoothing") {
        return std::make_shared<LinearSmoothing>(grid_size);
    }
    throw std::invalid_argument("unknown operator '" + std::string(id) +
                                "' (expected volterra-quadratic or linear-smoothing)");
}

ProblemSetup::ProblemSetup(std::shared_ptr<const ScaleOperator> op, GridFunction reference, double radius)
    : op_(std::move(op)),
      reference_(std::move(reference)),
      image_(op_ ? op_->eval(reference_) : reference_),
      radius_(radius) {
    if (!op_) {
        throw std::invalid_argument("problem setup needs an operator");
    }
    if (!(radius > 0.0)) {
        throw std::invalid_argument("ball radius must be positive");
    }
}

ProblemSetup::ProblemSetup(std::shared_ptr<const ScaleOperator> op, GridFunction reference, GridFunction image,
                           double radius)
    : ProblemSetup(std::move(op), std::move(reference), radius) {
    require_same_grid(image, image_);
    const double mismatch = sobolev_norm(op_->eval(reference_) - image, image_index());
    if (mismatch > 1e-10) {
        throw std::invalid_argument("f is not F(U): ||F(U) - f|| = " + format_real(mismatch));
    }
    image_ = std::move(image);
}

GridFunction dsm_vector_field(const ProblemSetup& p, const GridFunction& u, const GridFunction& h) {
    const ScaleOperator& op = p.op();
    return -op.solve_derivative(u, op.eval(u) - h);
}

}  // namespace dsm
