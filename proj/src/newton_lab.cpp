#include "dsm/newton_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dsm/flow.hpp"
#include "dsm/text.hpp"

namespace dsm {

GridFunction newton_step(const ProblemSetup& p, const GridFunction& u, const GridFunction& h) {
    const ScaleOperator& op = p.op();
    return u - op.solve_derivative(u, op.eval(u) - h);
}

IterationRecord newton_solve(const ProblemSetup& p, const GridFunction& u0, const GridFunction& h, int max_iter,
                             double tol, const std::optional<GridFunction>& oracle) {
    require_same_grid(u0, p.reference());
    require_same_grid(h, p.reference());
    if (oracle) {
        require_same_grid(*oracle, p.reference());
    }
    const ScaleIndex a = p.domain_index();
    IterationRecord rec;
    auto push = [&](int k, const GridFunction& u, double res) {
        std::optional<double> dist;
        if (oracle) {
            dist = ball_distance(u, *oracle, a);
        }
        rec.iterates.push_back({k, res, dist});
        rec.states.push_back(u);
    };

    GridFunction u = u0;
    double res = residual(p, u, h);
    push(0, u, res);
    if (res <= tol) {
        rec.converged = true;
        return rec;
    }
    for (int k = 1; k <= max_iter; ++k) {
        try {
            u = newton_step(p, u, h);
        } catch (const DegenerateCoefficient&) {
            rec.diverged_at = k;
            return rec;
        } catch (const NonFiniteValue&) {
            rec.diverged_at = k;
            return rec;
        }
        res = residual(p, u, h);
        if (!std::isfinite(res)) {
            rec.diverged_at = k;
            return rec;
        }
        push(k, u, res);
        if (res > kDivergenceResidual) {
            rec.diverged_at = k;
            return rec;
        }
        if (res <= tol) {
            rec.converged = true;
            return rec;
        }
    }
    return rec;
}

GridFunction PointwiseMap::operator()(const GridFunction& z) const {
    return z.map([this](double, double v) { return phi(v); });
}

void ClassicalIFTConfig::validate() const {
    if (!(m > 0.0) || !(epsilon > 0.0)) {
        throw std::invalid_argument("classical IFT needs m > 0 and epsilon > 0");
    }
    if (max_iter < 1 || !(tol > 0.0)) {
        throw std::invalid_argument("classical IFT needs max_iter >= 1 and tol > 0");
    }
}

ContractionResult contraction_solve(const PointwiseMap& phi, const GridFunction& rhs, const ClassicalIFTConfig& cfg) {
    cfg.validate();
    if (phi.slope_at_zero == 0.0) {
        throw std::invalid_argument("phi'(0) must be invertible");
    }
    const double inverse = 1.0 / phi.slope_at_zero;
    if (cfg.m < std::abs(inverse)) {
        throw std::invalid_argument("m = " + format_real(cfg.m) + " does not bound |phi'(0)^-1| = " +
                                    format_real(std::abs(inverse)));
    }
    const double rhs_norm = max_norm(rhs);
    if (!(cfg.m * rhs_norm < 0.5 * cfg.epsilon)) {
        throw std::invalid_argument("right-hand side too large: m ||p|| = " + format_real(cfg.m * rhs_norm) +
                                    " must be below epsilon/2 = " + format_real(0.5 * cfg.epsilon));
    }

    ContractionResult out{.z = GridFunction::constant(rhs.size(), 0.0), .iterate_norms = {}, .step_norms = {}};
    out.iterate_norms.push_back(0.0);
    for (int k = 1; k <= cfg.max_iter; ++k) {
        GridFunction next = out.z - inverse * (phi(out.z) - rhs);
        const double step = max_norm(next - out.z);
        if (!out.step_norms.empty() && out.step_norms.back() > 0.0) {
            out.max_contraction = std::max(out.max_contraction, step / out.step_norms.back());
        }
        out.step_norms.push_back(step);
        out.z = std::move(next);
        out.iterations = k;
        const double norm = max_norm(out.z);
        out.iterate_norms.push_back(norm);
        if (norm > cfg.epsilon) {
            throw ContractionFailure("iterate " + std::to_string(k) + " left the ball: ||z|| = " + format_real(norm) +
                                     " > epsilon = " + format_real(cfg.epsilon));
        }
        if (max_norm(phi(out.z) - rhs) <= cfg.tol) {
            return out;
        }
    }
    throw ContractionFailure("no convergence within " + std::to_string(cfg.max_iter) + " iterations");
}

LossProbe smoothing_loss_probe(const ProblemSetup& p, const GridFunction& u, int k_max) {
    require_same_grid(u, p.reference());
    const std::size_t n = p.grid_size();
    const double dx = 1.0 / static_cast<double>(n - 1);
    if (k_max < 2) {
        throw std::invalid_argument("loss probe needs k_max >= 2 to fit an exponent");
    }
    if (k_max * std::numbers::pi * dx > 0.5) {
        throw std::invalid_argument("mode k = " + std::to_string(k_max) + " is under-resolved on " +
                                    std::to_string(n) + " nodes (need k_max·π·Δx <= 0.5)");
    }
    const ScaleIndex a = p.domain_index();
    const ScaleIndex b = p.image_index();

    LossProbe probe;
    for (int k = 0; k <= k_max; ++k) {
        const GridFunction psi = k == 0 ? GridFunction::constant(n, 1.0) : GridFunction::sample(n, [k](double x) {
            return std::sin(k * std::numbers::pi * x);
        });
        const double image = sobolev_norm(p.op().solve_derivative(u, psi), a);
        probe.rows.push_back({k, image / sobolev_norm(psi, a), image / sobolev_norm(psi, b)});
    }

    double mean_x = 0.0;
    double mean_y = 0.0;
    for (int k = 1; k <= k_max; ++k) {
        mean_x += std::log(static_cast<double>(k));
        mean_y += std::log(probe.rows[k].ratio_same_index);
    }
    mean_x /= k_max;
    mean_y /= k_max;
    double sxx = 0.0;
    double sxy = 0.0;
    for (int k = 1; k <= k_max; ++k) {
        const double dx_log = std::log(static_cast<double>(k)) - mean_x;
        sxx += dx_log * dx_log;
        sxy += dx_log * (std::log(probe.rows[k].ratio_same_index) - mean_y);
    }
    probe.growth_exponent = sxy / sxx;

    const double base = probe.rows[1].ratio_shifted_index;
    probe.shifted_min_rel = probe.shifted_max_rel = 1.0;
    for (int k = 1; k <= k_max; ++k) {
        const double rel = probe.rows[k].ratio_shifted_index / base;
        probe.shifted_min_rel = std::min(probe.shifted_min_rel, rel);
        probe.shifted_max_rel = std::max(probe.shifted_max_rel, rel);
    }
    return probe;
}

}  // namespace dsm
