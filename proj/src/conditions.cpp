#include "dsm/conditions.hpp"

#include <algorithm>
#include <limits>

#include "dsm/flow.hpp"
#include "dsm/sampling.hpp"

namespace dsm {

ConstantSample sample_constants(const ProblemSetup& p, std::uint64_t seed, std::uint64_t index) {
    const ScaleOperator& op = p.op();
    const ScaleIndex a = p.domain_index();
    const ScaleIndex b = p.image_index();

    SampleStream stream(seed, index);
    const GridFunction u = stream.point_in_ball(p.reference(), p.radius(), a);
    const GridFunction v = stream.point_in_ball(p.reference(), p.radius(), a);
    const GridFunction w = stream.point_in_ball(p.reference(), p.radius(), a);
    const GridFunction q = stream.unit_direction(p.grid_size(), a);

    const double q_norm = sobolev_norm(q, a);
    const GridFunction au_q = op.apply_derivative(u, q);

    ConstantSample s{};
    s.isomorphism_ratio = sobolev_norm(au_q, b) / q_norm;
    s.iso_ratio = sobolev_norm(op.solve_derivative(v, op.apply_derivative(w, q)), a) / q_norm;
    const GridFunction change = au_q - op.apply_derivative(v, q);
    s.lip_ratio = sobolev_norm(op.solve_derivative(u, change), a) / (ball_distance(u, v, a) * q_norm);
    return s;
}

ConstantsReport estimate_constants(const ProblemSetup& p, std::size_t sample_count, std::uint64_t seed) {
    if (sample_count < 10) {
        throw std::invalid_argument("estimate_constants needs at least 10 samples");
    }
    ConstantsReport report;
    report.radius = p.radius();
    report.sample_count = sample_count;
    report.seed = seed;
    report.c0_lower = std::numeric_limits<double>::infinity();

    for (std::size_t i = 0; i < sample_count; ++i) {
        try {
            const ConstantSample s = sample_constants(p, seed, i);
            report.c0_lower = std::min(report.c0_lower, s.isomorphism_ratio);
            report.c0_upper = std::max(report.c0_upper, s.isomorphism_ratio);
            report.c_iso = std::max(report.c_iso, s.iso_ratio);
            report.c_lip = std::max(report.c_lip, s.lip_ratio);
        } catch (const DegenerateCoefficient&) {
            ++report.skipped;
        }
    }
    if (report.skipped == sample_count) {
        throw std::runtime_error("every sample violated the operator guard; shrink the radius");
    }
    report.rho0 = rho_max(report.radius, report.c0_lower, report.c0_upper);
    return report;
}

double rho_max(double radius, double c0, double c0_prime) {
    if (!(radius > 0.0) || !(c0 > 0.0) || !(c0_prime > 0.0)) {
        throw std::invalid_argument("rho_max needs positive R, c0 and c0'");
    }
    return radius / (1.0 + (1.0 + c0_prime) / c0);
}

double r_bound(double g0, double c0) {
    if (!(c0 > 0.0)) {
        throw std::invalid_argument("r_bound needs c0 > 0");
    }
    if (!(g0 >= 0.0)) {
        throw std::invalid_argument("r_bound needs g0 >= 0");
    }
    return g0 / c0;
}

AdmissibilityVerdict judge_admissibility(double dist_u0, double dist_h, double g0, double rho0, double c0,
                                         double radius) {
    AdmissibilityVerdict v;
    v.rho0 = rho0;
    v.dist_u0 = dist_u0;
    v.dist_h = dist_h;
    v.rho_eff = std::max(dist_u0, dist_h);
    v.g0 = g0;
    v.r = r_bound(g0, c0);
    v.R_required = v.r + v.rho_eff;
    v.radius_sufficient = radius >= v.R_required;
    v.admissible = v.rho_eff <= rho0;
    v.margin = rho0 - v.rho_eff;
    return v;
}

AdmissibilityVerdict admissibility_check(const ProblemSetup& p, const GridFunction& u0, const GridFunction& h,
                                         const ConstantsReport& report) {
    require_same_grid(u0, p.reference());
    require_same_grid(h, p.reference());
    if (report.radius != p.radius()) {
        throw std::invalid_argument("constants report was estimated on a different ball radius");
    }
    return judge_admissibility(ball_distance(u0, p.reference(), p.domain_index()),
                               ball_distance(h, p.image(), p.image_index()), residual(p, u0, h), report.rho0,
                               report.c0_lower, p.radius());
}

}  // namespace dsm
