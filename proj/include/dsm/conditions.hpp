#pragma once

#include <cstdint>

#include "dsm/operators.hpp"

namespace dsm {

/// Sampled estimates of the constants in the isomorphism and Lipschitz conditions on B_a(U, R):
///
///   c0 ||q||_a <= ||A(u)q||_{a+delta} <= c0' ||q||_a
///   ||A⁻¹(v)A(w)q||_a <= c_iso ||q||_a
///   ||A⁻¹(u)[A(u) - A(v)]q||_a <= c_lip ||u - v||_a ||q||_a
///
/// These are empirical bounds over the drawn directions, not certificates.
struct ConstantsReport {
    double c0_lower = 0.0;
    double c0_upper = 0.0;
    double c_iso = 0.0;
    double c_lip = 0.0;
    double rho0 = 0.0;
    double radius = 0.0;
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;
    std::size_t skipped = 0;
};

/// Per-sample ratios, exposed so tests can look at every sample rather than only the extremes.
struct ConstantSample {
    double isomorphism_ratio;  ///< ||A(u)q||_{a+delta} / ||q||_a
    double iso_ratio;          ///< ||A⁻¹(v)A(w)q||_a / ||q||_a
    double lip_ratio;          ///< ||A⁻¹(u)[A(u)-A(v)]q||_a / (||u-v||_a ||q||_a)
};

/// Draws u, v, w in B_a(U, R) and a unit direction q for sample `index`; throws DegenerateCoefficient
/// when a guard is violated.
[[nodiscard]] ConstantSample sample_constants(const ProblemSetup& p, std::uint64_t seed, std::uint64_t index);

/// Requires sample_count >= 10; throws std::runtime_error if every sample violated a guard.
[[nodiscard]] ConstantsReport estimate_constants(const ProblemSetup& p, std::size_t sample_count,
                                                 std::uint64_t seed);

/// Admissibility radius R / (1 + (1 + c0')/c0).
[[nodiscard]] double rho_max(double radius, double c0, double c0_prime);

/// r = g0 / c0, the bound on the total path length of the flow.
[[nodiscard]] double r_bound(double g0, double c0);

struct AdmissibilityVerdict {
    double rho0 = 0.0;
    double dist_u0 = 0.0;   ///< ||u0 - U||_a
    double dist_h = 0.0;    ///< ||h - f||_{a+delta}
    double rho_eff = 0.0;   ///< max(dist_u0, dist_h)
    double g0 = 0.0;        ///< ||F(u0) - h||_{a+delta}
    double r = 0.0;
    double R_required = 0.0;  ///< r + rho_eff
    bool radius_sufficient = false;  ///< R >= r + rho_eff
    bool admissible = false;         ///< rho_eff <= rho0
    double margin = 0.0;             ///< rho0 - rho_eff
};

/// Pure comparison step, separated so the decision rule can be checked on constructed distances.
[[nodiscard]] AdmissibilityVerdict judge_admissibility(double dist_u0, double dist_h, double g0, double rho0,
                                                       double c0, double radius);

[[nodiscard]] AdmissibilityVerdict admissibility_check(const ProblemSetup& p, const GridFunction& u0,
                                                       const GridFunction& h, const ConstantsReport& report);

}  // namespace dsm
