#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dsm/operators.hpp"

namespace dsm {

/// u - A⁻¹(u)(F(u) - h). Bit-identical to flow_step(p, u, h, 1.0, Scheme::euler).
[[nodiscard]] GridFunction newton_step(const ProblemSetup& p, const GridFunction& u, const GridFunction& h);

struct IterationEntry {
    int k;
    double residual;
    std::optional<double> dist_to_oracle;
};

struct IterationRecord {
    std::vector<IterationEntry> iterates;
    std::vector<GridFunction> states;
    bool converged = false;
    std::optional<int> diverged_at;
};

/// Residual above which an iteration is declared divergent.
inline constexpr double kDivergenceResidual = 1e6;

/// Plain Newton iteration. Stops at residual <= tol, on divergence (residual > 1e6, a guard
/// violation or a non-finite iterate) or after max_iter steps. Never throws for these outcomes.
/// When an oracle is given, dist_to_oracle = ||u_k - oracle||_a.
[[nodiscard]] IterationRecord newton_solve(const ProblemSetup& p, const GridFunction& u0, const GridFunction& h,
                                           int max_iter, double tol,
                                           const std::optional<GridFunction>& oracle = std::nullopt);

/// Pointwise map z -> phi(z) with phi(0) = 0 and phi'(0) = slope_at_zero != 0.
struct PointwiseMap {
    std::function<double(double)> phi;
    double slope_at_zero = 1.0;

    [[nodiscard]] GridFunction operator()(const GridFunction& z) const;
};

struct ClassicalIFTConfig {
    double m = 1.0;        ///< bound on ||[phi'(0)]⁻¹||
    double epsilon = 0.25; ///< radius of the ball the iterates must stay in
    int max_iter = 200;
    double tol = 1e-12;

    void validate() const;
};

/// Raised when the contraction iteration leaves its ball or runs out of iterations.
class ContractionFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ContractionResult {
    GridFunction z;
    int iterations = 0;
    std::vector<double> iterate_norms;  ///< ||z_k||, k = 0..iterations (max-node norm)
    std::vector<double> step_norms;     ///< ||z_{k+1} - z_k||
    double max_contraction = 0.0;       ///< max ||z_{k+1}-z_k|| / ||z_k-z_{k-1}||
};

/// Fixed-point iteration z <- z - [phi'(0)]⁻¹(phi(z) - p) from z = 0, measured in the max-node norm.
///
/// Requires m ||p|| < epsilon/2 and m >= 1/|phi'(0)|. Throws ContractionFailure if an iterate leaves
/// the epsilon-ball or max_iter is exhausted before ||phi(z) - p|| <= tol.
[[nodiscard]] ContractionResult contraction_solve(const PointwiseMap& phi, const GridFunction& rhs,
                                                  const ClassicalIFTConfig& cfg);

struct LossProbeRow {
    int k;
    double ratio_same_index;     ///< ||A⁻¹(u)ψ_k||_a / ||ψ_k||_a
    double ratio_shifted_index;  ///< ||A⁻¹(u)ψ_k||_a / ||ψ_k||_{a+delta}
};

struct LossProbe {
    std::vector<LossProbeRow> rows;  ///< k = 0..k_max; ψ_0 ≡ 1, ψ_k = sin(kπx)
    double growth_exponent = 0.0;    ///< least-squares slope of log ratio_same_index vs log k, k >= 1
    double shifted_min_rel = 0.0;    ///< min over k >= 1 of ratio_shifted(k) / ratio_shifted(1)
    double shifted_max_rel = 0.0;    ///< max of the same
};

/// Same-index versus shifted-index amplification of A⁻¹(u) on sine modes.
/// Throws std::invalid_argument unless k_max >= 2 and k_max·π·Δx <= 0.5.
[[nodiscard]] LossProbe smoothing_loss_probe(const ProblemSetup& p, const GridFunction& u, int k_max);

}  // namespace dsm
