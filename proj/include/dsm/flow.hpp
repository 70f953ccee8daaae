#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "dsm/operators.hpp"

namespace dsm {

enum class Scheme { euler, rk4 };

[[nodiscard]] std::string_view to_string(Scheme s) noexcept;
[[nodiscard]] Scheme parse_scheme(std::string_view name);

/// Fixed-step integration settings for the Newton flow.
struct FlowConfig {
    Scheme scheme = Scheme::rk4;
    double dt = 0.05;
    double t_max = 30.0;
    double eps_rel = 0.0;
    double eps_abs = 1e-8;
    int record_stride = 1;
    bool enforce_ball = false;

    /// Throws std::invalid_argument unless 0 < dt <= 0.5, t_max >= dt, eps_rel in [0,1),
    /// eps_abs >= 0 and record_stride >= 1.
    void validate() const;
};

enum class StopReason { converged, horizon, ball_exit, degenerate };

[[nodiscard]] std::string_view to_string(StopReason r) noexcept;

struct TrajectorySample {
    double t;
    double g;        ///< ||F(u(t)) - h||_{a+delta}
    double dist_u0;  ///< ||u(t) - u0||_a
    double dist_U;   ///< ||u(t) - U||_a
};

/// Recorded flow. states[i] is the iterate at samples[i].t.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<GridFunction> states;
    GridFunction final_u;
    double final_t = 0.0;
    StopReason stop_reason = StopReason::horizon;
    ScaleIndex index{1};
};

/// ||F(u) - h||_{a+delta}
[[nodiscard]] double residual(const ProblemSetup& p, const GridFunction& u, const GridFunction& h);

/// One explicit step of size dt of u' = -A⁻¹(u)(F(u) - h).
[[nodiscard]] GridFunction flow_step(const ProblemSetup& p, const GridFunction& u, const GridFunction& h,
                                     double dt, Scheme scheme);

/// Integrates the Newton flow from u0 until convergence, the horizon, a ball exit (if enforced)
/// or a degenerate coefficient. Failure modes are reported through stop_reason, not thrown.
[[nodiscard]] Trajectory integrate_flow(const ProblemSetup& p, const GridFunction& u0, const GridFunction& h,
                                        const FlowConfig& cfg);

struct DecayFit {
    double slope;
    double r_squared;
    std::size_t points;
};

/// Least-squares slope of log g against t. Drops the first and last recorded sample and every
/// sample with g <= 1e-12; throws std::invalid_argument if fewer than 10 samples remain.
[[nodiscard]] DecayFit decay_fit(const Trajectory& traj);
[[nodiscard]] DecayFit decay_fit(std::span<const TrajectorySample> samples);

inline constexpr double kDecayNoiseFloor = 1e-12;

struct BoundViolation {
    std::size_t sample;
    double t;
    bool start_ball;    ///< ||u(t) - u0|| > r(1 + tol)
    bool limit_decay;   ///< ||u(t) - u(inf)|| > r e^{-t} (1 + tol)
    double dist_u0;
    double dist_limit;
};

/// Checks ||u(t) - u0||_a <= r and ||u(t) - final_u||_a <= r e^{-t} at every sample, with relative
/// slack tol. Throws std::invalid_argument for a trajectory that did not converge.
[[nodiscard]] std::vector<BoundViolation> verify_trajectory_bounds(const Trajectory& traj, double r,
                                                                   double tol = 0.05);

/// Local Lipschitz estimate of the flow field Φ(u) = -A⁻¹(u)(F(u) - h) over random pairs in B(U, R),
/// together with the two pieces of the splitting
///   ||Φ(u) - Φ(v)|| <= ||[A⁻¹(u) - A⁻¹(v)](F(u) - h)|| + ||A⁻¹(v)(F(u) - F(v))|| = I1 + I2.
struct LipschitzReport {
    double max_ratio = 0.0;        ///< max ||Φ(u) - Φ(v)||_a / ||u - v||_a
    double max_split_ratio = 0.0;  ///< max (I1 + I2) / ||u - v||_a
    double max_i1_ratio = 0.0;
    double max_i2_ratio = 0.0;
    double max_pullback = 0.0;     ///< max ||A⁻¹(v)(F(u) - h)||_a, the bounded quantity feeding I1
    std::size_t pairs_used = 0;
    std::size_t skipped_degenerate = 0;
    std::size_t skipped_coincident = 0;

    /// c_iso + c_lip · max_pullback, the bound on (I1 + I2)/||u - v|| implied by the constants.
    [[nodiscard]] double splitting_bound(double c_iso, double c_lip) const noexcept {
        return c_iso + c_lip * max_pullback;
    }
};

struct PairRatios {
    double ratio;
    double i1_ratio;
    double i2_ratio;
    double pullback;
};

/// Ratios for one pair; std::nullopt when u == v. May throw DegenerateCoefficient.
[[nodiscard]] std::optional<PairRatios> lipschitz_ratio(const ProblemSetup& p, const GridFunction& h,
                                                        const GridFunction& u, const GridFunction& v);

[[nodiscard]] LipschitzReport lipschitz_probe(const ProblemSetup& p, const GridFunction& h,
                                              std::size_t sample_count, std::uint64_t seed);

// Trajectory CSV: header `t,g,dist_u0,dist_U`, one row per recorded sample.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace dsm
