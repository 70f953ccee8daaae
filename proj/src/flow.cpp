#include "dsm/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "dsm/sampling.hpp"
#include "dsm/text.hpp"

namespace dsm {

std::string_view to_string(Scheme s) noexcept {
    return s == Scheme::euler ? "euler" : "rk4";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "euler") {
        return Scheme::euler;
    }
    if (name == "rk4") {
        return Scheme::rk4;
    }
    throw std::invalid_argument("unknown scheme '" + std::string(name) + "' (expected euler or rk4)");
}

void FlowConfig::validate() const {
    if (!(dt > 0.0) || dt > 0.5) {
        throw std::invalid_argument("dt must lie in (0, 0.5], got " + format_real(dt));
    }
    if (!(t_max >= dt)) {
        throw std::invalid_argument("t_max must be at least dt");
    }
    if (!(eps_rel >= 0.0 && eps_rel < 1.0)) {
        throw std::invalid_argument("eps_rel must lie in [0, 1)");
    }
    if (!(eps_abs >= 0.0)) {
        throw std::invalid_argument("eps_abs must be nonnegative");
    }
    if (record_stride < 1) {
        throw std::invalid_argument("record_stride must be positive");
    }
}

std::string_view to_string(StopReason r) noexcept {
    switch (r) {
        case StopReason::converged: return "converged";
        case StopReason::horizon: return "horizon";
        case StopReason::ball_exit: return "ball_exit";
        case StopReason::degenerate: return "degenerate";
    }
    return "unknown";
}

double residual(const ProblemSetup& p, const GridFunction& u, const GridFunction& h) {
    return sobolev_norm(p.op().eval(u) - h, p.image_index());
}

GridFunction flow_step(const ProblemSetup& p, const GridFunction& u, const GridFunction& h, double dt,
                       Scheme scheme) {
    const GridFunction k1 = dsm_vector_field(p, u, h);
    if (scheme == Scheme::euler) {
        return u + dt * k1;
    }
    const double half = 0.5 * dt;
    const GridFunction k2 = dsm_vector_field(p, u + half * k1, h);
    const GridFunction k3 = dsm_vector_field(p, u + half * k2, h);
    const GridFunction k4 = dsm_vector_field(p, u + dt * k3, h);
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory integrate_flow(const ProblemSetup& p, const GridFunction& u0, const GridFunction& h,
                          const FlowConfig& cfg) {
    cfg.validate();
    require_same_grid(u0, p.reference());
    require_same_grid(h, p.reference());

    const ScaleIndex a = p.domain_index();
    const double g0 = residual(p, u0, h);
    const double target = cfg.eps_rel * g0 + cfg.eps_abs;

    Trajectory traj{.samples = {}, .states = {}, .final_u = u0, .index = a};
    auto record = [&](double t, double g, const GridFunction& u) {
        traj.samples.push_back({t, g, ball_distance(u, u0, a), ball_distance(u, p.reference(), a)});
        traj.states.push_back(u);
    };

    record(0.0, g0, u0);
    if (g0 <= target) {
        traj.stop_reason = StopReason::converged;
        return traj;
    }

    GridFunction u = u0;
    double t = 0.0;
    for (long step = 1;; ++step) {
        const double next_t = std::min(static_cast<double>(step) * cfg.dt, cfg.t_max);
        GridFunction next = u;
        try {
            next = flow_step(p, u, h, next_t - t, cfg.scheme);
        } catch (const DegenerateCoefficient&) {
            traj.stop_reason = StopReason::degenerate;
            break;
        } catch (const NonFiniteValue&) {
            traj.stop_reason = StopReason::degenerate;
            break;
        }
        u = std::move(next);
        t = next_t;
        const double g = residual(p, u, h);

        std::optional<StopReason> stop;
        if (cfg.enforce_ball && ball_distance(u, p.reference(), a) > p.radius()) {
            stop = StopReason::ball_exit;
        } else if (g <= target) {
            stop = StopReason::converged;
        } else if (t >= cfg.t_max) {
            stop = StopReason::horizon;
        }
        if (stop || step % cfg.record_stride == 0) {
            record(t, g, u);
        }
        if (stop) {
            traj.stop_reason = *stop;
            break;
        }
    }
    traj.final_u = u;
    traj.final_t = t;
    return traj;
}

DecayFit decay_fit(std::span<const TrajectorySample> samples) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
        if (samples[i].g > kDecayNoiseFloor) {
            pts.emplace_back(samples[i].t, std::log(samples[i].g));
        }
    }
    if (pts.size() < 10) {
        throw std::invalid_argument("decay fit needs at least 10 interior samples above the noise floor, got " +
                                    std::to_string(pts.size()));
    }
    const double count = static_cast<double>(pts.size());
    double mean_t = 0.0;
    double mean_y = 0.0;
    for (const auto& [t, y] : pts) {
        mean_t += t;
        mean_y += y;
    }
    mean_t /= count;
    mean_y /= count;
    double stt = 0.0;
    double sty = 0.0;
    double syy = 0.0;
    for (const auto& [t, y] : pts) {
        stt += (t - mean_t) * (t - mean_t);
        sty += (t - mean_t) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    const double slope = sty / stt;
    double ss_res = 0.0;
    for (const auto& [t, y] : pts) {
        const double e = y - mean_y - slope * (t - mean_t);
        ss_res += e * e;
    }
    // A perfectly flat series is fit exactly by slope 0.
    const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return {slope, r2, pts.size()};
}

DecayFit decay_fit(const Trajectory& traj) {
    return decay_fit(std::span<const TrajectorySample>(traj.samples));
}

std::vector<BoundViolation> verify_trajectory_bounds(const Trajectory& traj, double r, double tol) {
    if (traj.stop_reason != StopReason::converged) {
        throw std::invalid_argument("trajectory bounds need a converged trajectory (stop reason: " +
                                    std::string(to_string(traj.stop_reason)) + ")");
    }
    if (traj.states.size() != traj.samples.size()) {
        throw std::invalid_argument("trajectory has no recorded state for every sample");
    }
    std::vector<BoundViolation> out;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const TrajectorySample& s = traj.samples[i];
        const double dist_limit = ball_distance(traj.states[i], traj.final_u, traj.index);
        const bool start_ball = s.dist_u0 > r * (1.0 + tol);
        const bool limit_decay = dist_limit > r * std::exp(-s.t) * (1.0 + tol);
        if (start_ball || limit_decay) {
            out.push_back({i, s.t, start_ball, limit_decay, s.dist_u0, dist_limit});
        }
    }
    return out;
}

std::optional<PairRatios> lipschitz_ratio(const ProblemSetup& p, const GridFunction& h, const GridFunction& u,
                                          const GridFunction& v) {
    const ScaleIndex a = p.domain_index();
    const double dist = ball_distance(u, v, a);
    if (dist == 0.0) {
        return std::nullopt;
    }
    const ScaleOperator& op = p.op();
    const GridFunction fu = op.eval(u);
    const GridFunction fv = op.eval(v);
    const GridFunction defect = fu - h;
    const GridFunction pull_u = op.solve_derivative(u, defect);
    const GridFunction pull_v = op.solve_derivative(v, defect);
    const GridFunction field_u = -pull_u;
    const GridFunction field_v = -op.solve_derivative(v, fv - h);

    const double i1 = sobolev_norm(pull_u - pull_v, a);
    const double i2 = sobolev_norm(op.solve_derivative(v, fu - fv), a);
    return PairRatios{sobolev_norm(field_u - field_v, a) / dist, i1 / dist, i2 / dist, sobolev_norm(pull_v, a)};
}

LipschitzReport lipschitz_probe(const ProblemSetup& p, const GridFunction& h, std::size_t sample_count,
                                std::uint64_t seed) {
    require_same_grid(h, p.reference());
    const ScaleIndex a = p.domain_index();
    LipschitzReport report;
    for (std::size_t i = 0; i < sample_count; ++i) {
        SampleStream stream(seed, i);
        const GridFunction u = stream.point_in_ball(p.reference(), p.radius(), a);
        const GridFunction v = stream.point_in_ball(p.reference(), p.radius(), a);
        try {
            const auto r = lipschitz_ratio(p, h, u, v);
            if (!r) {
                ++report.skipped_coincident;
                continue;
            }
            ++report.pairs_used;
            report.max_ratio = std::max(report.max_ratio, r->ratio);
            report.max_split_ratio = std::max(report.max_split_ratio, r->i1_ratio + r->i2_ratio);
            report.max_i1_ratio = std::max(report.max_i1_ratio, r->i1_ratio);
            report.max_i2_ratio = std::max(report.max_i2_ratio, r->i2_ratio);
            report.max_pullback = std::max(report.max_pullback, r->pullback);
        } catch (const DegenerateCoefficient&) {
            ++report.skipped_degenerate;
        }
    }
    return report;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << "t,g,dist_u0,dist_U\n";
    for (const TrajectorySample& s : traj.samples) {
        out << format_real(s.t) << ',' << format_real(s.g) << ',' << format_real(s.dist_u0) << ','
            << format_real(s.dist_U) << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

}  // namespace dsm
