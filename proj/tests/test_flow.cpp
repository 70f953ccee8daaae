#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dsm/flow.hpp"
#include "dsm/newton_lab.hpp"
#include "dsm/sampling.hpp"
#include "oracles.hpp"

using namespace dsm;

namespace {

constexpr std::size_t kN = 201;

ProblemSetup volterra(std::size_t n = kN, double radius = 0.1) {
    return ProblemSetup(make_operator("volterra-quadratic", n), GridFunction::constant(n, 1.0), radius);
}

GridFunction one(std::size_t n = kN) {
    return GridFunction::constant(n, 1.0);
}

GridFunction quadratic_perturb(std::size_t n = kN) {
    return GridFunction::sample(n, [](double x) { return x + 0.05 * x * x; });
}

Trajectory synthetic(const std::vector<double>& ts, const std::function<double(double)>& g) {
    Trajectory traj{.samples = {}, .states = {}, .final_u = one(11)};
    for (double t : ts) {
        traj.samples.push_back({t, g(t), 0.0, 0.0});
        traj.states.push_back(one(11));
    }
    traj.stop_reason = StopReason::converged;
    return traj;
}

std::vector<double> times(int count, double dt) {
    std::vector<double> ts;
    for (int i = 0; i < count; ++i) {
        ts.push_back(i * dt);
    }
    return ts;
}

}  // namespace

TEST_SUITE("flow") {

TEST_CASE("config validation") {
    FlowConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.dt = 0.6;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.t_max = 0.01;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.eps_rel = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.record_stride = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK(parse_scheme("euler") == Scheme::euler);
    CHECK_THROWS_AS((void)parse_scheme("rk45"), std::invalid_argument);
}

TEST_CASE("residual closed forms") {
    const auto p = volterra();
    CHECK(residual(p, p.reference(), p.image()) == 0.0);

    const auto h = GridFunction::sample(kN, [](double x) { return x + 0.1 * std::sin(oracle::pi * x); });
    const double pi2 = oracle::pi * oracle::pi;
    CHECK(residual(p, one(), h) == doctest::Approx(0.1 * std::sqrt((1.0 + pi2 + pi2 * pi2) / 2.0)).epsilon(1e-3));

    const auto shifted = GridFunction::sample(kN, [](double x) { return x - 0.3; });
    CHECK(residual(p, one(), shifted) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("flow from the exact solution stops immediately") {
    const auto p = volterra();
    const auto traj = integrate_flow(p, p.reference(), p.image(), FlowConfig{});
    CHECK(traj.stop_reason == StopReason::converged);
    CHECK(traj.samples.size() == 1);
    CHECK(traj.final_t == 0.0);
    CHECK(traj.final_u == p.reference());
}

TEST_CASE("flow reaches sqrt(h') for a scaled-linear right-hand side") {
    const auto p = volterra();
    const auto h = GridFunction::sample(kN, [](double x) { return 1.21 * x; });
    FlowConfig cfg;
    const auto traj = integrate_flow(p, one(), h, cfg);
    REQUIRE(traj.stop_reason == StopReason::converged);

    // Heron's iteration for √1.21, run to its fixed point.
    const double limit = oracle::heron(1.21, 1.0, 60).back();
    CHECK(limit == doctest::Approx(1.1).epsilon(1e-15));
    CHECK(ball_distance(traj.final_u, GridFunction::constant(kN, limit), ScaleIndex(1)) <= 1e-4);
}

TEST_CASE("flow reaches sqrt(h') for a quadratic perturbation") {
    const auto p = volterra();
    const auto traj = integrate_flow(p, one(), quadratic_perturb(), FlowConfig{});
    REQUIRE(traj.stop_reason == StopReason::converged);
    const auto exact = GridFunction::sample(kN, [](double x) { return oracle::bisect_sqrt(1.0 + 0.1 * x); });
    CHECK(ball_distance(traj.final_u, exact, ScaleIndex(1)) <= 1e-3);
}

TEST_CASE("trajectory structure") {
    const auto p = volterra();
    FlowConfig cfg;
    cfg.record_stride = 7;
    const auto traj = integrate_flow(p, one(), quadratic_perturb(), cfg);
    REQUIRE(traj.samples.size() >= 2);
    CHECK(traj.samples.front().t == 0.0);
    CHECK(traj.samples.front().dist_u0 == 0.0);
    CHECK(traj.samples.size() == traj.states.size());
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        CHECK(traj.samples[i].t > traj.samples[i - 1].t);
        CHECK(std::isfinite(traj.samples[i].g));
        CHECK(traj.samples[i].g >= 0.0);
    }
    CHECK(traj.samples.back().t == traj.final_t);
    CHECK(traj.states.back() == traj.final_u);
    // steps = final_t/dt; every 7th step plus the final one.
    const auto steps = static_cast<std::size_t>(std::lround(traj.final_t / cfg.dt));
    CHECK(traj.samples.size() == 1 + steps / 7 + (steps % 7 != 0 ? 1 : 0));
}

TEST_CASE("converged stop re-evaluates below the target") {
    const auto p = volterra();
    for (double eps_rel : {0.0, 1e-3}) {
        FlowConfig cfg;
        cfg.eps_rel = eps_rel;
        cfg.eps_abs = 1e-7;
        const auto traj = integrate_flow(p, one(), quadratic_perturb(), cfg);
        REQUIRE(traj.stop_reason == StopReason::converged);
        const double g0 = residual(p, one(), quadratic_perturb());
        CHECK(residual(p, traj.final_u, quadratic_perturb()) <= eps_rel * g0 + cfg.eps_abs);
    }
}

TEST_CASE("horizon, ball exit and degenerate stops are reported, not thrown") {
    const auto p = volterra(kN, 0.05);
    FlowConfig cfg;
    cfg.t_max = 1.0;
    auto traj = integrate_flow(p, one(), quadratic_perturb(), cfg);
    CHECK(traj.stop_reason == StopReason::horizon);
    CHECK(traj.final_t == doctest::Approx(1.0));

    // h' = 1.44 pulls u to 1.2, outside the 0.05 ball.
    const auto far = GridFunction::sample(kN, [](double x) { return 1.44 * x; });
    cfg = {};
    cfg.enforce_ball = true;
    traj = integrate_flow(p, one(), far, cfg);
    CHECK(traj.stop_reason == StopReason::ball_exit);
    CHECK(traj.samples.back().dist_U > p.radius());

    // h' = 1 - 1.6x turns negative: u is driven into the guard.
    const auto crossing = GridFunction::sample(kN, [](double x) { return x - 0.8 * x * x; });
    cfg = {};
    traj = integrate_flow(p, one(), crossing, cfg);
    CHECK(traj.stop_reason == StopReason::degenerate);
    CHECK(traj.final_u.min_value() > 0.0);
}

TEST_CASE("residual is monotone along recorded trajectories") {
    const auto p = volterra();
    for (double dt : {0.01, 0.05, 0.1}) {
        for (Scheme scheme : {Scheme::euler, Scheme::rk4}) {
            FlowConfig cfg;
            cfg.dt = dt;
            cfg.scheme = scheme;
            const auto traj = integrate_flow(p, one(), quadratic_perturb(), cfg);
            for (std::size_t i = 1; i < traj.samples.size(); ++i) {
                CHECK(traj.samples[i].g <= traj.samples[i - 1].g + 1e-10);
            }
        }
    }
}

TEST_CASE("rk4 one-step decay tracks exp(-dt)") {
    const auto p = volterra();
    // Thresholds sit above the H2 rounding floor of ~5e-14 relative to the per-step bound.
    for (auto [dt, floor] : {std::pair{0.05, 1e-9}, std::pair{0.1, 1e-10}, std::pair{0.2, 1e-10}}) {
        FlowConfig cfg;
        cfg.dt = dt;
        cfg.eps_abs = 1e-11;
        cfg.t_max = 40.0;
        const auto traj = integrate_flow(p, one(), quadratic_perturb(), cfg);
        const double slack = 10.0 * std::pow(dt, 4);
        for (std::size_t i = 1; i < traj.samples.size(); ++i) {
            if (traj.samples[i].g <= floor) {
                continue;
            }
            const double ratio = traj.samples[i].g / traj.samples[i - 1].g;
            CHECK(ratio >= std::exp(-dt) * (1.0 - slack));
            CHECK(ratio <= std::exp(-dt) * (1.0 + slack));
        }
    }
}

TEST_CASE("Euler with dt = 1 is one Newton step, bit for bit") {
    const auto p = volterra();
    for (std::uint64_t i = 0; i < 10; ++i) {
        SampleStream s(3, i);
        const auto u = s.point_in_ball(one(), 0.1, ScaleIndex(1));
        const auto h = p.image() + 0.01 * s.sine_polynomial(kN);
        CHECK(flow_step(p, u, h, 1.0, Scheme::euler) == newton_step(p, u, h));
    }
}

TEST_CASE("euler and rk4 agree to first order in dt") {
    const auto p = volterra();
    auto gap = [&](double dt) {
        FlowConfig cfg;
        cfg.dt = dt;
        cfg.t_max = 2.0;
        cfg.eps_abs = 0.0;
        cfg.scheme = Scheme::euler;
        const auto e = integrate_flow(p, one(), quadratic_perturb(), cfg);
        cfg.scheme = Scheme::rk4;
        const auto r = integrate_flow(p, one(), quadratic_perturb(), cfg);
        return ball_distance(e.final_u, r.final_u, ScaleIndex(1));
    };
    const double coarse = gap(0.02);
    const double fine = gap(0.01);
    CHECK(fine < coarse);
    CHECK(oracle::observed_order(coarse, fine) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("linear smoothing flow converges to h'") {
    const ProblemSetup p(make_operator("linear-smoothing", kN), one(), 1.0);
    const auto h = GridFunction::sample(kN, [](double x) { return x + 0.2 * std::sin(2.0 * x); });
    const auto hp = GridFunction::sample(kN, [](double x) { return 1.0 + 0.4 * std::cos(2.0 * x); });
    SampleStream s(9, 0);
    const auto u0 = one() + 0.3 * s.trig_polynomial(kN, 2);
    const auto traj = integrate_flow(p, u0, h, FlowConfig{});
    // Smooth modes decay at rate 1; the grid-scale alternating mode of D decays far slower,
    // so the H2 residual levels off near 1e-6 instead of reaching eps_abs.
    CHECK(traj.stop_reason == StopReason::horizon);
    CHECK(traj.samples.back().g <= 1e-5 * traj.samples.front().g);
    CHECK(max_norm(traj.final_u - hp) <= 1e-4);
}

TEST_CASE("the residual propagator has a slow grid-scale mode") {
    // phi = F(u) - h obeys phi' = -C(D(phi)); an alternating ramp is nearly annihilated by D.
    const std::size_t n = kN;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double envelope = static_cast<double>(std::min(i, n - 1 - i));
        v[i] = (i % 2 == 0 ? 1.0 : -1.0) * envelope;
    }
    const GridFunction ramp(v);
    const auto image = integrate_from_zero(derivative(ramp));
    CHECK(sobolev_norm(image, ScaleIndex(0)) <= 0.05 * sobolev_norm(ramp, ScaleIndex(0)));
}

TEST_CASE("decay_fit on synthetic series") {
    auto fit = decay_fit(synthetic(times(50, 0.2), [](double t) { return std::exp(-t); }));
    CHECK(fit.slope == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.points == 48);

    fit = decay_fit(synthetic(times(50, 0.2), [](double) { return 0.3; }));
    CHECK(fit.slope == 0.0);

    fit = decay_fit(synthetic(times(50, 0.2), [](double t) { return 2.0 * std::exp(-0.5 * t); }));
    CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-9));

    // Samples under the floor are ignored, so a long tail of zeros does not bias the slope.
    fit = decay_fit(synthetic(times(80, 0.5), [](double t) { return t < 20.0 ? std::exp(-t) : 0.0; }));
    CHECK(fit.slope == doctest::Approx(-1.0).epsilon(1e-9));

    CHECK_THROWS_AS((void)decay_fit(synthetic(times(11, 0.2), [](double t) { return std::exp(-t); })),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)decay_fit(synthetic(times(40, 0.2), [](double) { return 1e-13; })), std::invalid_argument);
}

TEST_CASE("trajectory bounds") {
    SUBCASE("converged flow respects r = g0/c0") {
        const auto p = volterra();
        const auto h = GridFunction::sample(kN, [](double x) { return 1.21 * x; });
        const auto traj = integrate_flow(p, one(), h, FlowConfig{});
        // c0 = 2 at u = 1: ||A(1)q||_2 >= 2||q||_1.
        const double r = traj.samples.front().g / 2.0;
        CHECK(verify_trajectory_bounds(traj, r).empty());
    }
    SUBCASE("single sample at the limit") {
        const auto p = volterra();
        const auto traj = integrate_flow(p, p.reference(), p.image(), FlowConfig{});
        CHECK(verify_trajectory_bounds(traj, 0.0).empty());
    }
    SUBCASE("constructed violation is reported at exactly that sample") {
        auto traj = synthetic(times(20, 0.1), [](double t) { return std::exp(-t); });
        const double r = 0.5;
        traj.samples[7].dist_u0 = 2.0 * r;
        const auto v = verify_trajectory_bounds(traj, r);
        REQUIRE(v.size() == 1);
        CHECK(v[0].sample == 7);
        CHECK(v[0].start_ball);
        CHECK_FALSE(v[0].limit_decay);
    }
    SUBCASE("non-converged trajectory is refused") {
        auto traj = synthetic(times(3, 0.1), [](double) { return 1.0; });
        traj.stop_reason = StopReason::horizon;
        CHECK_THROWS_AS((void)verify_trajectory_bounds(traj, 1.0), std::invalid_argument);
    }
}

TEST_CASE("lipschitz probe") {
    SUBCASE("linear operator: field difference is -(u - v)") {
        const ProblemSetup p(make_operator("linear-smoothing", kN), one(), 0.1);
        const auto h1 = p.image();
        const auto h2 = GridFunction::sample(kN, [](double x) { return std::sin(3.0 * x); });
        const auto r1 = lipschitz_probe(p, h1, 50, 1);
        const auto r2 = lipschitz_probe(p, h2, 50, 1);
        CHECK(r1.max_ratio == doctest::Approx(1.0).epsilon(1e-2));
        CHECK(r1.max_ratio == doctest::Approx(r2.max_ratio).epsilon(1e-12));
        CHECK(r1.max_i1_ratio == 0.0);
        CHECK(r1.pairs_used == 50);
    }
    SUBCASE("coincident pair is skipped") {
        const auto p = volterra();
        CHECK_FALSE(lipschitz_ratio(p, p.image(), one(), one()).has_value());
    }
    SUBCASE("Volterra ratio is stable across seeds") {
        const auto p = volterra(kN, 0.1);
        const auto a = lipschitz_probe(p, p.image(), 200, 42);
        const auto b = lipschitz_probe(p, p.image(), 200, 4242);
        CHECK(std::isfinite(a.max_ratio));
        CHECK(a.max_ratio > 0.0);
        CHECK(a.skipped_degenerate == 0);
        CHECK(std::abs(a.max_ratio - b.max_ratio) <= 0.25 * std::max(a.max_ratio, b.max_ratio));
        // Triangle inequality of the I1 + I2 splitting.
        CHECK(a.max_ratio <= a.max_split_ratio * (1.0 + 1e-12));
    }
    SUBCASE("guard violations are counted") {
        const ProblemSetup p(make_operator("volterra-quadratic", kN), one(), 20.0);
        const auto rep = lipschitz_probe(p, p.image(), 40, 5);
        CHECK(rep.skipped_degenerate > 0);
        CHECK(rep.skipped_degenerate + rep.pairs_used + rep.skipped_coincident == 40);
    }
}

TEST_CASE("trajectory CSV") {
    const auto p = volterra();
    FlowConfig cfg;
    cfg.t_max = 0.5;
    const auto traj = integrate_flow(p, one(), quadratic_perturb(), cfg);
    const auto path = std::filesystem::temp_directory_path() / "dsm_flow_traj.csv";
    write_trajectory_csv(path, traj);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,g,dist_u0,dist_U");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
    }
    CHECK(rows == traj.samples.size());
    std::filesystem::remove(path);
}

}  // TEST_SUITE
