#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "dsm/conditions.hpp"
#include "dsm/flow.hpp"
#include "dsm/newton_lab.hpp"
#include "dsm/text.hpp"
#include "report.hpp"

#ifndef DSM_VERSION
#define DSM_VERSION "unknown"
#endif

namespace dsm::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string op = "volterra-quadratic";
    std::size_t n = 201;
    std::uint64_t seed = 42;
    std::string out_dir = ".";
    double u_min = 0.1;
    CLI::Option* n_option = nullptr;
};

struct RhsFlags {
    std::string h_file;
    std::string h_family;
    double param = 0.0;
    std::string u0_file;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--operator", c.op, "operator id")
        ->check(CLI::IsMember({"volterra-quadratic", "linear-smoothing"}))
        ->capture_default_str();
    c.n_option = cmd->add_option("--n", c.n, "grid size")->check(CLI::Range(3, 1000000))->capture_default_str();
    cmd->add_option("--seed", c.seed, "sampling seed")->capture_default_str();
    cmd->add_option("--out-dir", c.out_dir, "directory for output files")->capture_default_str();
    cmd->add_option("--u-min", c.u_min, "lower guard on u for the quadratic operator")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

void add_rhs(CLI::App* cmd, RhsFlags& r) {
    auto* file = cmd->add_option("--h-file", r.h_file, "right-hand side as grid CSV");
    auto* family = cmd->add_option("--h-family", r.h_family, "built-in right-hand side family")
                       ->check(CLI::IsMember({"scaled-linear", "quadratic-perturb"}));
    file->excludes(family);
    family->excludes(file);
    cmd->add_option("--param", r.param, "family parameter")->needs(family);
    cmd->add_option("--u0-file", r.u0_file, "initial point as grid CSV (default: u0 = 1)");
}

GridFunction read_input(const std::string& path, Common& c) {
    GridFunction g = read_grid_csv(path);
    if (c.n_option->count() > 0 && g.size() != c.n) {
        throw UsageError(path + " has " + std::to_string(g.size()) + " nodes but --n is " + std::to_string(c.n));
    }
    c.n = g.size();
    return g;
}

struct Rhs {
    GridFunction h;
    std::optional<GridFunction> u0;
    std::optional<GridFunction> oracle;
};

// Closed-form solution u* of F(u) = h for the built-in families: √h′ for the quadratic
// operator, h′ for the linear one.
std::optional<GridFunction> family_solution(const std::string& op, const std::string& family, double p,
                                            std::size_t n) {
    const bool quadratic = op == "volterra-quadratic";
    if (family == "scaled-linear") {
        return GridFunction::constant(n, quadratic ? std::abs(p) : p * p);
    }
    if (quadratic && 1.0 + 2.0 * p < 0.0) {
        return std::nullopt;
    }
    return GridFunction::sample(n, [quadratic, p](double x) {
        const double slope = 1.0 + 2.0 * p * x;
        return quadratic ? std::sqrt(std::max(slope, 0.0)) : slope;
    });
}

Rhs load_rhs(const RhsFlags& r, Common& c) {
    if (r.h_file.empty() && r.h_family.empty()) {
        throw UsageError("one of --h-file or --h-family is required");
    }
    std::optional<GridFunction> u0;
    if (!r.u0_file.empty()) {
        u0 = read_input(r.u0_file, c);
    }
    if (!r.h_file.empty()) {
        GridFunction h = read_input(r.h_file, c);
        return {std::move(h), std::move(u0), std::nullopt};
    }
    const double p = r.param;
    GridFunction h = r.h_family == "scaled-linear"
                         ? GridFunction::sample(c.n, [p](double x) { return p * p * x; })
                         : GridFunction::sample(c.n, [p](double x) { return x + p * x * x; });
    auto oracle = family_solution(c.op, r.h_family, p, c.n);
    if (oracle && oracle->min_value() <= 0.0 && c.op == "volterra-quadratic") {
        oracle.reset();
    }
    return {std::move(h), std::move(u0), std::move(oracle)};
}

Json manifest(const std::string& command, const Common& c, Json parameters, Json inputs, Json outputs) {
    Json m;
    m["command"] = command;
    m["operator"] = c.op;
    m["n"] = c.n;
    m["seed"] = c.seed;
    m["parameters"] = std::move(parameters);
    m["inputs"] = std::move(inputs);
    m["outputs"] = std::move(outputs);
    m["tool_version"] = DSM_VERSION;
    return m;
}

Json rhs_inputs(const RhsFlags& r) {
    Json in = Json::object();
    in["h_file"] = r.h_file.empty() ? Json(nullptr) : Json(r.h_file);
    in["h_family"] = r.h_family.empty() ? Json(nullptr) : Json(r.h_family);
    in["u0_file"] = r.u0_file.empty() ? Json(nullptr) : Json(r.u0_file);
    return in;
}

Json rhs_parameters(const RhsFlags& r) {
    Json p = Json::object();
    if (!r.h_family.empty()) {
        p["param"] = r.param;
    }
    return p;
}

Json constants_json(const ConstantsReport& rep) {
    Json j;
    j["c0_lower"] = rep.c0_lower;
    j["c0_upper"] = rep.c0_upper;
    j["c_iso"] = rep.c_iso;
    j["c_lip"] = rep.c_lip;
    j["rho0"] = rep.rho0;
    j["radius"] = rep.radius;
    j["sample_count"] = rep.sample_count;
    j["seed"] = rep.seed;
    j["skipped"] = rep.skipped;
    return j;
}

Json verdict_json(const AdmissibilityVerdict& v) {
    Json j;
    j["rho0"] = v.rho0;
    j["dist_u0"] = v.dist_u0;
    j["dist_h"] = v.dist_h;
    j["rho_eff"] = v.rho_eff;
    j["g0"] = v.g0;
    j["r"] = v.r;
    j["R_required"] = v.R_required;
    j["radius_sufficient"] = v.radius_sufficient;
    j["admissible"] = v.admissible;
    j["margin"] = v.margin;
    return j;
}

fs::path prepare_out_dir(const Common& c) {
    fs::path dir(c.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw std::runtime_error("cannot create output directory " + c.out_dir);
    }
    return dir;
}

// ---------------------------------------------------------------------------------------------

struct SolveFlags {
    Common common;
    RhsFlags rhs;
    double radius = 0.05;
    std::size_t samples = 200;
    std::string scheme = "rk4";
    FlowConfig flow;
};

int cmd_solve(SolveFlags& f, std::ostream& out) {
    Rhs rhs = load_rhs(f.rhs, f.common);
    Common& c = f.common;
    f.flow.scheme = parse_scheme(f.scheme);
    f.flow.validate();

    const ProblemSetup p(make_operator(c.op, c.n, c.u_min), GridFunction::constant(c.n, 1.0), f.radius);
    const GridFunction u0 = rhs.u0 ? *rhs.u0 : p.reference();
    const ConstantsReport constants = estimate_constants(p, f.samples, c.seed);
    const AdmissibilityVerdict verdict = admissibility_check(p, u0, rhs.h, constants);
    const Trajectory traj = integrate_flow(p, u0, rhs.h, f.flow);

    const fs::path dir = prepare_out_dir(c);
    write_trajectory_csv(dir / "trajectory.csv", traj);
    write_grid_csv(dir / "final_u.csv", traj.final_u);

    const double g0 = traj.samples.front().g;
    const double r = r_bound(g0, constants.c0_lower);
    Json slope = nullptr;
    Json r2 = nullptr;
    try {
        const DecayFit fit = decay_fit(traj);
        slope = fit.slope;
        r2 = fit.r_squared;
    } catch (const std::invalid_argument&) {
        // Too few samples above the noise floor for a fit; reported as null.
    }
    Json violations = nullptr;
    if (traj.stop_reason == StopReason::converged) {
        violations = verify_trajectory_bounds(traj, r).size();
    }

    Json params = rhs_parameters(f.rhs);
    params["radius"] = f.radius;
    params["samples"] = f.samples;
    params["u_min"] = c.u_min;
    params["scheme"] = f.scheme;
    params["dt"] = f.flow.dt;
    params["t_max"] = f.flow.t_max;
    params["eps_rel"] = f.flow.eps_rel;
    params["eps_abs"] = f.flow.eps_abs;
    params["record_stride"] = f.flow.record_stride;
    params["enforce_ball"] = f.flow.enforce_ball;

    Json report;
    report["manifest"] = manifest("solve", c, params, rhs_inputs(f.rhs),
                                  Json::array({"trajectory.csv", "final_u.csv", "summary.json"}));
    report["stop_reason"] = std::string(to_string(traj.stop_reason));
    report["final_t"] = traj.final_t;
    report["g0"] = g0;
    report["g_final"] = traj.samples.back().g;
    report["decay_slope"] = slope;
    report["decay_r_squared"] = r2;
    report["r_bound"] = r;
    report["bound_violations"] = violations;
    report["admissibility"] = verdict_json(verdict);
    report["constants"] = constants_json(constants);
    write_report(dir / "summary.json", report);

    out << "stop_reason " << to_string(traj.stop_reason) << " final_t " << format_real(traj.final_t) << " g_final "
        << format_real(traj.samples.back().g) << '\n';
    return traj.stop_reason == StopReason::converged ? kExitSuccess : kExitNotConverged;
}

struct VerifyFlags {
    Common common;
    double radius = 0.05;
    std::size_t samples = 200;
};

int cmd_verify(VerifyFlags& f, std::ostream& out) {
    Common& c = f.common;
    const ProblemSetup p(make_operator(c.op, c.n, c.u_min), GridFunction::constant(c.n, 1.0), f.radius);
    const ConstantsReport rep = estimate_constants(p, f.samples, c.seed);
    const fs::path dir = prepare_out_dir(c);

    Json params;
    params["radius"] = f.radius;
    params["samples"] = f.samples;
    params["u_min"] = c.u_min;
    Json report;
    report["manifest"] = manifest("verify", c, params, Json::object(), Json::array({"constants.json"}));
    const Json constants = constants_json(rep);
    for (const auto& [key, value] : constants.items()) {
        report[key] = value;
    }
    write_report(dir / "constants.json", report);
    out << "c0 [" << format_real(rep.c0_lower) << ", " << format_real(rep.c0_upper) << "] rho0 "
        << format_real(rep.rho0) << '\n';
    return kExitSuccess;
}

struct ProbeFlags {
    Common common;
    int k_max = 32;
    std::string u_file;
};

int cmd_probe_loss(ProbeFlags& f, std::ostream& out) {
    Common& c = f.common;
    std::optional<GridFunction> u;
    if (!f.u_file.empty()) {
        u = read_input(f.u_file, c);
    }
    const ProblemSetup p(make_operator(c.op, c.n, c.u_min), GridFunction::constant(c.n, 1.0), 1.0);
    const LossProbe probe = smoothing_loss_probe(p, u ? *u : p.reference(), f.k_max);
    const fs::path dir = prepare_out_dir(c);

    {
        std::ofstream csv(dir / "probe.csv", std::ios::binary);
        if (!csv) {
            throw std::runtime_error("cannot open probe.csv for writing");
        }
        csv << "k,ratio_same_index,ratio_shifted_index\n";
        for (const auto& row : probe.rows) {
            csv << row.k << ',' << format_real(row.ratio_same_index) << ',' << format_real(row.ratio_shifted_index)
                << '\n';
        }
    }
    const bool dichotomy =
        probe.growth_exponent >= 0.9 && probe.shifted_min_rel >= 0.9 && probe.shifted_max_rel <= 1.1;

    Json params;
    params["k_max"] = f.k_max;
    params["u_min"] = c.u_min;
    Json inputs;
    inputs["u_file"] = f.u_file.empty() ? Json(nullptr) : Json(f.u_file);
    Json report;
    report["manifest"] = manifest("probe-loss", c, params, inputs, Json::array({"probe.csv", "probe.json"}));
    report["growth_exponent"] = probe.growth_exponent;
    report["shifted_min_rel"] = probe.shifted_min_rel;
    report["shifted_max_rel"] = probe.shifted_max_rel;
    report["dichotomy_holds"] = dichotomy;
    write_report(dir / "probe.json", report);
    out << "growth_exponent " << format_real(probe.growth_exponent) << '\n';
    return dichotomy ? kExitSuccess : kExitNotConverged;
}

struct CompareFlags {
    Common common;
    RhsFlags rhs;
    int max_iter = 20;
    double tol = 1e-10;
    FlowConfig flow;
};

int cmd_compare_newton(CompareFlags& f, std::ostream& out) {
    Rhs rhs = load_rhs(f.rhs, f.common);
    Common& c = f.common;
    if (f.max_iter < 1) {
        throw UsageError("--max-iter must be at least 1");
    }
    f.flow.validate();
    const ProblemSetup p(make_operator(c.op, c.n, c.u_min), GridFunction::constant(c.n, 1.0), 1.0);
    const GridFunction u0 = rhs.u0 ? *rhs.u0 : p.reference();
    const IterationRecord rec = newton_solve(p, u0, rhs.h, f.max_iter, f.tol, rhs.oracle);
    const Trajectory traj = integrate_flow(p, u0, rhs.h, f.flow);
    const fs::path dir = prepare_out_dir(c);

    {
        std::ofstream csv(dir / "newton.csv", std::ios::binary);
        if (!csv) {
            throw std::runtime_error("cannot open newton.csv for writing");
        }
        csv << "k,residual,dist_to_oracle\n";
        for (const auto& it : rec.iterates) {
            csv << it.k << ',' << format_real(it.residual) << ','
                << (it.dist_to_oracle ? format_real(*it.dist_to_oracle) : std::string()) << '\n';
        }
    }
    write_trajectory_csv(dir / "flow_trajectory.csv", traj);

    Json params = rhs_parameters(f.rhs);
    params["max_iter"] = f.max_iter;
    params["tol"] = f.tol;
    params["u_min"] = c.u_min;
    params["dt"] = f.flow.dt;
    params["t_max"] = f.flow.t_max;
    params["eps_abs"] = f.flow.eps_abs;
    Json newton;
    newton["converged"] = rec.converged;
    newton["iterations"] = rec.iterates.back().k;
    newton["final_residual"] = rec.iterates.back().residual;
    newton["diverged_at"] = rec.diverged_at ? Json(*rec.diverged_at) : Json(nullptr);
    newton["final_dist_to_oracle"] =
        rec.iterates.back().dist_to_oracle ? Json(*rec.iterates.back().dist_to_oracle) : Json(nullptr);
    Json flow;
    flow["stop_reason"] = std::string(to_string(traj.stop_reason));
    flow["final_t"] = traj.final_t;
    flow["g0"] = traj.samples.front().g;
    flow["g_final"] = traj.samples.back().g;
    Json report;
    report["manifest"] = manifest("compare-newton", c, params, rhs_inputs(f.rhs),
                                  Json::array({"newton.csv", "flow_trajectory.csv", "compare.json"}));
    report["newton"] = newton;
    report["flow"] = flow;
    write_report(dir / "compare.json", report);
    out << "newton " << (rec.converged ? "converged" : "not converged") << " after " << rec.iterates.back().k
        << " iterations; flow " << to_string(traj.stop_reason) << '\n';
    return rec.converged ? kExitSuccess : kExitNotConverged;
}

struct IftFlags {
    Common common;
    double p = 0.1;
    std::string shape = "constant";
    ClassicalIFTConfig cfg;
};

int cmd_classical_ift(IftFlags& f, std::ostream& out) {
    Common& c = f.common;
    const double amp = f.p;
    const GridFunction rhs = f.shape == "constant" ? GridFunction::constant(c.n, amp)
                                                   : GridFunction::sample(c.n, [amp](double x) { return amp * x; });
    const PointwiseMap phi{[](double z) { return z + z * z; }, 1.0};

    Json params;
    params["p"] = f.p;
    params["p_shape"] = f.shape;
    params["m"] = f.cfg.m;
    params["epsilon"] = f.cfg.epsilon;
    params["max_iter"] = f.cfg.max_iter;
    params["tol"] = f.cfg.tol;
    Json report;
    report["manifest"] = manifest("classical-ift", c, params, Json::object(), Json::array({"ift.json", "ift_z.csv"}));
    report["map"] = "z + z^2";

    int code = kExitSuccess;
    try {
        const ContractionResult res = contraction_solve(phi, rhs, f.cfg);
        report["converged"] = true;
        report["failure"] = nullptr;
        report["iterations"] = res.iterations;
        report["z_max_abs"] = res.z.max_abs();
        report["z_at_0"] = res.z[0];
        report["z_at_1"] = res.z[c.n - 1];
        report["max_contraction"] = res.max_contraction;
        report["iterate_norms"] = res.iterate_norms;
        report["step_norms"] = res.step_norms;
        const fs::path dir = prepare_out_dir(c);
        write_grid_csv(dir / "ift_z.csv", res.z);
        out << "z(1) " << format_real(res.z[c.n - 1]) << " after " << res.iterations << " iterations\n";
    } catch (const ContractionFailure& e) {
        report["converged"] = false;
        report["failure"] = e.what();
        out << "contraction failed: " << e.what() << '\n';
        code = kExitNotConverged;
    }
    write_report(prepare_out_dir(c) / "ift.json", report);
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"DSM Newton flow experiments on discretized Sobolev scales", "dsm"};
    app.require_subcommand(1);
    app.set_version_flag("--version", DSM_VERSION);

    SolveFlags solve;
    auto* solve_cmd = app.add_subcommand("solve", "integrate the Newton flow after an admissibility check");
    add_common(solve_cmd, solve.common);
    add_rhs(solve_cmd, solve.rhs);
    solve_cmd->add_option("--radius", solve.radius, "radius R of the ball around U")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    solve_cmd->add_option("--samples", solve.samples, "samples for the constants")->capture_default_str();
    solve_cmd->add_option("--scheme", solve.scheme, "time stepper")
        ->check(CLI::IsMember({"euler", "rk4"}))
        ->capture_default_str();
    solve_cmd->add_option("--dt", solve.flow.dt, "time step")->capture_default_str();
    solve_cmd->add_option("--t-max", solve.flow.t_max, "horizon")->capture_default_str();
    solve_cmd->add_option("--eps-rel", solve.flow.eps_rel, "relative stopping tolerance")->capture_default_str();
    solve_cmd->add_option("--eps-abs", solve.flow.eps_abs, "absolute stopping tolerance")->capture_default_str();
    solve_cmd->add_option("--stride", solve.flow.record_stride, "record every n-th step")->capture_default_str();
    solve_cmd->add_flag("--enforce-ball", solve.flow.enforce_ball, "stop when u leaves the ball of radius R");

    VerifyFlags verify;
    auto* verify_cmd = app.add_subcommand("verify", "estimate the operator constants and the admissible radius");
    add_common(verify_cmd, verify.common);
    verify_cmd->add_option("--radius", verify.radius, "radius R of the ball around U")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    verify_cmd->add_option("--samples", verify.samples, "number of samples")->capture_default_str();

    ProbeFlags probe;
    auto* probe_cmd = app.add_subcommand("probe-loss", "measure A⁻¹ on sine modes in both index pairings");
    add_common(probe_cmd, probe.common);
    probe_cmd->add_option("--k-max", probe.k_max, "highest mode")->capture_default_str();
    probe_cmd->add_option("--u-file", probe.u_file, "linearization point as grid CSV (default: u = 1)");

    CompareFlags compare;
    auto* compare_cmd = app.add_subcommand("compare-newton", "run Newton iteration and the flow on the same data");
    add_common(compare_cmd, compare.common);
    add_rhs(compare_cmd, compare.rhs);
    compare_cmd->add_option("--max-iter", compare.max_iter, "Newton iteration cap")->capture_default_str();
    compare_cmd->add_option("--tol", compare.tol, "Newton residual tolerance")->capture_default_str();
    compare_cmd->add_option("--dt", compare.flow.dt, "flow time step")->capture_default_str();
    compare_cmd->add_option("--t-max", compare.flow.t_max, "flow horizon")->capture_default_str();
    compare_cmd->add_option("--eps-abs", compare.flow.eps_abs, "flow stopping tolerance")->capture_default_str();

    IftFlags ift;
    auto* ift_cmd = app.add_subcommand("classical-ift", "contraction iteration for z + z^2 = p");
    add_common(ift_cmd, ift.common);
    ift_cmd->add_option("--p", ift.p, "right-hand side amplitude")->capture_default_str();
    ift_cmd->add_option("--p-shape", ift.shape, "constant p or p·x")
        ->check(CLI::IsMember({"constant", "linear"}))
        ->capture_default_str();
    ift_cmd->add_option("--m", ift.cfg.m, "bound on the inverse derivative at 0")->capture_default_str();
    ift_cmd->add_option("--epsilon", ift.cfg.epsilon, "ball radius")->capture_default_str();
    ift_cmd->add_option("--max-iter", ift.cfg.max_iter, "iteration cap")->capture_default_str();
    ift_cmd->add_option("--tol", ift.cfg.tol, "step tolerance")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitSuccess : kExitUsage;
    }

    try {
        if (*solve_cmd) {
            return cmd_solve(solve, out);
        }
        if (*verify_cmd) {
            return cmd_verify(verify, out);
        }
        if (*probe_cmd) {
            return cmd_probe_loss(probe, out);
        }
        if (*compare_cmd) {
            return cmd_compare_newton(compare, out);
        }
        return cmd_classical_ift(ift, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace dsm::cli
