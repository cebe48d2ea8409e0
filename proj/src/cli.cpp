#include "divopt/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <vector>

#include "divopt/barrier_solver.hpp"
#include "divopt/errors.hpp"
#include "divopt/simulator.hpp"
#include "divopt/value_functions.hpp"
#include "divopt/verification.hpp"

namespace divopt {

std::string fmt_num(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

struct RunConfig {
    ModelParams p;
    std::string out_path;
    double tol = -1;  // < 0: per-command default
    // simulate
    double x0 = 1.0;
    long paths = 10000;
    double dt = 1e-3;
    double horizon = 0;
    double trunc_tol = 1e-6;
    std::uint64_t seed = 42;
    bool antithetic = true;
    bool bridge = false;
    int threads = 0;
    // value
    double x_max = 10;
    int points = 500;
    // sweep
    std::string axis;
    double from = 0, to = 0;
    int count = 11;
    // strategy override
    std::string strategy = "optimal";
    double a_p = NAN, a_c = NAN, b = NAN, b1 = NAN, b2 = INFINITY;
    // verify
    int grid = 2000;
    int xi_points = 400;
};

// CSV goes to --out when given, else to `out`
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (path.empty()) {
            os_ = &fallback;
        } else {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw ConfigError("cannot open output file " + path);
            os_ = file_.get();
        }
    }
    std::ostream& operator*() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

Strategy pick_strategy(const RunConfig& c, const Roots& r, SolveReport* rep_out = nullptr) {
    if (c.strategy == "optimal") {
        auto rep = solve(c.p);
        if (rep_out) *rep_out = rep;
        (void)r;
        return rep.strategy;
    }
    auto need = [](double v, const char* flag) {
        if (std::isnan(v)) throw ConfigError(std::string("strategy override needs ") + flag);
        return v;
    };
    Strategy s;
    if (c.strategy == "hybrid") s = Hybrid{need(c.a_p, "--a-p"), need(c.a_c, "--a-c"), need(c.b, "--b")};
    else if (c.strategy == "periodic") s = PeriodicBarrier{need(c.b, "--b")};
    else if (c.strategy == "liquidation") s = Liquidation{need(c.b1, "--b1"), c.b2};
    else if (c.strategy == "periodic_zero") s = PeriodicZero{};
    else throw ConfigError("unknown strategy " + c.strategy);
    validate_strategy(c.p, s);
    return s;
}

void print_report(std::ostream& out, const SolveReport& rep) {
    out << "regime=" << regime_label(rep.regime) << "\n";
    out << "strategy=" << describe(rep.strategy) << "\n";
    out << "a_p=" << fmt_num(rep.a_p) << "\n";
    out << "a_c=" << fmt_num(rep.a_c) << "\n";
    out << "b=" << fmt_num(rep.b) << "\n";
    out << "b1=" << fmt_num(rep.b1) << "\n";
    out << "b2=" << fmt_num(rep.b2) << "\n";
    out << "b0=" << fmt_num(rep.b0) << "\n";
    out << "asymptotic=" << (rep.asymptotic ? 1 : 0) << "\n";
    for (const auto& x : rep.residuals)
        out << "residual[" << x.name << (x.boundary ? ",boundary" : "") << "]=" << fmt_num(x.value) << "\n";
    if (!rep.note.empty()) out << "note=" << rep.note << "\n";
}

int cmd_solve(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const double tol = c.tol > 0 ? c.tol : 1e-8;
    SolveOptions o;
    o.tol = tol;
    auto rep = solve(c.p, o);
    print_report(out, rep);
    if (!c.out_path.empty()) {
        Sink s(c.out_path, out);
        *s << "regime,a_p,a_c,b,b1,b2,b0,asymptotic,max_residual\n";
        *s << regime_label(rep.regime) << "," << fmt_num(rep.a_p) << "," << fmt_num(rep.a_c) << ","
           << fmt_num(rep.b) << "," << fmt_num(rep.b1) << "," << fmt_num(rep.b2) << ","
           << fmt_num(rep.b0) << "," << (rep.asymptotic ? 1 : 0) << "," << fmt_num(rep.max_residual())
           << "\n";
    }
    if (!rep.converged(tol)) {
        err << "solver residual " << rep.max_residual() << " above tolerance " << tol << "\n";
        return kExitNoBracket;
    }
    return kExitOk;
}

int cmd_value(const RunConfig& c, std::ostream& out) {
    if (c.points < 1) throw ConfigError("--points must be >= 1");
    if (!(c.x_max > 0)) throw ConfigError("--x-max must be positive");
    const Roots r = solve_roots(c.p);
    const Strategy s = pick_strategy(c, r);
    const ValueFunction vf(c.p, r, s);
    Sink sink(c.out_path, out);
    *sink << "x,V,dV,d2V\n";
    for (double x : uniform_grid(c.x_max, c.points))
        *sink << fmt_num(x) << "," << fmt_num(vf.value(x)) << "," << fmt_num(vf.d1(x)) << ","
              << fmt_num(vf.d2(x)) << "\n";
    return kExitOk;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
    const Roots r = solve_roots(c.p);
    const Strategy s = pick_strategy(c, r);
    SimConfig sc;
    sc.x0 = c.x0;
    sc.dt = c.dt;
    sc.horizon = c.horizon;
    sc.trunc_tol = c.trunc_tol;
    sc.n_paths = c.paths;
    sc.seed = c.seed;
    sc.antithetic = c.antithetic;
    sc.bridge = c.bridge;
    sc.threads = c.threads;
    const auto res = simulate(c.p, r, s, sc);
    const double v = value(c.p, r, s, c.x0);
    out << "strategy=" << describe(s) << "\n";
    out << "x0=" << fmt_num(c.x0) << "\n";
    out << "epv_mean=" << fmt_num(res.epv_mean) << "\n";
    out << "epv_stderr=" << fmt_num(res.epv_stderr) << "\n";
    out << "analytic_value=" << fmt_num(v) << "\n";
    out << "ruin_fraction=" << fmt_num(res.ruin_fraction) << "\n";
    out << "mean_ruin_time=" << fmt_num(res.mean_ruin_time) << "\n";
    out << "n_periodic=" << res.n_periodic << "\n";
    out << "n_immediate=" << res.n_immediate << "\n";
    out << "n_liquidated=" << res.n_liquidated << "\n";
    out << "n_paths=" << res.n_paths << "\n";
    out << "horizon=" << fmt_num(res.horizon) << "\n";
    out << "tail_bound=" << fmt_num(res.tail_bound) << "\n";
    if (!c.out_path.empty()) {
        Sink sink(c.out_path, out);
        *sink << "x0,epv_mean,epv_stderr,ruin_fraction,mean_ruin_time,n_periodic,n_immediate,n_paths\n";
        *sink << fmt_num(c.x0) << "," << fmt_num(res.epv_mean) << "," << fmt_num(res.epv_stderr) << ","
              << fmt_num(res.ruin_fraction) << "," << fmt_num(res.mean_ruin_time) << "," << res.n_periodic
              << "," << res.n_immediate << "," << res.n_paths << "\n";
    }
    return kExitOk;
}

double& axis_ref(ModelParams& p, const std::string& axis) {
    if (axis == "chi") return p.chi;
    if (axis == "beta") return p.beta;
    if (axis == "sigma") return p.sigma;
    if (axis == "gamma") return p.gamma;
    if (axis == "delta") return p.delta;
    if (axis == "mu") return p.mu;
    throw ConfigError("unknown sweep axis " + axis);
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
    if (c.axis.empty()) throw ConfigError("--sweep <axis> is required");
    if (c.count < 1) throw ConfigError("--count must be >= 1");
    ModelParams base = c.p;
    axis_ref(base, c.axis);  // validates the axis name
    Sink sink(c.out_path, out);
    *sink << "param,regime,a_p,a_c,b,b1,b2,b0,asymptotic,error\n";
    for (int i = 0; i < c.count; ++i) {
        ModelParams p = base;
        const double v = c.count == 1 ? c.from : c.from + (c.to - c.from) * i / (c.count - 1);
        axis_ref(p, c.axis) = v;
        std::string regime, error;
        SolveReport rep;
        try {
            p.validate();
            rep = solve(p);
            regime = regime_label(rep.regime);
            if (p.mu > 0 && std::isnan(rep.b0)) rep.b0 = periodic_b0(p, solve_roots(p));
        } catch (const std::exception& e) {
            error = e.what();
            for (auto& ch : error)
                if (ch == ',' || ch == '\n') ch = ';';
        }
        *sink << fmt_num(v) << "," << regime << "," << fmt_num(rep.a_p) << "," << fmt_num(rep.a_c) << ","
              << fmt_num(rep.b) << "," << fmt_num(rep.b1) << "," << fmt_num(rep.b2) << ","
              << fmt_num(rep.b0) << "," << (error.empty() ? (rep.asymptotic ? "1" : "0") : "") << ","
              << error << "\n";
    }
    return kExitOk;
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
    const double tol = c.tol > 0 ? c.tol : 1e-6;
    const Roots r = solve_roots(c.p);
    const Strategy s = pick_strategy(c, r);
    double top = 1.0;
    if (auto h = std::get_if<Hybrid>(&s)) top = h->b;
    else if (auto pb = std::get_if<PeriodicBarrier>(&s)) top = std::max(pb->b, 1.0);
    else if (auto l = std::get_if<Liquidation>(&s)) top = l->half() ? l->b1 : l->b2;
    const auto rep = check_hjb(c.p, r, s, uniform_grid(3.0 * top, c.grid), c.xi_points);
    out << "strategy=" << describe(s) << "\n";
    out << "points=" << rep.n_points << "\n";
    out << "max_generator=" << fmt_num(rep.max_generator) << " at x=" << fmt_num(rep.worst_generator_x) << "\n";
    out << "max_sup_residual=" << fmt_num(rep.max_sup_residual) << " at x=" << fmt_num(rep.worst_sup_x) << "\n";
    out << "max_c1_jump=" << fmt_num(rep.max_c1_jump) << " at x=" << fmt_num(rep.worst_kink) << "\n";
    out << "max_violation=" << fmt_num(rep.max_violation) << "\n";
    bool ok = rep.pass(tol);
    if (auto h = std::get_if<Hybrid>(&s)) {
        const auto au = audit_derivative_pattern(c.p, r, *h);
        out << "pattern_branch=" << au.branch << "\n";
        out << "pattern=" << (au.pass ? "pass" : "fail") << "\n";
        for (const auto& v : au.violations)
            out << "pattern_violation x=" << fmt_num(v.x) << " V'=" << fmt_num(v.d1) << " expected " << v.expected << "\n";
        ok = ok && au.pass;
    }
    out << "verdict=" << (ok ? "pass" : "fail") << "\n";
    return ok ? kExitOk : kExitViolation;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal hybrid dividend barriers: solve, evaluate, simulate, sweep, verify"};
    app.fallthrough();
    app.require_subcommand(1, 1);
    app.set_config("--config", "", "flat key=value file; keys match flag names");

    RunConfig c;
    app.add_option("--mu", c.p.mu, "drift")->required();
    app.add_option("--sigma", c.p.sigma, "volatility")->required();
    app.add_option("--chi", c.p.chi, "fixed cost per immediate dividend")->required();
    app.add_option("--beta", c.p.beta, "net proportion kept on immediate dividends")->required();
    app.add_option("--gamma", c.p.gamma, "rate of periodic decision times")->required();
    app.add_option("--delta", c.p.delta, "discount rate")->required();
    app.add_option("--out", c.out_path, "CSV output path");
    app.add_option("--tol", c.tol, "residual / violation tolerance");
    app.add_option("--x0", c.x0, "initial surplus (simulate)");
    app.add_option("--paths", c.paths, "Monte Carlo paths");
    app.add_option("--dt", c.dt, "Euler step");
    app.add_option("--horizon", c.horizon, "simulation horizon (0 = from --trunc-tol)");
    app.add_option("--trunc-tol", c.trunc_tol, "bound on exp(-delta*horizon)");
    app.add_option("--seed", c.seed, "random seed");
    app.add_option("--antithetic", c.antithetic, "antithetic pairs (true/false)");
    app.add_option("--bridge", c.bridge, "Brownian-bridge ruin correction (true/false)");
    app.add_option("--threads", c.threads, "worker threads (0 = all cores)");
    app.add_option("--x-max", c.x_max, "right end of the value grid");
    app.add_option("--points", c.points, "value grid points");
    app.add_option("--sweep", c.axis, "sweep axis: chi|beta|sigma|gamma|delta|mu");
    app.add_option("--from", c.from, "sweep start");
    app.add_option("--to", c.to, "sweep end");
    app.add_option("--count", c.count, "sweep points");
    app.add_option("--strategy", c.strategy, "optimal|hybrid|periodic|liquidation|periodic_zero");
    app.add_option("--a-p", c.a_p, "periodic barrier a_p");
    app.add_option("--a-c", c.a_c, "immediate payout level a_c");
    app.add_option("--b", c.b, "trigger barrier b");
    app.add_option("--b1", c.b1, "liquidation band start");
    app.add_option("--b2", c.b2, "liquidation band end (inf allowed)");
    app.add_option("--grid", c.grid, "verify: x-grid points");
    app.add_option("--xi-points", c.xi_points, "verify: uniform xi points per x");

    auto* s_solve = app.add_subcommand("solve", "classify and compute optimal barriers");
    auto* s_value = app.add_subcommand("value", "CSV of V, V', V'' on a grid");
    auto* s_sim = app.add_subcommand("simulate", "Monte Carlo EPV estimate");
    auto* s_sweep = app.add_subcommand("sweep", "solve along one parameter axis, CSV");
    auto* s_verify = app.add_subcommand("verify", "HJB grid check and derivative audit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, e2;
        const int code = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        if (code == 0) return kExitOk;
        err << app.help();
        return kExitConfig;
    }

    try {
        c.p.validate();
        if (s_solve->parsed()) return cmd_solve(c, out, err);
        if (s_value->parsed()) return cmd_value(c, out);
        if (s_sim->parsed()) return cmd_simulate(c, out);
        if (s_sweep->parsed()) return cmd_sweep(c, out);
        if (s_verify->parsed()) return cmd_verify(c, out);
    } catch (const InvalidParameter& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NoBracket& e) {
        err << "error: " << e.what() << "\n";
        return kExitNoBracket;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitConfig;
}

}  // namespace divopt
