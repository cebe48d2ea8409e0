#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "divopt/barrier_solver.hpp"
#include "divopt/cli.hpp"
#include "divopt/errors.hpp"
#include "divopt/simulator.hpp"
#include "divopt/value_functions.hpp"
#include "divopt/verification.hpp"

namespace py = pybind11;
using namespace divopt;

namespace {
ModelParams params(double mu, double sigma, double chi, double beta, double gamma, double delta) {
    return ModelParams::make(mu, sigma, chi, beta, gamma, delta);
}

std::vector<double> eval_many(const ModelParams& p, const Strategy& s, const std::vector<double>& xs, int deriv,
                              Side side) {
    const Roots r = solve_roots(p);
    ValueFunction V(p, r, s);
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(deriv == 0 ? V.value(x) : deriv == 1 ? V.d1(x, side) : V.d2(x, side));
    return out;
}
}  // namespace

PYBIND11_MODULE(_divopt, m) {
    m.doc() = "Optimal periodic/immediate dividend barriers: solver, value functions, checks, Monte Carlo";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidParameter>(m, "InvalidParameter", base.ptr());
    py::register_exception<DegenerateDenominator>(m, "DegenerateDenominator", base.ptr());
    py::register_exception<NoBracket>(m, "NoBracket", base.ptr());
    py::register_exception<NumericOverflow>(m, "NumericOverflow", base.ptr());
    py::register_exception<OutOfRange>(m, "OutOfRange", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init(&params), py::arg("mu"), py::arg("sigma"), py::arg("chi"), py::arg("beta"), py::arg("gamma"),
             py::arg("delta"))
        .def_readonly("mu", &ModelParams::mu)
        .def_readonly("sigma", &ModelParams::sigma)
        .def_readonly("chi", &ModelParams::chi)
        .def_readonly("beta", &ModelParams::beta)
        .def_readonly("gamma", &ModelParams::gamma)
        .def_readonly("delta", &ModelParams::delta)
        .def("__repr__", [](const ModelParams& p) {
            std::ostringstream os;
            os << "ModelParams(mu=" << p.mu << ", sigma=" << p.sigma << ", chi=" << p.chi << ", beta=" << p.beta
               << ", gamma=" << p.gamma << ", delta=" << p.delta << ")";
            return os.str();
        });

    py::class_<Roots>(m, "Roots")
        .def_readonly("r0", &Roots::r0)
        .def_readonly("s0", &Roots::s0)
        .def_readonly("r1", &Roots::r1)
        .def_readonly("s1", &Roots::s1)
        .def_readonly("alpha", &Roots::alpha)
        .def_readonly("pvfactor", &Roots::pvfactor)
        .def_readonly("a_bar", &Roots::a_bar);

    m.def("laplace_exponent", &laplace_exponent, py::arg("params"), py::arg("theta"));
    m.def("solve_roots", &solve_roots, py::arg("params"));

    py::class_<PeriodicBarrier>(m, "PeriodicBarrier")
        .def(py::init([](double b) { return PeriodicBarrier{b}; }), py::arg("b"))
        .def_readonly("b", &PeriodicBarrier::b)
        .def("__repr__", [](const PeriodicBarrier& s) { return describe(s); });
    py::class_<Hybrid>(m, "Hybrid")
        .def(py::init([](double a_p, double a_c, double b) { return Hybrid{a_p, a_c, b}; }), py::arg("a_p"),
             py::arg("a_c"), py::arg("b"))
        .def_readonly("a_p", &Hybrid::a_p)
        .def_readonly("a_c", &Hybrid::a_c)
        .def_readonly("b", &Hybrid::b)
        .def("__repr__", [](const Hybrid& s) { return describe(s); });
    py::class_<Liquidation>(m, "Liquidation")
        .def(py::init([](double b1, double b2) { return Liquidation{b1, b2}; }), py::arg("b1"),
             py::arg("b2") = kInf)
        .def_readonly("b1", &Liquidation::b1)
        .def_readonly("b2", &Liquidation::b2)
        .def("__repr__", [](const Liquidation& s) { return describe(s); });
    py::class_<PeriodicZero>(m, "PeriodicZero")
        .def(py::init<>())
        .def("__repr__", [](const PeriodicZero& s) { return describe(s); });

    py::enum_<Regime>(m, "Regime")
        .value("ProfitablePeriodic", Regime::ProfitablePeriodic)
        .value("ProfitableHybrid", Regime::ProfitableHybrid)
        .value("UnprofitablePeriodicZero", Regime::UnprofitablePeriodicZero)
        .value("UnprofitableLiquidationFinite", Regime::UnprofitableLiquidationFinite)
        .value("UnprofitableLiquidationHalf", Regime::UnprofitableLiquidationHalf);
    m.def("regime_label", &regime_label);
    m.def("classify_regime", [](const ModelParams& p) { return classify_regime(p, solve_roots(p)); },
          py::arg("params"));

    py::class_<Residual>(m, "Residual")
        .def_readonly("name", &Residual::name)
        .def_readonly("value", &Residual::value)
        .def_readonly("boundary", &Residual::boundary);

    py::class_<SolveReport>(m, "SolveReport")
        .def_readonly("regime", &SolveReport::regime)
        .def_readonly("strategy", &SolveReport::strategy)
        .def_readonly("a_p", &SolveReport::a_p)
        .def_readonly("a_c", &SolveReport::a_c)
        .def_readonly("b", &SolveReport::b)
        .def_readonly("b1", &SolveReport::b1)
        .def_readonly("b2", &SolveReport::b2)
        .def_readonly("b0", &SolveReport::b0)
        .def_readonly("residuals", &SolveReport::residuals)
        .def_readonly("asymptotic", &SolveReport::asymptotic)
        .def_readonly("note", &SolveReport::note)
        .def_property_readonly("max_residual", &SolveReport::max_residual);

    m.def(
        "solve",
        [](const ModelParams& p, double tol, double window) {
            SolveOptions o;
            o.tol = tol;
            o.window = window;
            return solve(p, o);
        },
        py::arg("params"), py::arg("tol") = 1e-8, py::arg("window") = 1.0);
    m.def("periodic_b0", [](const ModelParams& p) { return periodic_b0(p, solve_roots(p)); }, py::arg("params"));
    m.def("beta0_boundary", &beta0_boundary, py::arg("params"));

    py::enum_<Side>(m, "Side").value("Left", Side::Left).value("Right", Side::Right);
    m.def(
        "value", [](const ModelParams& p, const Strategy& s, double x) { return value(p, solve_roots(p), s, x); },
        py::arg("params"), py::arg("strategy"), py::arg("x"));
    m.def(
        "value_d1",
        [](const ModelParams& p, const Strategy& s, double x, Side side) {
            return value_d1(p, solve_roots(p), s, x, side);
        },
        py::arg("params"), py::arg("strategy"), py::arg("x"), py::arg("side") = Side::Left);
    m.def(
        "value_d2",
        [](const ModelParams& p, const Strategy& s, double x, Side side) {
            return value_d2(p, solve_roots(p), s, x, side);
        },
        py::arg("params"), py::arg("strategy"), py::arg("x"), py::arg("side") = Side::Left);
    m.def(
        "value_grid",
        [](const ModelParams& p, const Strategy& s, const std::vector<double>& xs, int deriv, Side side) {
            return eval_many(p, s, xs, deriv, side);
        },
        py::arg("params"), py::arg("strategy"), py::arg("xs"), py::arg("deriv") = 0, py::arg("side") = Side::Left);

    py::class_<HJBReport>(m, "HJBReport")
        .def_readonly("n_points", &HJBReport::n_points)
        .def_readonly("max_violation", &HJBReport::max_violation)
        .def_readonly("max_generator", &HJBReport::max_generator)
        .def_readonly("max_sup_residual", &HJBReport::max_sup_residual)
        .def_readonly("max_c1_jump", &HJBReport::max_c1_jump)
        .def("passed", &HJBReport::pass, py::arg("tol") = 1e-6);
    m.def(
        "check_hjb",
        [](const ModelParams& p, const Strategy& s, double x_max, int n_points, int xi_points) {
            return check_hjb(p, solve_roots(p), s, uniform_grid(x_max, n_points), xi_points);
        },
        py::arg("params"), py::arg("strategy"), py::arg("x_max"), py::arg("n_points") = 2000,
        py::arg("xi_points") = 400);

    py::class_<PatternAudit>(m, "PatternAudit")
        .def_readonly("passed", &PatternAudit::pass)
        .def_readonly("branch", &PatternAudit::branch)
        .def_readonly("checked", &PatternAudit::checked)
        .def_property_readonly("n_violations", [](const PatternAudit& a) { return a.violations.size(); });
    m.def(
        "audit_derivative_pattern",
        [](const ModelParams& p, const Hybrid& h, int n_grid) {
            return audit_derivative_pattern(p, solve_roots(p), h, n_grid);
        },
        py::arg("params"), py::arg("strategy"), py::arg("n_grid") = 2000);

    py::class_<SimResult>(m, "SimResult")
        .def_readonly("epv_mean", &SimResult::epv_mean)
        .def_readonly("epv_stderr", &SimResult::epv_stderr)
        .def_readonly("ruin_fraction", &SimResult::ruin_fraction)
        .def_readonly("mean_ruin_time", &SimResult::mean_ruin_time)
        .def_readonly("n_periodic", &SimResult::n_periodic)
        .def_readonly("n_immediate", &SimResult::n_immediate)
        .def_readonly("n_liquidated", &SimResult::n_liquidated)
        .def_readonly("n_paths", &SimResult::n_paths)
        .def_readonly("horizon", &SimResult::horizon)
        .def_readonly("tail_bound", &SimResult::tail_bound);
    m.def(
        "simulate",
        [](const ModelParams& p, const Strategy& s, double x0, long n_paths, double dt, double horizon,
           double trunc_tol, std::uint64_t seed, bool antithetic, bool bridge, int threads) {
            SimConfig c;
            c.x0 = x0;
            c.n_paths = n_paths;
            c.dt = dt;
            c.horizon = horizon;
            c.trunc_tol = trunc_tol;
            c.seed = seed;
            c.antithetic = antithetic;
            c.bridge = bridge;
            c.threads = threads;
            py::gil_scoped_release release;
            return simulate(p, solve_roots(p), s, c);
        },
        py::arg("params"), py::arg("strategy"), py::arg("x0") = 1.0, py::arg("n_paths") = 10000,
        py::arg("dt") = 1e-3, py::arg("horizon") = 0.0, py::arg("trunc_tol") = 1e-6, py::arg("seed") = 42,
        py::arg("antithetic") = true, py::arg("bridge") = false, py::arg("threads") = 0);

    py::enum_<DividendKind>(m, "DividendKind")
        .value("None_", DividendKind::None)
        .value("Periodic", DividendKind::Periodic)
        .value("Immediate", DividendKind::Immediate);
    m.def(
        "policy_step",
        [](const Strategy& s, double x, bool is_decision_time) {
            auto d = policy_step(s, x, is_decision_time);
            return py::make_tuple(d.amount, d.kind);
        },
        py::arg("strategy"), py::arg("x"), py::arg("is_decision_time"));

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "divopt");
            std::vector<const char*> argv;
            for (auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
