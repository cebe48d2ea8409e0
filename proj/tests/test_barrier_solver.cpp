#include <doctest.h>

#include <cmath>
#include <random>

#include "divopt/barrier_solver.hpp"
#include "divopt/errors.hpp"
#include "divopt/value_functions.hpp"
#include "oracle.hpp"

using namespace divopt;

namespace {
ModelParams pos() { return ModelParams::make(1, 0.3, 0.01, 0.9, 1, 0.15); }
ModelParams neg() { return ModelParams::make(-1, 0.3, 0.15, 0.7, 1, 0.15); }
double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }
}  // namespace

TEST_CASE("classification examples") {
    auto p = pos();
    CHECK(classify_regime(p, solve_roots(p)) == Regime::ProfitableHybrid);
    auto q = ModelParams::make(1, 0.3, 0.01, 0.5, 1, 0.15);
    CHECK(classify_regime(q, solve_roots(q)) == Regime::ProfitablePeriodic);
    auto n = neg();
    // chi/beta ~ 0.214 < -mu/(gamma+delta) ~ 0.870 and beta = 0.7 > beta0
    CHECK(classify_regime(n, solve_roots(n)) == Regime::UnprofitableLiquidationFinite);
    auto h = ModelParams::make(-1, 0.3, 0.15, 0.9, 1, 0.15);
    CHECK(classify_regime(h, solve_roots(h)) == Regime::UnprofitableLiquidationHalf);
    auto z = ModelParams::make(-1, 0.3, 0.15, 0.45, 1, 0.15);
    CHECK(classify_regime(z, solve_roots(z)) == Regime::UnprofitablePeriodicZero);
    // chi/beta beyond -m: never worth an immediate payment at beta <= p
    auto big = ModelParams::make(-1, 0.3, 0.9, 0.8, 1, 0.15);
    CHECK(classify_regime(big, solve_roots(big)) == Regime::UnprofitablePeriodicZero);
    CHECK(regime_label(Regime::ProfitableHybrid) == "hybrid");
}

TEST_CASE("baseline hybrid matches the oracle") {
    auto rep = solve(pos());
    CHECK(rep.regime == Regime::ProfitableHybrid);
    CHECK(rel(rep.a_p, oracle::pos::a_p) < 1e-9);
    CHECK(rel(rep.a_c, oracle::pos::a_c) < 1e-9);
    CHECK(rel(rep.b, oracle::pos::b) < 1e-9);
    CHECK(rep.max_residual() < 1e-8);
    CHECK_FALSE(rep.asymptotic);
    CHECK(rep.residuals.size() == 3);
}

TEST_CASE("periodic b0 matches the oracle and inverts Q") {
    auto p = pos();
    auto r = solve_roots(p);
    const double b0 = periodic_b0(p, r);
    CHECK(rel(b0, oracle::pos::b0) < 1e-10);
    const double qstar = r.s1 * r.w / (r.r1 + r.s1);
    CHECK(std::abs(Q_function(p, r, b0) - qstar) < 1e-10);
    CHECK(K_function(r, qstar) == doctest::Approx(1.0).epsilon(1e-12));

    auto q = ModelParams::make(1, 0.3, 0.01, 0.5, 1, 0.15);
    auto rep = solve(q);
    CHECK(rep.regime == Regime::ProfitablePeriodic);
    CHECK(rel(rep.b0, oracle::pos::b0) < 1e-10);
    CHECK(std::holds_alternative<PeriodicBarrier>(rep.strategy));
}

TEST_CASE("periodic b0 is zero when the sufficient ratio is at most one") {
    // large sigma relative to mu
    auto p = ModelParams::make(0.05, 3, 0.01, 0.5, 1, 0.15);
    auto r = solve_roots(p);
    CHECK((-r.s1 / r.r1) * r.pvfactor <= 1);
    CHECK(periodic_b0(p, r) == 0.0);
    auto rep = solve(p);
    CHECK(rep.b0 == 0.0);
    CHECK(value(p, r, rep.strategy, 0.7) == doctest::Approx(periodic_zero_value(r, 0.7)).epsilon(1e-12));
}

TEST_CASE("Q is decreasing on (0, a_bar)") {
    auto p = pos();
    auto r = solve_roots(p);
    double prev = Q_function(p, r, 1e-6);
    for (int i = 1; i <= 100; ++i) {
        const double a = r.a_bar * i / 101.0;
        const double q = Q_function(p, r, a);
        CHECK(q < prev);
        prev = q;
    }
}

TEST_CASE("unprofitable finite liquidation matches the oracle") {
    auto p = neg();
    auto r = solve_roots(p);
    CHECK(rel(a_beta(p, r, p.beta), oracle::neg::a_beta) < 1e-10);
    CHECK(rel(c_beta_chi(p, r), oracle::neg::c_beta_chi) < 1e-10);
    CHECK(rel(beta0(p, r), oracle::neg::beta0) < 1e-9);
    CHECK(rel(beta0_boundary(p), oracle::neg::beta0_fixed) < 1e-9);
    auto rep = solve(p);
    CHECK(rep.regime == Regime::UnprofitableLiquidationFinite);
    CHECK(rel(rep.b1, oracle::neg::b1) < 1e-9);
    CHECK(rel(rep.b2, oracle::neg::b2) < 1e-9);
    // ordering chain
    CHECK(oracle::neg::c_beta_chi < rep.b1);
    CHECK(rep.b1 < oracle::neg::a_beta);
    CHECK(oracle::neg::a_beta < rep.b2);
    // the b2 equation: V'(b2+) = beta
    CHECK(value_d1(p, r, rep.strategy, rep.b2, Side::Right) == doctest::Approx(p.beta).epsilon(1e-12));
}

TEST_CASE("(b, inf) liquidation matches the oracle") {
    auto p = ModelParams::make(-1, 0.3, 0.15, 0.9, 1, 0.15);
    auto rep = solve(p);
    CHECK(rep.regime == Regime::UnprofitableLiquidationHalf);
    CHECK(rel(rep.b1, oracle::neg::b_half_09) < 1e-9);
    CHECK(std::isinf(rep.b2));
    CHECK(std::abs(liquidation_smooth_fit(p, solve_roots(p), rep.b1)) < 1e-8);
}

TEST_CASE("Lambda: zero at V'(0; pi0), increasing, limit -m") {
    auto p = neg();
    auto r = solve_roots(p);
    const double start = periodic_zero_d1(r, 0);
    CHECK(std::abs(Lambda(p, r, start)) < 1e-10);
    double prev = -1;
    for (int i = 1; i <= 100; ++i) {
        const double bp = start + (r.pvfactor - start) * i / 101.0;
        const double L = Lambda(p, r, bp);
        CHECK(L > prev);
        prev = L;
    }
    CHECK(Lambda(p, r, r.pvfactor - 1e-9) == doctest::Approx(-r.m).epsilon(1e-4));
    CHECK_THROWS_AS(a_beta(p, r, 0.95), OutOfRange);
}

TEST_CASE("sufficient-condition hints") {
    auto big = ModelParams::make(0.01, 3, 0.01, 0.9, 1, 0.15);
    auto h = sufficient_condition_hints(big, solve_roots(big));
    CHECK(h.predict_ap_zero);
    CHECK(h.predict_ac_zero);
    auto rep = solve(big);
    CHECK(rep.a_p == 0.0);

    auto small = ModelParams::make(5, 0.05, 0.01, 0.9, 1, 0.15);
    auto hs = sufficient_condition_hints(small, solve_roots(small));
    CHECK_FALSE(hs.predict_ap_zero);
    CHECK_FALSE(hs.predict_ac_zero);
}

TEST_CASE("property: advisory a_p = 0 prediction is consistent with the solver") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0, 1);
    int predicted = 0;
    for (int i = 0; i < 60; ++i) {
        auto p = ModelParams::make(0.02 + U(rng), 0.5 + 4 * U(rng), 0.01, 0.95, 1, 0.15);
        auto r = solve_roots(p);
        auto h = sufficient_condition_hints(p, r);
        // with eps_k = 0 the threshold is only approximate, so keep a margin
        if (h.ratio > 0.9) continue;
        ++predicted;
        auto rep = solve(p);
        CHECK(rep.a_p == 0.0);
        if (h.ratio <= 0.9 * p.beta) CHECK(rep.a_c == 0.0);
    }
    CHECK(predicted > 0);
}

TEST_CASE("hint with eps_k = 0 can miss just below its threshold") {
    auto p = ModelParams::make(0.0704366, 0.722145, 0.01, 0.95, 1, 0.15);
    auto r = solve_roots(p);
    auto h = sufficient_condition_hints(p, r);
    CHECK(h.predict_ap_zero);
    CHECK(h.ratio > 0.98);
    auto rep = solve(p);
    CHECK(rep.a_p > 0.02);
    CHECK(rep.max_residual() < 1e-8);
}

TEST_CASE("property: uniqueness under perturbed windows") {
    for (double beta : {0.9, 0.97}) {
        auto p = ModelParams::make(1, 0.3, 0.01, beta, 1, 0.15);
        auto ref = solve(p);
        for (double wdw : {0.05, 0.3, 3.0, 17.0}) {
            SolveOptions o;
            o.window = wdw;
            auto rep = solve(p, o);
            CHECK(std::abs(rep.a_p - ref.a_p) < 1e-7);
            CHECK(std::abs(rep.a_c - ref.a_c) < 1e-7);
            CHECK(std::abs(rep.b - ref.b) < 1e-7);
        }
    }
}

TEST_CASE("property: rescaling money units scales the barriers") {
    // X -> kX maps (mu, sigma, chi) to (k mu, k sigma, k chi)
    for (double k : {0.1, 3.0, 20.0}) {
        auto a = solve(pos());
        auto b = solve(ModelParams::make(k * 1, k * 0.3, k * 0.01, 0.9, 1, 0.15));
        CHECK(b.a_p == doctest::Approx(k * a.a_p).epsilon(1e-8));
        CHECK(b.a_c == doctest::Approx(k * a.a_c).epsilon(1e-8));
        CHECK(b.b == doctest::Approx(k * a.b).epsilon(1e-8));
        auto c = solve(neg());
        auto d = solve(ModelParams::make(-k, k * 0.3, k * 0.15, 0.7, 1, 0.15));
        CHECK(d.b1 == doctest::Approx(k * c.b1).epsilon(1e-8));
        CHECK(d.b2 == doctest::Approx(k * c.b2).epsilon(1e-8));
    }
}

TEST_CASE("property: ordering and residuals on random hybrid parameters") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0, 1);
    for (int i = 0; i < 50; ++i) {
        const double gam = 0.2 + 3 * U(rng), del = 0.05 + 0.5 * U(rng);
        const double pv = gam / (gam + del);
        const double beta = pv + (1 - pv) * (0.1 + 0.9 * U(rng));
        const double mu = 0.1 + 2 * U(rng);
        auto p = ModelParams::make(mu, 0.1 + U(rng), 0.001 + 0.05 * mu * U(rng), beta, gam, del);
        auto rep = solve(p);
        CAPTURE(describe(rep.strategy));
        REQUIRE(rep.regime == Regime::ProfitableHybrid);
        if (rep.asymptotic) continue;
        CHECK(rep.max_residual() < 1e-8);
        CHECK(rep.a_p <= rep.a_c);
        CHECK(rep.b > rep.a_c + p.chi / p.beta);
    }
}

TEST_CASE("chi -> 0 closes the gap between a_p and b") {
    double prev = 1e300;
    for (double chi : {0.04, 0.02, 0.01, 0.005, 0.001}) {
        auto rep = solve(ModelParams::make(1, 0.3, chi, 0.9, 1, 0.15));
        const double gap = rep.b - rep.a_p;
        CHECK(gap < prev);
        prev = gap;
    }
}

TEST_CASE("beta -> 1 shrinks a_c - a_p") {
    double prev = 1e300;
    for (double beta : {0.95, 0.98, 0.99, 0.999}) {
        auto rep = solve(ModelParams::make(1, 0.3, 0.001, beta, 1, 0.15));
        const double split = rep.a_c - rep.a_p;
        CHECK(split < prev);
        prev = split;
    }
}

TEST_CASE("barrier is continuous across zero drift") {
    // oracle: direct solve of V(0)=0, V(b)=beta b - chi, V'(b)=beta for the pay-all-at-T strategy
    auto up = solve(ModelParams::make(1e-4, 0.3, 0.01, 0.9, 1, 0.15));
    auto dn = solve(ModelParams::make(-1e-4, 0.3, 0.01, 0.9, 1, 0.15));
    auto z = solve(ModelParams::make(0, 0.3, 0.01, 0.9, 1, 0.15));
    CHECK(up.regime == Regime::ProfitableHybrid);
    CHECK(dn.regime == Regime::UnprofitableLiquidationHalf);
    CHECK(up.b == doctest::Approx(0.52665044202979914795).epsilon(1e-10));
    CHECK(dn.b1 == doctest::Approx(0.52220650149421515824).epsilon(1e-10));
    CHECK(z.b == doctest::Approx(0.52442485597992004995).epsilon(1e-10));
    // the gap closes linearly in |mu|
    double prev = std::abs(up.b - dn.b1);
    for (double m : {1e-5, 1e-6}) {
        const double gap = std::abs(solve(ModelParams::make(m, 0.3, 0.01, 0.9, 1, 0.15)).b -
                                    solve(ModelParams::make(-m, 0.3, 0.01, 0.9, 1, 0.15)).b1);
        CHECK(gap == doctest::Approx(prev / 10).epsilon(1e-2));
        prev = gap;
    }
}

TEST_CASE("zero drift gives hybrid (0, 0, b)") {
    auto rep = solve(ModelParams::make(0, 0.3, 0.15, 0.9, 1, 0.15));
    CHECK(rep.a_p == 0.0);
    CHECK(rep.a_c == 0.0);
    CHECK(rep.b > 0.15 / 0.9);
    CHECK(rep.max_residual() < 1e-8);
}

TEST_CASE("near the hybrid/periodic boundary the solver still converges or flags") {
    auto p = ModelParams::make(1, 0.3, 0.01, 1 / 1.15 + 1e-6, 1, 0.15);
    auto rep = solve(p);
    CHECK(std::isfinite(rep.a_p));
    CHECK(rep.a_p == doctest::Approx(oracle::pos::b0).epsilon(1e-3));
    CHECK((rep.asymptotic || rep.max_residual() < 1e-8));
}
