#pragma once

#include <cmath>
#include <cstdint>

#include "divopt/core_math.hpp"
#include "divopt/strategy.hpp"

namespace divopt {

struct SimConfig {
    double x0 = 1.0;
    double dt = 1e-3;
    double horizon = 0.0;      // 0: pick the smallest horizon meeting trunc_tol
    double trunc_tol = 1e-6;   // required bound on e^{-delta horizon}
    long n_paths = 10000;
    std::uint64_t seed = 42;
    bool antithetic = true;
    bool bridge = false;       // Brownian-bridge ruin correction
    int threads = 0;           // 0: hardware concurrency

    // throws ConfigError; returns the horizon actually used
    double validated_horizon(const ModelParams& p) const;
};

struct SimResult {
    double epv_mean = 0;
    double epv_stderr = 0;
    double ruin_fraction = 0;
    double mean_ruin_time = 0;  // over ruined paths; 0 if none
    long n_periodic = 0;        // count of strictly positive periodic payments
    long n_immediate = 0;
    long n_liquidated = 0;      // paths ended by paying out everything
    long n_paths = 0;
    double horizon = 0;
    double tail_bound = 0;      // e^{-delta H} * sup of the value reachable at H
};

enum class DividendKind { None, Periodic, Immediate };

struct Dividend {
    double amount = 0;
    DividendKind kind = DividendKind::None;
};

// stationary payment rule of a strategy at surplus x
Dividend policy_step(const Strategy& s, double x, bool is_decision_time);

SimResult simulate(const ModelParams& p, const Roots& r, const Strategy& s, const SimConfig& c);

// One set of paths simulated at dt and at dt/2 at once: both schemes share
// the Brownian increments and the decision clock, the coarse one only looks
// at the immediate rule (and, without the bridge correction, at ruin) on every
// other grid point. Each half is distributed exactly as simulate() at its dt.
struct HalvingResult {
    SimResult coarse, fine;
    double delta = 0;            // fine - coarse
    double delta_stderr = 0;     // paired
    double combined_stderr = 0;  // sqrt(se_coarse^2 + se_fine^2)
    bool pass() const { return std::abs(delta) < combined_stderr; }
};

HalvingResult simulate_halving(const ModelParams& p, const Roots& r, const Strategy& s,
                               const SimConfig& c);

// per-path stream seed
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace divopt
