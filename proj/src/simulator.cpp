#include "divopt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <boost/random/mersenne_twister.hpp>
#include <sstream>
#include <thread>
#include <vector>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "divopt/errors.hpp"
#include "divopt/value_functions.hpp"

namespace divopt {

namespace {
std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double SimConfig::validated_horizon(const ModelParams& p) const {
    if (!(dt > 0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if (n_paths < 1) throw ConfigError("n_paths must be >= 1");
    if (antithetic && n_paths % 2 != 0) throw ConfigError("antithetic sampling needs an even n_paths");
    if (!(trunc_tol > 0 && trunc_tol < 1)) throw ConfigError("trunc_tol must lie in (0, 1)");
    if (!(x0 >= 0) || !std::isfinite(x0)) throw ConfigError("x0 must be >= 0");
    double h = horizon;
    if (h == 0) h = std::log(1.0 / trunc_tol) / p.delta;
    if (!(h > 0) || !std::isfinite(h)) throw ConfigError("horizon must be positive");
    if (h < dt) throw ConfigError("horizon shorter than dt");
    if (std::exp(-p.delta * h) > trunc_tol * (1 + 1e-12)) {
        std::ostringstream os;
        os << "horizon " << h << " too short: e^{-delta H} = " << std::exp(-p.delta * h)
           << " exceeds trunc_tol " << trunc_tol;
        throw ConfigError(os.str());
    }
    return h;
}

Dividend policy_step(const Strategy& s, double x, bool decision) {
    if (x <= 0) return {};
    if (auto h = std::get_if<Hybrid>(&s)) {
        if (decision) {
            if (x > h->a_p) return {x - h->a_p, DividendKind::Periodic};
            return {};
        }
        if (x >= h->b) return {x - h->a_c, DividendKind::Immediate};
        return {};
    }
    if (auto pb = std::get_if<PeriodicBarrier>(&s)) {
        if (decision && x > pb->b) return {x - pb->b, DividendKind::Periodic};
        return {};
    }
    if (auto l = std::get_if<Liquidation>(&s)) {
        if (decision) return {x, DividendKind::Periodic};
        if (x > l->b1 && x < l->b2) return {x, DividendKind::Immediate};
        return {};
    }
    // periodic zero
    if (decision) return {x, DividendKind::Periodic};
    return {};
}

namespace {

struct Path {
    double x = 0;
    double epv = 0;
    bool alive = true;
    bool ruined = false;
    bool liquidated = false;
    double ruin_time = 0;
    long n_per = 0, n_imm = 0;
};

struct Accum {
    // Welford over units (pair means or single paths)
    long n = 0;
    double mean = 0, m2 = 0;
    long ruined = 0, liquidated = 0, per = 0, imm = 0, paths = 0;
    double ruin_time_sum = 0;

    void add_unit(double v) {
        ++n;
        const double d = v - mean;
        mean += d / n;
        m2 += d * (v - mean);
    }
    void add_path(const Path& p) {
        ++paths;
        ruined += p.ruined;
        liquidated += p.liquidated;
        per += p.n_per;
        imm += p.n_imm;
        if (p.ruined) ruin_time_sum += p.ruin_time;
    }
    void merge(const Accum& o) {
        if (o.n > 0) {
            const long n_ab = n + o.n;
            const double d = o.mean - mean;
            mean += d * o.n / n_ab;
            m2 += o.m2 + d * d * static_cast<double>(n) * o.n / n_ab;
            n = n_ab;
        }
        ruined += o.ruined;
        liquidated += o.liquidated;
        per += o.per;
        imm += o.imm;
        paths += o.paths;
        ruin_time_sum += o.ruin_time_sum;
    }
};

double reachable_bound(const ModelParams& p, const Roots& r, const Strategy& s, double x0,
                       double horizon);

class Engine {
public:
    // dt here is the finest step; a path with stride k is only monitored every k steps
    Engine(const ModelParams& p, const Strategy& s, const SimConfig& c, double dt, double horizon)
        : p_(p), s_(s), c_(c), dt_(dt), H_(horizon) {
        sd_ = p.sigma * std::sqrt(dt);
        ends_path_ = std::holds_alternative<Liquidation>(s) || std::holds_alternative<PeriodicZero>(s);
        // cheap pre-test for the immediate rule: x in [trig_lo, trig_hi)
        if (auto h = std::get_if<Hybrid>(&s)) {
            trig_lo_ = h->b;
        } else if (auto l = std::get_if<Liquidation>(&s)) {
            trig_lo_ = l->b1;
            trig_hi_ = l->b2;
        }
    }

    // N paths driven by one normal stream and one decision clock; path k uses
    // sign[k] * z and monitors the immediate rule every stride[k] grid steps
    template <int N>
    void run_unit(std::uint64_t index, Path (&paths)[N], const int (&sign)[N],
                  const int (&stride)[N]) const {
        boost::random::mt19937_64 eng(stream_seed(c_.seed, index));
        boost::random::normal_distribution<double> norm;
        boost::random::exponential_distribution<double> expo(p_.gamma);
        boost::random::uniform_01<double> unif;

        int alive = 0;
        for (int k = 0; k < N; ++k) {
            paths[k] = Path{};
            paths[k].x = c_.x0;
            if (c_.x0 <= 0) {
                paths[k].alive = false;
                paths[k].ruined = true;
            } else {
                pay(paths[k], policy_step(s_, c_.x0, false), 1.0);
                alive += paths[k].alive;
            }
        }

        double t = 0;
        long step = 0;
        bool at_grid = true;
        double grid_next = dt_;
        double next_T = expo(eng);
        const double mu_dt = p_.mu * dt_;
        const double two_over_s2 = 2.0 / (p_.sigma * p_.sigma);
        const double bridge_full = two_over_s2 / dt_;
        while (alive > 0 && t < H_) {
            const double t_grid = std::min(grid_next, H_);
            const bool decision = next_T <= t_grid;
            const double t1 = decision ? next_T : t_grid;
            const bool full = !decision && at_grid && grid_next <= H_;
            const double z = norm(eng);
            double drift, sh, bcoef;
            if (full) {
                drift = mu_dt;
                sh = sd_ * z;
                bcoef = bridge_full;
            } else {
                const double h = t1 - t;
                drift = p_.mu * h;
                sh = p_.sigma * std::sqrt(h) * z;
                bcoef = h > 0 ? two_over_s2 / h : 0.0;
            }
            t = t1;
            at_grid = !decision;
            if (!decision) ++step;
            double u = -1;  // shared bridge uniform, drawn on demand
            for (int k = 0; k < N; ++k) {
                Path& q = paths[k];
                if (!q.alive) continue;
                const double x_old = q.x;
                q.x += drift + sign[k] * sh;
                const bool monitored = decision || step % stride[k] == 0;
                bool hit = false;
                if (c_.bridge) {
                    hit = q.x <= 0;
                    if (!hit) {
                        const double ex = -bcoef * x_old * q.x;
                        if (ex > -40.0) {
                            if (u < 0) u = unif(eng);
                            hit = u < std::exp(ex);
                        }
                    }
                } else {
                    hit = monitored && q.x <= 0;
                }
                if (hit) {
                    q.alive = false;
                    q.ruined = true;
                    q.ruin_time = t;
                    q.x = 0;
                    --alive;
                    continue;
                }
                if (decision) {
                    const Dividend d = policy_step(s_, q.x, true);
                    if (d.kind != DividendKind::None) {
                        pay(q, d, std::exp(-p_.delta * t));
                        alive -= !q.alive;
                    }
                } else if (monitored && q.x >= trig_lo_ && q.x < trig_hi_) {
                    const Dividend d = policy_step(s_, q.x, false);
                    if (d.kind != DividendKind::None) {
                        pay(q, d, std::exp(-p_.delta * t));
                        alive -= !q.alive;
                    }
                }
            }
            if (decision) next_T += expo(eng);
            else grid_next = (step + 1) * dt_;
        }
    }

private:
    void pay(Path& q, const Dividend& d, double disc) const {
        if (d.kind == DividendKind::None || !(d.amount > 0)) return;
        if (d.kind == DividendKind::Periodic) {
            q.epv += disc * d.amount;
            ++q.n_per;
        } else {
            q.epv += disc * (p_.beta * d.amount - p_.chi);
            ++q.n_imm;
        }
        q.x -= d.amount;
        if (ends_path_ && q.x <= 0) {
            q.alive = false;
            q.liquidated = true;
            q.x = 0;
        }
    }

    const ModelParams& p_;
    const Strategy& s_;
    const SimConfig& c_;
    double dt_;
    double H_;
    double sd_;
    bool ends_path_;
    double trig_lo_ = kInf, trig_hi_ = kInf;
};

// runs fn(chunk_index) over all chunks, in parallel when asked
template <class F>
void for_chunks(long n_chunks, int threads, F&& fn) {
    int nt = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    nt = std::max(1, std::min<int>(nt, static_cast<int>(n_chunks)));
    if (nt == 1) {
        for (long ci = 0; ci < n_chunks; ++ci) fn(ci);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t)
        pool.emplace_back([&, t] {
            for (long ci = t; ci < n_chunks; ci += nt) fn(ci);
        });
    for (auto& th : pool) th.join();
}

constexpr long kChunk = 512;

SimResult finish(const Accum& tot, const ModelParams& p, const Roots& r, const Strategy& s,
                 const SimConfig& c, double H) {
    SimResult res;
    res.n_paths = tot.paths;
    res.epv_mean = tot.mean;
    res.epv_stderr = tot.n > 1 ? std::sqrt(tot.m2 / (tot.n - 1) / tot.n) : 0.0;
    res.ruin_fraction = static_cast<double>(tot.ruined) / tot.paths;
    res.mean_ruin_time = tot.ruined > 0 ? tot.ruin_time_sum / tot.ruined : 0.0;
    res.n_periodic = tot.per;
    res.n_immediate = tot.imm;
    res.n_liquidated = tot.liquidated;
    res.horizon = H;
    res.tail_bound = std::exp(-p.delta * H) * reachable_bound(p, r, s, c.x0, H);
    return res;
}

double reachable_bound(const ModelParams& p, const Roots& r, const Strategy& s, double x0,
                       double horizon) {
    // value at the largest surplus the process plausibly holds at H, cheap upper envelope
    const ValueFunction vf(p, r, s);
    double xmax = x0 + std::max(0.0, p.mu) * horizon + 6.0 * p.sigma * std::sqrt(horizon);
    if (auto h = std::get_if<Hybrid>(&s)) xmax = std::min(xmax, h->b + 6.0 * p.sigma * 0.1);
    return std::max(0.0, vf.value(xmax));
}

}  // namespace

SimResult simulate(const ModelParams& p, const Roots& r, const Strategy& s, const SimConfig& c) {
    p.validate();
    validate_strategy(p, s);
    const double H = c.validated_horizon(p);
    const Engine eng(p, s, c, c.dt, H);

    const long n_units = c.antithetic ? c.n_paths / 2 : c.n_paths;
    const long n_chunks = (n_units + kChunk - 1) / kChunk;
    std::vector<Accum> acc(n_chunks);

    for_chunks(n_chunks, c.threads, [&](long ci) {
        Accum a;
        const long lo = ci * kChunk, hi = std::min(n_units, lo + kChunk);
        for (long u = lo; u < hi; ++u) {
            if (c.antithetic) {
                Path pp[2];
                eng.run_unit<2>(static_cast<std::uint64_t>(u), pp, {1, -1}, {1, 1});
                a.add_unit(0.5 * (pp[0].epv + pp[1].epv));
                a.add_path(pp[0]);
                a.add_path(pp[1]);
            } else {
                Path pp[1];
                eng.run_unit<1>(static_cast<std::uint64_t>(u), pp, {1}, {1});
                a.add_unit(pp[0].epv);
                a.add_path(pp[0]);
            }
        }
        acc[ci] = a;
    });

    // merge in chunk order so the result does not depend on the schedule
    Accum tot;
    for (const auto& a : acc) tot.merge(a);
    return finish(tot, p, r, s, c, H);
}

HalvingResult simulate_halving(const ModelParams& p, const Roots& r, const Strategy& s,
                               const SimConfig& c) {
    p.validate();
    validate_strategy(p, s);
    const double H = c.validated_horizon(p);
    const Engine eng(p, s, c, 0.5 * c.dt, H);

    const long n_units = c.antithetic ? c.n_paths / 2 : c.n_paths;
    const long n_chunks = (n_units + kChunk - 1) / kChunk;
    struct Triple { Accum coarse, fine, diff; };
    std::vector<Triple> acc(n_chunks);

    for_chunks(n_chunks, c.threads, [&](long ci) {
        Triple a;
        const long lo = ci * kChunk, hi = std::min(n_units, lo + kChunk);
        for (long u = lo; u < hi; ++u) {
            double vc, vf;
            if (c.antithetic) {
                Path pp[4];
                eng.run_unit<4>(static_cast<std::uint64_t>(u), pp, {1, -1, 1, -1}, {2, 2, 1, 1});
                vc = 0.5 * (pp[0].epv + pp[1].epv);
                vf = 0.5 * (pp[2].epv + pp[3].epv);
                a.coarse.add_path(pp[0]);
                a.coarse.add_path(pp[1]);
                a.fine.add_path(pp[2]);
                a.fine.add_path(pp[3]);
            } else {
                Path pp[2];
                eng.run_unit<2>(static_cast<std::uint64_t>(u), pp, {1, 1}, {2, 1});
                vc = pp[0].epv;
                vf = pp[1].epv;
                a.coarse.add_path(pp[0]);
                a.fine.add_path(pp[1]);
            }
            a.coarse.add_unit(vc);
            a.fine.add_unit(vf);
            a.diff.add_unit(vf - vc);
        }
        acc[ci] = a;
    });

    Triple tot;
    for (const auto& a : acc) {
        tot.coarse.merge(a.coarse);
        tot.fine.merge(a.fine);
        tot.diff.merge(a.diff);
    }
    HalvingResult out;
    out.coarse = finish(tot.coarse, p, r, s, c, H);
    out.fine = finish(tot.fine, p, r, s, c, H);
    out.delta = out.fine.epv_mean - out.coarse.epv_mean;
    out.delta_stderr = tot.diff.n > 1 ? std::sqrt(tot.diff.m2 / (tot.diff.n - 1) / tot.diff.n) : 0.0;
    out.combined_stderr = std::hypot(out.coarse.epv_stderr, out.fine.epv_stderr);
    return out;
}

}  // namespace divopt
