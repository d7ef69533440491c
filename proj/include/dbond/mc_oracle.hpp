#pragma once

// Monte Carlo oracle: simulates the joint (rate, firm, intensity) dynamics
// with both default mechanisms and prices the bond by discounting along each
// path. Exact transitions where they exist (Vasicek rate, OU intensity,
// lognormal firm step given the rate path), full-truncation Euler for the
// sqrt-volatility and rate-coupled intensity families. Barrier crossings
// inside a step are recovered with the Brownian-bridge correction. Per-path
// counter RNG substreams and block-ordered reduction make the result
// independent of the number of worker threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <thread>
#include <vector>

#include "dbond/affine.hpp"
#include "dbond/errors.hpp"
#include "dbond/models.hpp"
#include "dbond/rng.hpp"
#include "dbond/survival.hpp"

namespace dbond {

struct McSpec {
    long n_paths = 200000;
    int steps_per_year = 128;
    std::uint64_t seed = 0x00d0bdc0ffee5eedull;
    bool antithetic = false;
    bool brownian_bridge = true; // plain discrete monitoring when off (diagnostic)
    int threads = 0;             // 0: hardware concurrency
};

struct McResult {
    double estimate = 0.0;
    double std_error = 0.0;
    long n_paths = 0;
};

namespace detail {

struct McPlan {
    // time grid (uniform, with coefficient breakpoints forced onto it)
    std::vector<double> t;  // n_steps + 1 nodes
    std::vector<double> dt; // n_steps
    int n_steps = 0;
    double T = 0.0;

    // rate
    bool vasicek = false;
    double r0 = 0.0, theta = 0.0, mur = 0.0;
    std::vector<double> r_decay, r_sd; // exact transition per step
    double const_discount = 1.0;       // e^{-r tau} when the rate is flat

    // intensity (canonical: drift b + beta r - c p, variance d + eps r + e p)
    bool p_exact = false; // exact OU transition applies
    double c = 0.0, e = 0.0;
    std::vector<double> b_seg, d_seg, beta_seg, eps_seg; // per-step midpoint values
    std::vector<double> p_decay, p_sd;                   // exact OU per step

    // firm
    bool has_firm = false;
    double lnV0 = 0.0, sV = 0.0, bdiv = 0.0;

    // factor layout and correlation (order: rate, firm, intensity)
    int n_factors = 0;
    int f_rate = -1, f_firm = -1, f_p = -1;
    std::array<std::array<double, 3>, 3> chol{};

    // barrier
    enum class Barrier { None, LogLevel, Numeraire } barrier = Barrier::None;
    std::vector<double> log_level;  // per node, ln V_b(t_k) (LogLevel)
    double ln_vb = 0.0;             // ln V_B multiple (Numeraire)
    std::vector<double> abar, bbar; // per node Vasicek loadings to T
    std::vector<double> bridge_var; // per step, variance of the monitored log distance
    bool use_bridge = true;

    // payoff
    bool market_recovery = false;
    double recovery = 0.0;
};

// Cholesky of the correlation matrix restricted to the active factors
// (given in the fixed order rate, firm, intensity by their original indices).
inline std::array<std::array<double, 3>, 3> cholesky_active(const int* ids, int k, double r12,
                                                            double r13, double r23) {
    const double corr[3][3] = {{1.0, r12, r13}, {r12, 1.0, r23}, {r13, r23, 1.0}};
    std::array<std::array<double, 3>, 3> L{};
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = corr[ids[i]][ids[j]];
            for (int m = 0; m < j; ++m) sum -= L[i][m] * L[j][m];
            if (i == j) {
                L[i][j] = std::sqrt(std::max(sum, 0.0));
            } else {
                L[i][j] = L[j][j] > 0.0 ? sum / L[j][j] : 0.0;
            }
        }
    }
    return L;
}

inline std::vector<double> time_knots_mc(const Scenario& s) {
    std::vector<double> knots;
    s.intensity.drift_const.knots_in(s.window.t, s.window.T, knots);
    s.intensity.var_const.knots_in(s.window.t, s.window.T, knots);
    s.intensity.drift_slope_r.knots_in(s.window.t, s.window.T, knots);
    s.intensity.var_slope_r.knots_in(s.window.t, s.window.T, knots);
    return knots;
}

inline McPlan make_mc_plan(const Scenario& s, const McSpec& spec) {
    check_structural(s);
    McPlan plan;
    const double tau = s.window.tau();
    plan.T = s.window.T;
    const int uniform = std::max(1, static_cast<int>(std::ceil(tau * spec.steps_per_year)));
    plan.t = grid_with_knots(s.window.t, s.window.T, uniform, time_knots_mc(s));
    plan.n_steps = static_cast<int>(plan.t.size()) - 1;
    plan.dt.resize(plan.n_steps);
    for (int k = 0; k < plan.n_steps; ++k) plan.dt[k] = plan.t[k + 1] - plan.t[k];

    const auto& m = s.intensity;
    plan.c = m.drift_slope_p;
    plan.e = m.var_slope_p;
    plan.p_exact = plan.e < kSlopeZeroTol && !m.rate_coupled();
    plan.b_seg.resize(plan.n_steps);
    plan.d_seg.resize(plan.n_steps);
    plan.beta_seg.resize(plan.n_steps);
    plan.eps_seg.resize(plan.n_steps);
    plan.p_decay.resize(plan.n_steps);
    plan.p_sd.resize(plan.n_steps);
    for (int k = 0; k < plan.n_steps; ++k) {
        const double tm = 0.5 * (plan.t[k] + plan.t[k + 1]);
        const double h = plan.dt[k];
        plan.b_seg[k] = m.drift_const(tm);
        plan.d_seg[k] = m.var_const(tm);
        plan.beta_seg[k] = m.drift_slope_r(tm);
        plan.eps_seg[k] = m.var_slope_r(tm);
        if (std::fabs(plan.c) > kSlopeZeroTol) {
            plan.p_decay[k] = std::exp(-plan.c * h);
            plan.p_sd[k] = std::sqrt(std::max(
                plan.d_seg[k] * (1.0 - plan.p_decay[k] * plan.p_decay[k]) / (2.0 * plan.c), 0.0));
        } else {
            plan.p_decay[k] = 1.0;
            plan.p_sd[k] = std::sqrt(std::max(plan.d_seg[k] * h, 0.0));
        }
    }

    plan.vasicek = s.rate.is_vasicek();
    plan.r0 = s.rate.r0;
    if (plan.vasicek) {
        plan.theta = s.rate.theta;
        plan.mur = s.rate.mu_r;
        plan.r_decay.resize(plan.n_steps);
        plan.r_sd.resize(plan.n_steps);
        for (int k = 0; k < plan.n_steps; ++k) {
            plan.r_decay[k] = std::exp(-plan.theta * plan.dt[k]);
            plan.r_sd[k] = s.rate.s_r * std::sqrt(
                (1.0 - plan.r_decay[k] * plan.r_decay[k]) / (2.0 * plan.theta));
        }
    } else {
        plan.const_discount = std::exp(-s.rate.r0 * tau);
    }

    double rho12 = 0.0;
    plan.has_firm = s.firm.has_value();
    if (plan.has_firm) {
        plan.lnV0 = std::log(s.firm->value);
        plan.sV = s.firm->volatility;
        plan.bdiv = s.firm->dividend;
        rho12 = s.firm->rho12;
    }

    // factor layout: a rate factor only when the rate actually diffuses
    int ids[3];
    int idx = 0;
    if (plan.vasicek && s.rate.s_r > 0.0) {
        plan.f_rate = idx;
        ids[idx++] = 0;
    }
    if (plan.has_firm) {
        plan.f_firm = idx;
        ids[idx++] = 1;
    }
    plan.f_p = idx;
    ids[idx++] = 2;
    plan.n_factors = idx;
    plan.chol = cholesky_active(ids, idx, rho12, s.rho13, s.rho23);

    // barrier setup
    const auto& ds = s.default_spec;
    plan.recovery = ds.recovery;
    plan.market_recovery = ds.convention == RecoveryConvention::MarketPrice;
    plan.use_bridge = spec.brownian_bridge;
    if (ds.barrier == BarrierKind::ConstantLevel || ds.barrier == BarrierKind::DiscountedLevel) {
        plan.barrier = McPlan::Barrier::LogLevel;
        plan.log_level.resize(plan.n_steps + 1);
        for (int k = 0; k <= plan.n_steps; ++k) {
            double lvl = std::log(ds.barrier_level);
            if (ds.barrier == BarrierKind::DiscountedLevel) lvl -= s.rate.r0 * (plan.T - plan.t[k]);
            plan.log_level[k] = lvl;
        }
        plan.bridge_var.assign(plan.n_steps, 0.0);
        for (int k = 0; k < plan.n_steps; ++k)
            plan.bridge_var[k] = plan.sV * plan.sV * plan.dt[k];
    } else if (ds.barrier == BarrierKind::ZcbProportional) {
        plan.barrier = McPlan::Barrier::Numeraire;
        plan.ln_vb = std::log(ds.barrier_level);
        plan.bridge_var.resize(plan.n_steps);
        for (int k = 0; k < plan.n_steps; ++k)
            plan.bridge_var[k] = effective_variance(s.rate, *s.firm,
                                                    {plan.t[k], plan.t[k + 1]}, true);
    }
    if (plan.vasicek) {
        plan.abar.resize(plan.n_steps + 1);
        plan.bbar.resize(plan.n_steps + 1);
        for (int k = 0; k <= plan.n_steps; ++k) {
            plan.abar[k] = vasicek_A(s.rate, plan.t[k], plan.T);
            plan.bbar[k] = vasicek_B(s.rate, plan.t[k], plan.T);
        }
    }
    if (plan.barrier == McPlan::Barrier::Numeraire) {
        const double Z0 = std::exp(plan.abar[0] - plan.bbar[0] * plan.r0);
        if (plan.lnV0 - std::log(Z0) <= plan.ln_vb)
            fail(errc::already_defaulted, "firm value at or below the barrier at valuation time");
    }
    return plan;
}

struct PathOutcome {
    double pv = 0.0;
    double survived = 0.0;
};

inline PathOutcome simulate_path(const McPlan& plan, double p0, PathRng& rng) {
    double r = plan.r0;
    double lnV = plan.lnV0;
    double p = p0;
    double compensator = 0.0;
    double disc = 0.0; // integral of r (Vasicek only)
    double clock = rng.exponential();
    double weight = 1.0;
    bool jumped = false;

    for (int k = 0; k < plan.n_steps; ++k) {
        const double h = plan.dt[k];

        double z[3] = {0.0, 0.0, 0.0};
        {
            double xi[3] = {0.0, 0.0, 0.0};
            for (int f = 0; f < plan.n_factors; ++f) xi[f] = rng.normal();
            for (int f = 0; f < plan.n_factors; ++f) {
                double acc = 0.0;
                for (int g = 0; g <= f; ++g) acc += plan.chol[f][g] * xi[g];
                z[f] = acc;
            }
        }
        const double z_rate = plan.f_rate >= 0 ? z[plan.f_rate] : 0.0;
        const double z_firm = plan.f_firm >= 0 ? z[plan.f_firm] : 0.0;
        const double z_p = z[plan.f_p];

        // rate
        double r_next = r;
        if (plan.vasicek)
            r_next = plan.mur + (r - plan.mur) * plan.r_decay[k] +
                     (plan.f_rate >= 0 ? plan.r_sd[k] * z_rate : 0.0);
        const double r_mid = plan.vasicek ? 0.5 * (r + r_next) : plan.r0;

        // firm (exact lognormal step given the rate path)
        double lnV_next = lnV;
        if (plan.has_firm)
            lnV_next = lnV + (r_mid - plan.bdiv - 0.5 * plan.sV * plan.sV) * h +
                       plan.sV * std::sqrt(h) * z_firm;

        // intensity; the hazard itself is clamped at zero from below
        double p_next;
        if (plan.p_exact) {
            const double mean = std::fabs(plan.c) > kSlopeZeroTol
                                    ? plan.b_seg[k] / plan.c +
                                          (p - plan.b_seg[k] / plan.c) * plan.p_decay[k]
                                    : p + plan.b_seg[k] * h;
            p_next = mean + plan.p_sd[k] * z_p;
        } else {
            const double pp = std::max(p, 0.0);
            const double drift = plan.b_seg[k] + plan.beta_seg[k] * r - plan.c * pp;
            const double var =
                std::max(plan.d_seg[k] + plan.eps_seg[k] * r + plan.e * pp, 0.0);
            p_next = p + drift * h + std::sqrt(var * h) * z_p;
        }
        const double comp_next =
            compensator + 0.5 * (std::max(p, 0.0) + std::max(p_next, 0.0)) * h;
        const double disc_next = disc + r_mid * h;

        // unexpected default inside the step, located on the compensator
        bool udef = false;
        double tau_u = 0.0;
        if (comp_next >= clock) {
            const double dcomp = comp_next - compensator;
            const double frac = dcomp > 0.0 ? (clock - compensator) / dcomp : 0.0;
            tau_u = plan.t[k] + frac * h;
            udef = true;
        }

        // expected default: endpoint crossing or Brownian-bridge hit
        bool bdef = false;
        double tau_b = 0.0;
        if (plan.barrier != McPlan::Barrier::None) {
            double a, b;
            if (plan.barrier == McPlan::Barrier::LogLevel) {
                a = lnV - plan.log_level[k];
                b = lnV_next - plan.log_level[k + 1];
            } else {
                a = lnV + plan.bbar[k] * r - plan.abar[k] - plan.ln_vb;
                b = lnV_next + plan.bbar[k + 1] * r_next - plan.abar[k + 1] - plan.ln_vb;
            }
            if (b <= 0.0) {
                bdef = true;
                const double frac = a > 0.0 ? a / (a - b) : 0.0;
                tau_b = plan.t[k] + h * frac;
            } else if (plan.use_bridge && a > 0.0) {
                const double q = std::exp(-2.0 * a * b / plan.bridge_var[k]);
                if (rng.event_uniform() < q) {
                    bdef = true;
                    tau_b = plan.t[k] + 0.5 * h;
                }
            }
        }

        if (plan.market_recovery) {
            // defaults scale the claim by R and the bond lives on
            if (udef) {
                jumped = true;
                double comp = comp_next;
                weight *= plan.recovery;
                clock += rng.exponential();
                while (comp >= clock) { // multiple jumps within one step
                    weight *= plan.recovery;
                    clock += rng.exponential();
                }
            }
        } else if (udef || bdef) {
            // first event wins; both conventions pay the same recovery here
            const double tau_d = udef && (!bdef || tau_u <= tau_b) ? tau_u : tau_b;
            PathOutcome out;
            out.survived = 0.0;
            if (!plan.vasicek) {
                out.pv = plan.recovery * plan.const_discount;
            } else {
                const double w = (tau_d - plan.t[k]) / h;
                const double r_d = r + (r_next - r) * w;
                const double disc_d = disc + 0.5 * (r + r_d) * (tau_d - plan.t[k]);
                const double ab = plan.abar[k] + (plan.abar[k + 1] - plan.abar[k]) * w;
                const double bb = plan.bbar[k] + (plan.bbar[k + 1] - plan.bbar[k]) * w;
                out.pv = plan.recovery * std::exp(-disc_d) * std::exp(ab - bb * r_d);
            }
            return out;
        }

        r = r_next;
        lnV = lnV_next;
        p = p_next;
        compensator = comp_next;
        disc = disc_next;
    }

    PathOutcome out;
    out.survived = plan.market_recovery ? (jumped ? 0.0 : 1.0) : 1.0;
    out.pv = weight * (plan.vasicek ? std::exp(-disc) : plan.const_discount);
    return out;
}

struct McAccum {
    double pv_sum = 0.0, pv_sq = 0.0;
    double sv_sum = 0.0, sv_sq = 0.0;
    long n = 0;
};

struct McRun {
    McResult price;
    McResult survival;
};

inline McRun mc_run(const Scenario& s, const McSpec& spec) {
    if (spec.n_paths < 1) fail(errc::bad_parameter, "need at least one path");
    if (s.window.tau() <= 0.0) return {{1.0, 0.0, spec.n_paths}, {1.0, 0.0, spec.n_paths}};
    const McPlan plan = make_mc_plan(s, spec);

    const long n_samples = spec.antithetic ? (spec.n_paths + 1) / 2 : spec.n_paths;
    const long block_size = 4096;
    const long n_blocks = (n_samples + block_size - 1) / block_size;
    std::vector<McAccum> blocks(static_cast<size_t>(n_blocks));

    auto run_block = [&](long b) {
        McAccum acc;
        const long lo = b * block_size;
        const long hi = std::min(n_samples, lo + block_size);
        for (long i = lo; i < hi; ++i) {
            PathOutcome o;
            if (spec.antithetic) {
                PathRng ra(spec.seed, static_cast<std::uint64_t>(i), false);
                PathRng rb(spec.seed, static_cast<std::uint64_t>(i), true);
                const PathOutcome oa = simulate_path(plan, s.p0, ra);
                const PathOutcome ob = simulate_path(plan, s.p0, rb);
                o.pv = 0.5 * (oa.pv + ob.pv);
                o.survived = 0.5 * (oa.survived + ob.survived);
            } else {
                PathRng r(spec.seed, static_cast<std::uint64_t>(i), false);
                o = simulate_path(plan, s.p0, r);
            }
            acc.pv_sum += o.pv;
            acc.pv_sq += o.pv * o.pv;
            acc.sv_sum += o.survived;
            acc.sv_sq += o.survived * o.survived;
            ++acc.n;
        }
        blocks[static_cast<size_t>(b)] = acc;
    };

    int n_threads = spec.threads > 0 ? spec.threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    n_threads = static_cast<int>(std::min<long>(n_threads, n_blocks));
    if (n_threads <= 1) {
        for (long b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(n_threads));
        for (int w = 0; w < n_threads; ++w)
            pool.emplace_back([&, w]() {
                for (long b = w; b < n_blocks; b += n_threads) run_block(b);
            });
        for (auto& th : pool) th.join();
    }

    // block-ordered reduction, independent of the thread schedule
    McAccum total;
    for (const auto& a : blocks) {
        total.pv_sum += a.pv_sum;
        total.pv_sq += a.pv_sq;
        total.sv_sum += a.sv_sum;
        total.sv_sq += a.sv_sq;
        total.n += a.n;
    }
    auto finish = [&](double sum, double sq) {
        McResult r;
        r.n_paths = spec.antithetic ? total.n * 2 : total.n;
        r.estimate = sum / total.n;
        const double var =
            total.n > 1 ? std::max(sq - total.n * r.estimate * r.estimate, 0.0) / (total.n - 1)
                        : 0.0;
        r.std_error = std::sqrt(var / total.n);
        return r;
    };
    return {finish(total.pv_sum, total.pv_sq), finish(total.sv_sum, total.sv_sq)};
}

} // namespace detail

// Path estimate of the bond price with standard error.
inline McResult mc_price(const Scenario& s, const McSpec& spec = {}) {
    return detail::mc_run(s, spec).price;
}

// Fraction of paths with neither default by maturity.
inline McResult mc_survival(const Scenario& s, const McSpec& spec = {}) {
    return detail::mc_run(s, spec).survival;
}

} // namespace dbond
