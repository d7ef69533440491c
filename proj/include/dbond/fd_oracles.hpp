#pragma once

// Finite-difference oracles: Crank-Nicolson and Douglas-ADI solves of the
// pricing and survival PDEs, used to verify every closed form. Each entry
// point solves on a base grid and a refined grid, returns the Richardson
// value, and throws NotConverged when the refinement ratio test fails.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "dbond/affine.hpp"
#include "dbond/errors.hpp"
#include "dbond/fd1d.hpp"
#include "dbond/fd2d.hpp"
#include "dbond/models.hpp"
#include "dbond/pricing.hpp"

namespace dbond {

struct GridSpec {
    enum class Scheme { Auto, CrankNicolson, ADI };

    // Truncation bounds; NaN selects the documented defaults.
    double p_min = std::nan("");
    double p_max = std::nan("");
    double x_max = std::nan(""); // firm-value upper bound (V or V/Z units)
    double r_min = std::nan("");
    double r_max = std::nan("");
    // Node counts; 0 selects the defaults.
    int n_p = 0;
    int n_V = 0;
    int n_r = 0;
    int n_t = 0;
    Scheme scheme = Scheme::Auto;
    double rel_tol = 0.0; // 0 selects per-solver defaults
};

struct FdResult {
    double value = 0.0;
    double error_estimate = 0.0; // Richardson estimate |fine - coarse| / 3
};

namespace detail {

inline void require_scheme(const GridSpec& g, GridSpec::Scheme wanted, const char* who) {
    if (g.scheme != GridSpec::Scheme::Auto && g.scheme != wanted)
        fail(errc::bad_parameter,
             std::string(who) + (wanted == GridSpec::Scheme::CrankNicolson
                                     ? " uses the Crank-Nicolson scheme"
                                     : " uses the ADI scheme"));
}

// Solve at base resolution and once refined; Richardson-extrapolate. One more
// refinement is attempted before giving up.
template <class Solve>
FdResult refine_and_check(Solve&& solve, double rel_tol) {
    double coarse = solve(1);
    int scale = 2;
    for (int attempt = 0; attempt < 3; ++attempt) {
        const double fine = solve(scale);
        const double err = std::fabs(fine - coarse) / 3.0;
        const double value = fine + (fine - coarse) / 3.0;
        if (err <= rel_tol * std::max(std::fabs(value), 1e-8)) return {value, err};
        coarse = fine;
        scale *= 2;
    }
    fail(errc::not_converged, "grid refinement ratio test failed");
}

struct PDomain {
    double lo = 0.0, hi = 0.0;
};

// Truncation defaults: p_max = p0 + 10 x (stationary std or 1.0), widened to
// cover the drift reach; p_min extends below zero for the Gaussian families
// and stops at the vanishing-variance line -d/e for the sqrt family.
inline PDomain p_domain(const Scenario& s, const GridSpec& g) {
    const auto& m = s.intensity;
    const double tau = s.window.tau();
    const double dmax = m.var_const.max_value();
    const double dmin = m.var_const.min_value();
    const double bmax = m.drift_const.max_abs() + m.drift_slope_r.max_abs() * 0.2;
    const double c = m.drift_slope_p, e = m.var_slope_p;
    const double width = std::sqrt(std::max(dmax + e * std::max(s.p0, 1.0), 0.0) * tau);
    const double stat = (std::fabs(c) > kSlopeZeroTol && e < kSlopeZeroTol && c > 0.0)
                            ? std::sqrt(std::max(dmax, 1e-12) / (2.0 * c))
                            : 1.0;
    PDomain d;
    d.hi = std::isnan(g.p_max)
               ? s.p0 + std::max(10.0 * stat, 2.0 * bmax * tau + 10.0 * width + 0.5)
               : g.p_max;
    if (!std::isnan(g.p_min)) {
        d.lo = g.p_min;
    } else {
        d.lo = s.p0 - (10.0 * width + 2.0 * bmax * tau + 0.2);
        if (e > kSlopeZeroTol) d.lo = std::max(d.lo, -dmin / e);
        d.lo = std::min(d.lo, s.p0 - 1e-3);
    }
    return d;
}

inline void intensity_axis(const Scenario& s, const Grid1D& gp, double r_at, double t,
                           double kill_scale, AxisCoeffs& out) {
    const auto& m = s.intensity;
    const double b = m.drift_const(t) + m.drift_slope_r(t) * r_at;
    const double d = m.var_const(t) + m.var_slope_r(t) * r_at;
    for (int j = 0; j < gp.n; ++j) {
        const double p = gp.node(j);
        out.diff[j] = 0.5 * std::max(d + m.var_slope_p * p, 0.0);
        out.drift[j] = b - m.drift_slope_p * p;
        out.kill[j] = -kill_scale * p;
    }
}

inline std::vector<double> time_knots(const Scenario& s) {
    std::vector<double> knots;
    s.intensity.drift_const.knots_in(s.window.t, s.window.T, knots);
    s.intensity.var_const.knots_in(s.window.t, s.window.T, knots);
    s.intensity.drift_slope_r.knots_in(s.window.t, s.window.T, knots);
    s.intensity.var_slope_r.knots_in(s.window.t, s.window.T, knots);
    std::sort(knots.begin(), knots.end());
    return knots;
}

} // namespace detail

// Crank-Nicolson price of the intensity-only bond under a constant rate
// (face-value source term or market-price killing term).
inline FdResult fd_price_1d(const Scenario& s, const GridSpec& grid = {}) {
    detail::check_structural(s);
    detail::require_scheme(grid, GridSpec::Scheme::CrankNicolson, "fd_price_1d");
    if (s.rate.is_vasicek())
        fail(errc::unsupported_case, "fd_price_1d handles the constant-rate problem");
    if (s.default_spec.barrier != BarrierKind::None)
        fail(errc::unsupported_case, "fd_price_1d handles the no-barrier problem");
    const double tau = s.window.tau();
    if (tau <= 0.0) return {1.0, 0.0};

    const auto dom = detail::p_domain(s, grid);
    const int n_p0 = grid.n_p ? grid.n_p
                              : std::clamp(static_cast<int>((dom.hi - dom.lo) / 0.01), 400, 1400);
    const int n_t0 = grid.n_t ? grid.n_t : std::max(192, static_cast<int>(256 * tau));
    const double rel_tol = grid.rel_tol > 0 ? grid.rel_tol : 2e-5;

    const double r = s.rate.r0;
    const double R = s.default_spec.recovery;
    const bool market = s.default_spec.convention == RecoveryConvention::MarketPrice;
    const auto& m = s.intensity;

    auto solve = [&](int scale) {
        const Grid1D gp = Grid1D::with_query(dom.lo, dom.hi, n_p0 * scale + 1, s.p0);
        Pde1D pde;
        pde.diffusion = [&m](double p, double t) {
            return 0.5 * std::max(m.var_const(t) + m.var_slope_p * p, 0.0);
        };
        pde.drift = [&m](double p, double t) { return m.drift_const(t) - m.drift_slope_p * p; };
        if (market) {
            pde.kill = [r, R](double p, double) { return -(r + p * (1.0 - R)); };
        } else {
            pde.kill = [r](double p, double) { return -(r + p); };
            const double T = s.window.T;
            pde.source = [r, R, T](double p, double t) {
                return R * std::exp(-r * (T - t)) * p;
            };
        }
        auto u = cn_solve_1d(pde, gp, s.window, n_t0 * scale, [](double) { return 1.0; });
        return u[gp.query_index];
    };
    return detail::refine_and_check(solve, rel_tol);
}

// Crank-Nicolson solve of the default-free Vasicek bond equation.
inline FdResult fd_zcb_vasicek(const ShortRateModel& rate, const TimeWindow& w,
                               const GridSpec& grid = {}) {
    detail::require_scheme(grid, GridSpec::Scheme::CrankNicolson, "fd_zcb_vasicek");
    if (!rate.is_vasicek()) fail(errc::unsupported_case, "needs a Vasicek rate");
    if (w.tau() <= 0.0) return {1.0, 0.0};
    const double spread = 8.0 * rate.s_r / std::sqrt(2.0 * rate.theta) + 0.05;
    const double r_lo = std::isnan(grid.r_min)
                            ? std::min(rate.r0, rate.mu_r) - spread
                            : grid.r_min;
    const double r_hi = std::isnan(grid.r_max)
                            ? std::max(rate.r0, rate.mu_r) + spread
                            : grid.r_max;
    const int n_r0 = grid.n_r ? grid.n_r : 300;
    const int n_t0 = grid.n_t ? grid.n_t : std::max(192, static_cast<int>(256 * w.tau()));
    const double rel_tol = grid.rel_tol > 0 ? grid.rel_tol : 2e-6;

    auto solve = [&](int scale) {
        const Grid1D gr = Grid1D::with_query(r_lo, r_hi, n_r0 * scale + 1, rate.r0);
        Pde1D pde;
        pde.diffusion = [&rate](double, double) { return 0.5 * rate.s_r * rate.s_r; };
        pde.drift = [&rate](double r, double) { return rate.theta * (rate.mu_r - r); };
        pde.kill = [](double r, double) { return -r; };
        auto u = cn_solve_1d(pde, gr, w, n_t0 * scale, [](double) { return 1.0; });
        return u[gr.query_index];
    };
    return detail::refine_and_check(solve, rel_tol);
}

namespace detail {

// log-distance-to-barrier coordinate for the constant-rate barrier problems:
// y = ln V - ln V_b(t); the barrier's own growth rate enters the drift.
struct BarrierFrame {
    double y0 = 0.0;       // query
    double drift = 0.0;    // y-drift
    double log_level0 = 0.0;
};

inline BarrierFrame barrier_frame(const FirmModel& firm, double r, BarrierKind kind,
                                  double level, const TimeWindow& w) {
    BarrierFrame f;
    const double barrier_rate = kind == BarrierKind::DiscountedLevel ? r : 0.0;
    f.drift = r - firm.dividend - 0.5 * firm.volatility * firm.volatility - barrier_rate;
    f.log_level0 = std::log(level) - (kind == BarrierKind::DiscountedLevel ? r * w.tau() : 0.0);
    f.y0 = std::log(firm.value) - f.log_level0;
    return f;
}

} // namespace detail

// Crank-Nicolson solve of the expected-default-only survival problem
// (down-and-out, no discounting), constant rate.
inline FdResult fd_barrier_survival_1d(const FirmModel& firm, double r, BarrierKind kind,
                                       double level, const TimeWindow& w,
                                       const GridSpec& grid = {}) {
    if (kind != BarrierKind::ConstantLevel && kind != BarrierKind::DiscountedLevel)
        fail(errc::unsupported_case, "needs a constant or discounted barrier");
    const double tau = w.tau();
    const auto f = detail::barrier_frame(firm, r, kind, level, w);
    if (f.y0 <= 0.0) fail(errc::already_defaulted, "firm value at or below the barrier");
    if (tau <= 0.0) return {1.0, 0.0};
    const double sV = firm.volatility;
    const double y_hi = std::isnan(grid.x_max)
                            ? f.y0 + 10.0 * sV * std::sqrt(tau) + std::fabs(f.drift) * tau + 0.5
                            : std::log(grid.x_max) - f.log_level0;
    const int n_y0 = grid.n_V ? grid.n_V : 400;
    const int n_t0 = grid.n_t ? grid.n_t : std::max(192, static_cast<int>(256 * tau));
    const double rel_tol = grid.rel_tol > 0 ? grid.rel_tol : 1e-4;

    auto solve = [&](int scale) {
        const Grid1D gy = Grid1D::with_query(0.0, y_hi, n_y0 * scale + 1, f.y0);
        Pde1D pde;
        pde.diffusion = [sV](double, double) { return 0.5 * sV * sV; };
        pde.drift = [&f](double, double) { return f.drift; };
        pde.kill = [](double, double) { return 0.0; };
        pde.lower = Bc1D::Dirichlet;
        pde.lower_value = [](double) { return 0.0; };
        auto u = cn_solve_1d(pde, gy, w, n_t0 * scale, [](double) { return 1.0; }, 2);
        return u[gy.query_index];
    };
    return detail::refine_and_check(solve, rel_tol);
}

namespace detail {

struct TwoFactorSetup {
    bool price = true; // false: survival problem (no discounting, zero recovery)
};

// ADI solve of the constant-rate barrier + intensity problem in
// (y, p) = (log distance to barrier, intensity).
inline FdResult fd_two_factor(const Scenario& s, const GridSpec& grid, TwoFactorSetup setup) {
    const auto& ds = s.default_spec;
    if (s.rate.is_vasicek() || !s.firm ||
        (ds.barrier != BarrierKind::ConstantLevel && ds.barrier != BarrierKind::DiscountedLevel))
        fail(errc::unsupported_case, "two-factor oracle needs a constant rate and a "
                                     "constant/discounted barrier");
    const double tau = s.window.tau();
    const double r = s.rate.r0;
    const double R = setup.price ? ds.recovery : 0.0;
    const auto frame = barrier_frame(*s.firm, r, ds.barrier, ds.barrier_level, s.window);
    if (frame.y0 <= 0.0) fail(errc::already_defaulted, "firm value at or below the barrier");
    if (tau <= 0.0) return {1.0, 0.0};

    const double sV = s.firm->volatility;
    const auto dom = p_domain(s, grid);
    const double y_hi = std::isnan(grid.x_max)
                            ? frame.y0 + 10.0 * sV * std::sqrt(tau) + std::fabs(frame.drift) * tau + 0.5
                            : std::log(grid.x_max) - frame.log_level0;
    const int n_y0 = grid.n_V ? grid.n_V : 140;
    const int n_p0 = grid.n_p ? grid.n_p
                              : std::clamp(static_cast<int>((dom.hi - dom.lo) / 0.025), 100, 320);
    const int n_t0 = grid.n_t ? grid.n_t : std::max(96, static_cast<int>(128 * tau));
    const double rel_tol = grid.rel_tol > 0 ? grid.rel_tol : 2e-4;
    const double T = s.window.T;
    const bool price = setup.price;

    auto solve = [&](int scale) {
        const Grid1D gy = Grid1D::with_query(0.0, y_hi, n_y0 * scale + 1, frame.y0);
        const Grid1D gp = Grid1D::with_query(dom.lo, dom.hi, n_p0 * scale + 1, s.p0);
        Pde2D pde;
        pde.axis1 = [&](double, AxisCoeffs& out) {
            for (int i = 0; i < gy.n; ++i) {
                out.diff[i] = 0.5 * sV * sV;
                out.drift[i] = frame.drift;
                out.kill[i] = price ? -r : 0.0;
            }
        };
        pde.axis2 = [&](double t, int, AxisCoeffs& out) { intensity_axis(s, gp, r, t, 1.0, out); };
        if (price) {
            pde.source = [R, r, T](double, double p, double t) {
                return R * std::exp(-r * (T - t)) * p;
            };
            pde.lower_x_value = [R, r, T](double, double t) { return R * std::exp(-r * (T - t)); };
        } else {
            pde.lower_x_value = [](double, double) { return 0.0; };
        }
        pde.dirichlet_lower_x = true;
        auto u = adi_solve_2d(pde, gy, gp, s.window, n_t0 * scale,
                              [](double, double) { return 1.0; }, 2);
        return u[gy.query_index * gp.n + gp.query_index];
    };
    return refine_and_check(solve, rel_tol);
}

// ADI solve of the Vasicek-rate intensity-only problems in (r, p); covers both
// recovery conventions, including rate-coupled intensity coefficients.
inline FdResult fd_rate_intensity(const Scenario& s, const GridSpec& grid) {
    if (!s.rate.is_vasicek() || s.default_spec.barrier != BarrierKind::None)
        fail(errc::unsupported_case, "rate-intensity oracle needs a Vasicek rate and no barrier");
    const double tau = s.window.tau();
    if (tau <= 0.0) return {1.0, 0.0};
    const auto& rate = s.rate;
    const double R = s.default_spec.recovery;
    const bool market = s.default_spec.convention == RecoveryConvention::MarketPrice;

    const double spread = 8.0 * rate.s_r / std::sqrt(2.0 * rate.theta) + 0.05;
    const double r_lo = std::isnan(grid.r_min) ? std::min(rate.r0, rate.mu_r) - spread : grid.r_min;
    const double r_hi = std::isnan(grid.r_max) ? std::max(rate.r0, rate.mu_r) + spread : grid.r_max;
    const auto dom = p_domain(s, grid);
    const int n_r0 = grid.n_r ? grid.n_r : 100;
    const int n_p0 = grid.n_p ? grid.n_p
                              : std::clamp(static_cast<int>((dom.hi - dom.lo) / 0.025), 100, 320);
    const int n_t0 = grid.n_t ? grid.n_t : std::max(96, static_cast<int>(128 * tau));
    const double rel_tol = grid.rel_tol > 0 ? grid.rel_tol : 2e-4;

    // Face-value source needs Z(r, t); memoise the A loading per time level.
    auto abar_cache = std::make_shared<std::map<double, double>>();
    const double T = s.window.T;
    auto abar = [abar_cache, rate, T](double t) {
        auto it = abar_cache->find(t);
        if (it != abar_cache->end()) return it->second;
        const double v = vasicek_A(rate, t, T);
        (*abar_cache)[t] = v;
        return v;
    };

    auto solve = [&](int scale) {
        const Grid1D gr = Grid1D::with_query(r_lo, r_hi, n_r0 * scale + 1, rate.r0);
        const Grid1D gp = Grid1D::with_query(dom.lo, dom.hi, n_p0 * scale + 1, s.p0);
        Pde2D pde;
        pde.axis1 = [&](double, AxisCoeffs& out) {
            for (int i = 0; i < gr.n; ++i) {
                const double r = gr.node(i);
                out.diff[i] = 0.5 * rate.s_r * rate.s_r;
                out.drift[i] = rate.theta * (rate.mu_r - r);
                out.kill[i] = -r;
            }
        };
        pde.axis2 = [&](double t, int i, AxisCoeffs& out) {
            intensity_axis(s, gp, gr.node(i), t, market ? 1.0 - R : 1.0, out);
        };
        if (!market) {
            pde.source = [&rate, abar, R, T](double r, double p, double t) {
                const double Z = std::exp(abar(t) - vasicek_B(rate, t, T) * r);
                return R * Z * p;
            };
        }
        auto u = adi_solve_2d(pde, gr, gp, s.window, n_t0 * scale,
                              [](double, double) { return 1.0; });
        return u[gr.query_index * gp.n + gp.query_index];
    };
    return refine_and_check(solve, rel_tol);
}

} // namespace detail

// ADI price oracle at (V0/p0) or (r0/p0), dispatched on the scenario regime.
inline FdResult fd_price_2d(const Scenario& s, const GridSpec& grid = {}) {
    detail::check_structural(s);
    detail::require_scheme(grid, GridSpec::Scheme::ADI, "fd_price_2d");
    switch (classify_regime(s)) {
        case PricingRegime::TwoFactorBarrier:
            return detail::fd_two_factor(s, grid, {true});
        case PricingRegime::UnexpectedVasicek:
        case PricingRegime::MarketVasicek:
            return detail::fd_rate_intensity(s, grid);
        default:
            fail(errc::unsupported_case,
                 "fd_price_2d covers the two-factor barrier and Vasicek intensity regimes");
    }
}

// ADI survival oracle for the two-factor (barrier + intensity) regime.
inline FdResult fd_survival_2d(const Scenario& s, const GridSpec& grid = {}) {
    detail::check_structural(s);
    detail::require_scheme(grid, GridSpec::Scheme::ADI, "fd_survival_2d");
    if (classify_regime(s) != PricingRegime::TwoFactorBarrier)
        fail(errc::unsupported_case, "fd_survival_2d covers the two-factor barrier regime");
    return detail::fd_two_factor(s, grid, {false});
}

} // namespace dbond
