#pragma once

// No-default probabilities: intensity-only survival e^{A - Bp}, down-and-out
// barrier survival under a constant rate (constant and discounted barrier),
// the time-changed barrier survival under a Vasicek rate, their products, and
// the survival implied by a market-price-recovery bond quote.

#include <cmath>
#include <sstream>

#include "dbond/affine.hpp"
#include "dbond/errors.hpp"
#include "dbond/models.hpp"

namespace dbond {

// Standard normal CDF via the complementary error function,
// N(x) = erfc(-x / sqrt(2)) / 2; absolute error well below 1e-15.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

inline double norm_pdf(double x) {
    return 0.3989422804014326779 * std::exp(-0.5 * x * x);
}

struct SurvivalResult {
    double w_total = 1.0;     // f * g
    double g_intensity = 1.0; // unexpected-default factor
    double f_barrier = 1.0;   // expected-default factor (1 without a barrier)
    bool clamped = false;     // quadrature noise pushed a factor outside [0, 1]
};

namespace detail {

inline double clamp_probability(double v, bool* clamped) {
    if (v > 1.0) {
        if (clamped && v > 1.0 + 1e-12) *clamped = true;
        return 1.0;
    }
    if (v < 0.0) {
        if (clamped && v < -1e-12) *clamped = true;
        return 0.0;
    }
    return v;
}

} // namespace detail

// g(p, t) = e^{A(t,T) - B(t,T) p}, clamped into [0, 1].
inline double intensity_survival(const AffineSolution& affine, double p, const TimeWindow& w,
                                 bool* clamped = nullptr) {
    if (!(p >= 0.0)) fail(errc::bad_parameter, "intensity must be >= 0");
    if (w.tau() <= 0.0) return 1.0;
    const double g = std::exp(affine.A(w.t, w.T) - affine.B(w.t, w.T) * p);
    return detail::clamp_probability(g, clamped);
}

// First-passage survival of a dividend-paying lognormal firm above a constant
// or discounted barrier, constant short rate. Both branches are the
// down-and-out reflection formula; the discounted barrier only shifts the
// log-drift by the barrier's own growth rate r, which is why d1 coincides
// across branches while d2 and the reflection weight pick up the rate.
inline double barrier_survival_const_r(const FirmModel& firm, double r, BarrierKind barrier,
                                       double barrier_level, const TimeWindow& w) {
    if (barrier == BarrierKind::None) return 1.0;
    if (barrier != BarrierKind::ConstantLevel && barrier != BarrierKind::DiscountedLevel)
        fail(errc::unsupported_case, "constant-rate barrier survival needs a constant or "
                                     "discounted barrier");
    const double tau = w.tau();
    const double V = firm.value;
    const double VB = barrier_level;
    const double sV = firm.volatility;
    const double b = firm.dividend;
    const double level_now =
        barrier == BarrierKind::ConstantLevel ? VB : VB * std::exp(-r * tau);
    if (V == level_now) return 0.0;
    if (V < level_now) {
        std::ostringstream os;
        os << "firm value " << V << " at or below barrier " << level_now;
        fail(errc::already_defaulted, os.str());
    }
    if (tau <= 0.0) return 1.0;

    const double st = sV * std::sqrt(tau);
    if (barrier == BarrierKind::ConstantLevel) {
        const double nu = r - b - 0.5 * sV * sV;
        const double d1 = (std::log(V / VB) + nu * tau) / st;
        const double d2 = (std::log(VB / V) + nu * tau) / st;
        const double k = 1.0 - 2.0 * (r - b) / (sV * sV);
        return detail::clamp_probability(
            norm_cdf(d1) - std::pow(V / VB, k) * norm_cdf(d2), nullptr);
    }
    const double d1p = (std::log(V / VB) + (r - b - 0.5 * sV * sV) * tau) / st;
    const double d2p = (std::log(VB / V) + (-r - b - 0.5 * sV * sV) * tau) / st;
    const double k = 1.0 + 2.0 * b / (sV * sV);
    const double reflect = std::pow(V / VB, k) * std::exp(k * r * tau);
    return detail::clamp_probability(norm_cdf(d1p) - reflect * norm_cdf(d2p), nullptr);
}

// Instantaneous variance of the bond-numeraire firm ratio V/Z at time u:
// Sigma_x^2(u) = s_r^2 Bbar^2 + s_V^2 + 2 rho12 s_r Bbar s_V.
inline double sigma_x_sq(const ShortRateModel& rate, const FirmModel& firm, double u, double T) {
    if (!rate.is_vasicek()) fail(errc::unsupported_case, "sigma_x_sq needs a Vasicek rate");
    const double Bb = vasicek_B(rate, u, T);
    const double a = rate.s_r * Bb;
    return a * a + firm.volatility * firm.volatility + 2.0 * firm.rho12 * a * firm.volatility;
}

// int_t^T Sigma_x^2(u) du. Quadrature by default; the closed-form
// antiderivative is available behind the flag and as a cross-check.
inline double effective_variance(const ShortRateModel& rate, const FirmModel& firm,
                                 const TimeWindow& w, bool closed_form = false,
                                 double step = kDefaultQuadStep) {
    if (w.tau() <= 0.0) return 0.0;
    if (rate.kind == ShortRateModel::Kind::Constant || rate.s_r == 0.0)
        return firm.volatility * firm.volatility * w.tau();
    if (closed_form) {
        const double th_ = rate.theta, tau = w.tau();
        const double Bb = vasicek_B(rate, w.t, w.T);
        const double B2 = (1.0 - std::exp(-2.0 * th_ * tau)) / (2.0 * th_);
        const double int_B = (tau - Bb) / th_;
        const double int_B2 = (tau - 2.0 * Bb + B2) / (th_ * th_);
        return rate.s_r * rate.s_r * int_B2 + firm.volatility * firm.volatility * tau +
               2.0 * firm.rho12 * rate.s_r * firm.volatility * int_B;
    }
    return simpson_segmented([&](double u) { return sigma_x_sq(rate, firm, u, w.T); }, w.t, w.T,
                             {}, step);
}

// Barrier survival of the numeraire ratio x = V/Z above the multiple V_B with
// total remaining variance effvar (driftless lognormal, reflection weight 1).
inline double barrier_survival_stoch_r(double x, double vb_multiple, double effvar) {
    if (x <= vb_multiple) {
        if (x == vb_multiple) return 0.0;
        std::ostringstream os;
        os << "numeraire ratio " << x << " at or below barrier multiple " << vb_multiple;
        fail(errc::already_defaulted, os.str());
    }
    if (effvar <= 0.0) {
        if (effvar < 0.0) fail(errc::bad_parameter, "negative effective variance");
        return 1.0; // degenerate variance: survival is the indicator x > V_B
    }
    const double s = std::sqrt(effvar);
    const double d1 = (std::log(x / vb_multiple) - 0.5 * effvar) / s;
    const double d2 = (std::log(vb_multiple / x) - 0.5 * effvar) / s;
    return detail::clamp_probability(norm_cdf(d1) - (x / vb_multiple) * norm_cdf(d2), nullptr);
}

// f x g under a constant rate (two-factor regime).
inline SurvivalResult combined_survival_const_r(const ValidatedScenario& vs,
                                                double step = kDefaultQuadStep) {
    const Scenario& s = vs.get();
    if (s.rate.is_vasicek())
        fail(errc::unsupported_case, "two-factor survival needs a constant rate");
    SurvivalResult out;
    const AffineSolution aff = intensity_affine(s.intensity, step);
    out.g_intensity = intensity_survival(aff, s.p0, s.window, &out.clamped);
    if (s.default_spec.barrier != BarrierKind::None) {
        if (!s.firm) fail(errc::bad_parameter, "barrier survival requires a firm model");
        out.f_barrier = barrier_survival_const_r(*s.firm, s.rate.r0, s.default_spec.barrier,
                                                 s.default_spec.barrier_level, s.window);
    }
    out.w_total = out.g_intensity * out.f_barrier;
    return out;
}

// e^{A - Bp} x f(V/Z, .) under a Vasicek rate and a ZCB-proportional barrier
// (three-factor regime).
inline SurvivalResult combined_survival_stoch_r(const ValidatedScenario& vs,
                                                double step = kDefaultQuadStep) {
    const Scenario& s = vs.get();
    if (!s.rate.is_vasicek() || s.default_spec.barrier != BarrierKind::ZcbProportional)
        fail(errc::unsupported_case,
             "three-factor survival needs a Vasicek rate and a zcb-proportional barrier");
    if (!s.firm) fail(errc::bad_parameter, "barrier survival requires a firm model");
    SurvivalResult out;
    const AffineSolution aff = intensity_affine(s.intensity, step);
    out.g_intensity = intensity_survival(aff, s.p0, s.window, &out.clamped);
    const auto [Ab, Bb] = vasicek_zcb_affine(s.rate, s.window, step);
    const double Z = std::exp(Ab - Bb * s.rate.r0);
    const double x = s.firm->value / Z;
    const double effvar = effective_variance(s.rate, *s.firm, s.window, false, step);
    out.f_barrier = barrier_survival_stoch_r(x, s.default_spec.barrier_level, effvar);
    out.w_total = out.g_intensity * out.f_barrier;
    return out;
}

// Survival implied by a market-price-recovery bond: W = C(1-R) / (Z - R C),
// and 1 when R = 1.
inline double implied_survival_market_recovery(double bond_price, double zcb, double recovery) {
    if (!(recovery >= 0.0 && recovery <= 1.0))
        fail(errc::bad_recovery, "recovery fraction outside [0, 1]");
    if (!(zcb > 0.0)) fail(errc::bad_parameter, "default-free bond value must be > 0");
    if (bond_price > zcb * (1.0 + 1e-12))
        fail(errc::bad_parameter, "defaultable bond cannot exceed the default-free bond");
    if (recovery == 1.0) return 1.0;
    const double w = bond_price * (1.0 - recovery) / (zcb - recovery * bond_price);
    if (w < -1e-10 || w > 1.0 + 1e-10)
        fail(errc::inconsistent, "implied survival falls outside [0, 1]");
    return detail::clamp_probability(w, nullptr);
}

} // namespace dbond
