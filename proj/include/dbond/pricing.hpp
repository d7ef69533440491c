#pragma once

// Bond prices, CDS prices, credit spreads and term structures assembled from
// the affine loadings and survival probabilities. Every face-value price has
// the same shape: R x discount + (1-R) x discount x survival.

#include <cmath>
#include <span>
#include <vector>

#include "dbond/affine.hpp"
#include "dbond/errors.hpp"
#include "dbond/models.hpp"
#include "dbond/survival.hpp"

namespace dbond {

struct PriceBreakdown {
    double price = 0.0;        // per unit face
    double recovery_leg = 0.0; // paid regardless of default
    double risky_leg = 0.0;    // survival-weighted remainder
    SurvivalResult survival;
    double discount = 0.0; // default-free bond value used
};

enum class PricingRegime {
    UnexpectedConstRate, // intensity only, constant rate, face-value recovery
    UnexpectedVasicek,   // intensity only, Vasicek rate, face-value recovery
    MarketConstRate,     // intensity only, constant rate, market-price recovery
    MarketVasicek,       // intensity only, Vasicek rate, market-price recovery
    TwoFactorBarrier,    // firm barrier + intensity, constant rate
    ThreeFactor,         // firm barrier + intensity + Vasicek rate
};

inline PricingRegime classify_regime(const Scenario& s) {
    const bool vas = s.rate.is_vasicek();
    if (s.default_spec.barrier == BarrierKind::None) {
        if (s.default_spec.convention == RecoveryConvention::MarketPrice)
            return vas ? PricingRegime::MarketVasicek : PricingRegime::MarketConstRate;
        return vas ? PricingRegime::UnexpectedVasicek : PricingRegime::UnexpectedConstRate;
    }
    return vas ? PricingRegime::ThreeFactor : PricingRegime::TwoFactorBarrier;
}

// Default-free zero-coupon bond value over the window.
inline double zcb(const ShortRateModel& rate, const TimeWindow& w,
                  double step = kDefaultQuadStep) {
    if (w.tau() <= 0.0) return 1.0;
    if (!rate.is_vasicek()) return std::exp(-rate.r0 * w.tau());
    const auto [A, B] = vasicek_zcb_affine(rate, w, step);
    return std::exp(A - B * rate.r0);
}

namespace detail {

inline PriceBreakdown assemble_face_value(double discount, const SurvivalResult& surv,
                                          double recovery) {
    PriceBreakdown out;
    out.discount = discount;
    out.survival = surv;
    out.recovery_leg = recovery * discount;
    out.risky_leg = (1.0 - recovery) * discount * surv.w_total;
    out.price = out.recovery_leg + out.risky_leg;
    return out;
}

inline void require_face_value(const Scenario& s, const char* who) {
    if (s.default_spec.convention != RecoveryConvention::FaceValueDiscounted)
        fail(errc::unsupported_case, std::string(who) + " prices face-value recovery only");
}

inline void require_rate_decoupled_intensity(const Scenario& s) {
    if (s.intensity.rate_coupled())
        fail(errc::unsupported_case,
             "face-value recovery under a stochastic rate requires a rate-independent "
             "intensity (beta = eps = 0)");
}

} // namespace detail

// Intensity-only bond, face-value recovery: discount x [R + (1-R) e^{A - Bp}].
inline PriceBreakdown price_unexpected_only(const ValidatedScenario& vs,
                                            double step = kDefaultQuadStep) {
    const Scenario& s = vs.get();
    if (s.default_spec.barrier != BarrierKind::None)
        fail(errc::unsupported_case, "intensity-only pricer requires barrier = none");
    detail::require_face_value(s, "price_unexpected_only");
    if (s.rate.is_vasicek()) detail::require_rate_decoupled_intensity(s);
    SurvivalResult surv;
    const AffineSolution aff = intensity_affine(s.intensity, step);
    surv.g_intensity = intensity_survival(aff, s.p0, s.window, &surv.clamped);
    surv.w_total = surv.g_intensity;
    return detail::assemble_face_value(zcb(s.rate, s.window, step), surv, s.default_spec.recovery);
}

// Intensity-only bond, market-price recovery. Constant rate: e^{-r tau}
// e^{A - Bp} with the intensity scaled by (1 - R); Vasicek rate:
// e^{A - B r - C p} from the three-loading system.
inline PriceBreakdown price_unexpected_only_market(const ValidatedScenario& vs,
                                                   double step = kDefaultQuadStep) {
    const Scenario& s = vs.get();
    if (s.default_spec.barrier != BarrierKind::None)
        fail(errc::unsupported_case, "intensity-only pricer requires barrier = none");
    if (s.default_spec.convention != RecoveryConvention::MarketPrice)
        fail(errc::unsupported_case, "price_unexpected_only_market prices market-price recovery");
    const double R = s.default_spec.recovery;
    const double Z = zcb(s.rate, s.window, step);

    PriceBreakdown out;
    out.discount = Z;
    if (s.rate.is_vasicek()) {
        const AffineSolution aff = market_recovery_affine(s.intensity, s.rate, R, step);
        out.price = std::exp(aff.A(s.window.t, s.window.T) -
                             aff.B(s.window.t, s.window.T) * s.rate.r0 -
                             aff.C(s.window.t, s.window.T) * s.p0);
    } else {
        const AffineSolution aff = intensity_affine_market(s.intensity, R, step);
        out.price = Z * intensity_survival(aff, s.p0, s.window, &out.survival.clamped);
    }
    out.recovery_leg = R * out.price;
    out.risky_leg = (1.0 - R) * out.price;
    out.survival.g_intensity = implied_survival_market_recovery(out.price, Z, R);
    out.survival.f_barrier = 1.0;
    out.survival.w_total = out.survival.g_intensity;
    return out;
}

// Two-factor bond: constant rate, firm barrier (constant or discounted),
// face-value recovery.
inline PriceBreakdown price_two_factor(const ValidatedScenario& vs,
                                       double step = kDefaultQuadStep) {
    const Scenario& s = vs.get();
    if (s.rate.is_vasicek())
        fail(errc::unsupported_case, "two-factor pricer requires a constant rate");
    if (s.default_spec.barrier != BarrierKind::ConstantLevel &&
        s.default_spec.barrier != BarrierKind::DiscountedLevel)
        fail(errc::unsupported_case, "two-factor pricer requires a constant or discounted barrier");
    detail::require_face_value(s, "price_two_factor");
    const SurvivalResult surv = combined_survival_const_r(vs, step);
    return detail::assemble_face_value(std::exp(-s.rate.r0 * s.window.tau()), surv,
                                       s.default_spec.recovery);
}

// Three-factor bond: Vasicek rate, ZCB-proportional barrier, face-value
// recovery: R Z + (1-R) e^{A - Bp} [ Z N(d1) - (V/V_B) N(d2) ].
inline PriceBreakdown price_three_factor(const ValidatedScenario& vs,
                                         double step = kDefaultQuadStep) {
    const Scenario& s = vs.get();
    if (!s.rate.is_vasicek() || s.default_spec.barrier != BarrierKind::ZcbProportional)
        fail(errc::unsupported_case,
             "three-factor pricer requires a Vasicek rate and a zcb-proportional barrier");
    detail::require_face_value(s, "price_three_factor");
    detail::require_rate_decoupled_intensity(s);
    if (s.firm && s.firm->dividend != 0.0)
        fail(errc::bad_parameter, "three-factor regime prices a non-dividend-paying firm");
    const SurvivalResult surv = combined_survival_stoch_r(vs, step);
    return detail::assemble_face_value(zcb(s.rate, s.window, step), surv,
                                       s.default_spec.recovery);
}

// Dispatch to the pricer matching the scenario's regime.
inline PriceBreakdown price_scenario(const ValidatedScenario& vs,
                                     double step = kDefaultQuadStep) {
    switch (classify_regime(vs.get())) {
        case PricingRegime::UnexpectedConstRate:
        case PricingRegime::UnexpectedVasicek: return price_unexpected_only(vs, step);
        case PricingRegime::MarketConstRate:
        case PricingRegime::MarketVasicek: return price_unexpected_only_market(vs, step);
        case PricingRegime::TwoFactorBarrier: return price_two_factor(vs, step);
        case PricingRegime::ThreeFactor: return price_three_factor(vs, step);
    }
    fail(errc::unsupported_case, "unreachable");
}

// Upfront credit default swap: pays (1 - R) x (PV of face) at default, so its
// value is (1 - W)(1 - R) x discount and bond + CDS = discount.
inline double cds_price(const ValidatedScenario& vs, double step = kDefaultQuadStep) {
    const Scenario& s = vs.get();
    if (s.default_spec.convention != RecoveryConvention::FaceValueDiscounted)
        fail(errc::unsupported_case, "the swap is defined for face-value recovery regimes");
    const PriceBreakdown pb = price_scenario(vs, step);
    return (1.0 - pb.survival.w_total) * (1.0 - s.default_spec.recovery) * pb.discount;
}

// Credit spread: -log(price / discount) / (T - t).
inline double credit_spread(const ValidatedScenario& vs, double step = kDefaultQuadStep) {
    const Scenario& s = vs.get();
    if (s.window.tau() <= 0.0)
        fail(errc::degenerate_horizon, "credit spread is undefined at T = t");
    const PriceBreakdown pb = price_scenario(vs, step);
    if (!(pb.price > 0.0)) fail(errc::bad_parameter, "non-positive price has no spread");
    return -std::log(pb.price / pb.discount) / s.window.tau();
}

struct TermPoint {
    double maturity = 0.0;
    double price = 0.0;
    double spread = 0.0;
    double survival = 0.0;
};

// One row per maturity through the matching pricer; rows are independent.
inline std::vector<TermPoint> term_structure(const ValidatedScenario& vs,
                                             std::span<const double> maturities,
                                             double step = kDefaultQuadStep) {
    const Scenario& base = vs.get();
    std::vector<TermPoint> rows;
    rows.reserve(maturities.size());
    double prev = base.window.t;
    for (double T : maturities) {
        if (!(T > base.window.t) || T < prev)
            fail(errc::bad_parameter, "maturities must be sorted and exceed the valuation time");
        prev = T;
        Scenario s = base;
        s.window.T = T;
        try {
            const ValidatedScenario v = validate_scenario(s);
            const PriceBreakdown pb = price_scenario(v, step);
            rows.push_back({T, pb.price, -std::log(pb.price / pb.discount) / s.window.tau(),
                            pb.survival.w_total});
        } catch (const Error& e) {
            std::ostringstream os;
            os << "maturity " << T << ": " << e.what();
            fail(e.code(), os.str());
        }
    }
    return rows;
}

} // namespace dbond
