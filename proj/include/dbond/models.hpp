#pragma once

// Domain types shared by every module: valuation window, default intensity
// dynamics, short rate, firm value, recovery/barrier conventions, and the
// Scenario aggregate with its validation gate.
//
// Sign convention, normalised at ingestion: the intensity drift is
//   a_p(p, t) = drift_const(t) - drift_slope_p * p + drift_slope_r(t) * r
// and the squared volatility is
//   s_p^2(p, t) = var_const(t) + var_slope_p * p + var_slope_r(t) * r.
// Inputs written in the raw-affine convention (drift b + c p) carry a negated
// slope through the loader.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dbond/errors.hpp"
#include "dbond/piecewise.hpp"

namespace dbond {

struct TimeWindow {
    double t = 0.0; // valuation time, years
    double T = 1.0; // maturity, years

    double tau() const { return T - t; }
};

// The three solvable intensity families plus the numeric-only catch-all.
enum class IntensityCase {
    MeanRevertConstVol, // c != 0, e = 0
    DriftOnlyConstVol,  // c = 0,  e = 0
    DriftSqrtVol,       // c = 0,  e > 0
    GeneralAffine,      // anything else: numeric Riccati only
};

inline const char* to_string(IntensityCase c) {
    switch (c) {
        case IntensityCase::MeanRevertConstVol: return "MeanRevertConstVol";
        case IntensityCase::DriftOnlyConstVol: return "DriftOnlyConstVol";
        case IntensityCase::DriftSqrtVol: return "DriftSqrtVol";
        case IntensityCase::GeneralAffine: return "GeneralAffine";
    }
    return "?";
}

// Slopes below this magnitude are treated as zero when classifying and when
// selecting the series branch of the closed forms.
inline constexpr double kSlopeZeroTol = 1e-12;

struct IntensityModel {
    StepFunction drift_const = StepFunction::constant(0.0);   // b(t), per year
    double drift_slope_p = 0.0;                               // c
    StepFunction drift_slope_r = StepFunction::constant(0.0); // beta(t), market-price recovery only
    StepFunction var_const = StepFunction::constant(0.0);     // d(t) >= 0
    double var_slope_p = 0.0;                                 // e
    StepFunction var_slope_r = StepFunction::constant(0.0);   // eps(t), market-price recovery only
    IntensityCase case_tag = IntensityCase::DriftOnlyConstVol;

    IntensityCase classify() const {
        const bool c_zero = std::fabs(drift_slope_p) < kSlopeZeroTol;
        const bool e_zero = std::fabs(var_slope_p) < kSlopeZeroTol;
        if (!c_zero && e_zero) return IntensityCase::MeanRevertConstVol;
        if (c_zero && e_zero) return IntensityCase::DriftOnlyConstVol;
        if (c_zero && var_slope_p > 0.0) return IntensityCase::DriftSqrtVol;
        return IntensityCase::GeneralAffine;
    }

    bool rate_coupled() const {
        return drift_slope_r.max_abs() > 0.0 || var_slope_r.max_abs() > 0.0;
    }
};

struct ShortRateModel {
    enum class Kind { Constant, Vasicek };

    Kind kind = Kind::Constant;
    double r0 = 0.0;    // current short rate (the flat rate in the constant case)
    double theta = 0.0; // mean-reversion speed, Vasicek only
    double mu_r = 0.0;  // long-run mean
    double s_r = 0.0;   // volatility

    static ShortRateModel constant(double r) {
        ShortRateModel m;
        m.kind = Kind::Constant;
        m.r0 = r;
        return m;
    }

    static ShortRateModel vasicek(double theta, double mu_r, double s_r, double r0) {
        ShortRateModel m;
        m.kind = Kind::Vasicek;
        m.theta = theta;
        m.mu_r = mu_r;
        m.s_r = s_r;
        m.r0 = r0;
        return m;
    }

    bool is_vasicek() const { return kind == Kind::Vasicek; }
};

struct FirmModel {
    double value = 0.0;      // V, current firm value
    double volatility = 0.0; // s_V
    double dividend = 0.0;   // continuous payout rate b (two-factor regime only)
    double rho12 = 0.0;      // corr(rate driver, firm driver)
};

enum class RecoveryConvention { FaceValueDiscounted, MarketPrice };

enum class BarrierKind {
    None,            // unexpected default only
    ConstantLevel,   // V_b(t) = V_B
    DiscountedLevel, // V_b(t) = V_B e^{-r(T-t)}, constant rate
    ZcbProportional, // V_b(r,t) = V_B Z(r,t), stochastic rate
};

inline const char* to_string(BarrierKind k) {
    switch (k) {
        case BarrierKind::None: return "none";
        case BarrierKind::ConstantLevel: return "constant";
        case BarrierKind::DiscountedLevel: return "discounted";
        case BarrierKind::ZcbProportional: return "zcb-proportional";
    }
    return "?";
}

struct DefaultSpec {
    double recovery = 0.0; // R in [0, 1]
    RecoveryConvention convention = RecoveryConvention::FaceValueDiscounted;
    BarrierKind barrier = BarrierKind::None;
    double barrier_level = 0.0; // V_B; a Z-multiple for ZcbProportional
};

struct Scenario {
    TimeWindow window;
    IntensityModel intensity;
    ShortRateModel rate;
    std::optional<FirmModel> firm; // absent for intensity-only pricers
    DefaultSpec default_spec;
    double p0 = 0.0;   // current intensity
    double rho13 = 0.0; // corr(rate, intensity): must be 0 for closed forms
    double rho23 = 0.0; // corr(firm, intensity): must be 0 for closed forms
};

// Barrier level in firm-value terms at the valuation time (needs the rate for
// the discounted variant; the ZCB-proportional level is resolved by callers
// that know Z).
inline double barrier_level_at(const DefaultSpec& spec, double r, const TimeWindow& w) {
    switch (spec.barrier) {
        case BarrierKind::None: return 0.0;
        case BarrierKind::ConstantLevel: return spec.barrier_level;
        case BarrierKind::DiscountedLevel: return spec.barrier_level * std::exp(-r * w.tau());
        case BarrierKind::ZcbProportional: return spec.barrier_level; // multiple of Z
    }
    return 0.0;
}

namespace detail {

inline void check_structural(const Scenario& s) {
    const auto& w = s.window;
    if (!(w.t >= 0.0) || !(w.T >= w.t) || !std::isfinite(w.T - w.t))
        fail(errc::bad_window, "need 0 <= t <= T with finite horizon");

    const auto& ds = s.default_spec;
    if (!(ds.recovery >= 0.0 && ds.recovery <= 1.0)) {
        std::ostringstream os;
        os << "recovery fraction R = " << ds.recovery << " outside [0, 1]";
        fail(errc::bad_recovery, os.str());
    }

    if (!(s.p0 >= 0.0)) fail(errc::bad_parameter, "current intensity p0 must be >= 0");

    const auto& im = s.intensity;
    if (im.var_const.min_value() < 0.0)
        fail(errc::negative_variance, "intensity variance term d(t) is negative somewhere");
    if (im.var_slope_p < 0.0)
        fail(errc::negative_variance, "intensity variance slope e must be >= 0");

    const auto& r = s.rate;
    if (r.is_vasicek()) {
        if (!(r.theta > 0.0)) fail(errc::bad_parameter, "Vasicek mean-reversion theta must be > 0");
        if (!(r.s_r >= 0.0)) fail(errc::bad_parameter, "Vasicek volatility s_r must be >= 0");
    }

    double rho12 = 0.0;
    if (s.firm) {
        const auto& f = *s.firm;
        if (!(f.value > 0.0)) fail(errc::bad_parameter, "firm value must be > 0");
        if (!(f.volatility > 0.0)) fail(errc::bad_parameter, "firm volatility must be > 0");
        if (!(f.dividend >= 0.0)) fail(errc::bad_parameter, "dividend rate must be >= 0");
        rho12 = f.rho12;
    }
    if (std::fabs(rho12) > 1.0 || std::fabs(s.rho13) > 1.0 || std::fabs(s.rho23) > 1.0)
        fail(errc::bad_correlation, "correlations must lie in [-1, 1]");
    // Gram matrix of the three drivers must be positive semidefinite.
    const double det = 1.0 + 2.0 * rho12 * s.rho13 * s.rho23 - rho12 * rho12 -
                       s.rho13 * s.rho13 - s.rho23 * s.rho23;
    if (det < -1e-12) fail(errc::bad_correlation, "correlation matrix is not positive semidefinite");

    if (ds.barrier != BarrierKind::None) {
        if (!s.firm) fail(errc::bad_parameter, "barrier specification requires a firm model");
        if (!(ds.barrier_level > 0.0)) fail(errc::bad_parameter, "barrier level must be > 0");
        if (ds.barrier == BarrierKind::ZcbProportional) {
            if (!r.is_vasicek())
                fail(errc::unsupported_case,
                     "zcb-proportional barrier requires a Vasicek rate (use 'discounted' with a "
                     "constant rate)");
            if (s.firm->dividend != 0.0)
                fail(errc::bad_parameter,
                     "zcb-proportional barrier regime prices a non-dividend-paying firm");
        } else if (r.is_vasicek()) {
            fail(errc::unsupported_case,
                 "constant/discounted barrier requires a constant rate (use 'zcb-proportional')");
        }
        if (ds.convention == RecoveryConvention::MarketPrice)
            fail(errc::unsupported_case, "market-price recovery is priced without a barrier");
        if (ds.barrier != BarrierKind::ZcbProportional) {
            const double level = barrier_level_at(ds, r.r0, w);
            if (s.firm->value <= level) {
                std::ostringstream os;
                os << "firm value " << s.firm->value << " is at or below the barrier " << level
                   << " at valuation time";
                fail(errc::already_defaulted, os.str());
            }
        }
    }
}

} // namespace detail

// A scenario that passed validate_scenario; pricers only accept this wrapper.
class ValidatedScenario {
public:
    const Scenario& get() const { return scenario_; }
    const Scenario* operator->() const { return &scenario_; }

private:
    friend ValidatedScenario validate_scenario(Scenario s);
    explicit ValidatedScenario(Scenario s) : scenario_(std::move(s)) {}
    Scenario scenario_;
};

// Full validation for the closed-form path: structural invariants, case-tag
// resolution, and the no-cross-correlation assumptions the formulas rest on.
// Idempotent. Oracles use the relaxed structural check directly.
inline ValidatedScenario validate_scenario(Scenario s) {
    detail::check_structural(s);
    if (s.rho13 != 0.0 || s.rho23 != 0.0)
        fail(errc::unsupported_correlation,
             "closed forms require rho13 = rho23 = 0 (oracles accept them)");
    s.intensity.case_tag = s.intensity.classify();
    return ValidatedScenario(std::move(s));
}

// Base-case environment of the credit-spread study: R = 0.5, r = 0.07,
// dividend 0.03, s_V = 0.2, V/V_B = 1.5, intensity b = 0.1,
// c = 1.4248 x 0.0038, d = 0.0131^2, e = 0 (Collin-Dufresne/Solnik estimates).
inline Scenario base_case_scenario(double p0 = 0.1, double maturity = 1.0,
                                   BarrierKind barrier = BarrierKind::ConstantLevel) {
    Scenario s;
    s.window = {0.0, maturity};
    s.intensity.drift_const = StepFunction::constant(0.1);
    s.intensity.drift_slope_p = 1.4248 * 0.0038;
    s.intensity.var_const = StepFunction::constant(0.0131 * 0.0131);
    s.intensity.var_slope_p = 0.0;
    s.rate = ShortRateModel::constant(0.07);
    FirmModel firm;
    firm.value = 1.5;
    firm.volatility = 0.2;
    firm.dividend = 0.03;
    s.firm = firm;
    s.default_spec.recovery = 0.5;
    s.default_spec.convention = RecoveryConvention::FaceValueDiscounted;
    s.default_spec.barrier = barrier;
    s.default_spec.barrier_level = barrier == BarrierKind::None ? 0.0 : 1.0;
    if (barrier == BarrierKind::None) s.firm.reset();
    s.p0 = p0;
    return s;
}

} // namespace dbond
