#pragma once

// Exponential-affine machinery: the survival loadings A(t,T), B(t,T) of
// e^{A - Bp}, their market-price-recovery extension (A, B, C) under a Vasicek
// rate, and the default-free Vasicek bond loadings.
//
// B solves the backward Riccati equation
//   dB/dtau = scale - c B - (e/2) B^2,   B(0) = 0,   tau = T - t,
// with scale = 1 for face-value recovery and scale = 1 - R for market-price
// recovery. Closed forms exist for e = 0 (any c) and for c = 0, e > 0; the
// general case integrates with RK4 and step halving.

#include <cmath>
#include <functional>
#include <vector>

#include "dbond/errors.hpp"
#include "dbond/models.hpp"
#include "dbond/piecewise.hpp"

namespace dbond {

inline constexpr double kDefaultQuadStep = 1.0 / 365.0;
inline constexpr double kRiccatiBlowUpBound = 1e8; // |B| beyond this aborts the integration

enum class AffineMethod { ClosedForm, NumericRiccati };

// Evaluable affine loadings. C is engaged only for market-price recovery.
struct AffineSolution {
    std::function<double(double, double)> A; // (t, T)
    std::function<double(double, double)> B;
    std::function<double(double, double)> C;
    AffineMethod method_tag = AffineMethod::ClosedForm;
    double quadrature_step = kDefaultQuadStep;

    bool has_C() const { return static_cast<bool>(C); }
};

namespace detail {

// Closed-form Riccati solution where one exists; throws otherwise.
inline double riccati_closed_scaled(double c, double e, double tau, double scale) {
    if (tau <= 0.0) return 0.0;
    const bool c_zero = std::fabs(c) < kSlopeZeroTol;
    const bool e_zero = std::fabs(e) < kSlopeZeroTol;
    if (e_zero) {
        if (c_zero) return scale * (tau - 0.5 * c * tau * tau); // series limit of (1-e^{-c tau})/c
        return scale * (1.0 - std::exp(-c * tau)) / c;
    }
    if (c_zero && e > 0.0) {
        if (scale <= 0.0) return 0.0;
        return std::sqrt(2.0 * scale / e) * th(std::sqrt(0.5 * scale * e) * tau);
    }
    fail(errc::unsupported_case, "no closed-form Riccati branch for c != 0 with e > 0");
}

// RK4 on dB/dtau = scale - c B - (e/2) B^2, halving the step until two grids
// agree to `tol` at the endpoint.
inline double riccati_numeric_scaled(double c, double e, double tau, double scale,
                                     double tol = 1e-10) {
    if (tau <= 0.0) return 0.0;
    auto rhs = [c, e, scale](double B) { return scale - c * B - 0.5 * e * B * B; };
    auto integrate = [&](int n) {
        const double h = tau / n;
        double B = 0.0;
        for (int i = 0; i < n; ++i) {
            const double k1 = rhs(B);
            const double k2 = rhs(B + 0.5 * h * k1);
            const double k3 = rhs(B + 0.5 * h * k2);
            const double k4 = rhs(B + h * k3);
            B += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (std::fabs(B) > kRiccatiBlowUpBound)
                fail(errc::blow_up, "Riccati solution exceeded the blow-up bound; "
                                    "parameters are outside the solvable regime");
        }
        return B;
    };
    int n = std::max(16, static_cast<int>(std::ceil(tau * 64.0)));
    double coarse = integrate(n);
    for (int pass = 0; pass < 16; ++pass) {
        n *= 2;
        const double fine = integrate(n);
        if (std::fabs(fine - coarse) <= tol) return fine;
        coarse = fine;
    }
    fail(errc::not_converged, "Riccati RK4 step halving did not reach tolerance");
}

} // namespace detail

// B(t,T) in the three solvable families (face-value normalisation).
inline double riccati_B_closed(const IntensityModel& m, const TimeWindow& w) {
    const IntensityCase cas = m.classify();
    if (cas == IntensityCase::GeneralAffine)
        fail(errc::unsupported_case,
             "GeneralAffine intensity has no closed-form B; use riccati_B_numeric");
    return detail::riccati_closed_scaled(m.drift_slope_p, m.var_slope_p, w.tau(), 1.0);
}

// B(t,T) by adaptive RK4; valid for any affine intensity model.
inline double riccati_B_numeric(const IntensityModel& m, const TimeWindow& w,
                                double tol = 1e-10) {
    return detail::riccati_numeric_scaled(m.drift_slope_p, m.var_slope_p, w.tau(), 1.0, tol);
}

// A(t,T) = -int_t^T [ b(s) B(s,T) - d(s) B^2(s,T) / 2 ] ds, composite Simpson
// with nodes forced on the coefficient breakpoints.
template <class BFn>
double integrate_A(const IntensityModel& m, BFn&& B_of_s, const TimeWindow& w,
                   double step = kDefaultQuadStep) {
    if (w.tau() <= 0.0) return 0.0;
    std::vector<double> knots;
    m.drift_const.knots_in(w.t, w.T, knots);
    m.var_const.knots_in(w.t, w.T, knots);
    auto integrand = [&](double s) {
        const double B = B_of_s(s);
        return m.drift_const(s) * B - 0.5 * m.var_const(s) * B * B;
    };
    return -simpson_segmented(integrand, w.t, w.T, knots, step);
}

namespace detail {

// Shared builder: (A, B) loadings of the zero-rate survival-style solution
// with an arbitrary source scale (1 for survival, 1-R for market-price
// recovery under a constant rate).
inline AffineSolution intensity_affine_scaled(const IntensityModel& m, double scale,
                                              double step) {
    AffineSolution out;
    out.quadrature_step = step;
    const double c = m.drift_slope_p;
    const double e = m.var_slope_p;
    const bool closed = m.classify() != IntensityCase::GeneralAffine;
    out.method_tag = closed ? AffineMethod::ClosedForm : AffineMethod::NumericRiccati;
    auto B = closed ? std::function<double(double, double)>(
                          [c, e, scale](double t, double T) {
                              return riccati_closed_scaled(c, e, T - t, scale);
                          })
                    : std::function<double(double, double)>([c, e, scale](double t, double T) {
                          return riccati_numeric_scaled(c, e, T - t, scale);
                      });
    out.B = B;
    out.A = [m, B, step](double t, double T) {
        return integrate_A(m, [&](double s) { return B(s, T); }, TimeWindow{t, T}, step);
    };
    return out;
}

} // namespace detail

// Face-value (A, B) loadings of the no-default probability e^{A - Bp}.
inline AffineSolution intensity_affine(const IntensityModel& m,
                                       double step = kDefaultQuadStep) {
    return detail::intensity_affine_scaled(m, 1.0, step);
}

// Constant-rate market-price recovery: same system with the intensity scaled
// by (1 - R), so the bond is e^{-r tau} e^{A - Bp}.
inline AffineSolution intensity_affine_market(const IntensityModel& m, double recovery,
                                              double step = kDefaultQuadStep) {
    return detail::intensity_affine_scaled(m, 1.0 - recovery, step);
}

// Default-free Vasicek bond loadings: Z = e^{Abar - Bbar r}.
// Bbar(t,T) = (1 - e^{-theta tau}) / theta; Abar by quadrature of
// int_t^T [ s_r^2 Bbar^2 / 2 - theta mu_r Bbar ] du, the unique A making the
// exponential form solve the term-structure equation.
inline double vasicek_B(const ShortRateModel& r, double t, double T) {
    const double tau = T - t;
    if (tau <= 0.0) return 0.0;
    if (r.theta < kSlopeZeroTol) return tau;
    return (1.0 - std::exp(-r.theta * tau)) / r.theta;
}

inline double vasicek_A(const ShortRateModel& r, double t, double T,
                        double step = kDefaultQuadStep) {
    if (T - t <= 0.0) return 0.0;
    auto integrand = [&](double u) {
        const double Bb = vasicek_B(r, u, T);
        return 0.5 * r.s_r * r.s_r * Bb * Bb - r.theta * r.mu_r * Bb;
    };
    return simpson_segmented(integrand, t, T, {}, step);
}

inline std::pair<double, double> vasicek_zcb_affine(const ShortRateModel& r,
                                                    const TimeWindow& w,
                                                    double step = kDefaultQuadStep) {
    if (!r.is_vasicek()) fail(errc::unsupported_case, "vasicek_zcb_affine needs a Vasicek rate");
    return {vasicek_A(r, w.t, w.T, step), vasicek_B(r, w.t, w.T)};
}

// Market-price recovery under a Vasicek rate: bond = e^{A - B r - C p}.
// The system, backward from A = B = C = 0 at T with tau = T - t:
//   dC/dtau = (1-R) - c C - (e/2) C^2
//   B(t,T)  = int_t^T [ 1 + beta(u) C(u,T) - eps(u) C^2(u,T) / 2 ] e^{-theta (u-t)} du
//   A(t,T)  = int_t^T [ s_r^2 B^2/2 + d(u) C^2/2 - theta mu_r B - b(u) C ] du
// (the A integrand sign follows from its ODE and the terminal condition; see
// docs/formulas.md).
inline AffineSolution market_recovery_affine(const IntensityModel& m, const ShortRateModel& rate,
                                             double recovery, double step = kDefaultQuadStep) {
    if (!rate.is_vasicek())
        fail(errc::unsupported_case, "market_recovery_affine needs a Vasicek rate");
    if (!(recovery >= 0.0 && recovery <= 1.0))
        fail(errc::bad_recovery, "recovery fraction outside [0, 1]");

    AffineSolution out;
    out.quadrature_step = step;
    const double c = m.drift_slope_p;
    const double e = m.var_slope_p;
    const double scale = 1.0 - recovery;
    const bool closed = m.classify() != IntensityCase::GeneralAffine;
    out.method_tag = closed ? AffineMethod::ClosedForm : AffineMethod::NumericRiccati;

    std::function<double(double, double)> C =
        closed ? std::function<double(double, double)>([c, e, scale](double t, double T) {
            return detail::riccati_closed_scaled(c, e, T - t, scale);
        })
               : std::function<double(double, double)>([c, e, scale](double t, double T) {
                     return detail::riccati_numeric_scaled(c, e, T - t, scale);
                 });

    const double theta = rate.theta;
    auto B = [m, C, theta, step](double t, double T) {
        if (T - t <= 0.0) return 0.0;
        std::vector<double> knots;
        m.drift_slope_r.knots_in(t, T, knots);
        m.var_slope_r.knots_in(t, T, knots);
        auto integrand = [&](double u) {
            const double Cu = C(u, T);
            return (1.0 + m.drift_slope_r(u) * Cu - 0.5 * m.var_slope_r(u) * Cu * Cu) *
                   std::exp(-theta * (u - t));
        };
        return simpson_segmented(integrand, t, T, knots, step);
    };
    out.C = C;
    out.B = B;
    out.A = [m, rate, C, B, step](double t, double T) {
        if (T - t <= 0.0) return 0.0;
        std::vector<double> knots;
        m.drift_const.knots_in(t, T, knots);
        m.var_const.knots_in(t, T, knots);
        m.drift_slope_r.knots_in(t, T, knots);
        m.var_slope_r.knots_in(t, T, knots);
        auto integrand = [&](double u) {
            const double Cu = C(u, T);
            const double Bu = B(u, T);
            return 0.5 * rate.s_r * rate.s_r * Bu * Bu + 0.5 * m.var_const(u) * Cu * Cu -
                   rate.theta * rate.mu_r * Bu - m.drift_const(u) * Cu;
        };
        return simpson_segmented(integrand, t, T, knots, step);
    };
    return out;
}

} // namespace dbond
