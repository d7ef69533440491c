#pragma once

// Piecewise-constant time functions and the composite Simpson quadrature used
// for all coefficient integrals. Segments are right-open: values[i] applies on
// [breakpoints[i], breakpoints[i+1]); the first value extends to -inf and the
// last to +inf so evaluation is total.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "dbond/errors.hpp"

namespace dbond {

class StepFunction {
public:
    StepFunction() : breakpoints_{0.0}, values_{0.0} {}

    explicit StepFunction(double constant) : breakpoints_{0.0}, values_{constant} {}

    StepFunction(std::vector<double> breakpoints, std::vector<double> values)
        : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
        if (breakpoints_.empty() || breakpoints_.size() != values_.size())
            fail(errc::bad_parameter, "step function needs matching non-empty breakpoints/values");
        if (!std::is_sorted(breakpoints_.begin(), breakpoints_.end()))
            fail(errc::bad_parameter, "step function breakpoints must be ascending");
    }

    static StepFunction constant(double v) { return StepFunction(v); }

    double operator()(double t) const {
        auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
        if (it == breakpoints_.begin()) return values_.front();
        return values_[static_cast<size_t>(it - breakpoints_.begin()) - 1];
    }

    bool is_constant() const { return values_.size() == 1; }

    double min_value() const { return *std::min_element(values_.begin(), values_.end()); }
    double max_value() const { return *std::max_element(values_.begin(), values_.end()); }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::fabs(v));
        return m;
    }

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& values() const { return values_; }

    // Interior breakpoints falling strictly inside (a, b), ascending.
    void knots_in(double a, double b, std::vector<double>& out) const {
        for (double bp : breakpoints_)
            if (bp > a && bp < b) out.push_back(bp);
    }

private:
    std::vector<double> breakpoints_;
    std::vector<double> values_;
};

// Composite Simpson on [a, b] with n subintervals (n made even).
template <class F>
double simpson(F&& f, double a, double b, int n) {
    if (b <= a) return 0.0;
    if (n < 2) n = 2;
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double odd = 0.0, even = 0.0;
    for (int i = 1; i < n; i += 2) odd += f(a + i * h);
    for (int i = 2; i < n; i += 2) even += f(a + i * h);
    return h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b));
}

// Simpson with nodes forced on the supplied interior knots, so piecewise-constant
// coefficients are integrated exactly segment by segment. max_step bounds the
// subinterval length within each segment.
template <class F>
double simpson_segmented(F&& f, double a, double b, const std::vector<double>& knots,
                         double max_step) {
    if (b <= a) return 0.0;
    if (!(max_step > 0.0)) fail(errc::bad_parameter, "quadrature step must be positive");
    std::vector<double> nodes;
    nodes.push_back(a);
    for (double k : knots)
        if (k > a && k < b) nodes.push_back(k);
    nodes.push_back(b);
    std::sort(nodes.begin(), nodes.end());
    double total = 0.0;
    for (size_t i = 0; i + 1 < nodes.size(); ++i) {
        const double lo = nodes[i], hi = nodes[i + 1];
        if (hi - lo < 1e-15) continue;
        const int n = std::max(2, static_cast<int>(std::ceil((hi - lo) / max_step)));
        // segments are right-open: keep the right endpoint's evaluation inside
        // this segment so step coefficients take their left-limit value there
        const double cap = hi - (hi - lo) * 1e-13;
        total += simpson([&](double x) { return f(std::min(x, cap)); }, lo, hi, n);
    }
    return total;
}

// Merge a uniform n-step grid on [a, b] with forced interior knots; returns the
// ascending node list including both endpoints.
inline std::vector<double> grid_with_knots(double a, double b, int n,
                                           const std::vector<double>& knots) {
    std::vector<double> nodes;
    nodes.reserve(static_cast<size_t>(n) + knots.size() + 2);
    for (int i = 0; i <= n; ++i) nodes.push_back(a + (b - a) * i / n);
    for (double k : knots)
        if (k > a && k < b) nodes.push_back(k);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end(),
                            [](double x, double y) { return std::fabs(x - y) < 1e-12; }),
                nodes.end());
    nodes.front() = a;
    nodes.back() = b;
    return nodes;
}

namespace detail {

// tanh via exp, saturating exactly to +/-1 beyond |x| = 20.
inline double th(double x) {
    if (x > 20.0) return 1.0;
    if (x < -20.0) return -1.0;
    const double ax = std::fabs(x);
    const double e = std::exp(-2.0 * ax);
    const double t = (1.0 - e) / (1.0 + e);
    return x < 0 ? -t : t;
}

} // namespace detail

} // namespace dbond
