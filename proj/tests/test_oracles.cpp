#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dbond/fd_oracles.hpp"
#include "dbond/mc_oracle.hpp"
#include "dbond/pricing.hpp"

using namespace dbond;

namespace {

Scenario three_factor(double rho12 = 0.0, double p0 = 0.1, double T = 1.0) {
    Scenario s;
    s.window = {0.0, T};
    s.intensity.drift_const = StepFunction::constant(0.1);
    s.intensity.drift_slope_p = 1.4248 * 0.0038;
    s.intensity.var_const = StepFunction::constant(0.0131 * 0.0131);
    s.rate = ShortRateModel::vasicek(0.5, 0.07, 0.02, 0.07);
    FirmModel f;
    f.volatility = 0.2;
    f.rho12 = rho12;
    f.value = 1.5 * zcb(s.rate, s.window);
    s.firm = f;
    s.default_spec = {0.5, RecoveryConvention::FaceValueDiscounted,
                      BarrierKind::ZcbProportional, 1.0};
    s.p0 = p0;
    return s;
}

double observed_order(double coarse, double mid, double fine) {
    return std::log2(std::fabs(coarse - mid) / std::fabs(mid - fine));
}

} // namespace

TEST_CASE("grid construction honours bounds and the query point") {
    const auto g = Grid1D::with_query(0.0, 3.0, 301, 0.40546);
    CHECK(g.lo == 0.0);
    CHECK(g.hi >= 3.0);
    CHECK(g.node(g.query_index) == Catch::Approx(0.40546).margin(1e-12));
    CHECK_THROWS_AS(Grid1D::with_query(0.0, 1.0, 2, 0.5), Error);
    CHECK_THROWS_AS(Grid1D::with_query(0.0, 1.0, 101, 1.5), Error);
}

TEST_CASE("one-dimensional pricer oracle") {
    SECTION("full recovery reproduces the discount curve to high accuracy") {
        Scenario s = base_case_scenario(0.7, 1.0, BarrierKind::None);
        s.default_spec.recovery = 1.0;
        const auto fd = fd_price_1d(s);
        CHECK(std::fabs(fd.value - std::exp(-0.07)) <= 1e-8);
    }
    SECTION("overwhelming hazard drives the price to the recovery floor") {
        Scenario s = base_case_scenario(50.0, 1.0, BarrierKind::None);
        s.default_spec.recovery = 0.0;
        const auto fd = fd_price_1d(s);
        CHECK(fd.value <= 1e-8 * std::exp(-0.07));
    }
    SECTION("rejects regimes it does not cover") {
        CHECK_THROWS_AS(fd_price_1d(base_case_scenario()), Error); // barrier present
        Scenario v = base_case_scenario(0.1, 1.0, BarrierKind::None);
        v.rate = ShortRateModel::vasicek(0.5, 0.07, 0.01, 0.07);
        CHECK_THROWS_AS(fd_price_1d(v), Error);
    }
    SECTION("second-order convergence on a smooth problem") {
        const Scenario s = base_case_scenario(0.3, 1.0, BarrierKind::None);
        double results[3];
        int k = 0;
        for (int sc : {1, 2, 4}) {
            GridSpec g;
            g.n_p = 200 * sc;
            g.n_t = 48 * sc;
            g.rel_tol = 1.0; // single refinement pair; we want the raw sequence
            const auto dom = detail::p_domain(s, g);
            const Grid1D gp = Grid1D::with_query(dom.lo, dom.hi, g.n_p + 1, s.p0);
            Pde1D pde;
            const auto& m = s.intensity;
            pde.diffusion = [&m](double p, double t) {
                return 0.5 * std::max(m.var_const(t) + m.var_slope_p * p, 0.0);
            };
            pde.drift = [&m](double p, double t) {
                return m.drift_const(t) - m.drift_slope_p * p;
            };
            pde.kill = [](double p, double) { return -(0.07 + p); };
            const auto u = cn_solve_1d(pde, gp, s.window, g.n_t, [](double) { return 1.0; });
            results[k++] = u[gp.query_index];
        }
        const double order = observed_order(results[0], results[1], results[2]);
        CHECK(order >= 1.7);
        CHECK(order <= 2.3);
    }
}

TEST_CASE("two-dimensional oracle collapses to one dimension without a barrier") {
    Scenario s = base_case_scenario(0.3, 1.0, BarrierKind::ConstantLevel);
    s.default_spec.barrier_level = s.firm->value * 1e-6; // barrier far below
    const double two_d = fd_price_2d(s).value;
    Scenario flat = s;
    flat.default_spec.barrier = BarrierKind::None;
    flat.firm.reset();
    const double one_d = fd_price_1d(flat).value;
    CHECK(std::fabs(two_d - one_d) <= 1e-6);
}

TEST_CASE("ADI convergence order on the rate-intensity problem") {
    // raw single solves of the smooth (rate, intensity) problem
    const auto rate = ShortRateModel::vasicek(0.5, 0.07, 0.01, 0.07);
    const double b = 0.1, c = 1.4248 * 0.0038, d = 0.0131 * 0.0131;
    const double r0 = 0.07, p0 = 0.3;
    double results[3];
    int k = 0;
    for (int sc : {1, 2, 4}) {
        const Grid1D gr = Grid1D::with_query(-0.1, 0.25, 48 * sc + 1, r0);
        const Grid1D gp = Grid1D::with_query(-0.4, 1.6, 64 * sc + 1, p0);
        Pde2D pde;
        pde.axis1 = [&](double, AxisCoeffs& out) {
            for (int i = 0; i < gr.n; ++i) {
                const double r = gr.node(i);
                out.diff[i] = 0.5 * rate.s_r * rate.s_r;
                out.drift[i] = rate.theta * (rate.mu_r - r);
                out.kill[i] = -r;
            }
        };
        pde.axis2 = [&](double, int, AxisCoeffs& out) {
            for (int j = 0; j < gp.n; ++j) {
                const double p = gp.node(j);
                out.diff[j] = 0.5 * d;
                out.drift[j] = b - c * p;
                out.kill[j] = -p;
            }
        };
        const auto u = adi_solve_2d(pde, gr, gp, {0.0, 1.0}, 24 * sc,
                                    [](double, double) { return 1.0; });
        results[k++] = u[gr.query_index * gp.n + gp.query_index];
    }
    const double order = observed_order(results[0], results[1], results[2]);
    CHECK(order >= 1.7);
    CHECK(order <= 2.3);
}

TEST_CASE("Monte Carlo trivial limits") {
    SECTION("no hazard, no barrier: the discount bond exactly (flat rate)") {
        Scenario s = base_case_scenario(0.0, 1.0, BarrierKind::None);
        s.intensity = IntensityModel{};
        McSpec spec;
        spec.n_paths = 20000;
        const McResult mc = mc_price(s, spec);
        CHECK(mc.estimate == Catch::Approx(std::exp(-0.07)).margin(1e-14));
        CHECK(mc.std_error <= 1e-8); // identical payoffs up to accumulation noise
    }
    SECTION("no hazard, Vasicek rate: the discount bond within 3 s.e.") {
        Scenario s = three_factor(0.0, 0.0, 1.0);
        s.intensity = IntensityModel{};
        s.default_spec.barrier = BarrierKind::None;
        s.firm.reset();
        McSpec spec;
        spec.n_paths = 200000;
        const McResult mc = mc_price(s, spec);
        const double Z = zcb(s.rate, s.window);
        CHECK(std::fabs(mc.estimate - Z) <= 3.0 * mc.std_error);
    }
    SECTION("full recovery equals the discount bond within 3 s.e.") {
        Scenario s = three_factor(0.2, 0.3, 1.0);
        s.default_spec.recovery = 1.0;
        McSpec spec;
        spec.n_paths = 100000;
        const McResult mc = mc_price(s, spec);
        CHECK(std::fabs(mc.estimate - zcb(s.rate, s.window)) <= 3.0 * mc.std_error);
    }
    SECTION("constant hazard survival is exponential") {
        Scenario s = base_case_scenario(0.25, 1.0, BarrierKind::None);
        s.intensity = IntensityModel{};
        McSpec spec;
        spec.n_paths = 200000;
        const McResult mc = mc_survival(s, spec);
        CHECK(std::fabs(mc.estimate - std::exp(-0.25)) <= 3.0 * mc.std_error);
    }
}

TEST_CASE("Monte Carlo statistical behaviour") {
    const Scenario s = base_case_scenario(0.3, 1.0, BarrierKind::ConstantLevel);
    SECTION("standard error shrinks like one over root two when paths double") {
        McSpec a;
        a.n_paths = 100000;
        McSpec b = a;
        b.n_paths = 200000;
        const double se1 = mc_price(s, a).std_error;
        const double se2 = mc_price(s, b).std_error;
        const double ratio = se2 / se1;
        CHECK(ratio >= 0.7071 * 0.9);
        CHECK(ratio <= 0.7071 * 1.1);
    }
    SECTION("antithetic sampling never hurts on the base scenarios") {
        for (const Scenario& sc : {s, three_factor(0.3, 0.2, 1.0)}) {
            McSpec plain;
            plain.n_paths = 100000;
            McSpec anti = plain;
            anti.antithetic = true;
            CHECK(mc_price(sc, anti).std_error <= mc_price(sc, plain).std_error * 1.0 + 1e-12);
        }
    }
    SECTION("same seed reproduces bit-identical estimates, any thread count") {
        McSpec one;
        one.n_paths = 50000;
        one.threads = 1;
        McSpec two = one;
        two.threads = 2;
        const McResult r1 = mc_price(s, one);
        const McResult r2 = mc_price(s, two);
        CHECK(r1.estimate == r2.estimate);
        CHECK(r1.std_error == r2.std_error);
        McSpec other = one;
        other.seed += 1;
        CHECK(mc_price(s, other).estimate != r1.estimate);
    }
    SECTION("discrete monitoring overstates survival; the bridge removes it") {
        Scenario b = s;
        b.intensity = IntensityModel{};
        b.p0 = 0.0;
        McSpec bridge;
        bridge.n_paths = 200000;
        bridge.steps_per_year = 16; // coarse on purpose
        McSpec plain = bridge;
        plain.brownian_bridge = false;
        const double closed =
            barrier_survival_const_r(*b.firm, 0.07, BarrierKind::ConstantLevel, 1.0, b.window);
        const McResult with = mc_survival(b, bridge);
        const McResult without = mc_survival(b, plain);
        CHECK(without.estimate > with.estimate);            // monitoring bias is upward
        CHECK(std::fabs(without.estimate - closed) > 4.0 * without.std_error);
        CHECK(std::fabs(with.estimate - closed) <= 4.0 * with.std_error);
    }
}

TEST_CASE("oracle concordance without closed forms") {
    SECTION("two-factor: ADI and Monte Carlo agree") {
        const Scenario s = base_case_scenario(0.5, 1.0, BarrierKind::DiscountedLevel);
        const double fd = fd_price_2d(s).value;
        McSpec spec;
        spec.n_paths = 300000;
        const McResult mc = mc_price(s, spec);
        CHECK(std::fabs(fd - mc.estimate) <= 3.0 * mc.std_error);
    }
    SECTION("rate-intensity: ADI and Monte Carlo agree") {
        Scenario s = base_case_scenario(0.3, 1.0, BarrierKind::None);
        s.rate = ShortRateModel::vasicek(0.5, 0.07, 0.01, 0.07);
        const double fd = fd_price_2d(s).value;
        McSpec spec;
        spec.n_paths = 300000;
        const McResult mc = mc_price(s, spec);
        CHECK(std::fabs(fd - mc.estimate) <= 3.0 * mc.std_error);
    }
    SECTION("correlated hazard is oracle-only territory") {
        // rho13 != 0 has no closed form; only the simulator covers it
        Scenario s = base_case_scenario(0.2, 5.0, BarrierKind::None);
        s.rate = ShortRateModel::vasicek(0.3, 0.07, 0.05, 0.07);
        s.intensity.var_const = StepFunction::constant(0.08 * 0.08);
        s.default_spec.recovery = 0.0;
        s.rho13 = 0.9;
        CHECK_THROWS_AS(validate_scenario(s), Error); // closed path refuses
        McSpec spec;
        spec.n_paths = 400000;
        spec.antithetic = true;
        const McResult with = mc_price(s, spec);
        Scenario zero = s;
        zero.rho13 = 0.0;
        const McResult without = mc_price(zero, spec);
        // rate-hazard correlation must move the price well beyond the noise
        CHECK(std::fabs(with.estimate - without.estimate) >
              3.0 * (with.std_error + without.std_error));
    }
}

TEST_CASE("expected-default-only survival solver pins the closed branches") {
    const FirmModel firm{1.5, 0.2, 0.03, 0.0};
    const TimeWindow w{0.0, 2.0};
    for (auto kind : {BarrierKind::ConstantLevel, BarrierKind::DiscountedLevel}) {
        const double closed = barrier_survival_const_r(firm, 0.07, kind, 1.0, w);
        const double fd = fd_barrier_survival_1d(firm, 0.07, kind, 1.0, w).value;
        CHECK(std::fabs(fd - closed) / closed < 1e-5);
    }
}
