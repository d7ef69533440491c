#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dbond/fd_oracles.hpp"
#include "dbond/mc_oracle.hpp"
#include "dbond/pricing.hpp"
#include "dbond/rng.hpp"

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

} // namespace

TEST_CASE("default-free bond value") {
    CHECK(zcb(ShortRateModel::constant(0.07), {1.0, 1.0}) == 1.0);
    CHECK(zcb(ShortRateModel::constant(0.07), {0.0, 1.0}) ==
          Catch::Approx(std::exp(-0.07)).margin(1e-16));
    const auto flat = ShortRateModel::vasicek(0.5, 0.07, 0.0, 0.07);
    CHECK(std::fabs(zcb(flat, {0.0, 2.0}) - std::exp(-0.14)) <= 1e-14);
}

TEST_CASE("intensity-only face-value pricer") {
    SECTION("full recovery returns the default-free bond exactly") {
        Scenario s = base_case_scenario(0.4, 2.0, BarrierKind::None);
        s.default_spec.recovery = 1.0;
        const auto pb = price_unexpected_only(validate_scenario(s));
        CHECK(pb.price == pb.discount);
    }
    SECTION("zero recovery is discount times survival") {
        Scenario s = base_case_scenario(0.4, 2.0, BarrierKind::None);
        s.default_spec.recovery = 0.0;
        const auto pb = price_unexpected_only(validate_scenario(s));
        CHECK(pb.price == pb.discount * pb.survival.w_total);
    }
    SECTION("breakdown legs sum to the price") {
        const auto pb = price_unexpected_only(
            validate_scenario(base_case_scenario(0.1, 1.0, BarrierKind::None)));
        CHECK(pb.price == pb.recovery_leg + pb.risky_leg);
        CHECK(pb.price > 0.0);
        CHECK(pb.price <= pb.discount);
    }
    SECTION("against the Crank-Nicolson oracle") {
        const Scenario s = base_case_scenario(0.1, 1.0, BarrierKind::None);
        const auto pb = price_unexpected_only(validate_scenario(s));
        CHECK(std::fabs(fd_price_1d(s).value - pb.price) / pb.price < 1e-4);
    }
    SECTION("a barrier scenario is rejected") {
        CHECK_THROWS_AS(price_unexpected_only(validate_scenario(base_case_scenario())), Error);
    }
}

TEST_CASE("intensity-only market-price pricer") {
    Scenario s = base_case_scenario(0.1, 1.0, BarrierKind::None);
    s.default_spec.convention = RecoveryConvention::MarketPrice;

    SECTION("full recovery returns the default-free bond") {
        Scenario f = s;
        f.default_spec.recovery = 1.0;
        const auto pb = price_unexpected_only_market(validate_scenario(f));
        CHECK(std::fabs(pb.price - pb.discount) <= 1e-15);
    }
    SECTION("zero recovery coincides with the face-value convention") {
        Scenario z = s;
        z.default_spec.recovery = 0.0;
        Scenario fv = base_case_scenario(0.1, 1.0, BarrierKind::None);
        fv.default_spec.recovery = 0.0;
        const double a = price_unexpected_only_market(validate_scenario(z)).price;
        const double b = price_unexpected_only(validate_scenario(fv)).price;
        CHECK(std::fabs(a - b) <= 1e-10);
    }
    SECTION("against the Crank-Nicolson oracle") {
        const auto pb = price_unexpected_only_market(validate_scenario(s));
        CHECK(std::fabs(fd_price_1d(s).value - pb.price) / pb.price < 1e-4);
    }
    SECTION("Vasicek variant against the ADI oracle, rate-coupled drift") {
        Scenario v = s;
        v.rate = ShortRateModel::vasicek(0.5, 0.07, 0.01, 0.07);
        v.intensity.drift_slope_r = StepFunction::constant(0.02);
        const auto pb = price_unexpected_only_market(validate_scenario(v));
        CHECK(std::fabs(fd_price_2d(v).value - pb.price) / pb.price < 1e-3);
    }
}

TEST_CASE("two-factor pricer") {
    SECTION("full recovery returns the discount bond") {
        Scenario s = base_case_scenario(0.3, 1.0, BarrierKind::ConstantLevel);
        s.default_spec.recovery = 1.0;
        const auto pb = price_two_factor(validate_scenario(s));
        CHECK(pb.price == pb.discount);
    }
    SECTION("certain default collapses to the recovery leg") {
        Scenario s = base_case_scenario(0.3, 1.0, BarrierKind::ConstantLevel);
        s.firm->value = 1.0 + 1e-12; // at the barrier: survival ~ 0
        const auto pb = price_two_factor(validate_scenario(s));
        CHECK(std::fabs(pb.price - 0.5 * std::exp(-0.07)) <= 1e-8);
    }
    SECTION("against the Monte Carlo oracle") {
        const Scenario s = base_case_scenario(0.3, 1.0, BarrierKind::ConstantLevel);
        const auto pb = price_two_factor(validate_scenario(s));
        McSpec spec;
        spec.n_paths = 300000;
        const McResult mc = mc_price(s, spec);
        CHECK(std::fabs(pb.price - mc.estimate) <= 3.0 * mc.std_error);
    }
    SECTION("vanishing barrier reduces to the intensity-only price") {
        Scenario s = base_case_scenario(0.3, 1.0, BarrierKind::ConstantLevel);
        s.default_spec.barrier_level = 1e-9;
        const double a = price_two_factor(validate_scenario(s)).price;
        Scenario u = base_case_scenario(0.3, 1.0, BarrierKind::None);
        const double b = price_unexpected_only(validate_scenario(u)).price;
        CHECK(std::fabs(a - b) <= 1e-8);
    }
}

TEST_CASE("three-factor pricer") {
    SECTION("full recovery returns the default-free bond") {
        Scenario s = three_factor();
        s.default_spec.recovery = 1.0;
        const auto pb = price_three_factor(validate_scenario(s));
        CHECK(pb.price == pb.discount);
    }
    SECTION("flat-rate limit agrees with the two-factor discounted-barrier price") {
        Scenario s5 = three_factor();
        s5.rate.s_r = 0.0;
        s5.firm->value = 1.5 * zcb(s5.rate, s5.window);
        Scenario s3 = base_case_scenario(0.1, 1.0, BarrierKind::DiscountedLevel);
        s3.firm->dividend = 0.0;
        s3.firm->value = s5.firm->value;
        const double a = price_three_factor(validate_scenario(s5)).price;
        const double b = price_two_factor(validate_scenario(s3)).price;
        CHECK(std::fabs(a - b) <= 1e-10);
    }
    SECTION("against the Monte Carlo oracle") {
        const Scenario s = three_factor(-0.3, 0.1, 1.0);
        const auto pb = price_three_factor(validate_scenario(s));
        McSpec spec;
        spec.n_paths = 300000;
        const McResult mc = mc_price(s, spec);
        CHECK(std::fabs(pb.price - mc.estimate) <= 3.0 * mc.std_error);
    }
}

TEST_CASE("credit default swap") {
    SECTION("worthless without loss or without risk") {
        Scenario s = base_case_scenario(0.3, 1.0, BarrierKind::ConstantLevel);
        s.default_spec.recovery = 1.0;
        CHECK(cds_price(validate_scenario(s)) == 0.0);
        Scenario r = base_case_scenario(0.0, 1.0, BarrierKind::None);
        r.intensity = IntensityModel{};
        r.p0 = 0.0; // no hazard, no barrier: certain survival
        CHECK(cds_price(validate_scenario(r)) == 0.0);
    }
    SECTION("parity with the bond across regimes") {
        CounterRng rng(31, 4);
        for (int k = 0; k < 200; ++k) {
            Scenario s = base_case_scenario(0.05 + 0.5 * rng.next_uniform(),
                                            0.25 + 2.0 * rng.next_uniform(),
                                            k % 2 ? BarrierKind::ConstantLevel
                                                  : BarrierKind::DiscountedLevel);
            s.default_spec.recovery = rng.next_uniform();
            const auto vs = validate_scenario(s);
            const auto pb = price_scenario(vs);
            CHECK(std::fabs(pb.price + cds_price(vs) - pb.discount) <= 1e-12);
        }
        const Scenario s5 = three_factor(0.4, 0.3, 2.0);
        const auto vs5 = validate_scenario(s5);
        CHECK(std::fabs(price_scenario(vs5).price + cds_price(vs5) -
                        price_scenario(vs5).discount) <= 1e-12);
    }
    SECTION("undefined for market-price recovery") {
        Scenario s = base_case_scenario(0.1, 1.0, BarrierKind::None);
        s.default_spec.convention = RecoveryConvention::MarketPrice;
        CHECK_THROWS_AS(cds_price(validate_scenario(s)), Error);
    }
}

TEST_CASE("credit spread") {
    SECTION("zero without loss or without risk") {
        Scenario s = base_case_scenario(0.3, 1.0, BarrierKind::ConstantLevel);
        s.default_spec.recovery = 1.0;
        CHECK(credit_spread(validate_scenario(s)) == Catch::Approx(0.0).margin(1e-14));
        Scenario r = base_case_scenario(0.0, 1.0, BarrierKind::None);
        r.intensity = IntensityModel{};
        CHECK(credit_spread(validate_scenario(r)) == Catch::Approx(0.0).margin(1e-14));
    }
    SECTION("degenerate horizon is rejected") {
        CHECK_THROWS_AS(credit_spread(validate_scenario(
                            base_case_scenario(0.3, 0.0, BarrierKind::ConstantLevel))),
                        Error);
    }
    SECTION("strictly increasing in the intensity at the base case") {
        double prev = -1.0;
        for (int i = 0; i <= 9; ++i) {
            const double p = 0.1 + 0.1 * i;
            const double cs = credit_spread(
                validate_scenario(base_case_scenario(p, 1.0, BarrierKind::ConstantLevel)));
            CHECK(cs > prev);
            prev = cs;
        }
    }
}

TEST_CASE("monotonicity in recovery and intensity") {
    double prev_price = -1.0, prev_spread = 2.0;
    for (double R : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        Scenario s = base_case_scenario(0.3, 1.0, BarrierKind::ConstantLevel);
        s.default_spec.recovery = R;
        const auto vs = validate_scenario(s);
        const double price = price_scenario(vs).price;
        const double spread = credit_spread(vs);
        CHECK(price >= prev_price);
        CHECK(spread <= prev_spread);
        prev_price = price;
        prev_spread = spread;
    }
    prev_price = 2.0;
    prev_spread = -1.0;
    for (double p0 : {0.0, 0.2, 0.5, 1.0, 2.0}) {
        const auto vs = validate_scenario(base_case_scenario(p0, 1.0, BarrierKind::None));
        const double price = price_scenario(vs).price;
        const double spread = credit_spread(vs);
        CHECK(price < prev_price);
        CHECK(spread > prev_spread);
        prev_price = price;
        prev_spread = spread;
    }
}

TEST_CASE("term structure") {
    const auto vs = validate_scenario(base_case_scenario(0.1, 3.0, BarrierKind::ConstantLevel));
    SECTION("single maturity equals the direct call") {
        const double T = 1.25;
        const auto rows = term_structure(vs, std::vector<double>{T});
        REQUIRE(rows.size() == 1);
        const auto direct =
            price_scenario(validate_scenario(base_case_scenario(0.1, T, BarrierKind::ConstantLevel)));
        CHECK(rows[0].price == direct.price);
        CHECK(rows[0].survival == direct.survival.w_total);
    }
    SECTION("short-maturity spread is positive, price decreasing") {
        std::vector<double> ts;
        for (int k = 3; k <= 90; k += 3) ts.push_back(k / 30.0);
        const auto rows = term_structure(vs, ts);
        CHECK(rows.front().spread > 0.0);
        for (size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].price < rows[i - 1].price);
    }
    SECTION("maturities must be sorted and past the valuation time") {
        CHECK_THROWS_AS(term_structure(vs, std::vector<double>{2.0, 1.0}), Error);
        CHECK_THROWS_AS(term_structure(vs, std::vector<double>{0.0}), Error);
    }
    SECTION("row failures carry the offending maturity") {
        // discounted barrier: short maturities leave the firm below the level
        Scenario s = base_case_scenario(0.1, 1.0, BarrierKind::DiscountedLevel);
        s.firm->value = 0.95; // above e^{-0.07} ~ 0.932, below e^{-0.014} ~ 0.986
        try {
            term_structure(validate_scenario(s), std::vector<double>{0.2, 3.0});
            FAIL("expected AlreadyDefaulted for the short row");
        } catch (const Error& e) {
            CHECK(e.code() == errc::already_defaulted);
            CHECK(std::string(e.what()).find("maturity 0.2") != std::string::npos);
        }
    }
}

TEST_CASE("regime dispatch matches the scenario shape") {
    CHECK(classify_regime(base_case_scenario(0.1, 1.0, BarrierKind::None)) ==
          PricingRegime::UnexpectedConstRate);
    CHECK(classify_regime(base_case_scenario()) == PricingRegime::TwoFactorBarrier);
    CHECK(classify_regime(three_factor()) == PricingRegime::ThreeFactor);
    Scenario m = base_case_scenario(0.1, 1.0, BarrierKind::None);
    m.default_spec.convention = RecoveryConvention::MarketPrice;
    CHECK(classify_regime(m) == PricingRegime::MarketConstRate);
    m.rate = ShortRateModel::vasicek(0.5, 0.07, 0.01, 0.07);
    CHECK(classify_regime(m) == PricingRegime::MarketVasicek);
}
