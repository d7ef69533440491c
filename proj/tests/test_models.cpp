#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "dbond/acceptance.hpp"
#include "dbond/models.hpp"
#include "dbond/pricing.hpp"
#include "dbond/scenario_io.hpp"

using namespace dbond;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = std::string("./") + name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

} // namespace

TEST_CASE("step function evaluates right-open segments") {
    StepFunction f({0.0, 1.0, 2.5}, {0.1, 0.2, 0.05});
    CHECK(f(-1.0) == 0.1); // extends left
    CHECK(f(0.0) == 0.1);
    CHECK(f(0.999) == 0.1);
    CHECK(f(1.0) == 0.2);
    CHECK(f(2.4999) == 0.2);
    CHECK(f(2.5) == 0.05);
    CHECK(f(100.0) == 0.05);
    CHECK(f.min_value() == 0.05);
    CHECK(f.max_value() == 0.2);
    CHECK_THROWS_AS(StepFunction({1.0, 0.0}, {0.1, 0.2}), Error); // unsorted
    CHECK_THROWS_AS(StepFunction({}, {}), Error);
}

TEST_CASE("base case is accepted and classified as mean-reverting") {
    const auto vs = validate_scenario(base_case_scenario());
    CHECK(vs->intensity.case_tag == IntensityCase::MeanRevertConstVol);
    // validation is idempotent
    const auto vs2 = validate_scenario(vs.get());
    CHECK(vs2->intensity.case_tag == IntensityCase::MeanRevertConstVol);
    CHECK(vs2->p0 == vs->p0);
}

TEST_CASE("case tags resolve from the slope pair") {
    IntensityModel m;
    m.drift_slope_p = 0.5;
    CHECK(m.classify() == IntensityCase::MeanRevertConstVol);
    m.drift_slope_p = 0.0;
    CHECK(m.classify() == IntensityCase::DriftOnlyConstVol);
    m.var_slope_p = 0.3;
    CHECK(m.classify() == IntensityCase::DriftSqrtVol);
    m.drift_slope_p = 0.5;
    CHECK(m.classify() == IntensityCase::GeneralAffine);
}

TEST_CASE("validation rejects ill-posed scenarios with named errors") {
    auto with = [](auto&& mutate) {
        Scenario s = base_case_scenario();
        mutate(s);
        return s;
    };
    auto code_of = [](const Scenario& s) {
        try {
            validate_scenario(s);
        } catch (const Error& e) {
            return e.code();
        }
        return errc::inconsistent;
    };

    CHECK(code_of(with([](Scenario& s) { s.default_spec.recovery = 1.2; })) ==
          errc::bad_recovery);
    CHECK(code_of(with([](Scenario& s) { s.window.T = s.window.t - 1.0; })) == errc::bad_window);
    CHECK(code_of(with([](Scenario& s) { s.p0 = -0.1; })) == errc::bad_parameter);
    CHECK(code_of(with([](Scenario& s) {
              s.intensity.var_const = StepFunction({0.0, 0.5}, {1e-4, -1e-6});
          })) == errc::negative_variance);
    CHECK(code_of(with([](Scenario& s) { s.intensity.var_slope_p = -0.1; })) ==
          errc::negative_variance);
    CHECK(code_of(with([](Scenario& s) { s.firm->rho12 = 1.5; })) == errc::bad_correlation);
    CHECK(code_of(with([](Scenario& s) {
              s.firm->rho12 = 0.9;
              s.rho13 = 0.9;
              s.rho23 = -0.9;
          })) == errc::bad_correlation); // not positive semidefinite
    CHECK(code_of(with([](Scenario& s) { s.rho13 = 0.2; })) == errc::unsupported_correlation);
    CHECK(code_of(with([](Scenario& s) { s.firm->value = 1.0; })) == errc::already_defaulted);
    CHECK(code_of(with([](Scenario& s) { s.firm->value = 0.5; })) == errc::already_defaulted);
    // market-price recovery is priced without a barrier
    CHECK(code_of(with([](Scenario& s) {
              s.default_spec.convention = RecoveryConvention::MarketPrice;
          })) == errc::unsupported_case);
    // barrier/rate pairings
    CHECK(code_of(with([](Scenario& s) {
              s.rate = ShortRateModel::vasicek(0.5, 0.07, 0.01, 0.07);
          })) == errc::unsupported_case);
    CHECK(code_of(with([](Scenario& s) {
              s.default_spec.barrier = BarrierKind::ZcbProportional;
          })) == errc::unsupported_case);
    CHECK(code_of(with([](Scenario& s) {
              s.rate = ShortRateModel::vasicek(0.5, 0.07, 0.01, 0.07);
              s.default_spec.barrier = BarrierKind::ZcbProportional;
              s.firm->dividend = 0.03;
          })) == errc::bad_parameter); // three-factor regime has no dividend
}

TEST_CASE("discounted barrier checks the level at valuation time") {
    Scenario s = base_case_scenario(0.1, 1.0, BarrierKind::DiscountedLevel);
    s.firm->value = 0.95; // above V_B e^{-rT} ~ 0.932 but below V_B
    CHECK_NOTHROW(validate_scenario(s));
    s.firm->value = 0.93;
    CHECK_THROWS_AS(validate_scenario(s), Error);
}

TEST_CASE("shipped base-case file loads to the built-in scenario") {
    const Scenario s = load_scenario(std::string(DBOND_SOURCE_DIR) + "/data/base_case.json");
    const Scenario b = base_case_scenario();
    CHECK(s.p0 == b.p0);
    CHECK(s.window.T == b.window.T);
    CHECK(s.intensity.drift_slope_p == b.intensity.drift_slope_p);
    CHECK(s.intensity.var_const(0.3) == b.intensity.var_const(0.3));
    CHECK(s.rate.r0 == b.rate.r0);
    CHECK(s.firm->value == b.firm->value);
    CHECK(s.default_spec.barrier == BarrierKind::ConstantLevel);
    // identical prices through the full pipeline
    CHECK(price_scenario(validate_scenario(s)).price ==
          price_scenario(validate_scenario(b)).price);
}

TEST_CASE("loader diagnostics") {
    const auto empty = write_temp("empty_scenario.json", "");
    CHECK_THROWS_AS(load_scenario(empty), Error);
    try {
        load_scenario(empty);
    } catch (const Error& e) {
        CHECK(e.code() == errc::parse_error);
    }

    CHECK_THROWS_AS(load_scenario("./no_such_file.json"), Error);

    const auto unknown = write_temp("unknown_key.json", R"({
        "window": {"t": 0, "T": 1}, "p0": 0.1,
        "intensity": {"drift_const": 0.1, "vol_const": 1},
        "rate": {"kind": "constant", "r": 0.07},
        "default_spec": {"recovery": 0.5}
    })");
    try {
        load_scenario(unknown);
        FAIL("expected SchemaError");
    } catch (const Error& e) {
        CHECK(e.code() == errc::schema_error);
        CHECK(std::string(e.what()).find("vol_const") != std::string::npos);
    }
}

TEST_CASE("piecewise drift table loads as a step function") {
    const auto path = write_temp("piecewise_drift.json", R"({
        "window": {"t": 0, "T": 2}, "p0": 0.1,
        "intensity": {
            "drift_const": {"breakpoints": [0.0, 0.5, 1.5], "values": [0.1, 0.25, 0.05]},
            "drift_slope_p": 0.0
        },
        "rate": {"kind": "constant", "r": 0.07},
        "default_spec": {"recovery": 0.5}
    })");
    const Scenario s = load_scenario(path);
    CHECK(s.intensity.drift_const(0.25) == 0.1);
    CHECK(s.intensity.drift_const(0.5) == 0.25);
    CHECK(s.intensity.drift_const(1.7) == 0.05);
}

TEST_CASE("raw-affine sign convention negates the drift slope") {
    const auto path = write_temp("raw_affine.json", R"({
        "window": {"t": 0, "T": 1}, "p0": 0.1,
        "intensity": {"drift_const": 0.1, "drift_slope_p": 0.4,
                      "sign_convention": "raw-affine"},
        "rate": {"kind": "constant", "r": 0.07},
        "default_spec": {"recovery": 0.5}
    })");
    CHECK(load_scenario(path).intensity.drift_slope_p == -0.4);
}

TEST_CASE("canonical serialisation round-trips bit-identically") {
    auto roundtrip = [](const Scenario& s) {
        const std::string once = scenario_to_json(s).dump(2);
        const Scenario back = scenario_from_json(nlohmann::json::parse(once));
        const std::string twice = scenario_to_json(back).dump(2);
        CHECK(once == twice);
    };
    roundtrip(base_case_scenario());
    roundtrip(base_case_scenario(0.0, 3.0, BarrierKind::None));

    Scenario v = base_case_scenario(0.37, 2.25, BarrierKind::None);
    v.rate = ShortRateModel::vasicek(0.5123, 0.071234567890123, 0.0123456789, 0.0699999999);
    v.intensity.drift_const = StepFunction({0.0, 0.7}, {0.1, 0.19999999999999998});
    roundtrip(v);

    // randomized scenarios across every regime
    detail::ScenarioSampler sampler(0xC0FFEEull);
    for (int k = 0; k < 200; ++k) roundtrip(sampler.next());
}
