// dbond: price defaultable zero-coupon bonds, inspect survival probabilities,
// emit credit-spread and term-structure curves as CSV, and run the
// verification pipeline (closed forms vs finite-difference and Monte Carlo
// oracles).
//
// Exit codes: 0 success; 1 verification failure; 2 validation/usage errors;
// 3 output write failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dbond/acceptance.hpp"
#include "dbond/dbond.hpp"

namespace {

using namespace dbond;

// Shorthand override keys accepted next to full dotted JSON paths.
std::string expand_override_key(const std::string& key) {
    if (key == "R") return "default_spec.recovery";
    if (key == "p0") return "p0";
    if (key == "T") return "window.T";
    if (key == "t") return "window.t";
    if (key == "r") return "rate.r";
    if (key == "V") return "firm.value";
    if (key == "V_B") return "default_spec.barrier.level";
    return key;
}

Scenario scenario_from_args(const std::string& scenario_path,
                            const std::vector<std::string>& overrides) {
    nlohmann::json doc;
    if (!scenario_path.empty()) {
        doc = parse_json_file(scenario_path);
    } else {
        doc = scenario_to_json(base_case_scenario());
    }
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            fail(errc::bad_parameter, "override must be key=value: " + ov);
        apply_override(doc, expand_override_key(ov.substr(0, eq)), ov.substr(eq + 1));
    }
    return scenario_from_json(doc);
}

std::string fmt(double v) { return format_csv_number(v); }

void print_breakdown(const PriceBreakdown& pb, double spread, std::optional<double> cds,
                     const std::string& format) {
    if (format == "json") {
        ordered_json out;
        out["price"] = pb.price;
        out["recovery_leg"] = pb.recovery_leg;
        out["risky_leg"] = pb.risky_leg;
        out["survival"] = {{"w_total", pb.survival.w_total},
                           {"g_intensity", pb.survival.g_intensity},
                           {"f_barrier", pb.survival.f_barrier}};
        out["discount"] = pb.discount;
        out["spread"] = spread;
        if (cds) {
            out["cds"] = *cds;
            out["parity_gap"] = pb.price + *cds - pb.discount;
        }
        std::cout << out.dump(2) << "\n";
        return;
    }
    std::cout << "price,recovery_leg,risky_leg,survival,g_intensity,f_barrier,discount,spread";
    if (cds) std::cout << ",cds,parity_gap";
    std::cout << "\n";
    std::cout << fmt(pb.price) << ',' << fmt(pb.recovery_leg) << ',' << fmt(pb.risky_leg) << ','
              << fmt(pb.survival.w_total) << ',' << fmt(pb.survival.g_intensity) << ','
              << fmt(pb.survival.f_barrier) << ',' << fmt(pb.discount) << ',' << fmt(spread);
    if (cds) std::cout << ',' << fmt(*cds) << ',' << fmt(pb.price + *cds - pb.discount);
    std::cout << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"defaultable zero-coupon bond pricing and verification"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";
    std::string format = "csv";
    std::string maturities_arg;
    std::uint64_t seed = 0x00d0bdc0ffee5eedull;
    bool seed_given = false;
    bool fast = false;
    std::vector<std::string> tol_overrides;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", scenario_path, "scenario JSON file (built-in base case if omitted)");
        cmd->add_option("--override", overrides, "parameter override key=value (repeatable)");
        cmd->add_option("--format", format, "output format: csv | json")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    auto* price_cmd = app.add_subcommand("price", "price one scenario and report the breakdown");
    add_common(price_cmd);
    auto* survival_cmd = app.add_subcommand("survival", "no-default probability breakdown");
    add_common(survival_cmd);
    auto* curve_cmd = app.add_subcommand("spread-curve",
                                         "price/spread/survival term structure as CSV");
    add_common(curve_cmd);
    curve_cmd->add_option("--maturities", maturities_arg,
                          "comma-separated maturities (default 0.1..3 step 1/30)");
    curve_cmd->add_option("--out", out_dir, "output directory (default .)");

    auto* figures_cmd = app.add_subcommand(
        "figures", "write fig1..fig6 CSVs of the base-case credit-spread study");
    add_common(figures_cmd);
    figures_cmd->add_option("--out", out_dir, "output directory (default .)");

    auto* verify_cmd = app.add_subcommand("verify", "run the closed-form vs oracle matrix");
    verify_cmd->add_flag("--fast", fast, "reduced grids and path counts");
    verify_cmd->add_option("--seed", seed, "Monte Carlo seed")->each([&](const std::string&) {
        seed_given = true;
    });
    verify_cmd->add_option("--tol", tol_overrides, "tolerance override id=value (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (price_cmd->parsed() || survival_cmd->parsed()) {
            const Scenario s = scenario_from_args(scenario_path, overrides);
            const ValidatedScenario vs = validate_scenario(s);
            const PriceBreakdown pb = price_scenario(vs);
            const double spread = s.window.tau() > 0.0
                                      ? -std::log(pb.price / pb.discount) / s.window.tau()
                                      : 0.0;
            std::optional<double> cds;
            if (s.default_spec.convention == RecoveryConvention::FaceValueDiscounted)
                cds = cds_price(vs);
            if (survival_cmd->parsed() && format == "csv") {
                std::cout << "w_total,g_intensity,f_barrier\n"
                          << fmt(pb.survival.w_total) << ',' << fmt(pb.survival.g_intensity)
                          << ',' << fmt(pb.survival.f_barrier) << "\n";
            } else if (survival_cmd->parsed()) {
                ordered_json out;
                out["w_total"] = pb.survival.w_total;
                out["g_intensity"] = pb.survival.g_intensity;
                out["f_barrier"] = pb.survival.f_barrier;
                std::cout << out.dump(2) << "\n";
            } else {
                print_breakdown(pb, spread, cds, format);
            }
            return 0;
        }

        if (curve_cmd->parsed()) {
            const Scenario s = scenario_from_args(scenario_path, overrides);
            const ValidatedScenario vs = validate_scenario(s);
            std::vector<double> maturities;
            if (maturities_arg.empty()) {
                for (int k = 3; k <= 90; ++k) maturities.push_back(k / 30.0);
            } else {
                std::stringstream ss(maturities_arg);
                std::string item;
                while (std::getline(ss, item, ',')) maturities.push_back(std::stod(item));
            }
            const auto rows = term_structure(vs, maturities);
            FigureTable t;
            t.name = "spread_curve";
            t.columns = {"T", "price", "credit_spread", "survival"};
            for (const auto& row : rows)
                t.rows.push_back({row.maturity, row.price, row.spread, row.survival});
            std::filesystem::create_directories(out_dir);
            const auto path = std::filesystem::path(out_dir) / "spread_curve.csv";
            write_csv(t, path.string());
            std::cout << "wrote " << path.string() << "\n";
            return 0;
        }

        if (figures_cmd->parsed()) {
            Scenario base_const = base_case_scenario(0.1, 1.0, BarrierKind::ConstantLevel);
            Scenario base_disc = base_case_scenario(0.1, 1.0, BarrierKind::DiscountedLevel);
            if (!scenario_path.empty() || !overrides.empty()) {
                const Scenario s = scenario_from_args(scenario_path, overrides);
                base_const = s;
                base_const.default_spec.barrier = BarrierKind::ConstantLevel;
                base_disc = s;
                base_disc.default_spec.barrier = BarrierKind::DiscountedLevel;
            }
            std::error_code ec;
            std::filesystem::create_directories(out_dir, ec);
            for (const auto& t : figure_tables(base_const, base_disc)) {
                const auto path = std::filesystem::path(out_dir) / (t.name + ".csv");
                write_csv(t, path.string());
                std::cout << "wrote " << path.string() << "\n";
            }
            return 0;
        }

        if (verify_cmd->parsed()) {
            AcceptanceConfig cfg;
            cfg.fast = fast;
            cfg.seed = seed;
            if (!seed_given) {
                if (const char* env = std::getenv("DBOND_SEED"))
                    cfg.seed = std::strtoull(env, nullptr, 0);
            }
            for (const auto& ov : tol_overrides) {
                const auto eq = ov.find('=');
                if (eq == std::string::npos)
                    fail(errc::bad_parameter, "tolerance override must be id=value: " + ov);
                cfg.tol_overrides[ov.substr(0, eq)] = std::stod(ov.substr(eq + 1));
            }
            const auto results = run_acceptance(cfg);
            print_acceptance_table(results, stdout);
            for (const auto& r : results)
                if (!r.pass) return 1;
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return e.code() == errc::io_error ? 3 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
