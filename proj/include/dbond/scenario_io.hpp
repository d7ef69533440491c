#pragma once

// Scenario files: JSON ingestion with schema checking, canonical
// serialisation (fixed field order, shortest round-trip decimal text), and
// the dotted-path override mechanism used by the CLI. docs/schema.md is the
// schema reference.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dbond/errors.hpp"
#include "dbond/models.hpp"

namespace dbond {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline void require_keys(const nlohmann::json& obj, const char* where,
                         std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            fail(errc::schema_error,
                 std::string("unknown key \"") + item.key() + "\" in " + where);
    }
}

inline double as_number(const nlohmann::json& j, const char* what) {
    if (!j.is_number())
        fail(errc::schema_error, std::string(what) + " must be a number");
    return j.get<double>();
}

inline StepFunction parse_time_function(const nlohmann::json& j, const char* what) {
    if (j.is_number()) return StepFunction::constant(j.get<double>());
    if (!j.is_object())
        fail(errc::schema_error,
             std::string(what) + " must be a number or {breakpoints, values}");
    require_keys(j, what, {"breakpoints", "values"});
    if (!j.contains("breakpoints") || !j.contains("values"))
        fail(errc::schema_error, std::string(what) + " needs breakpoints and values");
    std::vector<double> bps, vals;
    for (const auto& v : j.at("breakpoints")) bps.push_back(as_number(v, what));
    for (const auto& v : j.at("values")) vals.push_back(as_number(v, what));
    if (bps.size() != vals.size() || bps.empty())
        fail(errc::schema_error,
             std::string(what) + " needs matching non-empty breakpoints/values");
    return StepFunction(std::move(bps), std::move(vals));
}

inline ordered_json dump_time_function(const StepFunction& f) {
    if (f.is_constant()) return ordered_json(f.values().front());
    ordered_json out;
    out["breakpoints"] = f.breakpoints();
    out["values"] = f.values();
    return out;
}

} // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& doc) {
    using detail::as_number;
    using detail::parse_time_function;
    using detail::require_keys;
    if (!doc.is_object()) fail(errc::schema_error, "scenario document must be a JSON object");
    require_keys(doc, "scenario",
                 {"window", "p0", "intensity", "rate", "firm", "default_spec", "rho13", "rho23"});

    Scenario s;
    if (!doc.contains("window")) fail(errc::schema_error, "missing \"window\"");
    {
        const auto& w = doc.at("window");
        require_keys(w, "window", {"t", "T"});
        s.window.t = w.contains("t") ? as_number(w.at("t"), "window.t") : 0.0;
        if (!w.contains("T")) fail(errc::schema_error, "missing \"window.T\"");
        s.window.T = as_number(w.at("T"), "window.T");
    }
    if (!doc.contains("p0")) fail(errc::schema_error, "missing \"p0\"");
    s.p0 = as_number(doc.at("p0"), "p0");

    if (!doc.contains("intensity")) fail(errc::schema_error, "missing \"intensity\"");
    {
        const auto& im = doc.at("intensity");
        require_keys(im, "intensity",
                     {"drift_const", "drift_slope_p", "drift_slope_r", "var_const", "var_slope_p",
                      "var_slope_r", "sign_convention"});
        auto& out = s.intensity;
        if (im.contains("drift_const"))
            out.drift_const = parse_time_function(im.at("drift_const"), "intensity.drift_const");
        if (im.contains("drift_slope_p"))
            out.drift_slope_p = as_number(im.at("drift_slope_p"), "intensity.drift_slope_p");
        if (im.contains("drift_slope_r"))
            out.drift_slope_r =
                parse_time_function(im.at("drift_slope_r"), "intensity.drift_slope_r");
        if (im.contains("var_const"))
            out.var_const = parse_time_function(im.at("var_const"), "intensity.var_const");
        if (im.contains("var_slope_p"))
            out.var_slope_p = as_number(im.at("var_slope_p"), "intensity.var_slope_p");
        if (im.contains("var_slope_r"))
            out.var_slope_r = parse_time_function(im.at("var_slope_r"), "intensity.var_slope_r");
        if (im.contains("sign_convention")) {
            const std::string conv = im.at("sign_convention").get<std::string>();
            if (conv == "raw-affine") {
                // input written as drift b + c p; canonical form is b - c p
                out.drift_slope_p = -out.drift_slope_p;
            } else if (conv != "reverting") {
                fail(errc::schema_error,
                     "intensity.sign_convention must be \"reverting\" or \"raw-affine\"");
            }
        }
        out.case_tag = out.classify();
    }

    if (!doc.contains("rate")) fail(errc::schema_error, "missing \"rate\"");
    {
        const auto& rj = doc.at("rate");
        require_keys(rj, "rate", {"kind", "r", "theta", "mu_r", "s_r", "r0"});
        const std::string kind = rj.contains("kind") ? rj.at("kind").get<std::string>() : "constant";
        if (kind == "constant") {
            if (!rj.contains("r")) fail(errc::schema_error, "constant rate needs \"rate.r\"");
            s.rate = ShortRateModel::constant(as_number(rj.at("r"), "rate.r"));
        } else if (kind == "vasicek") {
            for (const char* k : {"theta", "mu_r", "s_r", "r0"})
                if (!rj.contains(k))
                    fail(errc::schema_error, std::string("vasicek rate needs \"rate.") + k + "\"");
            s.rate = ShortRateModel::vasicek(
                as_number(rj.at("theta"), "rate.theta"), as_number(rj.at("mu_r"), "rate.mu_r"),
                as_number(rj.at("s_r"), "rate.s_r"), as_number(rj.at("r0"), "rate.r0"));
        } else {
            fail(errc::schema_error, "rate.kind must be \"constant\" or \"vasicek\"");
        }
    }

    if (doc.contains("firm") && !doc.at("firm").is_null()) {
        const auto& fj = doc.at("firm");
        require_keys(fj, "firm", {"value", "volatility", "dividend", "rho12"});
        FirmModel f;
        if (!fj.contains("value") || !fj.contains("volatility"))
            fail(errc::schema_error, "firm needs \"value\" and \"volatility\"");
        f.value = as_number(fj.at("value"), "firm.value");
        f.volatility = as_number(fj.at("volatility"), "firm.volatility");
        if (fj.contains("dividend")) f.dividend = as_number(fj.at("dividend"), "firm.dividend");
        if (fj.contains("rho12")) f.rho12 = as_number(fj.at("rho12"), "firm.rho12");
        s.firm = f;
    }

    if (!doc.contains("default_spec")) fail(errc::schema_error, "missing \"default_spec\"");
    {
        const auto& dj = doc.at("default_spec");
        require_keys(dj, "default_spec", {"recovery", "convention", "barrier"});
        if (!dj.contains("recovery")) fail(errc::schema_error, "missing \"default_spec.recovery\"");
        s.default_spec.recovery = as_number(dj.at("recovery"), "default_spec.recovery");
        if (dj.contains("convention")) {
            const std::string conv = dj.at("convention").get<std::string>();
            if (conv == "face-value-discounted")
                s.default_spec.convention = RecoveryConvention::FaceValueDiscounted;
            else if (conv == "market-price")
                s.default_spec.convention = RecoveryConvention::MarketPrice;
            else
                fail(errc::schema_error, "default_spec.convention must be "
                                         "\"face-value-discounted\" or \"market-price\"");
        }
        if (dj.contains("barrier")) {
            const auto& bj = dj.at("barrier");
            require_keys(bj, "default_spec.barrier", {"kind", "level"});
            const std::string kind =
                bj.contains("kind") ? bj.at("kind").get<std::string>() : "none";
            if (kind == "none")
                s.default_spec.barrier = BarrierKind::None;
            else if (kind == "constant")
                s.default_spec.barrier = BarrierKind::ConstantLevel;
            else if (kind == "discounted")
                s.default_spec.barrier = BarrierKind::DiscountedLevel;
            else if (kind == "zcb-proportional")
                s.default_spec.barrier = BarrierKind::ZcbProportional;
            else
                fail(errc::schema_error, "barrier.kind must be none | constant | discounted | "
                                         "zcb-proportional");
            if (s.default_spec.barrier != BarrierKind::None) {
                if (!bj.contains("level"))
                    fail(errc::schema_error, "barrier needs \"level\"");
                s.default_spec.barrier_level = as_number(bj.at("level"), "barrier.level");
            }
        }
    }

    if (doc.contains("rho13")) s.rho13 = as_number(doc.at("rho13"), "rho13");
    if (doc.contains("rho23")) s.rho23 = as_number(doc.at("rho23"), "rho23");
    return s;
}

// Canonical serialisation: fixed field order, constants as bare numbers,
// doubles in shortest-round-trip decimal text. Accepted scenarios round-trip
// bit-identically through dump -> parse -> dump.
inline ordered_json scenario_to_json(const Scenario& s) {
    using detail::dump_time_function;
    ordered_json doc;
    doc["window"] = {{"t", s.window.t}, {"T", s.window.T}};
    doc["p0"] = s.p0;
    ordered_json im;
    im["drift_const"] = dump_time_function(s.intensity.drift_const);
    im["drift_slope_p"] = s.intensity.drift_slope_p;
    im["drift_slope_r"] = dump_time_function(s.intensity.drift_slope_r);
    im["var_const"] = dump_time_function(s.intensity.var_const);
    im["var_slope_p"] = s.intensity.var_slope_p;
    im["var_slope_r"] = dump_time_function(s.intensity.var_slope_r);
    doc["intensity"] = std::move(im);
    ordered_json rj;
    if (s.rate.is_vasicek()) {
        rj["kind"] = "vasicek";
        rj["theta"] = s.rate.theta;
        rj["mu_r"] = s.rate.mu_r;
        rj["s_r"] = s.rate.s_r;
        rj["r0"] = s.rate.r0;
    } else {
        rj["kind"] = "constant";
        rj["r"] = s.rate.r0;
    }
    doc["rate"] = std::move(rj);
    if (s.firm) {
        doc["firm"] = {{"value", s.firm->value},
                       {"volatility", s.firm->volatility},
                       {"dividend", s.firm->dividend},
                       {"rho12", s.firm->rho12}};
    }
    ordered_json dj;
    dj["recovery"] = s.default_spec.recovery;
    dj["convention"] = s.default_spec.convention == RecoveryConvention::MarketPrice
                           ? "market-price"
                           : "face-value-discounted";
    ordered_json bj;
    bj["kind"] = to_string(s.default_spec.barrier);
    if (s.default_spec.barrier != BarrierKind::None) bj["level"] = s.default_spec.barrier_level;
    dj["barrier"] = std::move(bj);
    doc["default_spec"] = std::move(dj);
    doc["rho13"] = s.rho13;
    doc["rho23"] = s.rho23;
    return doc;
}

inline nlohmann::json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(errc::parse_error, "cannot open scenario file: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(errc::parse_error, std::string(e.what()) + " in " + path);
    }
}

inline Scenario load_scenario(const std::string& path) {
    return scenario_from_json(parse_json_file(path));
}

inline void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(errc::parse_error, "cannot write scenario file: " + path);
    out << scenario_to_json(s).dump(2) << "\n";
}

// Sets doc[dotted.path] = value (parsed as a number when possible). Creates
// intermediate objects as needed.
inline void apply_override(nlohmann::json& doc, const std::string& path,
                           const std::string& value) {
    nlohmann::json* cur = &doc;
    size_t start = 0;
    while (true) {
        const size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty()) fail(errc::bad_parameter, "empty key in override path: " + path);
        if (dot == std::string::npos) {
            char* end = nullptr;
            const double num = std::strtod(value.c_str(), &end);
            if (end && *end == '\0' && end != value.c_str())
                (*cur)[key] = num;
            else
                (*cur)[key] = value;
            return;
        }
        cur = &(*cur)[key];
        start = dot + 1;
    }
}

} // namespace dbond
