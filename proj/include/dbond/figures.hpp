#pragma once

// Data tables behind the credit-spread study figures, and the fixed-format
// CSV writer shared with the CLI. fig1/fig4: spread against intensity at
// T = 1 (p = 0.10 .. 1.00, step 0.01). fig2/fig5: spread term structure and
// fig3/fig6: price term structure (T = 0.1 .. 3.0, step 1/30), one column per
// p0 in {0.1, 0.5, 1.0}. Figures 1-3 use the constant barrier, 4-6 the
// discounted barrier.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "dbond/models.hpp"
#include "dbond/pricing.hpp"

namespace dbond {

struct FigureTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

namespace detail {

inline Scenario figure_scenario(const Scenario& base, double p0, double T) {
    Scenario s = base;
    s.p0 = p0;
    s.window.T = T;
    return s;
}

} // namespace detail

inline std::vector<FigureTable> figure_tables(const Scenario& base_constant,
                                              const Scenario& base_discounted) {
    const std::vector<double> p_curves = {0.1, 0.5, 1.0};
    std::vector<FigureTable> tables;

    const auto spread_vs_p = [&](const Scenario& base, const std::string& name) {
        FigureTable t;
        t.name = name;
        t.columns = {"p", "credit_spread"};
        for (int i = 0; i <= 90; ++i) {
            const double p = 0.1 + 0.01 * i;
            const auto vs = validate_scenario(detail::figure_scenario(base, p, 1.0));
            t.rows.push_back({p, credit_spread(vs)});
        }
        return t;
    };
    const auto term_curves = [&](const Scenario& base, const std::string& name, bool spread) {
        FigureTable t;
        t.name = name;
        t.columns = {"T"};
        for (double p : p_curves) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%s_p%.1f", spread ? "credit_spread" : "price", p);
            t.columns.emplace_back(buf);
        }
        for (int k = 3; k <= 90; ++k) { // T = 0.1 .. 3.0 in steps of 1/30
            const double T = k / 30.0;
            std::vector<double> row{T};
            for (double p : p_curves) {
                const auto vs = validate_scenario(detail::figure_scenario(base, p, T));
                if (spread) {
                    row.push_back(credit_spread(vs));
                } else {
                    row.push_back(price_scenario(vs).price);
                }
            }
            t.rows.push_back(std::move(row));
        }
        return t;
    };

    tables.push_back(spread_vs_p(base_constant, "fig1"));
    tables.push_back(term_curves(base_constant, "fig2", true));
    tables.push_back(term_curves(base_constant, "fig3", false));
    tables.push_back(spread_vs_p(base_discounted, "fig4"));
    tables.push_back(term_curves(base_discounted, "fig5", true));
    tables.push_back(term_curves(base_discounted, "fig6", false));
    return tables;
}

inline std::vector<FigureTable> figure_tables() {
    return figure_tables(base_case_scenario(0.1, 1.0, BarrierKind::ConstantLevel),
                         base_case_scenario(0.1, 1.0, BarrierKind::DiscountedLevel));
}

// Fixed decimal formatting: 12 significant digits, LF line endings, so CSV
// bytes are identical across runs and platforms.
inline std::string format_csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string to_csv(const FigureTable& t) {
    std::string out;
    for (size_t c = 0; c < t.columns.size(); ++c) {
        if (c) out += ',';
        out += t.columns[c];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += format_csv_number(row[c]);
        }
        out += '\n';
    }
    return out;
}

inline void write_csv(const FigureTable& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(errc::io_error, "cannot write " + path);
    out << to_csv(t);
    out.flush();
    if (!out) fail(errc::io_error, "write failure on " + path);
}

} // namespace dbond
