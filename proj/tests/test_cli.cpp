#include <catch2/catch_amalgamated.hpp>
#include <chrono>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using std::filesystem::path;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

RunResult run(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const path out = path(".") / ("cli_out_" + std::to_string(counter) + ".txt");
    const path err = path(".") / ("cli_err_" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd = env + (env.empty() ? "" : " ") + DBOND_BIN + " " + args + " >" +
                            out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string base_case_path() { return std::string(DBOND_SOURCE_DIR) + "/data/base_case.json"; }

// second field of the second CSV line
double csv_field(const std::string& csv, size_t col) {
    std::istringstream is(csv);
    std::string header, row;
    std::getline(is, header);
    std::getline(is, row);
    std::istringstream rs(row);
    std::string cell;
    for (size_t i = 0; i <= col; ++i) std::getline(rs, cell, ',');
    return std::stod(cell);
}

size_t line_count(const std::string& text) {
    size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("price reports the breakdown and parity") {
    const auto r = run("price --scenario " + base_case_path());
    REQUIRE(r.exit_code == 0);
    const double price = csv_field(r.out, 0);
    const double discount = csv_field(r.out, 6);
    const double cds = csv_field(r.out, 8);
    const double gap = csv_field(r.out, 9);
    CHECK(price > 0.0);
    CHECK(price <= 1.0);
    CHECK(std::fabs(price + cds - discount) <= 1e-12);
    CHECK(std::fabs(gap) <= 1e-12);
}

TEST_CASE("full recovery override pins the price to the discount") {
    const auto r = run("price --scenario " + base_case_path() + " --override R=1");
    REQUIRE(r.exit_code == 0);
    CHECK(csv_field(r.out, 0) == csv_field(r.out, 6));
}

TEST_CASE("json output carries the same fields") {
    const auto r = run("price --scenario " + base_case_path() + " --format json");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("\"price\"") != std::string::npos);
    CHECK(r.out.find("\"parity_gap\"") != std::string::npos);
}

TEST_CASE("survival subcommand prints the factorisation") {
    const auto r = run("survival --scenario " + base_case_path());
    REQUIRE(r.exit_code == 0);
    const double w = csv_field(r.out, 0);
    const double g = csv_field(r.out, 1);
    const double f = csv_field(r.out, 2);
    CHECK(w == Catch::Approx(g * f).margin(1e-14));
}

TEST_CASE("validation failures exit 2 with the diagnostic") {
    const auto r = run("price --scenario " + base_case_path() + " --override R=1.2");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("BadRecovery") != std::string::npos);
}

TEST_CASE("missing scenario file exits 2 and names the path") {
    const auto r = run("price --scenario ./definitely_missing.json");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("definitely_missing.json") != std::string::npos);
}

TEST_CASE("unknown verbs and flags are rejected") {
    CHECK(run("frobnicate").exit_code != 0);
    CHECK(run("price --no-such-flag").exit_code != 0);
}

TEST_CASE("figures command writes six deterministic CSVs") {
    const auto r1 = run("figures --out figs_a");
    REQUIRE(r1.exit_code == 0);
    const auto r2 = run("figures --out figs_b");
    REQUIRE(r2.exit_code == 0);
    for (const char* name :
         {"fig1.csv", "fig2.csv", "fig3.csv", "fig4.csv", "fig5.csv", "fig6.csv"}) {
        const std::string a = slurp(path("figs_a") / name);
        const std::string b = slurp(path("figs_b") / name);
        REQUIRE_FALSE(a.empty());
        CHECK(a == b); // byte-identical across runs
        CHECK(a.find("\r") == std::string::npos);
    }
    const std::string fig1 = slurp(path("figs_a") / "fig1.csv");
    CHECK(line_count(fig1) == 92); // header + 91 intensity rows
    const std::string fig2 = slurp(path("figs_a") / "fig2.csv");
    CHECK(line_count(fig2) == 89); // header + 88 maturity rows

    // spread strictly increasing down fig1
    std::istringstream is(fig1);
    std::string line;
    std::getline(is, line);
    double prev = -1.0;
    while (std::getline(is, line)) {
        const auto comma = line.find(',');
        const double cs = std::stod(line.substr(comma + 1));
        CHECK(cs > prev);
        prev = cs;
    }
}

TEST_CASE("spread-curve writes the term structure") {
    const auto r = run("spread-curve --scenario " + base_case_path() + " --out curve_out");
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(path("curve_out") / "spread_curve.csv");
    CHECK(line_count(csv) == 89);
    CHECK(csv.rfind("T,price,credit_spread,survival", 0) == 0);

    const auto r2 = run("spread-curve --scenario " + base_case_path() +
                        " --maturities 0.5,1,2 --out curve_out2");
    REQUIRE(r2.exit_code == 0);
    CHECK(line_count(slurp(path("curve_out2") / "spread_curve.csv")) == 4);
}

TEST_CASE("verify runs the oracle matrix") {
    const auto t0 = std::chrono::steady_clock::now();
    const auto ok = run("verify --fast");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("[PASS]") != std::string::npos);
    CHECK(ok.out.find("[FAIL]") == std::string::npos);
    CHECK(secs < 60.0); // the reduced matrix is a CI-budget run

    SECTION("a corrupted tolerance fails the run and names the row") {
        const auto bad = run("verify --fast --tol c7=1e-30");
        CHECK(bad.exit_code == 1);
        CHECK(bad.out.find("[FAIL] c7") != std::string::npos);
    }
    SECTION("the seed can come from the environment") {
        const auto seeded = run("verify --fast", "DBOND_SEED=12345");
        CHECK(seeded.exit_code == 0);
    }
}
