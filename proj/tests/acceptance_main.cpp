// Acceptance suite: runs the full verification matrix and prints one
// pass/fail line per check. Exits nonzero if any check fails.
//
// DBOND_FAST=1 shrinks grids and path counts (CI smoke mode);
// DBOND_SEED overrides the Monte Carlo seed.

#include <cstdlib>
#include <cstdio>

#include "dbond/acceptance.hpp"

int main() {
    dbond::AcceptanceConfig cfg;
    if (const char* fast = std::getenv("DBOND_FAST")) cfg.fast = std::atoi(fast) != 0;
    if (const char* seed = std::getenv("DBOND_SEED")) cfg.seed = std::strtoull(seed, nullptr, 0);

    const auto results = dbond::run_acceptance(cfg);
    dbond::print_acceptance_table(results, stdout);

    int failures = 0;
    for (const auto& r : results)
        if (!r.pass) ++failures;
    if (failures) std::fprintf(stderr, "%d acceptance check(s) failed\n", failures);
    return failures ? 1 : 0;
}
