#pragma once

// Crank-Nicolson solver for one-dimensional backward parabolic problems
//   u_t + diffusion(x,t) u_xx + drift(x,t) u_x + kill(x,t) u + source(x,t) = 0
// with terminal data at T, marched back to the valuation time. Boundary rows
// are either Dirichlet or "transparent": the PDE row with the curvature term
// dropped (zero-gamma closure), which also covers degenerate edges where the
// diffusion vanishes.

#include <cmath>
#include <functional>
#include <vector>

#include "dbond/errors.hpp"
#include "dbond/models.hpp"

namespace dbond {

struct Grid1D {
    double lo = 0.0;
    double hi = 1.0;
    int n = 101; // node count
    int query_index = 0;

    double h() const { return (hi - lo) / (n - 1); }
    double node(int i) const { return lo + i * h(); }

    // Uniform grid covering [lo, hi] with `query` exactly on a node. The lower
    // bound is preserved (it may carry a Dirichlet barrier); the step is
    // adjusted slightly instead, and the upper bound is extended to the next
    // node at or beyond hi.
    static Grid1D with_query(double lo, double hi, int n, double query) {
        if (n < 3) fail(errc::bad_parameter, "grid needs at least 3 nodes");
        if (!(lo < query && query < hi))
            fail(errc::bad_parameter, "truncation bounds must strictly contain the query point");
        Grid1D g;
        const double h0 = (hi - lo) / (n - 1);
        int k = static_cast<int>(std::lround((query - lo) / h0));
        k = std::max(1, std::min(n - 2, k));
        const double h = (query - lo) / k;
        const int above = std::max(1, static_cast<int>(std::ceil((hi - query) / h - 1e-9)));
        g.lo = lo;
        g.n = k + above + 1;
        g.hi = lo + (g.n - 1) * h;
        g.query_index = k;
        return g;
    }
};

enum class Bc1D { Transparent, Dirichlet };

struct Pde1D {
    std::function<double(double x, double t)> diffusion; // coefficient of u_xx
    std::function<double(double x, double t)> drift;     // coefficient of u_x
    std::function<double(double x, double t)> kill;      // + kill * u
    std::function<double(double x, double t)> source;    // may be null
    Bc1D lower = Bc1D::Transparent;
    Bc1D upper = Bc1D::Transparent;
    std::function<double(double t)> lower_value; // Dirichlet data
    std::function<double(double t)> upper_value;
};

namespace detail {

// Thomas algorithm; overwrites the scratch vectors.
inline void solve_tridiagonal(const std::vector<double>& a, const std::vector<double>& b,
                              const std::vector<double>& c, std::vector<double>& rhs,
                              std::vector<double>& scratch, std::vector<double>& out) {
    const size_t n = b.size();
    scratch.resize(n);
    out.resize(n);
    double beta = b[0];
    if (beta == 0.0) fail(errc::not_converged, "singular tridiagonal system");
    out[0] = rhs[0] / beta;
    for (size_t i = 1; i < n; ++i) {
        scratch[i] = c[i - 1] / beta;
        beta = b[i] - a[i] * scratch[i];
        if (beta == 0.0) fail(errc::not_converged, "singular tridiagonal system");
        out[i] = (rhs[i] - a[i] * out[i - 1]) / beta;
    }
    for (size_t i = n - 1; i-- > 0;) out[i] -= scratch[i + 1] * out[i + 1];
}

} // namespace detail

// Marches the terminal profile back from T to w.t; returns the grid values at
// w.t. The first `damping_steps` steps (nearest to T) are taken as pairs of
// implicit-Euler half-steps to damp terminal/boundary discontinuities
// (Rannacher startup); the remainder is Crank-Nicolson.
inline std::vector<double> cn_solve_1d(const Pde1D& pde, const Grid1D& grid, const TimeWindow& w,
                                       int n_steps, const std::function<double(double)>& terminal,
                                       int damping_steps = 0) {
    const int n = grid.n;
    const double h = grid.h();
    if (n_steps < 1) n_steps = 1;
    const double dt = w.tau() / n_steps;

    std::vector<double> u(n);
    for (int i = 0; i < n; ++i) u[i] = terminal(grid.node(i));

    // Row coefficients of L at a given time level.
    std::vector<double> al(n), bl(n), cl(n); // L(t) tridiagonal: sub, diag, super
    auto fill_L = [&](double t) {
        for (int i = 1; i < n - 1; ++i) {
            const double x = grid.node(i);
            const double D = pde.diffusion(x, t) / (h * h);
            const double V = pde.drift(x, t) / (2.0 * h);
            al[i] = D - V;
            bl[i] = -2.0 * D + pde.kill(x, t);
            cl[i] = D + V;
        }
        { // lower row
            const double x = grid.node(0);
            const double V = pde.drift(x, t) / h;
            al[0] = 0.0;
            bl[0] = -V + pde.kill(x, t);
            cl[0] = V;
        }
        { // upper row
            const double x = grid.node(n - 1);
            const double V = pde.drift(x, t) / h;
            al[n - 1] = -V;
            bl[n - 1] = V + pde.kill(x, t);
            cl[n - 1] = 0.0;
        }
    };

    std::vector<double> rhs(n), A(n), B(n), C(n), scratch, out;

    auto implicit_solve = [&](double t_sys, double dt_sys, double theta) {
        for (int i = 0; i < n; ++i) {
            A[i] = -theta * dt_sys * al[i];
            B[i] = 1.0 - theta * dt_sys * bl[i];
            C[i] = -theta * dt_sys * cl[i];
        }
        if (pde.lower == Bc1D::Dirichlet) {
            A[0] = 0.0;
            B[0] = 1.0;
            C[0] = 0.0;
            rhs[0] = pde.lower_value(t_sys);
        }
        if (pde.upper == Bc1D::Dirichlet) {
            A[n - 1] = 0.0;
            B[n - 1] = 1.0;
            C[n - 1] = 0.0;
            rhs[n - 1] = pde.upper_value(t_sys);
        }
        detail::solve_tridiagonal(A, B, C, rhs, scratch, out);
        u.swap(out);
    };

    for (int m = n_steps; m-- > 0;) {
        const double t_hi = w.t + (m + 1) * dt;
        const double t_lo = w.t + m * dt;
        const double t_mid = 0.5 * (t_hi + t_lo);

        if (n_steps - 1 - m < damping_steps) {
            // two implicit-Euler half-steps
            for (int half = 0; half < 2; ++half) {
                const double t_new = t_hi - 0.5 * dt * (half + 1);
                for (int i = 0; i < n; ++i) rhs[i] = u[i];
                if (pde.source)
                    for (int i = 0; i < n; ++i)
                        rhs[i] += 0.5 * dt * pde.source(grid.node(i), t_new);
                fill_L(t_new);
                implicit_solve(t_new, 0.5 * dt, 1.0);
            }
            continue;
        }

        // rhs = (I + dt/2 L(t_hi)) u + dt * source(t_mid)
        fill_L(t_hi);
        rhs[0] = u[0] + 0.5 * dt * (bl[0] * u[0] + cl[0] * u[1]);
        for (int i = 1; i < n - 1; ++i)
            rhs[i] = u[i] + 0.5 * dt * (al[i] * u[i - 1] + bl[i] * u[i] + cl[i] * u[i + 1]);
        rhs[n - 1] = u[n - 1] + 0.5 * dt * (al[n - 1] * u[n - 2] + bl[n - 1] * u[n - 1]);
        if (pde.source)
            for (int i = 0; i < n; ++i) rhs[i] += dt * pde.source(grid.node(i), t_mid);

        fill_L(t_lo);
        implicit_solve(t_lo, dt, 0.5);
    }
    return u;
}

} // namespace dbond
