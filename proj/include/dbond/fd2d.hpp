#pragma once

// Douglas ADI scheme for two-dimensional backward parabolic problems without
// mixed derivatives,
//   u_t + L1 u + L2 u + source = 0,
// where L1 acts along axis x (first index) and L2 along axis y. Each step:
//   Y0 = u + dt (L1 + L2) u + dt source(t_mid)
//   (I - dt/2 L1(t_lo)) Y1 = Y0 - dt/2 L1(t_hi) u
//   (I - dt/2 L2(t_lo)) Y2 = Y1 - dt/2 L2(t_hi) u
// Coefficient providers fill per-axis arrays once per time level, so the hot
// loops are plain array arithmetic. The only supported Dirichlet edge is the
// lower x edge (the default barrier); all other edges use the zero-gamma
// transparent closure.

#include <functional>
#include <vector>

#include "dbond/errors.hpp"
#include "dbond/fd1d.hpp"
#include "dbond/models.hpp"

namespace dbond {

struct AxisCoeffs {
    std::vector<double> diff;  // coefficient of second derivative
    std::vector<double> drift; // coefficient of first derivative
    std::vector<double> kill;  // zero-order term attached to this axis

    void resize(size_t n) {
        diff.assign(n, 0.0);
        drift.assign(n, 0.0);
        kill.assign(n, 0.0);
    }
};

struct Pde2D {
    // Fill axis-1 coefficients (size nx) at time t.
    std::function<void(double t, AxisCoeffs&)> axis1;
    // Fill axis-2 coefficients (size ny) at time t for axis-1 index i.
    std::function<void(double t, int i, AxisCoeffs&)> axis2;
    std::function<double(double x, double y, double t)> source; // may be null
    bool dirichlet_lower_x = false;
    std::function<double(double y, double t)> lower_x_value;
};

// Solves backward from terminal(x, y) at T; returns values at w.t, row-major
// (i * ny + j). The first `damping_steps` steps are pairs of implicit-Euler
// half-steps (Lie splitting) to damp the barrier/terminal corner
// discontinuity before the Douglas scheme takes over.
inline std::vector<double> adi_solve_2d(const Pde2D& pde, const Grid1D& gx, const Grid1D& gy,
                                        const TimeWindow& w, int n_steps,
                                        const std::function<double(double, double)>& terminal,
                                        int damping_steps = 0) {
    const int nx = gx.n, ny = gy.n;
    const double hx = gx.h(), hy = gy.h();
    if (n_steps < 1) n_steps = 1;
    const double dt = w.tau() / n_steps;

    std::vector<double> u(static_cast<size_t>(nx) * ny);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) u[i * ny + j] = terminal(gx.node(i), gy.node(j));

    AxisCoeffs c1;
    std::vector<AxisCoeffs> c2(nx);
    auto fill_axis2_all = [&](double t) {
        for (int i = 0; i < nx; ++i) {
            c2[i].resize(ny);
            pde.axis2(t, i, c2[i]);
        }
    };

    // L1 applied along x for fixed j (sub/diag/super in the i direction).
    auto rowL1 = [&](int i, double& lo, double& mid, double& hi_) {
        if (i == 0) {
            const double V = c1.drift[0] / hx;
            lo = 0.0;
            mid = -V + c1.kill[0];
            hi_ = V;
        } else if (i == nx - 1) {
            const double V = c1.drift[i] / hx;
            lo = -V;
            mid = V + c1.kill[i];
            hi_ = 0.0;
        } else {
            const double D = c1.diff[i] / (hx * hx);
            const double V = c1.drift[i] / (2.0 * hx);
            lo = D - V;
            mid = -2.0 * D + c1.kill[i];
            hi_ = D + V;
        }
    };
    auto rowL2 = [&](const AxisCoeffs& c, int j, double& lo, double& mid, double& hi_) {
        if (j == 0) {
            const double V = c.drift[0] / hy;
            lo = 0.0;
            mid = -V + c.kill[0];
            hi_ = V;
        } else if (j == ny - 1) {
            const double V = c.drift[j] / hy;
            lo = -V;
            mid = V + c.kill[j];
            hi_ = 0.0;
        } else {
            const double D = c.diff[j] / (hy * hy);
            const double V = c.drift[j] / (2.0 * hy);
            lo = D - V;
            mid = -2.0 * D + c.kill[j];
            hi_ = D + V;
        }
    };

    std::vector<double> L1u(u.size()), L2u(u.size()), Y(u.size());
    std::vector<double> A(std::max(nx, ny)), B(std::max(nx, ny)), C(std::max(nx, ny)),
        rhs(std::max(nx, ny)), scratch, line;
    const bool dirich = pde.dirichlet_lower_x;

    // fully implicit x-then-y sweep of size dt_s at time t_new, from Y into u
    auto implicit_euler_step = [&](double t_new, double dt_s) {
        c1.resize(nx);
        pde.axis1(t_new, c1);
        rhs.resize(nx);
        A.resize(nx);
        B.resize(nx);
        C.resize(nx);
        for (int i = 0; i < nx; ++i) {
            double lo, mid, hi_;
            rowL1(i, lo, mid, hi_);
            A[i] = -dt_s * lo;
            B[i] = 1.0 - dt_s * mid;
            C[i] = -dt_s * hi_;
        }
        if (dirich) {
            A[0] = 0.0;
            B[0] = 1.0;
            C[0] = 0.0;
        }
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) rhs[i] = Y[i * ny + j];
            if (dirich) rhs[0] = pde.lower_x_value(gy.node(j), t_new);
            detail::solve_tridiagonal(A, B, C, rhs, scratch, line);
            for (int i = 0; i < nx; ++i) Y[i * ny + j] = line[i];
        }
        fill_axis2_all(t_new);
        rhs.resize(ny);
        A.resize(ny);
        B.resize(ny);
        C.resize(ny);
        for (int i = 0; i < nx; ++i) {
            if (dirich && i == 0) {
                for (int j = 0; j < ny; ++j) Y[j] = pde.lower_x_value(gy.node(j), t_new);
                continue;
            }
            for (int j = 0; j < ny; ++j) {
                double lo, mid, hi_;
                rowL2(c2[i], j, lo, mid, hi_);
                A[j] = -dt_s * lo;
                B[j] = 1.0 - dt_s * mid;
                C[j] = -dt_s * hi_;
                rhs[j] = Y[i * ny + j];
            }
            detail::solve_tridiagonal(A, B, C, rhs, scratch, line);
            for (int j = 0; j < ny; ++j) Y[i * ny + j] = line[j];
        }
        u.swap(Y);
    };

    for (int m = n_steps; m-- > 0;) {
        const double t_hi = w.t + (m + 1) * dt;
        const double t_lo = w.t + m * dt;
        const double t_mid = 0.5 * (t_hi + t_lo);

        if (n_steps - 1 - m < damping_steps) {
            for (int half = 0; half < 2; ++half) {
                const double t_new = t_hi - 0.5 * dt * (half + 1);
                Y = u;
                if (pde.source)
                    for (int i = 0; i < nx; ++i)
                        for (int j = 0; j < ny; ++j)
                            Y[i * ny + j] += 0.5 * dt * pde.source(gx.node(i), gy.node(j), t_new);
                implicit_euler_step(t_new, 0.5 * dt);
            }
            continue;
        }

        // explicit applications at t_hi
        c1.resize(nx);
        pde.axis1(t_hi, c1);
        fill_axis2_all(t_hi);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                double lo, mid, hi_;
                rowL1(i, lo, mid, hi_);
                const double um = i > 0 ? u[(i - 1) * ny + j] : 0.0;
                const double up = i < nx - 1 ? u[(i + 1) * ny + j] : 0.0;
                L1u[i * ny + j] = lo * um + mid * u[i * ny + j] + hi_ * up;
            }
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                double lo, mid, hi_;
                rowL2(c2[i], j, lo, mid, hi_);
                const double um = j > 0 ? u[i * ny + j - 1] : 0.0;
                const double up = j < ny - 1 ? u[i * ny + j + 1] : 0.0;
                L2u[i * ny + j] = lo * um + mid * u[i * ny + j] + hi_ * up;
            }

        for (size_t k = 0; k < u.size(); ++k) Y[k] = u[k] + dt * (L1u[k] + L2u[k]);
        if (pde.source)
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < ny; ++j)
                    Y[i * ny + j] += dt * pde.source(gx.node(i), gy.node(j), t_mid);

        // implicit x sweep at t_lo
        c1.resize(nx);
        pde.axis1(t_lo, c1);
        A.assign(nx, 0.0);
        B.assign(nx, 0.0);
        C.assign(nx, 0.0);
        for (int i = 0; i < nx; ++i) {
            double lo, mid, hi_;
            rowL1(i, lo, mid, hi_);
            A[i] = -0.5 * dt * lo;
            B[i] = 1.0 - 0.5 * dt * mid;
            C[i] = -0.5 * dt * hi_;
        }
        const bool dir = pde.dirichlet_lower_x;
        if (dir) {
            A[0] = 0.0;
            B[0] = 1.0;
            C[0] = 0.0;
        }
        rhs.resize(nx);
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) rhs[i] = Y[i * ny + j] - 0.5 * dt * L1u[i * ny + j];
            if (dir) rhs[0] = pde.lower_x_value(gy.node(j), t_lo);
            detail::solve_tridiagonal(A, B, C, rhs, scratch, line);
            for (int i = 0; i < nx; ++i) Y[i * ny + j] = line[i];
        }

        // implicit y sweep at t_lo
        fill_axis2_all(t_lo);
        rhs.resize(ny);
        A.resize(ny);
        B.resize(ny);
        C.resize(ny);
        for (int i = 0; i < nx; ++i) {
            if (dir && i == 0) {
                for (int j = 0; j < ny; ++j) Y[j] = pde.lower_x_value(gy.node(j), t_lo);
                continue;
            }
            for (int j = 0; j < ny; ++j) {
                double lo, mid, hi_;
                rowL2(c2[i], j, lo, mid, hi_);
                A[j] = -0.5 * dt * lo;
                B[j] = 1.0 - 0.5 * dt * mid;
                C[j] = -0.5 * dt * hi_;
                rhs[j] = Y[i * ny + j] - 0.5 * dt * L2u[i * ny + j];
            }
            detail::solve_tridiagonal(A, B, C, rhs, scratch, line);
            for (int j = 0; j < ny; ++j) Y[i * ny + j] = line[j];
        }

        u.swap(Y);
    }
    return u;
}

} // namespace dbond
