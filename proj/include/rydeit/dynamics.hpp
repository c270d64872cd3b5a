#pragma once

// Master-equation solvers: unique steady states via a bordered linear
// system, adaptive time propagation (Dormand-Prince 5(4)), and the
// analytic two-atom dark state for cross-validation.

#include "operators.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rydeit {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonUniqueSteadyState : SolverError {
    int null_space_dim;
    explicit NonUniqueSteadyState(int dim)
        : SolverError("steady state is not unique (Liouvillian null space dimension " +
                      std::to_string(dim) + ")"),
          null_space_dim(dim)
    {
    }
};

namespace detail {

inline int liouvillian_kernel_dim(const Matrix& L)
{
    Eigen::FullPivLU<Matrix> lu(L);
    lu.setThreshold(1e-9 * L.norm() / std::sqrt(static_cast<double>(L.rows())));
    return static_cast<int>(lu.dimensionOfKernel());
}

inline Matrix symmetrize_and_normalize(const Matrix& rho_raw)
{
    Matrix rho = 0.5 * (rho_raw + rho_raw.adjoint());
    const Complex tr = rho.trace();
    if (std::abs(tr) < 1e-300)
        throw SolverError("steady state has vanishing trace");
    return rho / tr;
}

}  // namespace detail

/// Solve L vec(sigma) = 0 with trace(sigma) = 1 by replacing one row of L
/// with the trace functional. Residual is checked against 1e-9 * ||L||;
/// a rank-deficient kernel is reported with its dimension.
inline Matrix steady_state(const Matrix& L)
{
    const long d2 = L.rows();
    const long d = static_cast<long>(std::llround(std::sqrt(static_cast<double>(d2))));
    if (d * d != d2 || L.cols() != d2)
        throw std::invalid_argument("steady_state: superoperator must be d^2 x d^2");

    Matrix bordered = L;
    bordered.row(0).setZero();
    for (long i = 0; i < d; ++i)
        bordered(0, i * d + i) = 1.0;  // trace functional on vec, column stacking
    Vector rhs = Vector::Zero(d2);
    rhs(0) = 1.0;

    const Eigen::PartialPivLU<Matrix> lu(bordered);
    // A rank-deficient bordered system still yields zero-residual kernel
    // mixtures; catch it through the collapse of the U diagonal.
    const auto udiag = lu.matrixLU().diagonal().cwiseAbs();
    const bool singular = udiag.minCoeff() < 1e-12 * udiag.maxCoeff();
    Vector v = lu.solve(rhs);
    const double scale = L.norm();
    double resid = v.allFinite() ? (L * v).norm() / std::max(v.norm(), 1e-300) : 1e300;
    if (singular || !v.allFinite() || resid > 1e-9 * scale) {
        // Diagnose before falling back: a multi-dimensional kernel means the
        // trace-bordered system is singular and no unique answer exists.
        const int kdim = detail::liouvillian_kernel_dim(L);
        if (kdim != 1)
            throw NonUniqueSteadyState(kdim);
        v = bordered.colPivHouseholderQr().solve(rhs);
        resid = (L * v).norm() / std::max(v.norm(), 1e-300);
        if (!v.allFinite() || resid > 1e-9 * scale)
            throw SolverError("steady-state solve did not converge (residual " +
                              std::to_string(resid) + ")");
    }
    return detail::symmetrize_and_normalize(unvec(v, d));
}

/// Propagate vec(sigma) through dt = t with embedded Dormand-Prince 5(4),
/// local error per step <= tol (default 1e-9).
inline Matrix propagate(const Matrix& L, const Matrix& sigma0, double t, double tol = 1e-9)
{
    if (t < 0.0)
        throw std::invalid_argument("propagate: negative duration");
    const long d = sigma0.rows();
    if (L.rows() != d * d)
        throw std::invalid_argument("propagate: dimension mismatch");
    if (t == 0.0)
        return sigma0;

    // Dormand-Prince tableau
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    Vector y = vec(sigma0);
    const double lnorm = std::max(L.operatorNorm(), 1e-12);
    double h = std::min(t, 0.1 / lnorm);
    double time = 0.0;
    Vector k1 = L * y;

    int rejected_in_a_row = 0;
    while (time < t) {
        h = std::min(h, t - time);
        if (h < 1e-14 * std::max(t, 1.0))
            throw SolverError("propagate: step size underflow");

        const Vector k2 = L * (y + h * (a21 * k1));
        const Vector k3 = L * (y + h * (a31 * k1 + a32 * k2));
        const Vector k4 = L * (y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vector k5 = L * (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vector k6 = L * (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vector ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vector k7 = L * ynew;
        const double err =
            (h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7)).norm();

        if (err <= tol || h <= 1e-13 * std::max(t, 1.0)) {
            time += h;
            // The exact flow preserves Hermiticity; project out the
            // per-step roundoff drift (costs one extra matvec vs FSAL).
            const Matrix rho = unvec(ynew, d);
            y = vec((0.5 * (rho + rho.adjoint())).eval());
            k1 = L * y;
            rejected_in_a_row = 0;
        } else if (++rejected_in_a_row > 60) {
            throw SolverError("propagate: repeated step rejection");
        }
        const double ratio = err > 0 ? std::pow(tol / err, 0.2) : 5.0;
        h *= std::clamp(0.9 * ratio, 0.2, 5.0);
    }
    return unvec(y, d);
}

/// Two-atom dark state on two-photon resonance:
///   (Oc^2 |gg> - Op Oc (|gr> + |rg>) + Op^2 |rr>) / (Op^2 + Oc^2)
inline Vector dark_state(double omega_p, double omega_c)
{
    const double norm2 = omega_p * omega_p + omega_c * omega_c;
    if (norm2 <= 0.0)
        throw std::invalid_argument("dark_state: Rabi frequencies both zero");
    Vector psi = Vector::Zero(9);
    psi(kG * 3 + kG) = omega_c * omega_c;
    psi(kG * 3 + kR) = -omega_p * omega_c;
    psi(kR * 3 + kG) = -omega_p * omega_c;
    psi(kR * 3 + kR) = omega_p * omega_p;
    return psi / norm2;
}

// --- density-matrix invariant checks ---------------------------------------

struct StateCheck {
    double trace_error;
    double hermiticity_error;
    double min_eigenvalue;
    bool ok(double trace_tol = 1e-9, double herm_tol = 1e-9, double eig_floor = -1e-8) const
    {
        return trace_error < trace_tol && hermiticity_error < herm_tol &&
               min_eigenvalue > eig_floor;
    }
};

inline StateCheck check_state(const Matrix& rho)
{
    StateCheck c{};
    c.trace_error = std::abs(rho.trace() - Complex(1.0, 0.0));
    c.hermiticity_error = (rho - rho.adjoint()).norm();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
    c.min_eigenvalue = es.eigenvalues().minCoeff();
    return c;
}

}  // namespace rydeit
