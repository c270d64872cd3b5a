#pragma once

// Measured quantities: summed probe coherence, normalized absorption,
// Beer-Lambert transmission and the analytic saturating two-level profile
// used as the calibration oracle.

#include "dynamics.hpp"
#include "model.hpp"

#include <vector>

namespace rydeit {

struct AbsorptionPoint {
    double delta_p = 0.0;  // angular MHz
    double a = 0.0;        // normalized absorption, 1 = weak resonant two-level
    double T = 1.0;        // transmission
};

struct Spectrum {
    std::vector<AbsorptionPoint> points;
    SystemSpec spec;
    bool measured = false;  // true for ingested data, spec is then nominal
};

/// Mean per-atom probe coherence: (1/N) sum_i tr(sigma |g><e|_i).
inline Complex probe_coherence(const Matrix& sigma, int n_atoms)
{
    if (sigma.rows() != dim_for_atoms(n_atoms))
        throw std::invalid_argument("probe_coherence: dimension mismatch");
    Complex total = 0.0;
    for (int s = 1; s <= n_atoms; ++s)
        total += (sigma * kron_embed(ket_bra(kG, kE), s, n_atoms)).trace();
    return total / static_cast<double>(n_atoms);
}

/// a = -(Gamma_e / Omega_p) Im(coherence); positive for absorbing states.
inline double normalized_absorption(Complex coherence, double omega_p, double gamma_e)
{
    if (omega_p <= 0.0)
        throw std::invalid_argument("normalized_absorption: probe Rabi must be > 0");
    return -(gamma_e / omega_p) * coherence.imag();
}

/// Beer-Lambert closure T = exp(-od0 * a).
inline double transmission(double a, double od0)
{
    if (od0 < 0.0)
        throw std::invalid_argument("transmission: negative optical depth");
    return std::exp(-od0 * a);
}

/// Saturating Lorentzian of the steady-state two-level atom, scaled so the
/// weak resonant response is 1.
inline double two_level_profile(double delta_p, double omega_eff, double gamma_e)
{
    if (gamma_e <= 0.0)
        throw std::invalid_argument("two_level_profile: gamma_e must be > 0");
    const double g24 = gamma_e * gamma_e / 4.0;
    return g24 / (delta_p * delta_p + g24 + omega_eff * omega_eff / 2.0);
}

/// Steady-state normalized absorption of `spec` at its stored detuning.
inline double resonant_absorption(const SystemSpec& spec)
{
    const Matrix sigma = steady_state(build_liouvillian(spec));
    return normalized_absorption(probe_coherence(sigma, spec.n_atoms), spec.omega_p,
                                 spec.gamma_e);
}

/// Point-by-point quasi-static spectrum over a probe-detuning grid
/// (angular MHz).
inline Spectrum compute_spectrum(const SystemSpec& spec, const std::vector<double>& delta_grid,
                                 double od0)
{
    Spectrum out;
    out.spec = spec;
    out.points.reserve(delta_grid.size());
    SystemSpec point_spec = spec;
    for (double delta : delta_grid) {
        point_spec.delta_p = delta;
        const double a = resonant_absorption(point_spec);
        out.points.push_back({delta, a, transmission(std::max(a, 0.0), od0)});
    }
    return out;
}

/// Coupling-off (two-level) reference with the same probe drive. A
/// negligible Rydberg drain keeps the steady state unique after the
/// coupling laser decouples |r>.
inline SystemSpec coupling_off(const SystemSpec& spec)
{
    SystemSpec ref = spec;
    ref.omega_c = 0.0;
    ref.n_atoms = 1;
    ref.interaction.v = 0.0;
    if (ref.gamma_r <= 0.0)
        ref.gamma_r = mhz_to_angular(1e-6);
    return ref;
}

}  // namespace rydeit
