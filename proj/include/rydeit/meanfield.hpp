#pragma once

// Mean-field contrast model: one atom whose two-photon detuning is shifted
// by the self-consistent average interaction (nbar - 1) V rho_rr of its
// neighbors. Produces the shifted/broadened lineshape the full model avoids.

#include "observables.hpp"

namespace rydeit {

struct MeanFieldResult {
    Spectrum spectrum;
    std::vector<double> shift_per_point;  // angular MHz
    std::vector<int> iterations;
    std::vector<bool> converged;
    bool all_converged = true;
};

namespace detail {

/// Single-atom steady state of `spec` with coupling detuning replaced.
inline Matrix single_atom_steady(SystemSpec spec, double delta_c_eff)
{
    spec.n_atoms = 1;
    spec.delta_c = delta_c_eff;
    spec.interaction.mode = InteractionMode::FixedV;
    spec.interaction.v = 0.0;
    return steady_state(build_liouvillian(spec));
}

}  // namespace detail

/// Quasi-static mean-field spectrum: at each probe detuning iterate
///   rho_rr  ->  rho_rr + 0.5 (rho_rr(new) - rho_rr),
///   delta_c_eff = delta_c - (nbar - 1) V rho_rr
/// to a fixed point (tolerance 1e-8, max 500 iterations). Undamped
/// iteration oscillates near the EIT resonance, hence the 0.5 damping.
inline MeanFieldResult meanfield_spectrum(const SystemSpec& spec, double nbar,
                                          const std::vector<double>& delta_grid,
                                          double od0 = 1.61)
{
    if (nbar < 1.0)
        throw SpecError("meanfield_spectrum: nbar must be >= 1");
    validate(spec);
    const double v = spec.interaction.mode == InteractionMode::FixedV
                         ? spec.interaction.v
                         : -spec.interaction.c6;  // positions mode is not meaningful here

    MeanFieldResult out;
    out.spectrum.spec = spec;
    out.spectrum.points.reserve(delta_grid.size());
    for (double delta : delta_grid) {
        SystemSpec point_spec = spec;
        point_spec.delta_p = delta;

        double rho_rr = 0.0;
        Matrix sigma;
        int it = 0;
        bool ok = false;
        for (; it < 500; ++it) {
            sigma = detail::single_atom_steady(point_spec,
                                               spec.delta_c - (nbar - 1.0) * v * rho_rr);
            const double next = sigma(kR, kR).real();
            if (std::abs(next - rho_rr) < 1e-8) {
                rho_rr = next;
                ok = true;
                break;
            }
            rho_rr += 0.5 * (next - rho_rr);
        }
        const double a = normalized_absorption(probe_coherence(sigma, 1), spec.omega_p,
                                               spec.gamma_e);
        out.spectrum.points.push_back({delta, a, transmission(std::max(a, 0.0), od0)});
        out.shift_per_point.push_back((nbar - 1.0) * v * rho_rr);
        out.iterations.push_back(it + 1);
        out.converged.push_back(ok);
        out.all_converged = out.all_converged && ok;
    }
    return out;
}

}  // namespace rydeit
