#pragma once

// Blockade arithmetic and ensemble geometry: blockade radius, mean
// blockade-sphere occupancy, principal-quantum-number scaling and
// Gaussian-beam intensity averaging of spectra.

#include "observables.hpp"

#include <functional>

namespace rydeit {

struct EnsembleSpec {
    double density = 0.0;         // atoms / um^3
    double length_l = 1400.0;     // cloud extent along probe, um
    double probe_waist = 12.0;    // 1/e^2 radius, um
    double coupling_waist = 66.0; // 1/e^2 radius, um
    int n_principal = 60;

    void validate() const
    {
        if (density < 0 || length_l <= 0 || probe_waist <= 0 || coupling_waist <= 0 ||
            n_principal < 1)
            throw SpecError("EnsembleSpec: all fields must be positive");
    }
};

/// r_b = (|C6| / Omega_c)^(1/6); both arguments angular MHz (and um^6).
inline double blockade_radius(double c6_magnitude, double omega_c)
{
    if (c6_magnitude <= 0.0 || omega_c <= 0.0)
        throw std::invalid_argument("blockade_radius: inputs must be > 0");
    return std::pow(c6_magnitude / omega_c, 1.0 / 6.0);
}

/// Mean atoms per blockade sphere, density in um^-3, r_b in um.
inline double mean_occupancy(double density, double r_b)
{
    if (density < 0.0 || r_b <= 0.0)
        throw std::invalid_argument("mean_occupancy: invalid inputs");
    return density * (4.0 / 3.0) * std::numbers::pi * r_b * r_b * r_b;
}

/// Blockade-sphere occupancy ratio (n1/n2)^6.25.
inline double n_scaling_ratio(int n1, int n2)
{
    if (n1 < 1 || n2 < 1)
        throw std::invalid_argument("n_scaling_ratio: principal quantum numbers must be >= 1");
    return std::pow(static_cast<double>(n1) / n2, 6.25);
}

/// C6 scaling with principal quantum number, C6(n) = C6(ref) (n/ref)^11.
inline double scale_c6(double c6_ref, int n_ref, int n)
{
    return c6_ref * std::pow(static_cast<double>(n) / n_ref, 11.0);
}

/// Coupling Rabi scaling with principal quantum number (dipole matrix
/// element ~ n^-3/2), so occupancy scales as n^6.25.
inline double scale_omega_c(double omega_c_ref, int n_ref, int n)
{
    return omega_c_ref * std::pow(static_cast<double>(n_ref) / n, 1.5);
}

/// Intensity-weighted average over `shells` equal-power annuli of a
/// Gaussian probe beam. The local probe Rabi in annulus k (power-fraction
/// midpoint p) is Omega_peak sqrt(1 - p); transmissions are averaged with
/// equal power weight and absorption recovered as -ln(T)/od0.
inline Spectrum beam_average(const std::function<Spectrum(double)>& spectrum_fn,
                             double omega_p_peak, double probe_waist, int shells,
                             double od0)
{
    if (shells < 1)
        throw std::invalid_argument("beam_average: shells must be >= 1");
    (void)probe_waist;  // equal-power annuli make the waist drop out

    std::vector<Spectrum> parts;
    parts.reserve(shells);
    for (int k = 0; k < shells; ++k) {
        const double p = (k + 0.5) / shells;
        parts.push_back(spectrum_fn(omega_p_peak * std::sqrt(1.0 - p)));
    }
    Spectrum out = parts.front();
    for (size_t i = 0; i < out.points.size(); ++i) {
        double t_sum = 0.0;
        for (const Spectrum& s : parts) {
            if (s.points.size() != out.points.size())
                throw std::invalid_argument("beam_average: spectra must share the grid");
            t_sum += s.points[i].T;
        }
        const double t_avg = t_sum / shells;
        out.points[i].T = t_avg;
        out.points[i].a = od0 > 0 ? -std::log(t_avg) / od0 : 0.0;
    }
    return out;
}

}  // namespace rydeit
