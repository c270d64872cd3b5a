#pragma once

// Physical model assembly: system parameters, single-atom and N-atom
// Hamiltonians, interaction couplings and the collapse operator set.
//
// Unit conventions (see also README):
//   - all frequencies and rates are stored as angular MHz (2*pi * MHz);
//     config files and the CLI accept plain MHz and convert once at the
//     boundary
//   - lengths are in micrometres, densities in atoms/um^3 internally
//     (cm^-3 accepted at the boundary: 1e10 cm^-3 = 0.01 um^-3)
//   - laser linewidths gamma_probe / gamma_rel are the Lorentzian FWHM of
//     the corresponding (two-photon) line; the induced coherence decay
//     rate is half the stored value, realized by collapse operators
//     sqrt(gamma) P.

#include "operators.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

namespace rydeit {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// MHz <-> angular MHz and density conversions used at every I/O boundary.
inline double mhz_to_angular(double mhz) { return kTwoPi * mhz; }
inline double angular_to_mhz(double w) { return w / kTwoPi; }
inline double cm3_to_um3(double per_cm3) { return per_cm3 * 1e-12; }
inline double um3_to_cm3(double per_um3) { return per_um3 * 1e12; }

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline double distance(const Vec3& a, const Vec3& b)
{
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

enum class InteractionMode { FixedV, Positions };

struct InteractionSpec {
    InteractionMode mode = InteractionMode::FixedV;
    double v = 0.0;           // pair shift, angular MHz (FixedV mode, > 0 = blue)
    double c6 = -mhz_to_angular(140e3);  // angular MHz um^6, signed (60S default)
    std::vector<Vec3> positions;         // um (Positions mode)
};

struct SystemSpec {
    int n_atoms = 1;
    double omega_p = 0.0;   // probe Rabi, angular MHz
    double omega_c = 0.0;   // coupling Rabi, angular MHz
    double delta_p = 0.0;   // probe detuning, angular MHz
    double delta_c = 0.0;   // coupling detuning, angular MHz
    double gamma_e = mhz_to_angular(6.0);  // excited-state width
    double gamma_r = 0.0;                  // Rydberg decay
    double gamma_probe = 0.0;              // probe laser linewidth
    double gamma_rel = 0.0;                // two-photon relative linewidth
    InteractionSpec interaction;
};

struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void validate(const SystemSpec& spec)
{
    if (spec.n_atoms < 1)
        throw SpecError("n_atoms must be >= 1");
    if (spec.gamma_e < 0 || spec.gamma_r < 0 || spec.gamma_probe < 0 || spec.gamma_rel < 0)
        throw SpecError("decay/dephasing rates must be >= 0");
    if (spec.interaction.mode == InteractionMode::Positions) {
        const auto& pos = spec.interaction.positions;
        if (static_cast<int>(pos.size()) != spec.n_atoms)
            throw SpecError("positions mode: need one position per atom");
        for (size_t i = 0; i < pos.size(); ++i)
            for (size_t j = 0; j < i; ++j)
                if (distance(pos[i], pos[j]) <= 0.0)
                    throw SpecError("positions mode: coincident atom positions");
    }
}

/// Rotating-frame single-atom Hamiltonian
///   H = -Delta_p P_ee - (Delta_p + Delta_c) P_rr
///       + (Omega_p/2)(|g><e| + h.c.) + (Omega_c/2)(|e><r| + h.c.)
inline Matrix single_atom_hamiltonian(const SystemSpec& spec)
{
    validate(spec);
    Matrix h = Matrix::Zero(kLevels, kLevels);
    h(kE, kE) = -spec.delta_p;
    h(kR, kR) = -(spec.delta_p + spec.delta_c);
    h(kG, kE) = spec.omega_p / 2.0;
    h(kE, kG) = spec.omega_p / 2.0;
    h(kE, kR) = spec.omega_c / 2.0;
    h(kR, kE) = spec.omega_c / 2.0;
    return h;
}

/// Pair interaction shift between atoms i and j (1-based), angular MHz.
inline double pair_shift(const InteractionSpec& in, int i, int j)
{
    if (in.mode == InteractionMode::FixedV)
        return in.v;
    const double rij = distance(in.positions[i - 1], in.positions[j - 1]);
    const double r6 = std::pow(rij, 6);
    return -in.c6 / r6;
}

/// N-atom Hamiltonian: sum of embedded single-atom terms plus pairwise
/// Rydberg-Rydberg shifts V_ij P_rr^(i) P_rr^(j).
inline Matrix build_hamiltonian(const SystemSpec& spec)
{
    validate(spec);
    const int n = spec.n_atoms;
    const Matrix h1 = single_atom_hamiltonian(spec);
    const long d = dim_for_atoms(n);
    Matrix h = Matrix::Zero(d, d);
    for (int s = 1; s <= n; ++s)
        h += kron_embed(h1, s, n);
    const Matrix prr = projector(kR);
    for (int i = 2; i <= n; ++i)
        for (int j = 1; j < i; ++j)
            h += pair_shift(spec.interaction, i, j) * pairwise_embed(prr, prr, i, j, n);
    return h;
}

/// Rate-absorbed collapse operators, per atom:
///   sqrt(Gamma_e) |g><e|, sqrt(Gamma_r) |g><r| (if Gamma_r > 0),
///   sqrt(gamma_probe) P_ee, sqrt(gamma_rel) P_rr.
/// The projector operators carry half the stored linewidth as coherence
/// decay, matching the Lorentzian-linewidth convention above.
inline std::vector<Matrix> collapse_operators(const SystemSpec& spec)
{
    validate(spec);
    const int n = spec.n_atoms;
    std::vector<Matrix> ops;
    for (int s = 1; s <= n; ++s) {
        if (spec.gamma_e > 0)
            ops.push_back(std::sqrt(spec.gamma_e) * kron_embed(ket_bra(kG, kE), s, n));
        if (spec.gamma_r > 0)
            ops.push_back(std::sqrt(spec.gamma_r) * kron_embed(ket_bra(kG, kR), s, n));
        if (spec.gamma_probe > 0)
            ops.push_back(std::sqrt(spec.gamma_probe) * kron_embed(projector(kE), s, n));
        if (spec.gamma_rel > 0)
            ops.push_back(std::sqrt(spec.gamma_rel) * kron_embed(projector(kR), s, n));
    }
    return ops;
}

inline Matrix build_liouvillian(const SystemSpec& spec)
{
    return liouvillian(build_hamiltonian(spec), collapse_operators(spec));
}

// ---------------------------------------------------------------------------
// Flat key = value config files. Frequencies in plain MHz, converted here.

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using ConfigMap = std::map<std::string, std::string>;

inline std::string trim(const std::string& s)
{
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline ConfigMap parse_config(std::istream& in)
{
    ConfigMap cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        cfg[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
}

inline ConfigMap load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open config file: " + path);
    return parse_config(f);
}

inline double to_double(const std::string& key, const std::string& value)
{
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: '" + value + "'");
    }
}

inline std::vector<Vec3> parse_positions(const std::string& value)
{
    // "x,y,z; x,y,z; ..." in um
    std::vector<Vec3> out;
    std::stringstream ss(value);
    std::string triple;
    while (std::getline(ss, triple, ';')) {
        triple = trim(triple);
        if (triple.empty())
            continue;
        std::stringstream ts(triple);
        std::string comp;
        std::array<double, 3> v{};
        int i = 0;
        while (std::getline(ts, comp, ',')) {
            if (i >= 3)
                throw ConfigError("positions: expected three components per atom");
            v[i++] = to_double("positions", trim(comp));
        }
        if (i != 3)
            throw ConfigError("positions: expected three components per atom");
        out.push_back({v[0], v[1], v[2]});
    }
    return out;
}

inline const std::vector<std::string>& system_config_keys()
{
    static const std::vector<std::string> keys = {
        "n_atoms",       "omega_p_mhz",     "omega_c_mhz", "delta_p_mhz",
        "delta_c_mhz",   "gamma_e_mhz",     "gamma_r_mhz", "gamma_probe_mhz",
        "gamma_rel_mhz", "interaction_mode", "v_mhz",      "c6_mhz_um6",
        "positions_um",  "od0"};
    return keys;
}

/// Build a SystemSpec from config entries; unknown keys that are not
/// ensemble keys are rejected by the CLI layer. `od0` is returned
/// separately since it calibrates the medium, not the atom.
inline SystemSpec spec_from_config(const ConfigMap& cfg, double* od0_out = nullptr)
{
    SystemSpec s;
    auto get = [&](const std::string& key) -> const std::string* {
        auto it = cfg.find(key);
        return it == cfg.end() ? nullptr : &it->second;
    };
    if (auto* v = get("n_atoms")) {
        const double n = to_double("n_atoms", *v);
        if (n < 1 || n != std::floor(n))
            throw ConfigError("n_atoms must be a positive integer");
        s.n_atoms = static_cast<int>(n);
    }
    if (auto* v = get("omega_p_mhz")) s.omega_p = mhz_to_angular(to_double("omega_p_mhz", *v));
    if (auto* v = get("omega_c_mhz")) s.omega_c = mhz_to_angular(to_double("omega_c_mhz", *v));
    if (auto* v = get("delta_p_mhz")) s.delta_p = mhz_to_angular(to_double("delta_p_mhz", *v));
    if (auto* v = get("delta_c_mhz")) s.delta_c = mhz_to_angular(to_double("delta_c_mhz", *v));
    if (auto* v = get("gamma_e_mhz")) s.gamma_e = mhz_to_angular(to_double("gamma_e_mhz", *v));
    if (auto* v = get("gamma_r_mhz")) s.gamma_r = mhz_to_angular(to_double("gamma_r_mhz", *v));
    if (auto* v = get("gamma_probe_mhz"))
        s.gamma_probe = mhz_to_angular(to_double("gamma_probe_mhz", *v));
    if (auto* v = get("gamma_rel_mhz"))
        s.gamma_rel = mhz_to_angular(to_double("gamma_rel_mhz", *v));
    if (auto* v = get("interaction_mode")) {
        if (*v == "fixed_v")
            s.interaction.mode = InteractionMode::FixedV;
        else if (*v == "positions")
            s.interaction.mode = InteractionMode::Positions;
        else
            throw ConfigError("interaction_mode must be 'fixed_v' or 'positions'");
    }
    if (auto* v = get("v_mhz")) s.interaction.v = mhz_to_angular(to_double("v_mhz", *v));
    if (auto* v = get("c6_mhz_um6")) s.interaction.c6 = mhz_to_angular(to_double("c6_mhz_um6", *v));
    if (auto* v = get("positions_um")) s.interaction.positions = parse_positions(*v);
    if (od0_out) {
        *od0_out = 1.61;  // resonant weak-probe OD floor calibration default
        if (auto* v = get("od0")) *od0_out = to_double("od0", *v);
    }
    try {
        validate(s);
    } catch (const SpecError& e) {
        throw ConfigError(e.what());
    }
    return s;
}

}  // namespace rydeit
