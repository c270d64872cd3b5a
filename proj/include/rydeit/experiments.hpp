#pragma once

// Scripted experiment pipelines over the model/ensemble/analysis modules:
// resonant-OD probe-power scans, density scaling with principal-quantum-
// number contrast, and blockade arithmetic reports. Outputs are plain
// structures that the writers below serialize deterministically.

#include "analysis.hpp"
#include "ensemble.hpp"

#include <filesystem>
#include <sstream>

namespace rydeit {

struct Curve {
    std::string label;                     // file-name stem
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentReport {
    std::string name;
    std::vector<std::pair<std::string, std::string>> params;  // ordered, deterministic
    std::vector<Curve> curves;
    std::vector<std::string> summary;
    std::vector<std::string> warnings;
    std::vector<std::pair<std::string, double>> metrics;  // named scalar results

    double metric(const std::string& key) const
    {
        for (const auto& [k, v] : metrics)
            if (k == key)
                return v;
        throw std::out_of_range("no such metric: " + key);
    }
};

namespace detail {

inline std::string format_number(double v)
{
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

inline std::string params_string(const ExperimentReport& rep)
{
    std::ostringstream os;
    for (size_t i = 0; i < rep.params.size(); ++i)
        os << (i ? " " : "") << rep.params[i].first << "=" << rep.params[i].second;
    return os.str();
}

/// Slope and intercept of an ordinary least-squares line.
inline std::pair<double, double> linear_fit(const std::vector<double>& x,
                                            const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300)
        throw FitError("linear_fit: degenerate abscissae");
    const double slope = (n * sxy - sx * sy) / denom;
    return {slope, (sy - slope * sx) / n};
}

}  // namespace detail

/// Resonant optical depth od0 * a(Delta_p = 0) versus probe Rabi for each
/// atom number in `n_list`. `omega_p_grid` in angular MHz.
inline ExperimentReport probe_power_scan(const SystemSpec& spec_base,
                                         const std::vector<double>& omega_p_grid,
                                         const std::vector<int>& n_list, double od0 = 1.61)
{
    validate(spec_base);
    if (omega_p_grid.empty() || n_list.empty())
        throw SpecError("probe_power_scan: empty grid");

    ExperimentReport rep;
    rep.name = "power-scan";
    rep.params = {{"omega_c_mhz", detail::format_number(angular_to_mhz(spec_base.omega_c))},
                  {"v_mhz", detail::format_number(angular_to_mhz(spec_base.interaction.v))},
                  {"od0", detail::format_number(od0)}};

    for (int n : n_list) {
        if (n < 1 || n > 3)
            throw SpecError("probe_power_scan: atom numbers limited to 1..3");
        Curve c;
        c.label = "power_scan_n" + std::to_string(n);
        c.columns = {"omega_p_mhz", "od_resonant", "absorption"};
        SystemSpec spec = spec_base;
        spec.n_atoms = n;
        spec.delta_p = 0.0;
        for (double op : omega_p_grid) {
            spec.omega_p = op;
            const double a = resonant_absorption(spec);
            c.rows.push_back({angular_to_mhz(op), od0 * a, a});
        }
        rep.curves.push_back(std::move(c));
    }
    rep.summary.push_back("resonant OD vs probe Rabi for N = atoms per blockade sphere");
    return rep;
}

struct DensityScanOptions {
    std::vector<int> n_list = {60, 54};
    std::vector<double> probe_mhz = {0.1, 3.2};  // weak, strong (plain MHz)
    int grid_points = 17;
    double nbar_lo = 0.75, nbar_hi = 3.25;  // auto grid spans these occupancies
    std::vector<double> density_grid;       // um^-3; overrides the auto grid
    double c6_ref = mhz_to_angular(140e3);  // |C6| at n_ref, angular MHz um^6
    double omega_c_ref = mhz_to_angular(3.8);
    int n_ref = 60;
};

/// Scaled resonant OD (coupling-on / coupling-off) versus density, for each
/// principal quantum number: C6 and Omega_c are n-scaled, the mean blockade
/// occupancy picks the nearest solvable atom number (ties up, clamped to
/// [1, 3] with a warning), and the density scaling exponent plus the
/// 60S/54S-style gradient ratio are extracted.
inline ExperimentReport density_scan(const SystemSpec& spec_base,
                                     const DensityScanOptions& opt = {})
{
    validate(spec_base);
    if (opt.n_list.empty() || opt.probe_mhz.empty() || opt.grid_points < 3)
        throw SpecError("density_scan: empty scan request");

    ExperimentReport rep;
    rep.name = "density-scan";
    rep.params = {{"v_mhz", detail::format_number(angular_to_mhz(spec_base.interaction.v))},
                  {"n_ref", std::to_string(opt.n_ref)}};

    for (double probe_mhz : opt.probe_mhz) {
        std::map<int, double> gradients;
        for (int n : opt.n_list) {
            const double c6_n = std::abs(scale_c6(opt.c6_ref, opt.n_ref, n));
            const double omega_c_n = scale_omega_c(opt.omega_c_ref, opt.n_ref, n);
            const double r_b = blockade_radius(c6_n, omega_c_n);
            const double sphere = (4.0 / 3.0) * std::numbers::pi * r_b * r_b * r_b;

            std::vector<double> grid = opt.density_grid;
            if (grid.empty())
                grid = linear_grid(opt.nbar_lo / sphere, opt.nbar_hi / sphere,
                                   opt.grid_points);

            SystemSpec spec = spec_base;
            spec.omega_p = mhz_to_angular(probe_mhz);
            spec.omega_c = omega_c_n;
            spec.delta_p = 0.0;
            spec.interaction.mode = InteractionMode::FixedV;

            // Coupling-off reference and the three solvable atom numbers.
            const double a_ref = resonant_absorption(coupling_off(spec));
            std::array<double, 4> scaled{};  // index = atom number
            for (int atoms = 1; atoms <= 3; ++atoms) {
                spec.n_atoms = atoms;
                scaled[atoms] = resonant_absorption(spec) / a_ref;
            }

            Curve c;
            std::ostringstream lbl;
            lbl << "density_scan_n" << n << "_op" << probe_mhz;
            c.label = lbl.str();
            c.columns = {"density_cm3", "nbar", "atoms", "scaled_od"};
            std::vector<double> xs, ys;
            for (double rho : grid) {
                const double nbar = mean_occupancy(rho, r_b);
                int atoms = static_cast<int>(std::floor(nbar + 0.5));  // ties up
                if (atoms < 1)
                    atoms = 1;
                if (atoms > 3) {
                    atoms = 3;
                    rep.warnings.push_back("density " + detail::format_number(um3_to_cm3(rho)) +
                                           " cm^-3: nbar " + detail::format_number(nbar) +
                                           " clamped to 3 atoms");
                }
                c.rows.push_back({um3_to_cm3(rho), nbar, static_cast<double>(atoms),
                                  scaled[atoms]});
                xs.push_back(rho);
                ys.push_back(scaled[atoms]);
            }
            rep.curves.push_back(std::move(c));

            std::vector<double> lx(xs.size()), ly(xs.size());
            for (size_t i = 0; i < xs.size(); ++i) {
                lx[i] = std::log(xs[i]);
                ly[i] = std::log(std::max(ys[i], 1e-300));
            }
            const double exponent = detail::linear_fit(lx, ly).first;
            gradients[n] = detail::linear_fit(xs, ys).first;
            {
                std::ostringstream key;
                key << "p" << probe_mhz << "_n" << n;
                rep.metrics.emplace_back("exponent_" + key.str(), exponent);
                rep.metrics.emplace_back("gradient_" + key.str(), gradients[n]);
            }

            std::ostringstream line;
            line << std::setprecision(6) << "probe " << probe_mhz << " MHz, n=" << n
                 << ": r_b=" << r_b << " um, exponent=" << exponent
                 << ", gradient=" << gradients[n];
            rep.summary.push_back(line.str());
        }
        if (opt.n_list.size() >= 2) {
            const double ratio =
                gradients.at(opt.n_list[0]) / gradients.at(opt.n_list[1]);
            {
                std::ostringstream key;
                key << "gradient_ratio_p" << probe_mhz;
                rep.metrics.emplace_back(key.str(), ratio);
            }
            std::ostringstream line;
            line << std::setprecision(6) << "probe " << probe_mhz << " MHz: gradient ratio "
                 << opt.n_list[0] << "/" << opt.n_list[1] << " = " << ratio;
            rep.summary.push_back(line.str());
        }
    }
    return rep;
}

/// Pure blockade arithmetic: radius, mean occupancy and the C6 value
/// rescaled to the requested principal quantum number (reference n = 60).
inline ExperimentReport blockade_report(double c6_magnitude, double omega_c, double density,
                                        int n_principal = 60, int n_ref = 60)
{
    ExperimentReport rep;
    rep.name = "blockade";
    const double c6_n = std::abs(scale_c6(c6_magnitude, n_ref, n_principal));
    const double r_b = blockade_radius(c6_n, omega_c);
    const double nbar = density > 0.0 ? mean_occupancy(density, r_b) : 0.0;
    rep.params = {{"c6_mhz_um6", detail::format_number(angular_to_mhz(c6_magnitude))},
                  {"omega_c_mhz", detail::format_number(angular_to_mhz(omega_c))},
                  {"density_cm3", detail::format_number(um3_to_cm3(density))},
                  {"n", std::to_string(n_principal)}};
    Curve c;
    c.label = "blockade";
    c.columns = {"r_b_um", "nbar", "c6_n_mhz_um6"};
    c.rows.push_back({r_b, nbar, angular_to_mhz(c6_n)});
    rep.curves.push_back(std::move(c));
    rep.metrics = {{"r_b_um", r_b}, {"nbar", nbar}, {"c6_n_mhz_um6", angular_to_mhz(c6_n)}};
    std::ostringstream line;
    line << std::setprecision(6) << "r_b = " << r_b << " um, nbar = "
         << std::setprecision(2) << nbar;
    rep.summary.push_back(line.str());
    return rep;
}

// ---------------------------------------------------------------------------
// Serialization. Byte-for-byte reproducible given the same report; the
// optional timestamp appears only in the summary header.

inline void write_curve_csv(std::ostream& os, const ExperimentReport& rep, const Curve& c)
{
    os << "# experiment=" << rep.name << " params=" << detail::params_string(rep) << "\n";
    for (size_t i = 0; i < c.columns.size(); ++i)
        os << (i ? ", " : "") << c.columns[i];
    os << "\n";
    for (const auto& row : c.rows) {
        for (size_t i = 0; i < row.size(); ++i)
            os << (i ? ", " : "") << detail::format_number(row[i]);
        os << "\n";
    }
}

inline void write_summary(std::ostream& os, const ExperimentReport& rep,
                          const std::string& timestamp = "")
{
    os << "experiment: " << rep.name;
    if (!timestamp.empty())
        os << "  (" << timestamp << ")";
    os << "\nparams: " << detail::params_string(rep) << "\n";
    for (const auto& w : rep.warnings)
        os << "warning: " << w << "\n";
    for (const auto& s : rep.summary)
        os << s << "\n";
}

/// Minimal static line plot: one polyline per curve using the given column
/// indices, with an axes frame and curve labels.
inline void write_svg(std::ostream& os, const ExperimentReport& rep, int xcol = 0,
                      int ycol = 1)
{
    constexpr double w = 640, h = 420, m = 50;
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (const auto& c : rep.curves)
        for (const auto& r : c.rows) {
            xlo = std::min(xlo, r[xcol]);
            xhi = std::max(xhi, r[xcol]);
            ylo = std::min(ylo, r[ycol]);
            yhi = std::max(yhi, r[ycol]);
        }
    if (xhi <= xlo) xhi = xlo + 1.0;
    if (yhi <= ylo) yhi = ylo + 1.0;
    auto px = [&](double x) { return m + (x - xlo) / (xhi - xlo) * (w - 2 * m); };
    auto py = [&](double y) { return h - m - (y - ylo) / (yhi - ylo) * (h - 2 * m); };

    static const char* palette[] = {"#1b6ca8", "#c0392b", "#27ae60", "#8e44ad", "#d68910"};
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    os << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << w - 2 * m << "\" height=\""
       << h - 2 * m << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << std::setprecision(8);
    int ci = 0;
    for (const auto& c : rep.curves) {
        os << "<polyline fill=\"none\" stroke=\"" << palette[ci % 5] << "\" points=\"";
        for (const auto& r : c.rows)
            os << px(r[xcol]) << "," << py(r[ycol]) << " ";
        os << "\"/>\n";
        os << "<text x=\"" << w - m + 4 << "\" y=\"" << m + 16 * (ci + 1) << "\" fill=\""
           << palette[ci % 5] << "\" font-size=\"11\">" << c.label << "</text>\n";
        ++ci;
    }
    os << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\" "
       << "font-size=\"12\">" << rep.name << "</text>\n";
    os << "</svg>\n";
}

/// Write every curve, the summary and (optionally) an SVG under `dir`.
inline std::vector<std::string> write_report(const ExperimentReport& rep,
                                             const std::string& dir, bool svg = false,
                                             const std::string& timestamp = "")
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> written;
    for (const auto& c : rep.curves) {
        const std::string path = (fs::path(dir) / (c.label + ".csv")).string();
        std::ofstream f(path);
        if (!f)
            throw std::runtime_error("cannot write " + path);
        write_curve_csv(f, rep, c);
        written.push_back(path);
    }
    {
        const std::string path = (fs::path(dir) / (rep.name + "_summary.txt")).string();
        std::ofstream f(path);
        write_summary(f, rep, timestamp);
        written.push_back(path);
    }
    if (svg && !rep.curves.empty()) {
        const std::string path = (fs::path(dir) / (rep.name + ".svg")).string();
        std::ofstream f(path);
        write_svg(f, rep);
        written.push_back(path);
    }
    return written;
}

}  // namespace rydeit
