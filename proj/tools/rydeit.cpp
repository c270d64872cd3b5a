// Command-line front end: config-driven spectra, named experiment scans,
// lineshape fitting of ingested CSV data and blockade arithmetic.
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure,
// 4 fit failure.

#include <rydeit/rydeit.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>

namespace {

using namespace rydeit;

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitFit = 4;

const std::vector<std::string>& ensemble_config_keys()
{
    static const std::vector<std::string> keys = {
        "density_cm3", "length_um", "probe_waist_um", "coupling_waist_um", "n_principal"};
    return keys;
}

bool known_key(const std::string& key)
{
    for (const auto& k : system_config_keys())
        if (k == key)
            return true;
    for (const auto& k : ensemble_config_keys())
        if (k == key)
            return true;
    return false;
}

std::string config_key_help()
{
    std::ostringstream os;
    os << "Config keys (flat `key = value`, frequencies in plain MHz):\n ";
    for (const auto& k : system_config_keys())
        os << " " << k;
    os << "\n ";
    for (const auto& k : ensemble_config_keys())
        os << " " << k;
    return os.str();
}

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    bool svg = false;
};

void add_common(CLI::App* cmd, CommonOpts& c)
{
    cmd->add_option("--config", c.config_path, "Flat key=value config file");
    cmd->add_option("--override", c.overrides,
                    "Override a config key, e.g. --override omega_p_mhz=1.0 (repeatable)");
    const char* env_out = std::getenv("RYDEIT_OUT");
    c.out_dir = env_out ? env_out : ".";
    cmd->add_option("--out", c.out_dir, "Output directory")->capture_default_str();
    cmd->add_flag("--svg", c.svg, "Also emit a minimal SVG line plot");
}

ConfigMap resolve_config(const CommonOpts& c, const ConfigMap& defaults = {})
{
    ConfigMap cfg = defaults;
    if (!c.config_path.empty())
        for (auto& [k, v] : load_config(c.config_path)) {
            if (!known_key(k))
                throw ConfigError("unknown config key: " + k);
            cfg[k] = v;
        }
    for (const auto& ov : c.overrides) {
        const size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override must be key=value: " + ov);
        const std::string key = trim(ov.substr(0, eq));
        if (!known_key(key))
            throw ConfigError("unknown override key: " + key);
        cfg[key] = trim(ov.substr(eq + 1));
    }
    return cfg;
}

EnsembleSpec ensemble_from_config(const ConfigMap& cfg)
{
    EnsembleSpec e;
    auto get = [&](const char* key) -> const std::string* {
        auto it = cfg.find(key);
        return it == cfg.end() ? nullptr : &it->second;
    };
    if (auto* v = get("density_cm3")) e.density = cm3_to_um3(to_double("density_cm3", *v));
    if (auto* v = get("length_um")) e.length_l = to_double("length_um", *v);
    if (auto* v = get("probe_waist_um")) e.probe_waist = to_double("probe_waist_um", *v);
    if (auto* v = get("coupling_waist_um"))
        e.coupling_waist = to_double("coupling_waist_um", *v);
    if (auto* v = get("n_principal")) {
        const double n = to_double("n_principal", *v);
        if (n < 1 || n != std::floor(n))
            throw ConfigError("n_principal must be a positive integer");
        e.n_principal = static_cast<int>(n);
    }
    e.validate();
    return e;
}

std::vector<double> parse_mhz_list(const std::string& csv)
{
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty())
            out.push_back(mhz_to_angular(to_double("list", trim(item))));
    if (out.empty())
        throw ConfigError("empty frequency list");
    return out;
}

std::vector<int> parse_int_list(const std::string& csv)
{
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty())
            out.push_back(static_cast<int>(to_double("list", trim(item))));
    if (out.empty())
        throw ConfigError("empty list");
    return out;
}

std::string now_string()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%d %H:%M:%S", std::gmtime(&t));
    return buf;
}

// Fig.-4-style defaults used when the scans are run without a config file.
ConfigMap scan_defaults()
{
    return {{"omega_c_mhz", "3.8"},
            {"v_mhz", "15"},
            {"gamma_probe_mhz", "0.2"},
            {"gamma_rel_mhz", "0.11"}};
}

void write_named_spectrum(const std::string& dir, const std::string& name,
                          const Spectrum& sp, const std::string& params, bool svg,
                          double od0)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const std::string path = (fs::path(dir) / (name + ".csv")).string();
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    write_spectrum_csv(f, sp, "experiment=" + name + " params=" + params);
    std::cout << "wrote " << path << "\n";
    if (svg) {
        ExperimentReport rep;
        rep.name = name;
        Curve c;
        c.label = name;
        c.columns = {"detuning_mhz", "transmission"};
        for (const auto& pt : sp.points)
            c.rows.push_back({angular_to_mhz(pt.delta_p), pt.T});
        rep.curves.push_back(std::move(c));
        const std::string spath = (fs::path(dir) / (name + ".svg")).string();
        std::ofstream sf(spath);
        write_svg(sf, rep);
        std::cout << "wrote " << spath << "\n";
    }
    (void)od0;
}

int run(int argc, char** argv)
{
    CLI::App app{"rydeit: three-level Rydberg-EIT master-equation simulator\n\n" +
                 config_key_help()};
    app.require_subcommand(1);

    // --- spectrum ---
    auto* sp_cmd = app.add_subcommand("spectrum", "Steady-state transmission spectrum");
    CommonOpts sp_common;
    add_common(sp_cmd, sp_common);
    double sp_dmin = -20.0, sp_dmax = 20.0;
    int sp_points = 161, sp_shells = 0;
    sp_cmd->add_option("--dmin-mhz", sp_dmin, "Grid start, MHz")->capture_default_str();
    sp_cmd->add_option("--dmax-mhz", sp_dmax, "Grid end, MHz")->capture_default_str();
    sp_cmd->add_option("--points", sp_points, "Grid points")->capture_default_str();
    sp_cmd->add_option("--beam-shells", sp_shells,
                       "Average over N equal-power probe-beam annuli (0 = uniform)")
        ->capture_default_str();

    // --- power-scan ---
    auto* ps_cmd = app.add_subcommand("power-scan", "Resonant OD vs probe Rabi for N=1..3");
    CommonOpts ps_common;
    add_common(ps_cmd, ps_common);
    std::string ps_grid = "0.1,1.0,2.0,3.2", ps_nlist = "1,2,3";
    ps_cmd->add_option("--omega-p-mhz", ps_grid, "Comma list of probe Rabi values, MHz")
        ->capture_default_str();
    ps_cmd->add_option("--n-list", ps_nlist, "Comma list of atom numbers")
        ->capture_default_str();

    // --- density-scan ---
    auto* ds_cmd = app.add_subcommand("density-scan", "Scaled OD vs density, n-contrast");
    CommonOpts ds_common;
    add_common(ds_cmd, ds_common);
    std::string ds_probe = "0.1,3.2", ds_nlist = "60,54";
    int ds_points = 17;
    double ds_lo = 0.75, ds_hi = 3.25;
    ds_cmd->add_option("--probe-mhz", ds_probe, "Comma list of probe Rabi values, MHz")
        ->capture_default_str();
    ds_cmd->add_option("--n-list", ds_nlist, "Principal quantum numbers")
        ->capture_default_str();
    ds_cmd->add_option("--points", ds_points, "Densities per curve")->capture_default_str();
    ds_cmd->add_option("--nbar-lo", ds_lo, "Lowest mean occupancy on the auto grid")
        ->capture_default_str();
    ds_cmd->add_option("--nbar-hi", ds_hi, "Highest mean occupancy on the auto grid")
        ->capture_default_str();

    // --- blockade ---
    auto* bl_cmd = app.add_subcommand("blockade", "Blockade radius and mean occupancy");
    CommonOpts bl_common;
    add_common(bl_cmd, bl_common);
    double bl_c6 = 140e3, bl_oc = 4.6, bl_density = 0.0;
    int bl_n = 60;
    bl_cmd->add_option("--c6-mhz-um6", bl_c6, "|C6| at n=60, MHz um^6")->capture_default_str();
    bl_cmd->add_option("--omega-c-mhz", bl_oc, "Coupling Rabi, MHz")->capture_default_str();
    bl_cmd->add_option("--density-cm3", bl_density, "Atomic density, cm^-3")
        ->capture_default_str();
    bl_cmd->add_option("--n", bl_n, "Principal quantum number")->capture_default_str();

    // --- fit ---
    auto* ft_cmd = app.add_subcommand("fit", "Fit an ingested spectrum CSV");
    CommonOpts ft_common;
    add_common(ft_cmd, ft_common);
    std::string ft_csv;
    double ft_window = 3.0, ft_od0 = 1.61, ft_gamma_e = 6.0;
    bool ft_two_level = false;
    ft_cmd->add_option("--csv", ft_csv, "Input CSV (detuning_mhz, transmission)")->required();
    ft_cmd->add_option("--window-mhz", ft_window, "EIT fit window half-width, MHz")
        ->capture_default_str();
    ft_cmd->add_option("--od0", ft_od0, "Optical depth used to recover absorption")
        ->capture_default_str();
    ft_cmd->add_option("--gamma-e-mhz", ft_gamma_e, "Excited-state width for two-level fit")
        ->capture_default_str();
    ft_cmd->add_flag("--two-level", ft_two_level, "Two-level calibration fit instead of EIT dip");

    // --- compare-meanfield ---
    auto* mf_cmd = app.add_subcommand("compare-meanfield",
                                      "Full N-atom model vs mean-field shift model");
    CommonOpts mf_common;
    add_common(mf_cmd, mf_common);
    double mf_nbar = 3.0, mf_dmin = -3.0, mf_dmax = 3.0;
    int mf_points = 121;
    mf_cmd->add_option("--nbar", mf_nbar, "Mean blockade occupancy")->capture_default_str();
    mf_cmd->add_option("--dmin-mhz", mf_dmin, "Grid start, MHz")->capture_default_str();
    mf_cmd->add_option("--dmax-mhz", mf_dmax, "Grid end, MHz")->capture_default_str();
    mf_cmd->add_option("--points", mf_points, "Grid points")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (sp_cmd->parsed()) {
        double od0 = 1.61;
        const ConfigMap cfg = resolve_config(sp_common);
        const SystemSpec spec = spec_from_config(cfg, &od0);
        const EnsembleSpec ens = ensemble_from_config(cfg);
        if (spec.omega_p <= 0.0)
            throw ConfigError("spectrum: probe Rabi omega_p_mhz must be > 0");
        if (sp_points < 2 || sp_dmax <= sp_dmin)
            throw ConfigError("spectrum: invalid detuning grid");
        const auto grid =
            linear_grid(mhz_to_angular(sp_dmin), mhz_to_angular(sp_dmax), sp_points);
        Spectrum sp;
        if (sp_shells > 0) {
            sp = beam_average(
                [&](double op) {
                    SystemSpec s = spec;
                    s.omega_p = op;
                    return compute_spectrum(s, grid, od0);
                },
                spec.omega_p, ens.probe_waist, sp_shells, od0);
        } else {
            sp = compute_spectrum(spec, grid, od0);
        }
        std::ostringstream params;
        params << std::setprecision(10) << "n_atoms=" << spec.n_atoms
               << " omega_p_mhz=" << angular_to_mhz(spec.omega_p)
               << " omega_c_mhz=" << angular_to_mhz(spec.omega_c) << " od0=" << od0
               << " beam_shells=" << sp_shells;
        write_named_spectrum(sp_common.out_dir, "spectrum", sp, params.str(), sp_common.svg,
                             od0);
        return 0;
    }

    if (ps_cmd->parsed()) {
        double od0 = 1.61;
        const ConfigMap cfg = resolve_config(ps_common, scan_defaults());
        const SystemSpec spec = spec_from_config(cfg, &od0);
        const auto rep =
            probe_power_scan(spec, parse_mhz_list(ps_grid), parse_int_list(ps_nlist), od0);
        for (const auto& p : write_report(rep, ps_common.out_dir, ps_common.svg, now_string()))
            std::cout << "wrote " << p << "\n";
        return 0;
    }

    if (ds_cmd->parsed()) {
        double od0 = 1.61;
        const ConfigMap cfg = resolve_config(ds_common, scan_defaults());
        const SystemSpec spec = spec_from_config(cfg, &od0);
        DensityScanOptions opt;
        opt.n_list = parse_int_list(ds_nlist);
        opt.probe_mhz.clear();
        for (double w : parse_mhz_list(ds_probe))
            opt.probe_mhz.push_back(angular_to_mhz(w));
        opt.grid_points = ds_points;
        opt.nbar_lo = ds_lo;
        opt.nbar_hi = ds_hi;
        const auto rep = density_scan(spec, opt);
        for (const auto& w : rep.warnings)
            std::cerr << "warning: " << w << "\n";
        for (const auto& s : rep.summary)
            std::cout << s << "\n";
        for (const auto& p : write_report(rep, ds_common.out_dir, ds_common.svg, now_string()))
            std::cout << "wrote " << p << "\n";
        return 0;
    }

    if (bl_cmd->parsed()) {
        const auto rep = blockade_report(mhz_to_angular(std::abs(bl_c6)),
                                         mhz_to_angular(bl_oc), cm3_to_um3(bl_density), bl_n);
        for (const auto& s : rep.summary)
            std::cout << s << "\n";
        return 0;
    }

    if (ft_cmd->parsed()) {
        const Spectrum sp = load_spectrum_csv(ft_csv, ft_od0);
        std::cout << std::setprecision(8);
        if (ft_two_level) {
            const auto fit = fit_two_level(sp, mhz_to_angular(ft_gamma_e));
            std::cout << "od0 = " << fit.od0
                      << "\nomega_eff_mhz = " << angular_to_mhz(fit.omega_eff)
                      << "\nresidual_rms = " << fit.residual_rms << "\n";
        } else {
            const auto fit = fit_eit_resonance(sp, mhz_to_angular(ft_window));
            std::cout << "center_mhz = " << angular_to_mhz(fit.center)
                      << "\nfwhm_mhz = " << angular_to_mhz(fit.fwhm)
                      << "\namplitude = " << fit.amplitude
                      << "\nresidual_rms = " << fit.residual_rms << "\n";
        }
        return 0;
    }

    if (mf_cmd->parsed()) {
        double od0 = 1.61;
        ConfigMap defaults = scan_defaults();
        defaults["n_atoms"] = "3";
        defaults["omega_p_mhz"] = "2.0";
        const ConfigMap cfg = resolve_config(mf_common, defaults);
        const SystemSpec spec = spec_from_config(cfg, &od0);
        if (spec.omega_p <= 0.0)
            throw ConfigError("compare-meanfield: probe Rabi omega_p_mhz must be > 0");
        if (mf_points < 8 || mf_dmax <= mf_dmin)
            throw ConfigError("compare-meanfield: invalid detuning grid");
        const auto grid =
            linear_grid(mhz_to_angular(mf_dmin), mhz_to_angular(mf_dmax), mf_points);

        const Spectrum full = compute_spectrum(spec, grid, od0);
        const MeanFieldResult mf = meanfield_spectrum(spec, mf_nbar, grid, od0);
        if (!mf.all_converged)
            std::cerr << "warning: mean-field fixed point did not converge at every point\n";

        std::ostringstream params;
        params << std::setprecision(10) << "n_atoms=" << spec.n_atoms << " nbar=" << mf_nbar
               << " omega_p_mhz=" << angular_to_mhz(spec.omega_p);
        write_named_spectrum(mf_common.out_dir, "compare_full", full, params.str(),
                             mf_common.svg, od0);
        write_named_spectrum(mf_common.out_dir, "compare_meanfield", mf.spectrum,
                             params.str(), mf_common.svg, od0);

        const auto fit_full = fit_eit_resonance(full);
        const auto fit_mf = fit_eit_resonance(mf.spectrum);
        std::cout << std::setprecision(6) << "full model:  delta = "
                  << angular_to_mhz(fit_full.center) << " MHz, fwhm = "
                  << angular_to_mhz(fit_full.fwhm) << " MHz\n"
                  << "mean-field:  delta = " << angular_to_mhz(fit_mf.center)
                  << " MHz, fwhm = " << angular_to_mhz(fit_mf.fwhm) << " MHz\n";
        return 0;
    }

    return kExitConfig;  // unreachable with require_subcommand(1)
}

}  // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SpecError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const FitError& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return kExitFit;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
