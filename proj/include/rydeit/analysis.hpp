#pragma once

// Lineshape analysis: damped least squares (Levenberg-Marquardt with a
// numeric Jacobian), EIT dip extraction on a locally-fitted background,
// the two-level calibration fit, and CSV spectrum I/O.

#include "observables.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iomanip>
#include <ostream>

namespace rydeit {

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FitResult {
    double center = 0.0;        // angular MHz
    double fwhm = 0.0;          // angular MHz
    double amplitude = 0.0;     // dip depth in units of the fitted quantity
    double residual_rms = 0.0;  // over the fit window
    Eigen::VectorXd covariance; // diagonal, dip parameters (amplitude, center, fwhm)
};

/// Lorentzian with FWHM parameterization: B (G/2)^2 / ((x-c)^2 + (G/2)^2).
inline double lorentzian(double x, double amp, double center, double fwhm)
{
    const double hw = fwhm / 2.0;
    return amp * hw * hw / ((x - center) * (x - center) + hw * hw);
}

namespace detail {

using FitModel = std::function<double(double, const Eigen::VectorXd&)>;

struct LMOutcome {
    Eigen::VectorXd params;
    Eigen::VectorXd covariance;  // diagonal
    double cost = 0.0;           // sum of squared residuals
};

/// Damped Gauss-Newton with central-difference Jacobian. Throws FitError
/// on non-finite models or a breakdown of the damped step.
inline LMOutcome levenberg_fit(const FitModel& model, const std::vector<double>& xs,
                               const std::vector<double>& ys, Eigen::VectorXd p)
{
    const long m = static_cast<long>(xs.size());
    const long n = p.size();
    if (m < n)
        throw FitError("levenberg_fit: fewer points than parameters");

    auto residuals = [&](const Eigen::VectorXd& q) {
        Eigen::VectorXd r(m);
        for (long i = 0; i < m; ++i)
            r(i) = model(xs[i], q) - ys[i];
        if (!r.allFinite())
            throw FitError("levenberg_fit: model evaluated to a non-finite value");
        return r;
    };

    Eigen::VectorXd r = residuals(p);
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    Eigen::MatrixXd jtj_last;

    for (int iter = 0; iter < 200; ++iter) {
        Eigen::MatrixXd jac(m, n);
        for (long j = 0; j < n; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(p(j)));
            Eigen::VectorXd pp = p, pm = p;
            pp(j) += h;
            pm(j) -= h;
            jac.col(j) = (residuals(pp) - residuals(pm)) / (2.0 * h);
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        jtj_last = jtj;

        bool stepped = false;
        for (int attempt = 0; attempt < 30; ++attempt) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            const Eigen::VectorXd step = damped.ldlt().solve(-jtr);
            const Eigen::VectorXd pnew = p + step;
            const Eigen::VectorXd rnew = residuals(pnew);
            const double cnew = rnew.squaredNorm();
            if (cnew <= cost) {
                const double rel = (cost - cnew) / std::max(cost, 1e-300);
                const double step_rel = step.norm() / std::max(p.norm(), 1e-300);
                p = pnew;
                r = rnew;
                cost = cnew;
                lambda = std::max(lambda / 3.0, 1e-12);
                stepped = true;
                if (rel < 1e-14 || step_rel < 1e-12)
                    iter = 200;  // converged
                break;
            }
            lambda *= 4.0;
        }
        if (!stepped)
            break;  // no descent direction left at any damping
    }

    LMOutcome out;
    out.params = p;
    out.cost = cost;
    out.covariance = Eigen::VectorXd::Zero(n);
    if (m > n) {
        const double sigma2 = cost / static_cast<double>(m - n);
        const Eigen::MatrixXd inv =
            jtj_last.ldlt().solve(Eigen::MatrixXd::Identity(n, n));
        out.covariance = sigma2 * inv.diagonal();
    }
    return out;
}

inline void require_fittable(const Spectrum& spectrum)
{
    if (spectrum.points.size() < 8)
        throw FitError("fit: need at least 8 spectrum points");
    for (size_t i = 1; i < spectrum.points.size(); ++i)
        if (spectrum.points[i].delta_p <= spectrum.points[i - 1].delta_p)
            throw FitError("fit: detunings must be strictly increasing");
}

}  // namespace detail

/// Extract the EIT transparency dip from an absorption spectrum. Within
/// +-window of zero two-photon detuning the dip is located as the deepest
/// deficit below a whole-window Lorentzian envelope (the raw absorption
/// minimum of a narrow dip can sit above the envelope wings at the window
/// edge), then fitted as an inverted Lorentzian on a locally linear
/// background over the region between the absorption maxima that bracket
/// it. Joint dip-plus-curved-background fits are degenerate on EIT
/// lineshapes with Autler-Townes shoulders; the bracketed local fit is not.
inline FitResult fit_eit_resonance(const Spectrum& spectrum,
                                   double window = mhz_to_angular(3.0))
{
    detail::require_fittable(spectrum);
    std::vector<double> x, y;
    for (const auto& pt : spectrum.points) {
        if (std::abs(pt.delta_p) <= window * (1.0 + 1e-9)) {
            x.push_back(pt.delta_p);
            y.push_back(pt.a);
        }
    }
    const size_t n = x.size();
    if (n < 8)
        throw FitError("fit_eit_resonance: fewer than 8 points inside the window");

    auto lor_model = [](double xx, const Eigen::VectorXd& p) {
        return lorentzian(xx, p(0), p(1), p(2));
    };

    // Whole-window envelope, used only to locate the dip.
    size_t imin;
    {
        double ymax = 0.0;
        for (double v : y)
            ymax = std::max(ymax, v);
        Eigen::VectorXd penv(3);
        penv << ymax, 0.0, mhz_to_angular(8.0);
        penv = detail::levenberg_fit(lor_model, x, y, penv).params;
        const size_t margin = std::max<size_t>(1, n / 10);
        imin = margin;
        for (size_t i = margin; i + margin < n; ++i)
            if (lorentzian(x[i], penv(0), penv(1), penv(2)) - y[i] >
                lorentzian(x[imin], penv(0), penv(1), penv(2)) - y[imin])
                imin = i;
    }

    // Fit region: between the absorption maxima bracketing the dip.
    size_t lo = 0, hi = imin;
    for (size_t i = 0; i <= imin; ++i)
        if (y[i] > y[lo])
            lo = i;
    for (size_t i = imin; i < n; ++i)
        if (y[i] > y[hi])
            hi = i;
    if (hi - lo + 1 < 8) {
        lo = imin >= 4 ? imin - 4 : 0;
        hi = std::min(imin + 4, n - 1);
    }
    std::vector<double> fx(x.begin() + lo, x.begin() + hi + 1);
    std::vector<double> fy(y.begin() + lo, y.begin() + hi + 1);

    double level = 0.0;
    for (double v : fy)
        level = std::max(level, v);
    const double depth = std::max(level - y[imin], 1e-12);
    double left = x[imin], right = x[imin];
    for (size_t i = 0; i < fx.size(); ++i)
        if (fy[i] < level - depth / 2.0) {
            left = std::min(left, fx[i]);
            right = std::max(right, fx[i]);
        }
    const double x0 = x[imin];

    // Model: b0 + b1 (x - x0) - Lorentzian(amp, center, fwhm).
    auto dip_model = [x0](double xx, const Eigen::VectorXd& p) {
        return p(0) + p(1) * (xx - x0) - lorentzian(xx, p(2), p(3), p(4));
    };
    Eigen::VectorXd p0(5);
    p0 << level, 0.0, depth, x0, std::max(right - left, mhz_to_angular(0.05));
    const detail::LMOutcome fit = detail::levenberg_fit(dip_model, fx, fy, p0);

    FitResult res;
    res.amplitude = fit.params(2);
    res.center = fit.params(3);
    res.fwhm = std::abs(fit.params(4));
    res.covariance = fit.covariance.tail(3);
    res.residual_rms = std::sqrt(fit.cost / static_cast<double>(fx.size()));
    if (!std::isfinite(res.residual_rms) || res.fwhm <= 0.0)
        throw FitError("fit_eit_resonance: ill-conditioned fit");
    if (res.amplitude <= 3.0 * std::sqrt(std::max(res.covariance(0), 0.0)) &&
        res.amplitude < 1e-6)
        throw FitError("fit_eit_resonance: no dip found (amplitude consistent with zero)");
    return res;
}

struct TwoLevelFit {
    double od0 = 0.0;
    double omega_eff = 0.0;  // angular MHz
    double residual_rms = 0.0;
};

/// Fit T = exp(-od0 * a(delta; omega_eff, gamma_e)) to a coupling-off
/// spectrum; od0 carries the sample geometry, omega_eff the saturation.
inline TwoLevelFit fit_two_level(const Spectrum& spectrum, double gamma_e)
{
    detail::require_fittable(spectrum);
    if (gamma_e <= 0.0)
        throw FitError("fit_two_level: gamma_e must be > 0");

    std::vector<double> x, t;
    double tmin = 1.0;
    for (const auto& pt : spectrum.points) {
        x.push_back(pt.delta_p);
        t.push_back(pt.T);
        tmin = std::min(tmin, pt.T);
    }
    TwoLevelFit res;
    if (1.0 - tmin < 1e-12)
        return res;  // flat spectrum: od0 = 0, omega_eff unidentifiable

    auto model = [gamma_e](double xx, const Eigen::VectorXd& p) {
        return std::exp(-p(0) * two_level_profile(xx, p(1), gamma_e));
    };
    Eigen::VectorXd p0(2);
    p0 << -std::log(std::max(tmin, 1e-12)), 0.3 * gamma_e;
    const auto out = detail::levenberg_fit(model, x, t, p0);
    res.od0 = out.params(0);
    res.omega_eff = std::abs(out.params(1));
    res.residual_rms = std::sqrt(out.cost / static_cast<double>(x.size()));
    if (res.od0 < 0.0)
        throw FitError("fit_two_level: negative optical depth estimate");
    return res;
}

// ---------------------------------------------------------------------------
// CSV spectrum I/O: columns `detuning_mhz, transmission`, header required,
// '#' lines are comments.

inline void write_spectrum_csv(std::ostream& os, const Spectrum& spectrum,
                               const std::string& header_comment = "")
{
    if (!header_comment.empty())
        os << "# " << header_comment << "\n";
    os << "detuning_mhz, transmission\n";
    os << std::setprecision(12);
    for (const auto& pt : spectrum.points)
        os << angular_to_mhz(pt.delta_p) << ", " << pt.T << "\n";
}

inline Spectrum read_spectrum_csv(std::istream& is, double od0 = 1.61)
{
    Spectrum sp;
    sp.measured = true;
    std::string line;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#')
            continue;
        if (!header_seen) {
            if (line.find("detuning_mhz") == std::string::npos ||
                line.find("transmission") == std::string::npos)
                throw FitError("spectrum CSV: missing 'detuning_mhz, transmission' header");
            header_seen = true;
            continue;
        }
        const size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw FitError("spectrum CSV line " + std::to_string(lineno) +
                           ": expected two columns");
        const double d_mhz = to_double("detuning_mhz", trim(line.substr(0, comma)));
        const double t = to_double("transmission", trim(line.substr(comma + 1)));
        if (t <= 0.0 || t > 1.0 + 1e-9)
            throw FitError("spectrum CSV line " + std::to_string(lineno) +
                           ": transmission outside (0, 1]");
        AbsorptionPoint pt;
        pt.delta_p = mhz_to_angular(d_mhz);
        pt.T = t;
        pt.a = od0 > 0.0 ? -std::log(t) / od0 : 0.0;
        sp.points.push_back(pt);
    }
    if (!header_seen)
        throw FitError("spectrum CSV: empty file");
    for (size_t i = 1; i < sp.points.size(); ++i)
        if (sp.points[i].delta_p <= sp.points[i - 1].delta_p)
            throw FitError("spectrum CSV: detunings must be strictly increasing");
    return sp;
}

inline Spectrum load_spectrum_csv(const std::string& path, double od0 = 1.61)
{
    std::ifstream f(path);
    if (!f)
        throw FitError("cannot open spectrum CSV: " + path);
    return read_spectrum_csv(f, od0);
}

/// Uniform grid helper, inclusive endpoints, angular MHz in = angular out.
inline std::vector<double> linear_grid(double lo, double hi, int n)
{
    if (n < 2 || hi <= lo)
        throw std::invalid_argument("linear_grid: need n >= 2 and hi > lo");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * i / (n - 1);
    return g;
}

}  // namespace rydeit
