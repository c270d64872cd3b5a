#include <doctest.h>

#include <rydeit/experiments.hpp>

#include <sstream>

using namespace rydeit;

namespace {

SystemSpec scan_spec()
{
    SystemSpec s;
    s.omega_c = mhz_to_angular(3.8);
    s.gamma_probe = mhz_to_angular(0.2);
    s.gamma_rel = mhz_to_angular(0.11);
    s.interaction.v = mhz_to_angular(15.0);
    return s;
}

}  // namespace

TEST_CASE("blockade report arithmetic")
{
    const auto strong = blockade_report(mhz_to_angular(140e3), mhz_to_angular(4.6),
                                        cm3_to_um3(1.2e10));
    CHECK(strong.metric("r_b_um") == doctest::Approx(5.6).epsilon(0.01));
    CHECK(strong.metric("nbar") == doctest::Approx(8.8).epsilon(0.02));

    const auto few = blockade_report(mhz_to_angular(140e3), mhz_to_angular(3.8),
                                     cm3_to_um3(0.35e10));
    CHECK(few.metric("r_b_um") == doctest::Approx(5.77).epsilon(0.01));
    CHECK(few.metric("nbar") == doctest::Approx(2.8).epsilon(0.03));

    CHECK(blockade_report(mhz_to_angular(140e3), mhz_to_angular(4.6), 0.0).metric("nbar") ==
          0.0);

    // n-rescaled C6 halves the report's radius sixth-power-wise
    const auto n54 = blockade_report(mhz_to_angular(140e3), mhz_to_angular(4.6),
                                     cm3_to_um3(1.2e10), 54);
    CHECK(n54.metric("c6_n_mhz_um6") ==
          doctest::Approx(140e3 * std::pow(54.0 / 60.0, 11.0)).epsilon(1e-9));
}

TEST_CASE("probe power scan: weak-probe N-independence")
{
    const SystemSpec s = scan_spec();
    const std::vector<double> grid = {mhz_to_angular(0.02)};
    const auto rep = probe_power_scan(s, grid, {1, 2}, 1.61);
    REQUIRE(rep.curves.size() == 2);
    const double od1 = rep.curves[0].rows[0][1];
    const double od2 = rep.curves[1].rows[0][1];
    CHECK(std::abs(od1 - od2) / od1 < 0.02);
    CHECK_THROWS_AS(probe_power_scan(s, grid, {4}), SpecError);
    CHECK_THROWS_AS(probe_power_scan(s, {}, {1}), SpecError);
}

TEST_CASE("density scan: rounding, clamping and metrics")
{
    DensityScanOptions opt;
    opt.n_list = {60};
    opt.probe_mhz = {3.2};
    opt.grid_points = 7;
    opt.nbar_hi = 4.0;  // forces the clamp-at-3 path
    const auto rep = density_scan(scan_spec(), opt);
    REQUIRE(rep.curves.size() == 1);
    const Curve& c = rep.curves[0];
    REQUIRE(c.rows.size() == 7);
    for (const auto& row : c.rows) {
        const double nbar = row[1];
        const double atoms = row[2];
        CHECK(atoms >= 1.0);
        CHECK(atoms <= 3.0);
        if (nbar < 3.4)  // below the clamp region: nearest integer, ties up
            CHECK(atoms == doctest::Approx(std::floor(nbar + 0.5)));
    }
    CHECK(!rep.warnings.empty());  // nbar > 3.5 rows were clamped
    CHECK(rep.metric("exponent_p3.2_n60") > 0.0);
}

TEST_CASE("curve CSV format and determinism")
{
    const auto rep = blockade_report(mhz_to_angular(140e3), mhz_to_angular(4.6),
                                     cm3_to_um3(1.2e10));
    std::ostringstream a, b;
    write_curve_csv(a, rep, rep.curves[0]);
    write_curve_csv(b, rep, rep.curves[0]);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("# experiment=blockade params=", 0) == 0);
    CHECK(a.str().find("r_b_um, nbar, c6_n_mhz_um6") != std::string::npos);
}

TEST_CASE("summary and SVG writers")
{
    const auto rep = blockade_report(mhz_to_angular(140e3), mhz_to_angular(4.6),
                                     cm3_to_um3(1.2e10));
    std::ostringstream sum;
    write_summary(sum, rep, "2026-01-01 00:00:00");
    CHECK(sum.str().find("experiment: blockade") != std::string::npos);
    CHECK(sum.str().find("2026-01-01") != std::string::npos);

    ExperimentReport plot;
    plot.name = "demo";
    Curve c;
    c.label = "line";
    c.columns = {"x", "y"};
    for (int i = 0; i <= 10; ++i)
        c.rows.push_back({static_cast<double>(i), i * 0.1});
    plot.curves.push_back(c);
    std::ostringstream svg;
    write_svg(svg, plot);
    CHECK(svg.str().rfind("<svg", 0) == 0);
    CHECK(svg.str().find("<polyline") != std::string::npos);
    CHECK(svg.str().find("</svg>") != std::string::npos);
}
