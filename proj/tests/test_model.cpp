#include <doctest.h>

#include <rydeit/dynamics.hpp>
#include <rydeit/model.hpp>

#include <Eigen/Eigenvalues>

#include <sstream>

using namespace rydeit;

namespace {

SystemSpec base_spec()
{
    SystemSpec s;
    s.omega_p = mhz_to_angular(1.0);
    s.omega_c = mhz_to_angular(3.8);
    return s;
}

}  // namespace

TEST_CASE("single-atom Hamiltonian convention")
{
    SystemSpec s;
    s.gamma_e = 0.0;
    CHECK(single_atom_hamiltonian(s).norm() == 0.0);

    s.delta_p = mhz_to_angular(2.0);
    const Matrix h = single_atom_hamiltonian(s);
    CHECK(h(kG, kG) == Complex(0.0));
    CHECK(h(kE, kE).real() == doctest::Approx(-mhz_to_angular(2.0)));
    CHECK(h(kR, kR).real() == doctest::Approx(-mhz_to_angular(2.0)));

    SystemSpec s2;
    s2.omega_p = mhz_to_angular(1.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(single_atom_hamiltonian(s2));
    CHECK(es.eigenvalues()(0) == doctest::Approx(-mhz_to_angular(0.5)));
    CHECK(es.eigenvalues()(1) == doctest::Approx(0.0));
    CHECK(es.eigenvalues()(2) == doctest::Approx(mhz_to_angular(0.5)));
}

TEST_CASE("N-atom Hamiltonian: pair term and limits")
{
    SystemSpec s = base_spec();
    s.n_atoms = 2;
    s.delta_p = mhz_to_angular(1.5);
    s.delta_c = mhz_to_angular(-0.5);
    s.interaction.v = mhz_to_angular(15.0);
    const Matrix h = build_hamiltonian(s);
    const long rr = kR * 3 + kR;
    CHECK(h(rr, rr).real() ==
          doctest::Approx(-2.0 * (s.delta_p + s.delta_c) + s.interaction.v));
    CHECK((h - h.adjoint()).norm() < 1e-12 * h.norm());

    SystemSpec s1 = base_spec();
    CHECK((build_hamiltonian(s1) - single_atom_hamiltonian(s1)).norm() == 0.0);
}

TEST_CASE("positions mode: -C6/R^6 pair shift")
{
    SystemSpec s = base_spec();
    s.n_atoms = 2;
    s.interaction.mode = InteractionMode::Positions;
    s.interaction.c6 = -mhz_to_angular(140e3);
    s.interaction.positions = {{0, 0, 0}, {5.6, 0, 0}};
    const double shift = pair_shift(s.interaction, 1, 2);
    CHECK(shift == doctest::Approx(mhz_to_angular(4.54)).epsilon(2e-3));

    // coincident and miscounted positions rejected
    s.interaction.positions = {{0, 0, 0}, {0, 0, 0}};
    CHECK_THROWS_AS(build_hamiltonian(s), SpecError);
    s.interaction.positions = {{0, 0, 0}};
    CHECK_THROWS_AS(build_hamiltonian(s), SpecError);
}

TEST_CASE("fixed_V and positions modes agree on matched geometry")
{
    SystemSpec sv = base_spec();
    sv.n_atoms = 3;
    sv.interaction.v = mhz_to_angular(15.0);

    SystemSpec sp = sv;
    sp.interaction.mode = InteractionMode::Positions;
    sp.interaction.c6 = -mhz_to_angular(140e3);
    const double r = std::pow(140e3 / 15.0, 1.0 / 6.0);  // equilateral side with -C6/R^6 = V
    sp.interaction.positions = {{0, 0, 0}, {r, 0, 0}, {r / 2, r * std::sqrt(3.0) / 2, 0}};

    const Matrix hv = build_hamiltonian(sv);
    const Matrix hp = build_hamiltonian(sp);
    CHECK((hv - hp).norm() < 1e-10 * hv.norm());
}

TEST_CASE("fixed_V Hamiltonian is permutation invariant")
{
    SystemSpec s = base_spec();
    s.n_atoms = 3;
    s.delta_p = mhz_to_angular(0.7);
    s.interaction.v = mhz_to_angular(15.0);
    const Matrix h = build_hamiltonian(s);

    // swap atoms 1 and 3: permute base-3 digits of the index
    const long d = dim_for_atoms(3);
    Matrix perm = Matrix::Zero(d, d);
    for (long idx = 0; idx < d; ++idx) {
        const long a1 = idx / 9, a2 = (idx / 3) % 3, a3 = idx % 3;
        perm(a3 * 9 + a2 * 3 + a1, idx) = 1.0;
    }
    CHECK((perm * h * perm.transpose() - h).norm() == 0.0);
}

TEST_CASE("collapse operator inventory")
{
    SystemSpec s;
    s.omega_p = mhz_to_angular(0.1);
    auto ops = collapse_operators(s);  // only Gamma_e is on by default
    REQUIRE(ops.size() == 1);
    CHECK(ops[0].norm() == doctest::Approx(std::sqrt(kTwoPi * 6.0)));

    s.n_atoms = 2;
    s.gamma_r = mhz_to_angular(0.01);
    s.gamma_probe = mhz_to_angular(0.2);
    s.gamma_rel = mhz_to_angular(0.11);
    CHECK(collapse_operators(s).size() == 8);
}

TEST_CASE("probe-linewidth dephasing decays the g-e coherence at gamma_probe/2")
{
    // gamma_probe is stored as the Lorentzian FWHM contribution; the
    // collapse operator sqrt(gamma) P_ee decays off-diagonals at gamma/2.
    SystemSpec s;
    s.omega_p = 0.0;
    s.gamma_e = 0.0;
    s.gamma_probe = mhz_to_angular(0.8);
    const Matrix L = build_liouvillian(s);
    Matrix rho = Matrix::Zero(3, 3);
    rho(kG, kG) = 0.5;
    rho(kE, kE) = 0.5;
    rho(kG, kE) = 0.5;
    rho(kE, kG) = 0.5;
    const double t = 1.0;
    const Matrix out = propagate(L, rho, t);
    CHECK(std::abs(out(kG, kE).real() - 0.5 * std::exp(-s.gamma_probe / 2.0 * t)) < 1e-7);
}

TEST_CASE("config parsing")
{
    std::istringstream in(
        "# comment\n"
        "n_atoms = 2\n"
        "omega_p_mhz = 0.5   # inline comment\n"
        "omega_c_mhz = 3.8\n"
        "v_mhz = 15\n"
        "od0 = 2.0\n");
    const ConfigMap cfg = parse_config(in);
    double od0 = 0.0;
    const SystemSpec s = spec_from_config(cfg, &od0);
    CHECK(s.n_atoms == 2);
    CHECK(s.omega_p == doctest::Approx(mhz_to_angular(0.5)));
    CHECK(s.interaction.v == doctest::Approx(mhz_to_angular(15.0)));
    CHECK(od0 == 2.0);

    double def_od0 = 0.0;
    spec_from_config({}, &def_od0);
    CHECK(def_od0 == 1.61);

    std::istringstream bad("omega_p_mhz\n");
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    CHECK_THROWS_AS(spec_from_config({{"n_atoms", "1.5"}}, nullptr), ConfigError);
    CHECK_THROWS_AS(spec_from_config({{"omega_p_mhz", "abc"}}, nullptr), ConfigError);
    CHECK_THROWS_AS(spec_from_config({{"interaction_mode", "magic"}}, nullptr), ConfigError);
    CHECK_THROWS_AS(spec_from_config({{"gamma_e_mhz", "-1"}}, nullptr), ConfigError);
}

TEST_CASE("positions parsing")
{
    const auto pos = parse_positions("0,0,0; 5.6,0,0 ; 1,2,3");
    REQUIRE(pos.size() == 3);
    CHECK(pos[1].x == 5.6);
    CHECK(pos[2].z == 3.0);
    CHECK_THROWS_AS(parse_positions("1,2"), ConfigError);
    CHECK_THROWS_AS(parse_positions("1,2,3,4"), ConfigError);
}

TEST_CASE("unit conversions")
{
    CHECK(angular_to_mhz(mhz_to_angular(3.7)) == doctest::Approx(3.7));
    CHECK(cm3_to_um3(1.2e10) == doctest::Approx(0.012));
    CHECK(um3_to_cm3(cm3_to_um3(5.5e9)) == doctest::Approx(5.5e9).epsilon(1e-12));
}
