#include <doctest.h>

#include <rydeit/dynamics.hpp>
#include <rydeit/model.hpp>

using namespace rydeit;

namespace {

Matrix ground_state(int n_atoms)
{
    const long d = dim_for_atoms(n_atoms);
    Matrix rho = Matrix::Zero(d, d);
    rho(0, 0) = 1.0;
    return rho;
}

}  // namespace

TEST_CASE("two-level steady state matches the weak-probe coherence")
{
    SystemSpec s;
    s.omega_p = mhz_to_angular(0.1);
    s.gamma_r = mhz_to_angular(1e-6);  // keeps the decoupled |r> from degenerating the kernel
    const Matrix sigma = steady_state(build_liouvillian(s));
    // Im rho_eg = -Omega_p / Gamma_e in the weak resonant limit
    CHECK(sigma(kE, kG).imag() ==
          doctest::Approx(-s.omega_p / s.gamma_e).epsilon(5e-3));
    CHECK(check_state(sigma).ok());
}

TEST_CASE("single-atom EIT is perfectly transparent without dephasing")
{
    SystemSpec s;
    s.omega_p = mhz_to_angular(0.5);
    s.omega_c = mhz_to_angular(3.8);
    const Matrix sigma = steady_state(build_liouvillian(s));
    CHECK(sigma(kE, kE).real() < 1e-8);
    CHECK(check_state(sigma).ok());
}

TEST_CASE("steady state is a fixed point of the flow")
{
    SystemSpec s;
    s.omega_p = mhz_to_angular(1.0);
    s.omega_c = mhz_to_angular(3.8);
    s.gamma_probe = mhz_to_angular(0.2);
    s.gamma_rel = mhz_to_angular(0.11);
    s.delta_p = mhz_to_angular(0.5);
    const Matrix L = build_liouvillian(s);
    const Matrix ss = steady_state(L);
    for (double t : {0.1, 1.0, 10.0})
        CHECK((propagate(L, ss, t) - ss).norm() < 1e-7);
}

TEST_CASE("propagate: identity at t=0 and long-time convergence")
{
    SystemSpec s;
    s.n_atoms = 2;
    s.omega_p = mhz_to_angular(1.0);
    s.omega_c = mhz_to_angular(2.5);
    s.gamma_probe = mhz_to_angular(0.2);
    s.gamma_rel = mhz_to_angular(0.11);
    s.interaction.v = mhz_to_angular(15.0);
    const Matrix L = build_liouvillian(s);

    const Matrix rho0 = ground_state(2);
    CHECK((propagate(L, rho0, 0.0) - rho0).norm() == 0.0);

    const Matrix ss = steady_state(L);
    const Matrix prop = propagate(L, rho0, 150.0);
    CHECK((prop - ss).norm() < 1e-6);
    CHECK(check_state(prop).ok());
    CHECK_THROWS_AS(propagate(L, rho0, -1.0), std::invalid_argument);
}

TEST_CASE("dark state forms")
{
    const Vector gg = dark_state(0.0, mhz_to_angular(1.0));
    CHECK(std::abs(gg(0) - Complex(1.0)) < 1e-12);

    const double w = mhz_to_angular(1.0);
    const Vector eq = dark_state(w, w);
    CHECK(eq(kG * 3 + kG).real() == doctest::Approx(0.5));
    CHECK(eq(kG * 3 + kR).real() == doctest::Approx(-0.5));
    CHECK(eq(kR * 3 + kG).real() == doctest::Approx(-0.5));
    CHECK(eq(kR * 3 + kR).real() == doctest::Approx(0.5));
    CHECK_THROWS_AS(dark_state(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("dark state has no amplitude reachable through |e>")
{
    SystemSpec s;
    s.n_atoms = 2;
    s.omega_p = mhz_to_angular(1.3);
    s.omega_c = mhz_to_angular(2.7);
    const Matrix h = build_hamiltonian(s);  // V=0, two-photon resonance
    const Vector hd = h * dark_state(s.omega_p, s.omega_c);
    for (long idx = 0; idx < 9; ++idx) {
        const bool has_e = idx / 3 == kE || idx % 3 == kE;
        if (has_e)
            CHECK(std::abs(hd(idx)) < 1e-12);
    }
}

TEST_CASE("N=2 steady state reaches the dark state")
{
    SystemSpec s;
    s.n_atoms = 2;
    s.omega_p = mhz_to_angular(1.0);
    s.omega_c = mhz_to_angular(3.8);
    const Matrix sigma = steady_state(build_liouvillian(s));
    const Vector d = dark_state(s.omega_p, s.omega_c);
    const double fidelity = (d.adjoint() * sigma * d)(0).real();
    CHECK(fidelity > 0.999);
}

TEST_CASE("blockade suppresses the doubly excited state")
{
    SystemSpec s;
    s.n_atoms = 2;
    s.omega_p = mhz_to_angular(1.0);
    s.omega_c = mhz_to_angular(3.8);
    const long rr = kR * 3 + kR;

    const double pop_free = steady_state(build_liouvillian(s))(rr, rr).real();
    s.interaction.v = mhz_to_angular(1e4);  // V >> Omega_c
    const double pop_blockaded = steady_state(build_liouvillian(s))(rr, rr).real();
    CHECK(pop_blockaded < 1e-3 * pop_free);
}

TEST_CASE("fixed_V steady state is permutation invariant")
{
    SystemSpec s;
    s.n_atoms = 2;
    s.omega_p = mhz_to_angular(2.0);
    s.omega_c = mhz_to_angular(3.8);
    s.gamma_probe = mhz_to_angular(0.2);
    s.gamma_rel = mhz_to_angular(0.11);
    s.interaction.v = mhz_to_angular(15.0);
    const Matrix sigma = steady_state(build_liouvillian(s));

    Matrix perm = Matrix::Zero(9, 9);
    for (long idx = 0; idx < 9; ++idx)
        perm((idx % 3) * 3 + idx / 3, idx) = 1.0;
    CHECK((perm * sigma * perm.transpose() - sigma).norm() < 1e-9);
}

TEST_CASE("degenerate kernel is diagnosed, not silently solved")
{
    // With the coupling off and no Rydberg decay, |r><r| is invariant:
    // the Liouvillian kernel is two-dimensional.
    SystemSpec s;
    s.omega_p = mhz_to_angular(0.5);
    s.omega_c = 0.0;
    try {
        steady_state(build_liouvillian(s));
        FAIL("expected NonUniqueSteadyState");
    } catch (const NonUniqueSteadyState& e) {
        CHECK(e.null_space_dim == 2);
    }
}

TEST_CASE("state invariant checks flag bad matrices")
{
    Matrix rho = Matrix::Zero(3, 3);
    rho(0, 0) = 1.2;  // trace off
    CHECK_FALSE(check_state(rho).ok());
    rho(0, 0) = 1.0;
    CHECK(check_state(rho).ok());
    rho(0, 1) = 0.9;  // breaks Hermiticity and positivity
    CHECK_FALSE(check_state(rho).ok());
}
