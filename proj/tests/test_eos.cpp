#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sspatch/branch.hpp"
#include "sspatch/eos.hpp"

using namespace sspatch;

namespace {
EquationOfState ref_eos() { return EquationOfState::quadratic(0.25, 2.0, 0.5); }
BernoulliConstants ref_consts(const EquationOfState& eos) {
    return sonic_normalized_constants(eos, 0.5);
}
// closed forms for p = rho^2/4, rho_ref = 0.5
double n_exact(double rho) { return 2.25 * rho / (1.0 + rho / 4.0); }
}  // namespace

TEST_CASE("admissibility gate") {
    CHECK_NOTHROW(ref_eos());
    // p(rho) = rho has p'' = 0
    CHECK_THROWS_AS(EquationOfState([](double r) { return r; }, [](double) { return 1.0; },
                                    [](double) { return 0.0; }, 2.0, 0.5),
                    std::invalid_argument);
    // p' must stay below 1 (causality)
    CHECK_THROWS_AS(EquationOfState::quadratic(0.5, 2.0, 0.5), std::invalid_argument);
    // inconsistent derivative table
    CHECK_THROWS_AS(EquationOfState([](double r) { return 0.25 * r * r; },
                                    [](double r) { return 0.6 * r; },
                                    [](double) { return 0.5; }, 2.0, 0.5),
                    std::invalid_argument);
}

TEST_CASE("sound speed closed form") {
    const auto eos = ref_eos();
    CHECK(sound_speed(eos, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(sound_speed(eos, 1.28) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(sound_speed(eos, 1e-8) == doctest::Approx(std::sqrt(5e-9)).epsilon(1e-10));
    CHECK_THROWS_AS(sound_speed(eos, 2.5), std::domain_error);
    CHECK_THROWS_AS(sound_speed(eos, -1.0), std::domain_error);
}

TEST_CASE("number density against the exact integral") {
    const auto eos = ref_eos();
    CHECK(number_density(eos, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(number_density(eos, 1.0) == doctest::Approx(1.8).epsilon(1e-10));
    for (double rho : {0.05, 0.2, 0.7, 1.3, 1.9})
        CHECK(number_density(eos, rho) == doctest::Approx(n_exact(rho)).epsilon(1e-10));
    // n -> 0 towards vacuum
    CHECK(number_density(eos, 1e-6) < 1e-5);
}

TEST_CASE("bernoulli constants and limit speed") {
    const auto eos = ref_eos();
    const auto c = ref_consts(eos);
    CHECK(c.mg_hat == doctest::Approx(lorentz(0.5) * 0.5625).epsilon(1e-13));
    CHECK(c.mg_hat == doctest::Approx(0.64952).epsilon(1e-4));
    // oracle: lim i/n = 4/9, solve gamma(q_hat) = mg_hat * 9/4
    const double g = c.mg_hat * 9.0 / 4.0;
    const double q_hat_exact = std::sqrt(1.0 - 1.0 / (g * g));
    CHECK(c.q_hat == doctest::Approx(q_hat_exact).epsilon(1e-6));
    CHECK(c.q_hat == doctest::Approx(0.7292).epsilon(1e-3));
    CHECK(c.q_hat > 0.0);
    CHECK(c.q_hat < 1.0);
    // mg_hat equal to the vacuum limit gives q_hat = 0
    CHECK(limit_speed_from_mg_hat(eos, eos.enthalpy_per_particle_limit()) ==
          doctest::Approx(0.0));
}

TEST_CASE("bernoulli density") {
    const auto eos = ref_eos();
    const auto c = ref_consts(eos);
    CHECK(bernoulli_density(eos, c, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    // oracle: rho(q) = 4 (1.5 sqrt(mg_hat) (1-q^2)^{1/4} - 1)
    auto rho_exact = [&](double q) {
        return 4.0 * (1.5 * std::sqrt(c.mg_hat) * std::pow(1.0 - q * q, 0.25) - 1.0);
    };
    for (double q : {0.2, 0.4, 0.55, 0.6, 0.7})
        CHECK(bernoulli_density(eos, c, q) == doctest::Approx(rho_exact(q)).epsilon(1e-10));
    CHECK(bernoulli_density(eos, c, 0.6) < 0.5);  // supersonic rarefaction
    // rho -> 0 as q -> q_hat
    CHECK(bernoulli_density(eos, c, c.q_hat * 0.99999) < 0.01);
    CHECK_THROWS_AS(bernoulli_density(eos, c, c.q_hat + 0.01), RootBracketError);
}

TEST_CASE("bernoulli residual along the branch") {
    const auto eos = ref_eos();
    const auto c = ref_consts(eos);
    for (int k = 0; k <= 100; ++k) {
        const double q = 0.05 + (c.q_hat - 0.1) * k / 100.0;
        const double rho = bernoulli_density(eos, c, q);
        const double res =
            lorentz(q) * eos.enthalpy_density(rho) / eos.number_density(rho) - c.mg_hat;
        CHECK(std::abs(res) < 1e-10);
    }
}

TEST_CASE("da/dq closed form and finite differences") {
    const auto eos = ref_eos();
    const auto c = ref_consts(eos);
    const FlowState sonic = state_from_q(eos, c, 0.5);
    CHECK(da_dq(sonic) == doctest::Approx(-0.75).epsilon(1e-10));
    // always negative, matches the slope of a(q) through bernoulli_density
    for (double q : {0.3, 0.45, 0.55, 0.65}) {
        const FlowState s = state_from_q(eos, c, q);
        CHECK(da_dq(s) < 0.0);
        const double h = 1e-6;
        const double ap = eos.sound_speed(bernoulli_density(eos, c, q + h));
        const double am = eos.sound_speed(bernoulli_density(eos, c, q - h));
        const double fd = (ap - am) / (2.0 * h);
        CHECK(da_dq(s) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("pi <-> q maps") {
    const auto eos = ref_eos();
    const auto c = ref_consts(eos);
    CHECK(pi_from_q(eos, c, c.q_sonic) == doctest::Approx(1.0).epsilon(1e-12));
    // strictly decreasing just above sonic
    CHECK(pi_from_q(eos, c, c.q_sonic + 1e-4) < 1.0);
    CHECK(pi_from_q(eos, c, 0.6) < pi_from_q(eos, c, 0.55));
    // round trip on 100 samples
    SplitMix64 rng(12345);
    for (int k = 0; k < 100; ++k) {
        const double q = c.q_sonic + (c.q_hat - 1e-3 - c.q_sonic) * rng.uniform();
        const double pi = pi_from_q(eos, c, q);
        CHECK(q_from_pi(eos, c, pi) == doctest::Approx(q).epsilon(1e-10));
    }
    CHECK_THROWS_AS(q_from_pi(eos, c, 1.5), std::domain_error);
    CHECK_THROWS_AS(q_from_pi(eos, c, 1e-6), std::domain_error);
}

TEST_CASE("monotonicity chain on the supersonic branch") {
    const auto eos = ref_eos();
    const auto c = ref_consts(eos);
    double prev_a = 1e9, prev_M = -1e9, prev_pi = 1e9;
    for (int k = 0; k <= 100; ++k) {
        const double q = c.q_sonic + (c.q_hat * 0.995 - c.q_sonic) * k / 100.0;
        const FlowState s = state_from_q(eos, c, q);
        if (k > 0) {
            CHECK(s.a < prev_a);
            CHECK(s.M > prev_M);
            CHECK(s.pi_var < prev_pi);
        }
        prev_a = s.a;
        prev_M = s.M;
        prev_pi = s.pi_var;
        CHECK(s.M == doctest::Approx(s.gamma * s.q / (s.a * s.gamma_a)).epsilon(1e-13));
        CHECK(s.pi_var == doctest::Approx(1.0 / s.M).epsilon(1e-13));
        CHECK(s.q < c.q_hat);
    }
}

TEST_CASE("f, F1, F2 at the sonic reference state") {
    const auto eos = ref_eos();
    const auto c = ref_consts(eos);
    const FlowState s = state_from_q(eos, c, 0.5);
    const auto k = f_F1_F2(s);
    CHECK(k.f == doctest::Approx(16.0 / 9.0).epsilon(1e-12));
    CHECK(k.F1 == doctest::Approx(7.0 / 3.0).epsilon(1e-12));
    CHECK(k.F2 == doctest::Approx(0.0).epsilon(1e-12));
    // F1 > 0 and F2 = 0 at omega = pi/2 on sampled states
    for (double q : {0.52, 0.6, 0.68}) {
        const auto ks = f_F1_F2(state_from_q(eos, c, q));
        CHECK(ks.F1 > 0.0);
    }
}

TEST_CASE("F2 consistency identity (pure algebra in pi)") {
    const auto eos = ref_eos();
    const auto c = ref_consts(eos);
    // 4 a^2 cos(omega) / F1 == sin(2 omega) * 2 a^2 / (pi F1)
    for (double q : {0.51, 0.55, 0.6, 0.65, 0.7}) {
        const FlowState s = state_from_q(eos, c, q);
        const auto k = f_F1_F2(s);
        const double lhs = 4.0 * s.a * s.a * std::cos(s.omega) / k.F1;
        const double rhs = std::sin(2.0 * s.omega) * 2.0 * s.a * s.a / (s.pi_var * k.F1);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("I(pi): endpoints, monotonicity, derivative") {
    const auto eos = ref_eos();
    const auto c = ref_consts(eos);
    const double k0 = 0.9;  // working Mach-angle floor for this test
    const double s0 = std::sin(k0);
    CHECK(I_of_pi(eos, c, s0, k0) == doctest::Approx(0.0));
    double prev = -1.0;
    for (double pi : {s0 + 0.02, s0 + 0.05, s0 + 0.1, 0.95, 1.0}) {
        const double v = I_of_pi(eos, c, pi, k0);
        CHECK(v > prev);
        prev = v;
    }
    // dI/dpi matches the integrand by central differences
    for (double pi : {s0 + 0.03, s0 + 0.08, 0.97}) {
        const double h = 1e-5;
        const double fd = (I_of_pi(eos, c, pi + h, k0) - I_of_pi(eos, c, pi - h, k0)) / (2 * h);
        const FlowState s = state_from_q(eos, c, q_from_pi(eos, c, pi));
        const auto kk = f_F1_F2(s);
        const double integrand = 2.0 * s.a * s.a / (pi * kk.F1);
        CHECK(fd == doctest::Approx(integrand).epsilon(1e-6));
    }
}

TEST_CASE("F(t): sonic value, positivity, boundedness") {
    const auto eos = ref_eos();
    const auto c = ref_consts(eos);
    CHECK(F_of_t(eos, c, 0.0) == doctest::Approx(7.0 / 3.0).epsilon(1e-12));
    for (double t : {0.05, 0.2, 0.4, 0.6, 0.7}) {
        const double F = F_of_t(eos, c, t);
        CHECK(F > 0.0);
        CHECK(F < 10.0);
    }
}

TEST_CASE("branch cache matches the direct path") {
    const auto eos = ref_eos();
    const auto c = ref_consts(eos);
    const BernoulliBranch branch(eos, c, 0.6);
    for (double t : {0.0, 0.01, 0.1, 0.25, 0.37, 0.5, 0.59}) {
        const BranchPoint bp = branch.at(t);
        CHECK(bp.F == doctest::Approx(F_of_t(eos, c, t)).epsilon(1e-9));
        const double pi = std::sqrt(1.0 - t * t);
        const double q = q_from_pi(eos, c, pi);
        CHECK(bp.q == doctest::Approx(q).epsilon(1e-9));
        CHECK(bp.a == doctest::Approx(eos.sound_speed(bernoulli_density(eos, c, q)))
                          .epsilon(1e-9));
    }
}

TEST_CASE("tabulated eos") {
    // tabulate the quadratic law and compare sound speeds
    std::vector<double> rho, p;
    for (int k = 0; k <= 200; ++k) {
        const double r = 0.01 + (1.99 - 0.01) * k / 200.0;
        rho.push_back(r);
        p.push_back(0.25 * r * r);
    }
    const auto eos = EquationOfState::tabulated(rho, p, 0.5);
    CHECK(eos.sound_speed(0.5) == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(eos.number_density(1.0) == doctest::Approx(1.8).epsilon(1e-4));
}
