#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "sspatch/numerics.hpp"

namespace sspatch {

// Convex pressure law p(rho) in geometric units (c = 1). Construction enforces
// the admissibility conditions 0 < p' < 1, p'' > 0 (finite) on a sampling grid
// and cross-checks the supplied derivatives against central differences.
class EquationOfState {
  public:
    EquationOfState(std::function<double(double)> p, std::function<double(double)> dp,
                    std::function<double(double)> d2p, double rho_max, double rho_ref,
                    std::string name = "custom", int admissibility_samples = 512,
                    double rho_min = 0.0);

    // p(rho) = c2 * rho^2; the quadratic reference law.
    static EquationOfState quadratic(double c2 = 0.25, double rho_max = 2.0,
                                     double rho_ref = 0.5);
    // Tabulated (rho, p) pairs fitted with a C2 natural cubic spline.
    static EquationOfState tabulated(std::vector<double> rho, std::vector<double> p,
                                     double rho_ref);

    double p(double rho) const { return p_(rho); }
    double dp(double rho) const { return dp_(rho); }
    double d2p(double rho) const { return d2p_(rho); }
    double rho_max() const { return rho_max_; }
    double rho_ref() const { return rho_ref_; }
    const std::string& name() const { return name_; }

    double sound_speed(double rho) const;      // a = sqrt(p'(rho))
    double enthalpy_density(double rho) const { return rho + p_(rho); }  // i = rho + p
    // n(rho) = exp(int_{rho_ref}^{rho} ds/(s+p)); n(rho_ref) = 1.
    double number_density(double rho) const;
    // i/n in the rho -> 0 limit (evaluated at the bottom of the density table).
    double enthalpy_per_particle_limit() const;

    void require_in_range(double rho) const;

  private:
    void validate_admissibility(int samples) const;
    void build_density_table();

    std::function<double(double)> p_, dp_, d2p_;
    double rho_max_, rho_ref_;
    double rho_min_ = 0.0;  // validity floor; tabulated laws stop at the first knot
    std::string name_;
    // cumulative log-density integral G(rho) = ln n, tabulated in u = ln(rho)
    std::vector<double> table_u_, table_G_;
    double rho_table_min_ = 0.0;
};

// Bernoulli normalization gamma * i / n = m * gamma_hat =: mg_hat.
struct BernoulliConstants {
    double m = 0.0;        // average rest mass per particle
    double mg_hat = 0.0;   // Bernoulli constant
    double q_hat = 0.0;    // limit speed, gamma(q_hat) * lim(i/n) = mg_hat
    double rho_sonic = 0.0;
    double q_sonic = 0.0;  // = a(rho_sonic)
};

// Constants pinned so the sonic state sits at the given density.
BernoulliConstants sonic_normalized_constants(const EquationOfState& eos, double rho_sonic);
// Constants from a given Bernoulli value; locates the sonic state by root finding.
BernoulliConstants constants_from_mg_hat(const EquationOfState& eos, double mg_hat);

// One thermodynamic + kinematic state on the Bernoulli branch. The Mach-angle
// members (omega, pi_var) are only meaningful for M >= 1.
struct FlowState {
    double rho, p, a, i, n, q, gamma, gamma_a, M, theta, omega, pi_var;
    double pdd;  // p''(rho), cached for the derivative formulas
};

inline double lorentz(double q) { return 1.0 / std::sqrt(1.0 - q * q); }

double sound_speed(const EquationOfState& eos, double rho);
double number_density(const EquationOfState& eos, double rho);

// Unique density with gamma(q) i/n = mg_hat; monotone in rho.
double bernoulli_density(const EquationOfState& eos, const BernoulliConstants& consts,
                         double q);
double limit_speed(const EquationOfState& eos, const BernoulliConstants& consts);
double limit_speed_from_mg_hat(const EquationOfState& eos, double mg_hat);

FlowState state_from_q(const EquationOfState& eos, const BernoulliConstants& consts,
                       double q, double theta = 0.0);
FlowState state_from_rho(const EquationOfState& eos, const BernoulliConstants& consts,
                         double rho, double theta = 0.0);

// da/dq = -i q gamma^2 p'' / (2 a^3) < 0 along the branch.
double da_dq(const FlowState& s);

// pi = sin(omega) = a gamma_a / (gamma q); strictly decreasing in q supersonically.
double pi_from_q(const EquationOfState& eos, const BernoulliConstants& consts, double q);
double q_from_pi(const EquationOfState& eos, const BernoulliConstants& consts, double pi);

struct AngleCoefficients {
    double f;   // f(a) = gamma_a^2 + 2 a^4 / (i p'')
    double F1;  // 2 i p'' gamma_a^2 f + 4 a^2 sin^2(omega) > 0
    double F2;  // i q gamma gamma_a p'' f cos(omega) sin(2 omega)
};
AngleCoefficients f_F1_F2(const FlowState& s);

// I(pi) = int_{sin k0}^{pi} 2 a^2(y) / (y F1(y)) dy.
double I_of_pi(const EquationOfState& eos, const BernoulliConstants& consts, double pi,
               double k0);

// F(t) = (1 - t^2) F1hat(t) / (4 a^2), F1hat(t) = 4 a^2 (1-t^2) + 2 i p'' gamma_a^2 f.
double F_of_t(const EquationOfState& eos, const BernoulliConstants& consts, double t);

}  // namespace sspatch
