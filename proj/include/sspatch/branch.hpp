#pragma once

#include "sspatch/eos.hpp"
#include "sspatch/numerics.hpp"

namespace sspatch {

// Pointwise thermodynamic data at one Mach-angle coordinate t = cos(omega).
struct BranchPoint {
    double t, pi;       // pi = sin(omega) = sqrt(1 - t^2)
    double rho, q, a;
    double gamma, gamma_a;
    double i, pdd, f;
    double c;     // i gamma_a^2 p'' f(a) / (2 a^2)
    double F;     // F(t) = (1-t^2) [c + (1-t^2)]
    double lamc;  // a gamma_a / gamma, the state factor of the characteristic slopes
};

// Supersonic Bernoulli branch resampled on t = cos(omega). The sweep is
// parametrized by density (where every quantity is closed form given n(rho)),
// then interpolated in t with monotone cubics. One cache is built per run and
// shared across solver grids, so interpolation error perturbs the problem
// identically for every resolution.
class BernoulliBranch {
  public:
    BernoulliBranch(const EquationOfState& eos, const BernoulliConstants& consts,
                    double t_max, int samples = 4096);

    BranchPoint at(double t) const;
    double t_max() const { return t_max_; }
    const BernoulliConstants& consts() const { return consts_; }

    double F(double t) const { return F_(t); }
    double c(double t) const { return c_(t); }
    double lamc(double t) const { return lamc_(t); }
    double a(double t) const { return a_(t); }
    double gamma(double t) const { return gamma_(t); }
    double gamma_a(double t) const { return gamma_a_(t); }
    double rho(double t) const { return rho_(t); }
    double q(double t) const { return q_(t); }

  private:
    BernoulliConstants consts_;
    double t_max_;
    Interp1D a_, q_, rho_, gamma_, gamma_a_, i_, pdd_, f_, c_, F_, lamc_;
};

}  // namespace sspatch
