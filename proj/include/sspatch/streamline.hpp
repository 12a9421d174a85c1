#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sspatch/branch.hpp"
#include "sspatch/eos.hpp"
#include "sspatch/numerics.hpp"

namespace sspatch {

// Arc function with derivatives; polynomials carry exact derivatives, callable
// plugins supply their own.
struct ArcFunction {
    std::function<double(double)> f, d1, d2, d3;

    static ArcFunction from_poly(const Poly& p) {
        const Poly p1 = p.derivative();
        const Poly p2 = p1.derivative();
        const Poly p3 = p2.derivative();
        return ArcFunction{p, p1, p2, p3};
    }
};

// The data-carrying streamline arc r = phi(x) with the prescribed Mach-angle
// variable pihat(x); sonic at x1.
struct StreamlineSpec {
    ArcFunction phi;    // C3 on [x1, x3]
    ArcFunction pihat;  // C2 on [x1, x3]
    double x1 = 0.0, x3 = 0.0;
    double phi0 = 0.0, phi1 = 0.0;  // recorded bounds: phi0 <= phi; phi, phi' <= phi1

    double theta_hat(double x) const { return std::atan(phi.d1(x)); }
};

StreamlineSpec make_streamline(Poly phi, Poly pihat, double x1, double x3);

struct ConditionResult {
    std::string name;
    bool passed = false;
    double worst_margin = 0.0;  // positive means satisfied
    double worst_x = 0.0;
};

struct ValidationReport {
    std::vector<ConditionResult> conditions;
    bool all_passed = true;
    std::string to_json() const;
};

// Checks the arc hypotheses on a dense grid; failures are fatal for the pipeline.
ValidationReport validate_streamline(const StreamlineSpec& spec, const BernoulliBranch& branch,
                                     int n_grid = 2048);

double theta_hat(const StreamlineSpec& spec, double x);

struct BcdValues {
    double b, c, d;
};
// Boundary data of (W, Z) and of the degeneracy quantity L = -d on the arc.
BcdValues bcd_hat(const StreamlineSpec& spec, const BernoulliBranch& branch, double x);

// Potential on the arc: phi_hat(x) = phi1_gauge + integral of the positive slope.
double potential_on_arc(const StreamlineSpec& spec, const BernoulliBranch& branch, double x,
                        double phi1_gauge = 0.0);

// Boundary data synthesized over the arc with recorded bounds.
struct BoundaryData {
    std::function<double(double)> theta_of_x, b_of_x, c_of_x, d_of_x, phi_pot_of_x;
    double m0_hat = 0.0, M0_hat = 0.0;
};
BoundaryData make_boundary_data(const StreamlineSpec& spec,
                                const std::shared_ptr<const BernoulliBranch>& branch,
                                int n_grid = 2048);

// Everything the solver needs at one boundary point of the curve P'T'.
struct BoundaryState {
    double t = 0.0, psi = 0.0, x = 0.0;
    double b = 0.0, c = 0.0, d = 0.0;
    double r = 0.0, theta = 0.0;
};

// Image of the arc in the (t, psi) plane: psi = psi_tilde(t), monotone, with
// the inverse parametrizations used by the marching scheme and the inversion.
class HodographBoundary {
  public:
    HodographBoundary() = default;
    HodographBoundary(const StreamlineSpec& spec,
                      std::shared_ptr<const BernoulliBranch> branch, int n_samples = 8192);

    double t0() const { return t0_; }
    double psi0() const { return psi0_; }

    double t_of_x(double x) const;
    double psi_of_x(double x) const;
    double psi_tilde(double t) const { return psi_of_t_(t); }
    // closed-form slope of the boundary curve
    double psi_tilde_prime(double t) const;
    double x_of_psi(double psi) const { return x_of_psi_(psi); }
    double x_of_t(double t) const { return x_of_t_(t); }

    BoundaryState at_t(double t) const;
    BoundaryState at_psi(double psi) const;

  private:
    StreamlineSpec spec_;
    std::shared_ptr<const BernoulliBranch> branch_;
    Interp1D x_of_t_, psi_of_t_, x_of_psi_;
    std::vector<double> cum_x_, cum_phi_;  // potential knots for exact evaluation
    double t0_ = 0.0, psi0_ = 0.0;
};

HodographBoundary hodograph_boundary(const StreamlineSpec& spec,
                                     std::shared_ptr<const BernoulliBranch> branch,
                                     int n_samples = 8192);

}  // namespace sspatch
