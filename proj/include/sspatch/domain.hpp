#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "sspatch/branch.hpp"
#include "sspatch/streamline.hpp"

namespace sspatch {

// Constants of the strong determinate domain construction. These follow the
// paper's sufficient conditions verbatim; they are conservative, often by many
// orders of magnitude, which is why the marching accepts a user override that
// is then checked a posteriori on the computed field.
struct DomainParams {
    double m0_hat = 0.0, M0_hat = 0.0;
    double phi0 = 0.0, phi1 = 0.0;
    double t0 = 0.0;
    double Kbar = 0.0;
    double kappa = 0.0;
    double delta0 = 0.0, delta1 = 0.0, delta2 = 0.0, delta = 0.0;
    double m_tilde = 0.0;
    double Ktilde = 0.0;
    double r_lo = 0.0, r_hi = 0.0;  // exponential bounds for r
    double c_min = 0.0, X_min = 0.0;

    // comparison function bounding W, Z from below
    double g(double t) const { return 0.5 * m0_hat * std::exp(Kbar * t * t); }
};

DomainParams compute_params(const BernoulliBranch& branch, const StreamlineSpec& spec,
                            const HodographBoundary& boundary, const BoundaryData& data,
                            int n_scan = 512);

// The marching domain: boundary curve below, cubic barrier above, meeting at
// the corner T' = (delta, psi_tilde(delta)).
struct OmegaRegion {
    double delta = 0.0;
    double Ktilde = 0.0;   // barrier constant actually in use
    double psi_delta = 0.0;
    double psi_bar0 = 0.0;

    double barrier(double t) const {
        return psi_delta - Ktilde / 3.0 * delta * delta * delta + Ktilde / 3.0 * t * t * t;
    }
    double barrier_prime(double t) const { return Ktilde * t * t; }
    std::array<double, 2> Dprime() const { return {0.0, psi_bar0}; }
    std::array<double, 2> Tprime() const { return {delta, psi_delta}; }
};

double barrier_curve(const OmegaRegion& region, double t);

// delta_user overrides the (conservative) paper delta; the barrier constant is
// then re-estimated from boundary data and validated, and strong determinacy
// must be re-checked on the computed field after the march.
OmegaRegion make_region(const DomainParams& params, const BernoulliBranch& branch,
                        const HodographBoundary& boundary,
                        std::optional<double> delta_user = std::nullopt);

// Worst-case margin of lambda_plus < Ktilde t^2 with a priori bounds for r and Z.
struct FieldBounds {
    double r_max = 0.0;
    double Z_min = 0.0;
};
double determinacy_margin(const BernoulliBranch& branch, double Ktilde, double delta,
                          const FieldBounds& bounds, int n_scan = 512);

// Margin from per-node samples of lambda_plus / t^2 on the computed field.
double determinacy_margin_from_samples(double Ktilde, const std::vector<double>& lam_over_t2);

struct DeterminacyCheck {
    bool passed = false;
    double margin = 0.0;
};
DeterminacyCheck check_strong_determinacy(const BernoulliBranch& branch,
                                          const DomainParams& params,
                                          const FieldBounds& bounds);

}  // namespace sspatch
