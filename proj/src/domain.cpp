#include "sspatch/domain.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace sspatch {

DomainParams compute_params(const BernoulliBranch& branch, const StreamlineSpec& spec,
                            const HodographBoundary& boundary, const BoundaryData& data,
                            int n_scan) {
    DomainParams p;
    p.m0_hat = data.m0_hat;
    p.M0_hat = data.M0_hat;
    p.phi0 = spec.phi0;
    p.phi1 = spec.phi1;
    p.t0 = boundary.t0();
    if (!(p.m0_hat > 0.0))
        throw std::invalid_argument("domain: boundary data lower bound m0_hat <= 0");
    if (!(p.phi0 > 0.0)) throw std::invalid_argument("domain: phi0 <= 0");

    p.delta0 = std::min(1.0 / std::sqrt(2.0), p.t0);

    // scan the reachable states for t in [0, delta0]; X = i gamma_a^2 p'' f = 2 a^2 c
    double c_min = std::numeric_limits<double>::infinity();
    double X_min = std::numeric_limits<double>::infinity();
    double F_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n_scan; ++k) {
        const double t = p.delta0 * k / n_scan;
        const BranchPoint bp = branch.at(t);
        c_min = std::min(c_min, bp.c);
        X_min = std::min(X_min, 2.0 * bp.a * bp.a * bp.c);
        if (k > 0) F_min = std::min(F_min, bp.F);
    }
    p.c_min = c_min;
    p.X_min = X_min;
    p.kappa = 2.0 * F_min;

    const double inv_c = 1.0 / c_min;
    const double m0 = p.m0_hat;
    p.Kbar = 1.0 + std::max(1.0 + (2.0 * m0 + 1.0) / m0 * inv_c,
                            1.0 + (2.0 * m0 * m0 + 2.0 * m0 + 2.0) / (m0 * m0) * inv_c);

    p.delta1 = std::min({p.delta0, std::sqrt(std::log(2.0) / p.Kbar), p.kappa * m0 / 3.0});

    // m_tilde: minimum of the psi_tilde'(t)/t coefficient over the working range
    double m_tilde = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n_scan; ++k) {
        const double t = p.delta0 * k / n_scan;
        const double x = boundary.x_of_t(t);
        const BranchPoint bp = branch.at(t);
        const double dphi = spec.phi.d1(x);
        const double w = std::min(1.0, spec.pihat.f(x));
        const double coeff = bp.a * bp.gamma_a * std::sqrt(1.0 + dphi * dphi) /
                             (bp.gamma * (-spec.pihat.d1(x)) * w * w);
        m_tilde = std::min(m_tilde, coeff);
    }
    p.m_tilde = m_tilde;
    if (!(p.m_tilde > 0.0)) throw std::invalid_argument("domain: m_tilde <= 0");

    const double Xm = p.X_min * m0;
    p.Ktilde = 8.0 * p.phi1 / Xm * std::exp(2.0 * p.t0 * p.t0 / Xm);

    p.delta2 = (p.Ktilde * p.delta0 < p.m_tilde) ? p.delta0 : 0.999 * p.m_tilde / p.Ktilde;
    p.delta = std::min(p.delta1, p.delta2);
    if (!(p.delta > 0.0)) throw std::invalid_argument("domain: nonpositive delta");

    const double e = std::exp(p.t0 * p.t0 / (p.kappa * m0));
    p.r_lo = p.phi0 / e;
    p.r_hi = p.phi1 * e;
    return p;
}

double barrier_curve(const OmegaRegion& region, double t) { return region.barrier(t); }

OmegaRegion make_region(const DomainParams& params, const BernoulliBranch& branch,
                        const HodographBoundary& boundary,
                        std::optional<double> delta_user) {
    OmegaRegion region;
    if (!delta_user) {
        region.delta = params.delta;
        region.Ktilde = params.Ktilde;
    } else {
        const double d = *delta_user;
        if (!(d > 0.0) || d > params.delta0 + 1e-15)
            throw std::invalid_argument("delta_user outside (0, delta0]");
        region.delta = d;
        // estimate the worst slope coefficient lambda_plus / t^2 on the data curve
        double sup = 0.0;
        for (int k = 1; k <= 512; ++k) {
            const double t = d * k / 512.0;
            const BoundaryState bs = boundary.at_t(t);
            const BranchPoint bp = branch.at(t);
            const double z = std::min(bs.b, bs.c);
            sup = std::max(sup, bs.r * bp.lamc /
                                    (2.0 * bp.F * z * std::sqrt(1.0 - t * t)));
        }
        region.Ktilde = 2.0 * sup;
    }
    region.psi_delta = boundary.psi_tilde(region.delta);
    region.psi_bar0 =
        region.psi_delta - region.Ktilde / 3.0 * std::pow(region.delta, 3);
    if (!(region.psi_bar0 > 0.0))
        throw std::runtime_error(
            "region: barrier drops below the sonic line (psi_bar(0) = " +
            std::to_string(region.psi_bar0) + " <= 0); reduce delta_user");
    // the barrier must stay above the data curve inside (0, delta)
    for (int k = 1; k < 512; ++k) {
        const double t = region.delta * k / 512.0;
        if (region.barrier(t) <= boundary.psi_tilde(t))
            throw std::runtime_error("region: barrier crosses the data curve at t=" +
                                     std::to_string(t));
    }
    return region;
}

double determinacy_margin(const BernoulliBranch& branch, double Ktilde, double delta,
                          const FieldBounds& bounds, int n_scan) {
    double margin = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= n_scan; ++k) {
        const double t = delta * k / n_scan;
        const BranchPoint bp = branch.at(t);
        const double slope_coeff = bounds.r_max * bp.lamc /
                                   (2.0 * bp.F * bounds.Z_min * std::sqrt(1.0 - t * t));
        margin = std::min(margin, Ktilde - slope_coeff);
    }
    return margin;
}

double determinacy_margin_from_samples(double Ktilde,
                                       const std::vector<double>& lam_over_t2) {
    double margin = std::numeric_limits<double>::infinity();
    for (const double v : lam_over_t2) margin = std::min(margin, Ktilde - v);
    return margin;
}

DeterminacyCheck check_strong_determinacy(const BernoulliBranch& branch,
                                          const DomainParams& params,
                                          const FieldBounds& bounds) {
    DeterminacyCheck c;
    c.margin = determinacy_margin(branch, params.Ktilde, params.delta, bounds);
    c.passed = c.margin > 0.0;
    return c;
}

}  // namespace sspatch
