#include "sspatch/streamline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sspatch {

namespace {

// F1hat(t) = 4 a^2 (c + 1 - t^2); equals F1(pi) expressed through t.
double F1hat_of(const BranchPoint& bp) {
    return 4.0 * bp.a * bp.a * (bp.c + 1.0 - bp.t * bp.t);
}

double t_of_pi(double pi) { return std::sqrt(std::max(0.0, 1.0 - pi * pi)); }

}  // namespace

StreamlineSpec make_streamline(Poly phi, Poly pihat, double x1, double x3) {
    if (!(x3 > x1)) throw std::invalid_argument("streamline: need x3 > x1");
    StreamlineSpec s;
    s.phi = ArcFunction::from_poly(phi);
    s.pihat = ArcFunction::from_poly(pihat);
    s.x1 = x1;
    s.x3 = x3;
    // recorded constants phi0 <= phi and phi, phi' <= phi1 from a grid scan
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 512; ++k) {
        const double x = x1 + (x3 - x1) * k / 512.0;
        lo = std::min(lo, s.phi.f(x));
        hi = std::max(hi, std::max(s.phi.f(x), s.phi.d1(x)));
    }
    s.phi0 = lo;
    s.phi1 = hi;
    return s;
}

std::string ValidationReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\n  \"all_passed\": " << (all_passed ? "true" : "false") << ",\n  \"conditions\": [\n";
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        const auto& c = conditions[i];
        os << "    {\"name\": \"" << c.name << "\", \"pass\": " << (c.passed ? "true" : "false")
           << ", \"worst_margin\": " << c.worst_margin << ", \"worst_x\": " << c.worst_x << "}"
           << (i + 1 < conditions.size() ? "," : "") << "\n";
    }
    os << "  ]\n}\n";
    return os.str();
}

ValidationReport validate_streamline(const StreamlineSpec& spec, const BernoulliBranch& branch,
                                     int n_grid) {
    ValidationReport rep;
    auto scan = [&](const std::string& name, const std::function<double(double)>& margin) {
        ConditionResult c;
        c.name = name;
        c.worst_margin = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= n_grid; ++k) {
            const double x = spec.x1 + (spec.x3 - spec.x1) * k / n_grid;
            const double m = margin(x);
            if (m < c.worst_margin) {
                c.worst_margin = m;
                c.worst_x = x;
            }
        }
        c.passed = c.worst_margin > 0.0;
        rep.conditions.push_back(c);
        rep.all_passed = rep.all_passed && c.passed;
    };

    scan("phi_positive", [&](double x) { return spec.phi.f(x); });
    scan("phi_increasing", [&](double x) { return spec.phi.d1(x); });
    scan("phi_concave", [&](double x) { return -spec.phi.d2(x); });
    scan("pihat_decreasing", [&](double x) { return -spec.pihat.d1(x); });

    {
        ConditionResult c;
        c.name = "sonic_at_P";
        c.worst_x = spec.x1;
        c.worst_margin = 1e-10 - std::abs(spec.pihat.f(spec.x1) - 1.0);
        c.passed = c.worst_margin > 0.0;
        rep.conditions.push_back(c);
        rep.all_passed = rep.all_passed && c.passed;
    }

    scan("pihat_in_range", [&](double x) {
        const double w = spec.pihat.f(x);
        if (x == spec.x1) return w;  // the sonic endpoint is handled above
        return std::min(w, 1.0 - w + 1e-300);
    });

    // condition (2.31): phi''/(1+phi'^2) - (4 a^2 sqrt(1-pi^2)/F1) pihat' < 0
    const bool pihat_valid = rep.conditions[3].passed && rep.conditions[5].passed;
    {
        ConditionResult c;
        c.name = "streamline_angle_compatibility";
        c.worst_margin = std::numeric_limits<double>::infinity();
        if (!pihat_valid) {
            c.passed = false;
            c.worst_margin = -1.0;
            c.worst_x = spec.x1;
        } else {
            for (int k = 0; k <= n_grid; ++k) {
                const double x = spec.x1 + (spec.x3 - spec.x1) * k / n_grid;
                const double w = std::min(1.0, spec.pihat.f(x));
                const double t = t_of_pi(w);
                const BranchPoint bp = branch.at(t);
                const double dphi = spec.phi.d1(x);
                const double expr = spec.phi.d2(x) / (1.0 + dphi * dphi) -
                                    4.0 * bp.a * bp.a * t / F1hat_of(bp) * spec.pihat.d1(x);
                const double m = -expr;
                if (m < c.worst_margin) {
                    c.worst_margin = m;
                    c.worst_x = x;
                }
            }
            c.passed = c.worst_margin > 0.0;
        }
        rep.conditions.push_back(c);
        rep.all_passed = rep.all_passed && c.passed;
    }
    return rep;
}

double theta_hat(const StreamlineSpec& spec, double x) { return spec.theta_hat(x); }

BcdValues bcd_hat(const StreamlineSpec& spec, const BernoulliBranch& branch, double x) {
    const double w = std::min(1.0, spec.pihat.f(x));
    const double t = t_of_pi(w);
    const BranchPoint bp = branch.at(t);
    const double F1h = F1hat_of(bp);
    const double th = spec.theta_hat(x);
    const double common = spec.phi.f(x) * std::cos(th) / (2.0 * w);
    const double dphi = spec.phi.d1(x);
    const double curv = spec.phi.d2(x) / (1.0 + dphi * dphi);
    const double angle_term = 4.0 * bp.a * bp.a * t / F1h * spec.pihat.d1(x);
    BcdValues v{};
    v.b = common * (angle_term - curv);
    v.c = -common * (angle_term + curv);
    v.d = -common * (4.0 * bp.a * bp.a / F1h) * spec.pihat.d1(x);
    return v;
}

namespace {

double potential_slope(const StreamlineSpec& spec, const BernoulliBranch& branch, double x) {
    const double w = std::min(1.0, spec.pihat.f(x));
    const BranchPoint bp = branch.at(t_of_pi(w));
    const double dphi = spec.phi.d1(x);
    return bp.a * bp.gamma_a * std::sqrt(1.0 + dphi * dphi) / (bp.gamma * w);
}

}  // namespace

double potential_on_arc(const StreamlineSpec& spec, const BernoulliBranch& branch, double x,
                        double phi1_gauge) {
    if (x < spec.x1 - 1e-12 || x > spec.x3 + 1e-12)
        throw std::domain_error("potential_on_arc: x outside [x1, x3]");
    // substitute x = x1 + s^2: the Mach angle varies like sqrt(x - x1) near the
    // sonic endpoint, so the integrand is analytic in s
    const double s_hi = std::sqrt(std::max(0.0, x - spec.x1));
    return phi1_gauge +
           integrate_adaptive(
               [&](double s) {
                   return 2.0 * s * potential_slope(spec, branch, spec.x1 + s * s);
               },
               0.0, s_hi, 1e-12);
}

BoundaryData make_boundary_data(const StreamlineSpec& spec,
                                const std::shared_ptr<const BernoulliBranch>& branch,
                                int n_grid) {
    BoundaryData d;
    d.theta_of_x = [spec](double x) { return spec.theta_hat(x); };
    d.b_of_x = [spec, branch](double x) { return bcd_hat(spec, *branch, x).b; };
    d.c_of_x = [spec, branch](double x) { return bcd_hat(spec, *branch, x).c; };
    d.d_of_x = [spec, branch](double x) { return bcd_hat(spec, *branch, x).d; };
    // cumulative potential on a fine grid, refined locally on evaluation
    auto xs = std::make_shared<std::vector<double>>();
    auto vals = std::make_shared<std::vector<double>>();
    xs->resize(n_grid + 1);
    vals->assign(n_grid + 1, 0.0);
    for (int k = 0; k <= n_grid; ++k) (*xs)[k] = spec.x1 + (spec.x3 - spec.x1) * k / n_grid;
    for (int k = 1; k <= n_grid; ++k)
        (*vals)[k] = (*vals)[k - 1] +
                     gauss7([&](double s) { return potential_slope(spec, *branch, s); },
                            (*xs)[k - 1], (*xs)[k]);
    d.phi_pot_of_x = [spec, branch, xs, vals](double x) {
        const auto it = std::upper_bound(xs->begin(), xs->end(), x);
        std::size_t i = static_cast<std::size_t>(it - xs->begin());
        i = std::min(std::max<std::size_t>(i, 1), xs->size() - 1) - 1;
        return (*vals)[i] + gauss7([&](double s) { return potential_slope(spec, *branch, s); },
                                   (*xs)[i], x);
    };
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int k = 0; k <= n_grid; ++k) {
        const BcdValues v = bcd_hat(spec, *branch, (*xs)[k]);
        lo = std::min(lo, std::min(v.b, std::min(v.c, v.d)));
        hi = std::max(hi, std::max(v.b, std::max(v.c, v.d)));
    }
    d.m0_hat = lo;
    d.M0_hat = hi;
    return d;
}

HodographBoundary::HodographBoundary(const StreamlineSpec& spec,
                                     std::shared_ptr<const BernoulliBranch> branch,
                                     int n_samples)
    : spec_(spec), branch_(std::move(branch)) {
    // the parametrization t(x) must be strictly monotone, i.e. pihat decreasing
    double w_prev = spec_.pihat.f(spec_.x1);
    for (int k = 1; k <= 1024; ++k) {
        const double x = spec_.x1 + (spec_.x3 - spec_.x1) * k / 1024.0;
        const double w = spec_.pihat.f(x);
        if (!(w < w_prev))
            throw std::runtime_error(
                "hodograph boundary: non-monotone parametrization (pihat not "
                "decreasing at x=" +
                std::to_string(x) + "); arc hypotheses violated");
        w_prev = w;
    }
    t0_ = std::sqrt(std::max(0.0, 1.0 - std::pow(spec_.pihat.f(spec_.x3), 2)));
    // sample uniformly in t: x(t) by root finding on the monotone map
    std::vector<double> ts(n_samples + 1), xs(n_samples + 1);
    ts[0] = 0.0;
    xs[0] = spec_.x1;
    for (int k = 1; k <= n_samples; ++k) {
        const double t = t0_ * k / n_samples;
        ts[k] = t;
        const double target = 1.0 - t * t;  // pihat^2(x) = 1 - t^2
        xs[k] = (k == n_samples)
                    ? spec_.x3
                    : bisect_secant(
                          [&](double x) {
                              const double w = spec_.pihat.f(x);
                              return w * w - target;
                          },
                          spec_.x1, spec_.x3, 1e-15 * (spec_.x3 - spec_.x1), 200);
    }
    // cumulative potential knots aligned with the t-samples
    cum_x_ = xs;
    cum_phi_.assign(n_samples + 1, 0.0);
    for (int k = 1; k <= n_samples; ++k)
        cum_phi_[k] = cum_phi_[k - 1] +
                      gauss7([&](double s) { return potential_slope(spec_, *branch_, s); },
                             cum_x_[k - 1], cum_x_[k]);
    psi0_ = cum_phi_.back();
    x_of_t_ = Interp1D(ts, xs);
    psi_of_t_ = Interp1D(ts, cum_phi_);
    x_of_psi_ = Interp1D(cum_phi_, xs);
}

double HodographBoundary::t_of_x(double x) const {
    const double w = spec_.pihat.f(x);
    return std::sqrt(std::max(0.0, 1.0 - w * w));
}

double HodographBoundary::psi_of_x(double x) const {
    const auto it = std::upper_bound(cum_x_.begin(), cum_x_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - cum_x_.begin());
    i = std::min(std::max<std::size_t>(i, 1), cum_x_.size() - 1) - 1;
    return cum_phi_[i] + gauss7([&](double s) { return potential_slope(spec_, *branch_, s); },
                                cum_x_[i], x);
}

double HodographBoundary::psi_tilde_prime(double t) const {
    // (3.61): psi_tilde'(t) = -(a gamma_a sqrt(1+phi'^2) / (gamma pihat' pihat^2)) t
    const double x = x_of_t_(t);
    const double w = std::min(1.0, spec_.pihat.f(x));
    const BranchPoint bp = branch_->at(t);
    const double dphi = spec_.phi.d1(x);
    return -bp.a * bp.gamma_a * std::sqrt(1.0 + dphi * dphi) /
           (bp.gamma * spec_.pihat.d1(x) * w * w) * t;
}

BoundaryState HodographBoundary::at_t(double t) const {
    BoundaryState s;
    s.t = t;
    s.x = x_of_t_(t);
    s.psi = psi_of_t_(t);
    const BcdValues v = bcd_hat(spec_, *branch_, s.x);
    s.b = v.b;
    s.c = v.c;
    s.d = v.d;
    s.r = spec_.phi.f(s.x);
    s.theta = spec_.theta_hat(s.x);
    return s;
}

BoundaryState HodographBoundary::at_psi(double psi) const {
    const double x = x_of_psi_(psi);
    BoundaryState s;
    s.x = x;
    s.t = t_of_x(x);
    s.psi = psi;
    const BcdValues v = bcd_hat(spec_, *branch_, x);
    s.b = v.b;
    s.c = v.c;
    s.d = v.d;
    s.r = spec_.phi.f(x);
    s.theta = spec_.theta_hat(x);
    return s;
}

HodographBoundary hodograph_boundary(const StreamlineSpec& spec,
                                     std::shared_ptr<const BernoulliBranch> branch,
                                     int n_samples) {
    return HodographBoundary(spec, std::move(branch), n_samples);
}

}  // namespace sspatch
