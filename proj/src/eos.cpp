#include "sspatch/eos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace sspatch {

EquationOfState::EquationOfState(std::function<double(double)> p,
                                 std::function<double(double)> dp,
                                 std::function<double(double)> d2p, double rho_max,
                                 double rho_ref, std::string name,
                                 int admissibility_samples, double rho_min)
    : p_(std::move(p)),
      dp_(std::move(dp)),
      d2p_(std::move(d2p)),
      rho_max_(rho_max),
      rho_ref_(rho_ref),
      rho_min_(rho_min),
      name_(std::move(name)) {
    if (!(rho_max_ > 0.0)) throw std::invalid_argument("eos: rho_max must be positive");
    if (!(rho_ref_ > 0.0 && rho_ref_ < rho_max_))
        throw std::invalid_argument("eos: rho_ref outside (0, rho_max)");
    validate_admissibility(admissibility_samples);
    build_density_table();
}

EquationOfState EquationOfState::quadratic(double c2, double rho_max, double rho_ref) {
    return EquationOfState([c2](double r) { return c2 * r * r; },
                           [c2](double r) { return 2.0 * c2 * r; },
                           [c2](double) { return 2.0 * c2; }, rho_max, rho_ref,
                           "quadratic");
}

EquationOfState EquationOfState::tabulated(std::vector<double> rho, std::vector<double> p,
                                           double rho_ref) {
    auto spline = std::make_shared<CubicSpline>(std::move(rho), std::move(p));
    const double rho_max = spline->x_back();
    const double rho_min = spline->x_front();
    return EquationOfState([spline](double r) { return (*spline)(r); },
                           [spline](double r) { return spline->prime(r); },
                           [spline](double r) { return spline->second(r); },
                           rho_max, rho_ref, "table", 512, rho_min);
}

void EquationOfState::validate_admissibility(int samples) const {
    const double lo = std::max(rho_min_, rho_max_ * 1e-6);
    const double hi = rho_max_ * (1.0 - 1e-9);
    for (int k = 0; k <= samples; ++k) {
        const double r = lo + (hi - lo) * k / samples;
        const double dpv = dp_(r);
        const double d2pv = d2p_(r);
        if (!(dpv > 0.0) || !(dpv < 1.0))
            throw std::invalid_argument("eos admissibility: p'(rho) outside (0,1) at rho=" +
                                        std::to_string(r));
        if (!(d2pv > 0.0))
            throw std::invalid_argument("eos admissibility: p'' > 0 violated at rho=" +
                                        std::to_string(r));
        if (!std::isfinite(d2pv))
            throw std::invalid_argument("eos admissibility: p'' not finite at rho=" +
                                        std::to_string(r));
        // derivative consistency against central differences
        const double h = std::max(1e-6 * rho_max_, 1e-9);
        if (r - h > rho_min_ && r + h < rho_max_) {
            const double dp_fd = (p_(r + h) - p_(r - h)) / (2.0 * h);
            const double d2p_fd = (dp_(r + h) - dp_(r - h)) / (2.0 * h);
            const double sc1 = std::max(std::abs(dpv), 1e-12);
            const double sc2 = std::max(std::abs(d2pv), 1e-12);
            if (std::abs(dp_fd - dpv) / sc1 > 1e-5)
                throw std::invalid_argument("eos: p and p' inconsistent at rho=" +
                                            std::to_string(r));
            if (std::abs(d2p_fd - d2pv) / sc2 > 1e-5)
                throw std::invalid_argument("eos: p' and p'' inconsistent at rho=" +
                                            std::to_string(r));
        }
    }
}

void EquationOfState::build_density_table() {
    // G(rho) = int_{rho_ref}^{rho} ds/(s + p(s)), tabulated in u = ln(rho) so the
    // 1/s behaviour near vacuum is resolved: integrand in u is e^u/(e^u + p(e^u)).
    rho_table_min_ = std::max(rho_min_, rho_max_ * 1e-12);
    const int n_panels = 4096;
    const double u_lo = std::log(rho_table_min_);
    const double u_hi = std::log(rho_max_ * (1.0 - 1e-9));
    table_u_.resize(n_panels + 1);
    table_G_.assign(n_panels + 1, 0.0);
    for (int k = 0; k <= n_panels; ++k)
        table_u_[k] = u_lo + (u_hi - u_lo) * k / n_panels;
    auto integrand_u = [this](double u) {
        const double r = std::exp(u);
        return r / (r + p_(r));
    };
    // cumulative sum, then shift so G(rho_ref) = 0
    for (int k = 1; k <= n_panels; ++k)
        table_G_[k] = table_G_[k - 1] + gauss7(integrand_u, table_u_[k - 1], table_u_[k]);
    const double u_ref = std::log(rho_ref_);
    const auto it = std::upper_bound(table_u_.begin(), table_u_.end(), u_ref);
    std::size_t i = static_cast<std::size_t>(it - table_u_.begin());
    i = std::min(std::max<std::size_t>(i, 1), table_u_.size() - 1) - 1;
    const double G_ref = table_G_[i] + gauss7(integrand_u, table_u_[i], u_ref);
    for (auto& g : table_G_) g -= G_ref;
}

void EquationOfState::require_in_range(double rho) const {
    if (!(rho > rho_min_) || !(rho < rho_max_))
        throw std::domain_error("eos: rho=" + std::to_string(rho) + " outside (" +
                                std::to_string(rho_min_) + ", " + std::to_string(rho_max_) +
                                ")");
}

double EquationOfState::sound_speed(double rho) const {
    require_in_range(rho);
    return std::sqrt(dp_(rho));
}

double EquationOfState::number_density(double rho) const {
    require_in_range(rho);
    if (rho < rho_table_min_)
        throw QuadratureError("number_density: rho below table range", rho, rho_ref_);
    const double u = std::log(rho);
    const auto it = std::upper_bound(table_u_.begin(), table_u_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - table_u_.begin());
    i = std::min(std::max<std::size_t>(i, 1), table_u_.size() - 1) - 1;
    auto integrand_u = [this](double uu) {
        const double r = std::exp(uu);
        return r / (r + p_(r));
    };
    const double G = table_G_[i] + gauss7(integrand_u, table_u_[i], u);
    return std::exp(G);
}

double EquationOfState::enthalpy_per_particle_limit() const {
    const double r = rho_table_min_;
    return enthalpy_density(r) / number_density(r);
}

double sound_speed(const EquationOfState& eos, double rho) { return eos.sound_speed(rho); }
double number_density(const EquationOfState& eos, double rho) {
    return eos.number_density(rho);
}

double limit_speed_from_mg_hat(const EquationOfState& eos, double mg_hat) {
    const double lim = eos.enthalpy_per_particle_limit();
    if (mg_hat < lim * (1.0 - 1e-13))
        throw RootBracketError("limit_speed: mg_hat below the vacuum enthalpy per particle");
    if (mg_hat <= lim) return 0.0;
    const double g = mg_hat / lim;  // gamma(q_hat)
    return std::sqrt(1.0 - 1.0 / (g * g));
}

double limit_speed(const EquationOfState& eos, const BernoulliConstants& consts) {
    return limit_speed_from_mg_hat(eos, consts.mg_hat);
}

double bernoulli_density(const EquationOfState& eos, const BernoulliConstants& consts,
                         double q) {
    if (!(q > 0.0) || !(q < consts.q_hat))
        throw RootBracketError("bernoulli_density: q outside (0, q_hat)");
    const double target = consts.mg_hat / lorentz(q);  // i/n at the sought density
    auto residual = [&](double rho) {
        return eos.enthalpy_density(rho) / eos.number_density(rho) - target;
    };
    const double lo = eos.rho_max() * 1e-11;
    const double hi = eos.rho_max() * (1.0 - 1e-9);
    return bisect_secant(residual, lo, hi, 1e-15 * eos.rho_max(), 300);
}

BernoulliConstants sonic_normalized_constants(const EquationOfState& eos, double rho_sonic) {
    eos.require_in_range(rho_sonic);
    BernoulliConstants c;
    c.rho_sonic = rho_sonic;
    c.q_sonic = eos.sound_speed(rho_sonic);
    c.mg_hat = lorentz(c.q_sonic) * eos.enthalpy_density(rho_sonic) /
               eos.number_density(rho_sonic);
    c.q_hat = limit_speed_from_mg_hat(eos, c.mg_hat);
    c.m = c.mg_hat / lorentz(c.q_hat);
    return c;
}

BernoulliConstants constants_from_mg_hat(const EquationOfState& eos, double mg_hat) {
    BernoulliConstants c;
    c.mg_hat = mg_hat;
    c.q_hat = limit_speed_from_mg_hat(eos, mg_hat);
    c.m = mg_hat / lorentz(c.q_hat);
    // sonic state: q(rho) = a(rho) on the branch
    auto residual = [&](double rho) {
        const double g = mg_hat * eos.number_density(rho) / eos.enthalpy_density(rho);
        if (g <= 1.0) return -1.0;  // below rest: treat as subsonic side
        const double q = std::sqrt(1.0 - 1.0 / (g * g));
        return q - eos.sound_speed(rho);
    };
    c.rho_sonic = bisect_secant(residual, eos.rho_max() * 1e-9,
                                eos.rho_max() * (1.0 - 1e-9), 1e-15 * eos.rho_max(), 300);
    c.q_sonic = eos.sound_speed(c.rho_sonic);
    return c;
}

FlowState state_from_rho(const EquationOfState& eos, const BernoulliConstants& consts,
                         double rho, double theta) {
    eos.require_in_range(rho);
    FlowState s{};
    s.rho = rho;
    s.p = eos.p(rho);
    s.a = eos.sound_speed(rho);
    s.i = eos.enthalpy_density(rho);
    s.n = eos.number_density(rho);
    s.pdd = eos.d2p(rho);
    s.gamma = consts.mg_hat * s.n / s.i;
    if (s.gamma < 1.0)
        throw std::domain_error("state_from_rho: density off the Bernoulli branch");
    s.q = std::sqrt(std::max(0.0, 1.0 - 1.0 / (s.gamma * s.gamma)));
    s.gamma_a = 1.0 / std::sqrt(1.0 - s.a * s.a);
    s.M = s.gamma * s.q / (s.a * s.gamma_a);
    s.theta = theta;
    if (s.M >= 1.0 - 1e-9) {
        s.pi_var = std::min(1.0, 1.0 / s.M);
        s.omega = std::asin(s.pi_var);
    } else {
        s.pi_var = std::numeric_limits<double>::quiet_NaN();
        s.omega = std::numeric_limits<double>::quiet_NaN();
    }
    return s;
}

FlowState state_from_q(const EquationOfState& eos, const BernoulliConstants& consts,
                       double q, double theta) {
    const double rho = bernoulli_density(eos, consts, q);
    FlowState s = state_from_rho(eos, consts, rho, theta);
    s.q = q;  // exact input, not the round trip
    s.gamma = lorentz(q);
    s.M = s.gamma * s.q / (s.a * s.gamma_a);
    if (s.M >= 1.0 - 1e-9) {
        s.pi_var = std::min(1.0, 1.0 / s.M);
        s.omega = std::asin(s.pi_var);
    }
    return s;
}

double da_dq(const FlowState& s) {
    return -s.i * s.q * s.gamma * s.gamma * s.pdd / (2.0 * s.a * s.a * s.a);
}

double pi_from_q(const EquationOfState& eos, const BernoulliConstants& consts, double q) {
    if (q < consts.q_sonic * (1.0 - 1e-12))
        throw std::domain_error("pi_from_q: q below the sonic speed");
    const FlowState s = state_from_q(eos, consts, q);
    return s.a * s.gamma_a / (s.gamma * s.q);
}

double q_from_pi(const EquationOfState& eos, const BernoulliConstants& consts, double pi) {
    if (!(pi > 0.0) || pi > 1.0 + 1e-14)
        throw std::domain_error("q_from_pi: pi outside (0, 1]");
    if (pi >= 1.0) return consts.q_sonic;
    auto residual = [&](double q) { return pi_from_q(eos, consts, q) - pi; };
    const double lo = consts.q_sonic;
    const double hi = consts.q_hat * (1.0 - 1e-10);
    if (residual(hi) > 0.0)
        throw std::domain_error("q_from_pi: pi below the attainable range");
    return bisect_secant(residual, lo, hi, 1e-14, 300);
}

AngleCoefficients f_F1_F2(const FlowState& s) {
    AngleCoefficients k{};
    k.f = s.gamma_a * s.gamma_a + 2.0 * std::pow(s.a, 4) / (s.i * s.pdd);
    const double sw = s.pi_var;  // sin(omega)
    const double cw = std::cos(s.omega);
    k.F1 = 2.0 * s.i * s.pdd * s.gamma_a * s.gamma_a * k.f + 4.0 * s.a * s.a * sw * sw;
    k.F2 = s.i * s.q * s.gamma * s.gamma_a * s.pdd * k.f * cw * 2.0 * sw * cw;
    return k;
}

double I_of_pi(const EquationOfState& eos, const BernoulliConstants& consts, double pi,
               double k0) {
    const double lo = std::sin(k0);
    if (pi < lo - 1e-14 || pi > 1.0 + 1e-14)
        throw std::domain_error("I_of_pi: pi outside [sin k0, 1]");
    auto integrand = [&](double y) {
        const FlowState s = state_from_q(eos, consts, q_from_pi(eos, consts, y));
        const AngleCoefficients k = f_F1_F2(s);
        return 2.0 * s.a * s.a / (y * k.F1);
    };
    return integrate_adaptive(integrand, lo, std::min(pi, 1.0), 1e-12);
}

double F_of_t(const EquationOfState& eos, const BernoulliConstants& consts, double t) {
    if (!(t >= 0.0) || !(t < 1.0)) throw std::domain_error("F_of_t: t outside [0, 1)");
    const double pi = std::sqrt(1.0 - t * t);
    const FlowState s = state_from_q(eos, consts, q_from_pi(eos, consts, pi));
    const AngleCoefficients k = f_F1_F2(s);
    const double F1hat =
        4.0 * s.a * s.a * (1.0 - t * t) + 2.0 * s.i * s.pdd * s.gamma_a * s.gamma_a * k.f;
    return (1.0 - t * t) * F1hat / (4.0 * s.a * s.a);
}

}  // namespace sspatch
