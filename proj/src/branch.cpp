#include "sspatch/branch.hpp"

#include <cmath>
#include <stdexcept>

namespace sspatch {

namespace {

struct RawPoint {
    double t, rho, q, a, gamma, gamma_a, i, pdd, f, c, F, lamc;
};

RawPoint eval_at_rho(const EquationOfState& eos, const BernoulliConstants& consts,
                     double rho) {
    RawPoint r{};
    r.rho = rho;
    r.a = eos.sound_speed(rho);
    r.i = eos.enthalpy_density(rho);
    r.pdd = eos.d2p(rho);
    const double n = eos.number_density(rho);
    r.gamma = consts.mg_hat * n / r.i;
    if (r.gamma < 1.0)
        throw std::runtime_error("branch: state left the Bernoulli branch at rho=" +
                                 std::to_string(rho));
    r.q = std::sqrt(std::max(0.0, 1.0 - 1.0 / (r.gamma * r.gamma)));
    r.gamma_a = 1.0 / std::sqrt(1.0 - r.a * r.a);
    const double pi = std::min(1.0, r.a * r.gamma_a / (r.gamma * r.q));
    r.t = std::sqrt(std::max(0.0, 1.0 - pi * pi));
    r.f = r.gamma_a * r.gamma_a + 2.0 * std::pow(r.a, 4) / (r.i * r.pdd);
    r.c = r.i * r.gamma_a * r.gamma_a * r.pdd * r.f / (2.0 * r.a * r.a);
    const double omt2 = 1.0 - r.t * r.t;
    r.F = omt2 * (r.c + omt2);
    r.lamc = r.a * r.gamma_a / r.gamma;
    return r;
}

}  // namespace

BernoulliBranch::BernoulliBranch(const EquationOfState& eos,
                                 const BernoulliConstants& consts, double t_max,
                                 int samples)
    : consts_(consts), t_max_(t_max) {
    if (!(t_max > 0.0 && t_max < 1.0))
        throw std::invalid_argument("branch: t_max outside (0,1)");
    if (samples < 16) throw std::invalid_argument("branch: too few samples");

    // locate the density where t reaches t_max (with a small margin)
    const double t_target = std::min(0.999, t_max * 1.02 + 1e-6);
    auto t_of_rho = [&](double rho) { return eval_at_rho(eos, consts, rho).t; };
    double rho_lo = consts.rho_sonic * 1e-6;
    if (t_of_rho(rho_lo) < t_target)
        throw std::invalid_argument("branch: t_max not attainable before vacuum");
    const double rho_end = bisect_secant(
        [&](double rho) { return t_of_rho(rho) - t_target; }, rho_lo,
        consts.rho_sonic * (1.0 - 1e-12), 1e-14 * consts.rho_sonic, 200);

    // coarse sweep in rho to learn the knot placement rho(t)
    Interp1D rho_of_t;
    {
        std::vector<double> ct, cr;
        const int nc = 512;
        for (int k = 0; k <= nc; ++k) {
            const double rho = consts.rho_sonic + (rho_end - consts.rho_sonic) * k / nc;
            RawPoint r = eval_at_rho(eos, consts, rho);
            if (k == 0) r.t = 0.0;
            if (!ct.empty() && !(r.t > ct.back())) continue;
            ct.push_back(r.t);
            cr.push_back(rho);
        }
        rho_of_t = Interp1D(std::move(ct), std::move(cr));
    }
    const double t_hi = rho_of_t.x_back();

    // exact states on a near-uniform t grid
    std::vector<double> ts, as, qs, rhos, gs, gas, is, pdds, fs, cs, Fs, lamcs;
    ts.reserve(samples + 4);
    for (int k = 0; k <= samples; ++k) {
        const double rho = (k == 0) ? consts.rho_sonic : rho_of_t(t_hi * k / samples);
        RawPoint r = eval_at_rho(eos, consts, rho);
        if (k == 0) r.t = 0.0;  // exact sonic anchor
        if (!ts.empty() && !(r.t > ts.back())) continue;  // guard duplicate abscissas
        ts.push_back(r.t);
        as.push_back(r.a);
        qs.push_back(r.q);
        rhos.push_back(r.rho);
        gs.push_back(r.gamma);
        gas.push_back(r.gamma_a);
        is.push_back(r.i);
        pdds.push_back(r.pdd);
        fs.push_back(r.f);
        cs.push_back(r.c);
        Fs.push_back(r.F);
        lamcs.push_back(r.lamc);
    }
    // Every branch quantity is even in t near the sonic line; mirror the first
    // interior samples across t = 0 so the interpolant carries the correct
    // zero slope there instead of a one-sided estimate.
    auto mirror = [](std::vector<double>& v, const std::vector<double>& src, bool negate) {
        std::vector<double> out;
        out.reserve(v.size() + 3);
        for (int k = 3; k >= 1; --k) out.push_back(negate ? -src[k] : src[k]);
        out.insert(out.end(), v.begin(), v.end());
        v = std::move(out);
    };
    const std::vector<double> ts_src = ts;
    mirror(ts, ts_src, true);
    mirror(as, as, false);
    mirror(qs, qs, false);
    mirror(rhos, rhos, false);
    mirror(gs, gs, false);
    mirror(gas, gas, false);
    mirror(is, is, false);
    mirror(pdds, pdds, false);
    mirror(fs, fs, false);
    mirror(cs, cs, false);
    mirror(Fs, Fs, false);
    mirror(lamcs, lamcs, false);
    a_ = Interp1D(ts, as);
    q_ = Interp1D(ts, qs);
    rho_ = Interp1D(ts, rhos);
    gamma_ = Interp1D(ts, gs);
    gamma_a_ = Interp1D(ts, gas);
    i_ = Interp1D(ts, is);
    pdd_ = Interp1D(ts, pdds);
    f_ = Interp1D(ts, fs);
    c_ = Interp1D(ts, cs);
    F_ = Interp1D(ts, Fs);
    lamc_ = Interp1D(std::move(ts), std::move(lamcs));
}

BranchPoint BernoulliBranch::at(double t) const {
    BranchPoint p{};
    p.t = t;
    p.pi = std::sqrt(std::max(0.0, 1.0 - t * t));
    p.a = a_(t);
    p.q = q_(t);
    p.rho = rho_(t);
    p.gamma = gamma_(t);
    p.gamma_a = gamma_a_(t);
    p.i = i_(t);
    p.pdd = pdd_(t);
    p.f = f_(t);
    p.c = c_(t);
    p.F = F_(t);
    p.lamc = lamc_(t);
    return p;
}

}  // namespace sspatch
