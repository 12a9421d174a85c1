#include "sspatch/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace sspatch {

namespace {

struct Trig {
    double s = 0.0, cth = 0.0;  // sin(theta), cos(theta)
    double sa = 0.0, sb = 0.0;  // sin(alpha), sin(beta)
    double omt2 = 0.0, rt = 0.0;
};

Trig trig_of(double t, double theta) {
    Trig g;
    g.s = std::sin(theta);
    g.cth = std::cos(theta);
    g.omt2 = 1.0 - t * t;
    g.rt = std::sqrt(std::max(0.0, g.omt2));
    g.sa = t * g.s + g.rt * g.cth;
    g.sb = t * g.s - g.rt * g.cth;
    return g;
}

struct Rates {
    double lamp = 0.0, lamm = 0.0;
    double dP = 0.0;              // plus-family equation (W or 1/W)
    double dQ = 0.0, dr = 0.0, dth = 0.0;  // minus-family equations
};

// Closed system (primal form): the singular factor (W-Z)/(2t) enters as L.
Rates primal_rates(const BranchPoint& bp, double t, double W, double Z, double r,
                   double theta, double L) {
    const Trig g = trig_of(t, theta);
    const double F = bp.F, c = bp.c;
    Rates k;
    k.lamp = bp.lamc * r * t * t / (2.0 * F * Z * g.rt);
    k.lamm = -bp.lamc * r * t * t / (2.0 * F * W * g.rt);
    k.dP = (1.0 + c) * W / (Z * F) * L +
           (c + 2.0 * g.omt2 + (g.sb + 4.0 * g.s * t) / (4.0 * Z)) * W * t / F -
           g.sb * t / (4.0 * F) + t * g.s * g.s / (2.0 * F * Z);
    k.dQ = -(1.0 + c) * Z / (W * F) * L +
           (c + 2.0 * g.omt2 - (g.sa + 4.0 * g.s * t) / (4.0 * W)) * Z * t / F +
           g.sa * t / (4.0 * F) + t * g.s * g.s / (2.0 * F * W);
    k.dr = -t * r * g.sa / (2.0 * F * W);
    k.dth = t * g.rt * (g.s + 2.0 * t * W) / (2.0 * F * W);
    return k;
}

double H1_of(const BranchPoint& bp, double t, double Wb, double Zb, const Trig& g) {
    const double F = bp.F, c = bp.c;
    return (c + 2.0 - t * t) * (Wb - Zb) / (2.0 * F) - (c + 2.0 * g.omt2) * Wb / F -
           Wb / (2.0 * F) *
               (0.5 * g.sb * (Zb - Wb) + 2.0 * t * Zb * g.s + Wb * Zb * g.s * g.s);
}

double H2_of(const BranchPoint& bp, double t, double Wb, double Zb, const Trig& g) {
    const double F = bp.F, c = bp.c;
    return (c + 2.0 - t * t) * (Zb - Wb) / (2.0 * F) - (c + 2.0 * g.omt2) * Zb / F -
           Zb / (2.0 * F) *
               (0.5 * g.sa * (Zb - Wb) - 2.0 * t * Wb * g.s + Wb * Zb * g.s * g.s);
}

// Reciprocal form in (1/W, 1/Z); the singular factor (Wb-Zb)/(2t) = -L Wb Zb.
Rates reciprocal_rates(const BranchPoint& bp, double t, double Wb, double Zb, double r,
                       double theta, double L) {
    const Trig g = trig_of(t, theta);
    const double F = bp.F;
    Rates k;
    k.lamp = bp.lamc * r * t * t * Zb / (2.0 * F * g.rt);
    k.lamm = -bp.lamc * r * t * t * Wb / (2.0 * F * g.rt);
    const double singular = -L * Wb * Zb;
    k.dP = singular + t * H1_of(bp, t, Wb, Zb, g);
    k.dQ = -singular + t * H2_of(bp, t, Wb, Zb, g);
    k.dr = -Wb * t * r * g.sa / (2.0 * F);
    k.dth = t * g.rt * (Wb * g.s + 2.0 * t) / (2.0 * F);
    return k;
}

struct NodeState {
    double P = 0.0, Q = 0.0, r = 0.0, th = 0.0, L = 0.0;
};

}  // namespace

CharRates char_rates_at(const BranchPoint& bp, double t, double W, double Z, double r,
                        double theta, double L) {
    if (!(W > 0.0) || !(Z > 0.0))
        throw MarchError("char_rates: nonpositive W or Z (invariant region escape)", t, 0.0);
    const Rates k = primal_rates(bp, t, W, Z, r, theta, L);
    const Trig g = trig_of(t, theta);
    CharRates out;
    out.lambda_plus = k.lamp;
    out.lambda_minus = k.lamm;
    out.rhs_W = k.dP;
    out.rhs_Z = k.dQ;
    out.rhs_r = k.dr;
    out.rhs_theta = k.dth;
    out.H1 = H1_of(bp, t, 1.0 / W, 1.0 / Z, g);
    out.H2 = H2_of(bp, t, 1.0 / W, 1.0 / Z, g);
    const double omega = std::acos(std::min(1.0, std::max(-1.0, t)));
    out.alpha = theta + omega;
    out.beta = theta - omega;
    return out;
}

CharRates char_rates(const EquationOfState& eos, const BernoulliConstants& consts, double t,
                     double W, double Z, double r, double theta) {
    if (!(t > 0.0) || !(t < 1.0)) throw std::domain_error("char_rates: t outside (0,1)");
    const double pi = std::sqrt(1.0 - t * t);
    const FlowState s = state_from_q(eos, consts, q_from_pi(eos, consts, pi));
    const AngleCoefficients kc = f_F1_F2(s);
    BranchPoint bp{};
    bp.t = t;
    bp.pi = pi;
    bp.rho = s.rho;
    bp.q = s.q;
    bp.a = s.a;
    bp.gamma = s.gamma;
    bp.gamma_a = s.gamma_a;
    bp.i = s.i;
    bp.pdd = s.pdd;
    bp.f = kc.f;
    bp.c = s.i * s.gamma_a * s.gamma_a * s.pdd * kc.f / (2.0 * s.a * s.a);
    bp.F = (1.0 - t * t) * (bp.c + 1.0 - t * t);
    bp.lamc = s.a * s.gamma_a / s.gamma;
    const double L = (W - Z) / (2.0 * t);
    return char_rates_at(bp, t, W, Z, r, theta, L);
}

// ---------------------------------------------------------------------------
// marching
// ---------------------------------------------------------------------------

namespace {

struct WorkLevel {
    double t = 0.0, lo = 0.0, hi = 0.0;
    std::vector<double> psi, P, Q, r, th, L;
    Interp1D iP, iQ, ir, ith, iL;
};

struct Foot {
    bool boundary = false;
    double t = 0.0, psi = 0.0, h = 0.0;  // h = t_foot - t_new
    NodeState s;
};

class Marcher {
  public:
    Marcher(const HodographBoundary& bd, const DomainParams& params,
            const OmegaRegion& region, const SolverConfig& cfg,
            const BernoulliBranch& branch)
        : bd_(bd), params_(params), region_(region), cfg_(cfg), branch_(branch) {
        recip_ = cfg.form == SystemForm::Reciprocal;
        if (!(cfg_.t_min > 0.0) || !(cfg_.t_min < region_.delta))
            throw std::invalid_argument("march: t_min outside (0, delta)");
        if (cfg_.n_levels < 2) throw std::invalid_argument("march: n_levels < 2");
        t_guard_ = std::min(cfg_.t_guard_factor * cfg_.t_min,
                            0.5 * (region_.delta + cfg_.t_min));
        const int n_psi = cfg_.n_psi > 0 ? cfg_.n_psi : 2 * cfg_.n_levels;
        dpsi_ = region_.psi_bar0 / std::max(1, n_psi - 1);
    }

    HodographField run() {
        HodographField field;
        field.form = cfg_.form;
        field.delta = region_.delta;
        field.t_min = cfg_.t_min;
        field.t_guard = t_guard_;
        field.dpsi_target = dpsi_;
        auto& diag = field.diag;
        diag.min_W = diag.min_Z = diag.min_r = std::numeric_limits<double>::infinity();
        diag.box_margin = diag.r_margin = std::numeric_limits<double>::infinity();

        const double dt = (region_.delta - cfg_.t_min) / cfg_.n_levels;

        // corner level: single boundary node at T'
        WorkLevel prev = boundary_level(region_.delta);
        commit(field, prev);

        for (int k = 1; k <= cfg_.n_levels; ++k) {
            const double t_new =
                (k == cfg_.n_levels) ? cfg_.t_min : region_.delta - k * dt;
            WorkLevel cur = new_level_shell(t_new);
            const BranchPoint bp_new = branch_.at(t_new);
            const BranchPoint bp_prev = branch_.at(prev.t);
            for (std::size_t j = 0; j < cur.psi.size(); ++j) {
                if (j == 0) {
                    assign_boundary(cur, j, t_new);
                    continue;
                }
                update_node(prev, cur, j, bp_prev, bp_new);
            }
            refresh_L(cur);
            check_level(cur, field);
            cur.iP = Interp1D(cur.psi, cur.P, cfg_.interp_order);
            cur.iQ = Interp1D(cur.psi, cur.Q, cfg_.interp_order);
            cur.ir = Interp1D(cur.psi, cur.r, cfg_.interp_order);
            cur.ith = Interp1D(cur.psi, cur.th, cfg_.interp_order);
            cur.iL = Interp1D(cur.psi, cur.L, cfg_.interp_order);
            maybe_update_guard_basis(cur);
            commit(field, cur);
            prev = std::move(cur);
        }
        return field;
    }

  private:
    // -- level construction ---------------------------------------------------

    WorkLevel boundary_level(double t) {
        WorkLevel lv;
        lv.t = t;
        lv.lo = lv.hi = bd_.psi_tilde(t);
        lv.psi = {lv.lo};
        const BoundaryState bs = bd_.at_t(t);
        lv.P = {to_marched(bs.b)};
        lv.Q = {to_marched(bs.c)};
        lv.r = {bs.r};
        lv.th = {bs.theta};
        lv.L = {-bs.d};
        lv.iP = Interp1D(lv.psi, lv.P, 1);
        lv.iQ = Interp1D(lv.psi, lv.Q, 1);
        lv.ir = Interp1D(lv.psi, lv.r, 1);
        lv.ith = Interp1D(lv.psi, lv.th, 1);
        lv.iL = Interp1D(lv.psi, lv.L, 1);
        return lv;
    }

    WorkLevel new_level_shell(double t) {
        WorkLevel lv;
        lv.t = t;
        lv.lo = bd_.psi_tilde(t);
        lv.hi = region_.barrier(t);
        if (!(lv.hi > lv.lo))
            throw MarchError("march: barrier below the data curve", t, lv.lo);
        const double width = lv.hi - lv.lo;
        const int n = std::max(2, static_cast<int>(std::round(width / dpsi_)) + 1);
        lv.psi.resize(n);
        for (int j = 0; j < n; ++j) lv.psi[j] = lv.lo + width * j / (n - 1);
        lv.P.assign(n, 0.0);
        lv.Q.assign(n, 0.0);
        lv.r.assign(n, 0.0);
        lv.th.assign(n, 0.0);
        lv.L.assign(n, 0.0);
        return lv;
    }

    void assign_boundary(WorkLevel& lv, std::size_t j, double t) {
        const BoundaryState bs = bd_.at_t(t);
        lv.P[j] = to_marched(bs.b);
        lv.Q[j] = to_marched(bs.c);
        lv.r[j] = bs.r;
        lv.th[j] = bs.theta;
        lv.L[j] = -bs.d;
    }

    double to_marched(double v) const { return recip_ ? 1.0 / v : v; }
    double to_canonical(double v) const { return recip_ ? 1.0 / v : v; }

    NodeState state_on(const WorkLevel& lv, double psi) const {
        NodeState s;
        s.P = lv.iP(psi);
        s.Q = lv.iQ(psi);
        s.r = lv.ir(psi);
        s.th = lv.ith(psi);
        s.L = lv.iL(psi);
        return s;
    }

    NodeState boundary_state(double t) const {
        const BoundaryState bs = bd_.at_t(t);
        NodeState s;
        s.P = to_marched(bs.b);
        s.Q = to_marched(bs.c);
        s.r = bs.r;
        s.th = bs.theta;
        s.L = -bs.d;
        return s;
    }

    Rates rates_of(const BranchPoint& bp, double t, const NodeState& s) const {
        const double W = to_canonical(s.P), Z = to_canonical(s.Q);
        if (!(W > 0.0) || !(Z > 0.0))
            throw MarchError("march: nonpositive W or Z", t, 0.0);
        return recip_ ? reciprocal_rates(bp, t, s.P, s.Q, s.r, s.th, s.L)
                      : primal_rates(bp, t, s.P, s.Q, s.r, s.th, s.L);
    }

    // -- foot location ----------------------------------------------------------

    // Locate the foot of a characteristic with (approximately) constant slope
    // lam over [t_new, t_prev]; the foot is either on the previous level or on
    // the data curve where the characteristic exits.
    Foot locate_foot(const WorkLevel& prev, double t_new, double psi_j, double lam) const {
        Foot f;
        const double h = prev.t - t_new;
        const double psi_land = psi_j + h * lam;
        const double tol = 1e-9 * std::max(1.0, std::abs(prev.hi));
        if (psi_land > prev.hi + std::max(tol, 1e-7 * (prev.hi - prev.lo + dpsi_)))
            throw MarchError("march: characteristic escapes through the barrier", t_new,
                             psi_j);
        if (psi_land >= prev.lo) {
            f.boundary = false;
            f.t = prev.t;
            f.psi = std::min(psi_land, prev.hi);
            f.h = h;
            f.s = state_on(prev, f.psi);
            return f;
        }
        // crossing of the data curve: psi_j + (tau - t_new) lam = psi_tilde(tau)
        auto gfun = [&](double tau) {
            return psi_j + (tau - t_new) * lam - bd_.psi_tilde(tau);
        };
        double tau;
        if (gfun(t_new) <= 0.0) {
            tau = t_new;  // node sits on (or below) the data curve already
        } else {
            tau = bisect_secant(gfun, t_new, prev.t, 1e-13, 200);
        }
        f.boundary = true;
        f.t = tau;
        f.psi = bd_.psi_tilde(tau);
        f.h = tau - t_new;
        f.s = boundary_state(tau);
        return f;
    }

    double L_at_new(double t, double psi, double W, double Z) const {
        if (t >= t_guard_ || !guard_ready_) return (W - Z) / (2.0 * t);
        // quadratic extrapolation in t through the three guarded levels
        const double t0 = guard_t_[0], t1 = guard_t_[1], t2 = guard_t_[2];
        const double L0 = guard_L_[0](psi), L1 = guard_L_[1](psi), L2 = guard_L_[2](psi);
        const double w0 = (t - t1) * (t - t2) / ((t0 - t1) * (t0 - t2));
        const double w1 = (t - t0) * (t - t2) / ((t1 - t0) * (t1 - t2));
        const double w2 = (t - t0) * (t - t1) / ((t2 - t0) * (t2 - t1));
        return w0 * L0 + w1 * L1 + w2 * L2;
    }

    void update_node(const WorkLevel& prev, WorkLevel& cur, std::size_t j,
                     const BranchPoint& bp_prev, const BranchPoint& bp_new) {
        const double t_new = cur.t;
        const double psi_j = cur.psi[j];

        // slope estimates from the previous level directly above the node
        const NodeState near = state_on(prev, psi_j);
        const Rates rates_near = rates_of(bp_prev, prev.t, near);

        // predictor feet (one fixed-point refinement of the landing point)
        Foot fp = locate_foot(prev, t_new, psi_j, rates_near.lamp);
        {
            const BranchPoint bpf = fp.boundary ? branch_.at(fp.t) : bp_prev;
            const Rates rf = rates_of(bpf, fp.t, fp.s);
            fp = locate_foot(prev, t_new, psi_j, rf.lamp);
        }
        Foot fm = locate_foot(prev, t_new, psi_j, rates_near.lamm);
        {
            const BranchPoint bpf = fm.boundary ? branch_.at(fm.t) : bp_prev;
            const Rates rf = rates_of(bpf, fm.t, fm.s);
            fm = locate_foot(prev, t_new, psi_j, rf.lamm);
        }

        const BranchPoint bp_fp = fp.boundary ? branch_.at(fp.t) : bp_prev;
        const BranchPoint bp_fm = fm.boundary ? branch_.at(fm.t) : bp_prev;
        const Rates r_fp = rates_of(bp_fp, fp.t, fp.s);
        const Rates r_fm = rates_of(bp_fm, fm.t, fm.s);

        // explicit predictor
        NodeState star;
        star.P = fp.s.P - fp.h * r_fp.dP;
        star.Q = fm.s.Q - fm.h * r_fm.dQ;
        star.r = fm.s.r - fm.h * r_fm.dr;
        star.th = fm.s.th - fm.h * r_fm.dth;
        {
            const double W = to_canonical(star.P), Z = to_canonical(star.Q);
            if (!(W > 0.0) || !(Z > 0.0))
                throw MarchError("march: predictor left the invariant region", t_new, psi_j);
            star.L = L_at_new(t_new, psi_j, W, Z);
        }
        const Rates r_star = rates_of(bp_new, t_new, star);

        // corrector: feet from averaged slopes, trapezoidal update
        Foot fp2 = locate_foot(prev, t_new, psi_j, 0.5 * (r_fp.lamp + r_star.lamp));
        Foot fm2 = locate_foot(prev, t_new, psi_j, 0.5 * (r_fm.lamm + r_star.lamm));
        const BranchPoint bp_fp2 = fp2.boundary ? branch_.at(fp2.t) : bp_prev;
        const BranchPoint bp_fm2 = fm2.boundary ? branch_.at(fm2.t) : bp_prev;
        const Rates r_fp2 = rates_of(bp_fp2, fp2.t, fp2.s);
        const Rates r_fm2 = rates_of(bp_fm2, fm2.t, fm2.s);

        cur.P[j] = fp2.s.P - 0.5 * fp2.h * (r_fp2.dP + r_star.dP);
        cur.Q[j] = fm2.s.Q - 0.5 * fm2.h * (r_fm2.dQ + r_star.dQ);
        cur.r[j] = fm2.s.r - 0.5 * fm2.h * (r_fm2.dr + r_star.dr);
        cur.th[j] = fm2.s.th - 0.5 * fm2.h * (r_fm2.dth + r_star.dth);
    }

    void refresh_L(WorkLevel& lv) {
        for (std::size_t j = 1; j < lv.psi.size(); ++j) {
            const double W = to_canonical(lv.P[j]), Z = to_canonical(lv.Q[j]);
            lv.L[j] = L_at_new(lv.t, lv.psi[j], W, Z);
        }
    }

    void maybe_update_guard_basis(const WorkLevel& lv) {
        if (lv.t < t_guard_) return;
        guard_t_[0] = guard_t_[1];
        guard_t_[1] = guard_t_[2];
        guard_t_[2] = lv.t;
        guard_L_[0] = std::move(guard_L_[1]);
        guard_L_[1] = std::move(guard_L_[2]);
        guard_L_[2] = Interp1D(lv.psi, lv.L, cfg_.interp_order);
        if (guard_fill_ < 3) ++guard_fill_;
        guard_ready_ = guard_fill_ >= 3;
    }

    void check_level(const WorkLevel& lv, HodographField& field) {
        auto& d = field.diag;
        double maxWmZ = 0.0, minWZ = std::numeric_limits<double>::infinity(), maxWZ = 0.0;
        double max_lam = 0.0;
        const BranchPoint bp = branch_.at(lv.t);
        for (std::size_t j = 0; j < lv.psi.size(); ++j) {
            const double W = to_canonical(lv.P[j]), Z = to_canonical(lv.Q[j]);
            const double r = lv.r[j];
            const double box_m =
                std::min(std::min(W - 0.5 * params_.m0_hat, params_.M0_hat + 1.0 - W),
                         std::min(Z - 0.5 * params_.m0_hat, params_.M0_hat + 1.0 - Z));
            const double r_m = std::min(r - params_.r_lo, params_.r_hi - r);
            if (!(box_m > 0.0))
                throw MarchError("march: invariant box violated (W=" + std::to_string(W) +
                                     ", Z=" + std::to_string(Z) + ")",
                                 lv.t, lv.psi[j]);
            if (!(r_m >= 0.0))
                throw MarchError("march: r outside the exponential bounds", lv.t, lv.psi[j]);
            d.box_margin = std::min(d.box_margin, box_m);
            d.r_margin = std::min(d.r_margin, r_m);
            d.min_W = std::min(d.min_W, W);
            d.max_W = std::max(d.max_W, W);
            d.min_Z = std::min(d.min_Z, Z);
            d.max_Z = std::max(d.max_Z, Z);
            d.min_r = std::min(d.min_r, r);
            d.max_r = std::max(d.max_r, r);
            maxWmZ = std::max(maxWmZ, std::abs(W - Z));
            minWZ = std::min(minWZ, std::min(W, Z));
            maxWZ = std::max(maxWZ, std::max(W, Z));
            const double lam_over_t2 =
                bp.lamc * r / (2.0 * bp.F * Z * std::sqrt(1.0 - lv.t * lv.t));
            max_lam = std::max(max_lam, lam_over_t2);
            // cfl bookkeeping: worst |lambda| dt / dpsi on this level
            if (lv.psi.size() > 1) {
                const double dpsi_lv = lv.psi[1] - lv.psi[0];
                const double lam_abs = lam_over_t2 * lv.t * lv.t * std::max(1.0, W / Z);
                const double dt_lv = field.levels.empty()
                                         ? 0.0
                                         : std::abs(field.levels.back().t - lv.t);
                if (dpsi_lv > 0.0 && dt_lv > 0.0)
                    d.worst_cfl = std::max(d.worst_cfl, lam_abs * dt_lv / dpsi_lv);
            }
        }
        d.max_lam_over_t2 = std::max(d.max_lam_over_t2, max_lam);
        d.level_t.push_back(lv.t);
        d.level_min_WZ.push_back(minWZ);
        d.level_max_WZ.push_back(maxWZ);
        d.level_max_absWmZ.push_back(maxWmZ);
    }

    void commit(HodographField& field, const WorkLevel& lv) {
        Level out;
        out.t = lv.t;
        out.psi = lv.psi;
        out.W.resize(lv.psi.size());
        out.Z.resize(lv.psi.size());
        for (std::size_t j = 0; j < lv.psi.size(); ++j) {
            out.W[j] = to_canonical(lv.P[j]);
            out.Z[j] = to_canonical(lv.Q[j]);
        }
        out.r = lv.r;
        out.theta = lv.th;
        out.L = lv.L;
        out.iW = Interp1D(out.psi, out.W, cfg_.interp_order);
        out.iZ = Interp1D(out.psi, out.Z, cfg_.interp_order);
        out.ir = Interp1D(out.psi, out.r, cfg_.interp_order);
        out.itheta = Interp1D(out.psi, out.theta, cfg_.interp_order);
        out.iL = Interp1D(out.psi, out.L, cfg_.interp_order);
        field.levels.push_back(std::move(out));
    }

    const HodographBoundary& bd_;
    const DomainParams& params_;
    const OmegaRegion& region_;
    SolverConfig cfg_;
    const BernoulliBranch& branch_;
    bool recip_ = false;
    double t_guard_ = 0.0, dpsi_ = 0.0;
    bool guard_ready_ = false;
    int guard_fill_ = 0;
    std::array<double, 3> guard_t_{};
    std::array<Interp1D, 3> guard_L_{};
};

}  // namespace

HodographField march(const HodographBoundary& boundary, const DomainParams& params,
                     const OmegaRegion& region, const SolverConfig& cfg,
                     const std::shared_ptr<const BernoulliBranch>& branch) {
    Marcher m(boundary, params, region, cfg, *branch);
    return m.run();
}

std::size_t HodographField::level_below(double t) const {
    // levels are sorted by decreasing t
    std::size_t lo = 0, hi = levels.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (levels[mid].t <= t)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

namespace {

double sample_field(const HodographField& f, double t, double psi,
                    Interp1D Level::*interp) {
    const auto& ls = f.levels;
    if (t >= ls.front().t) return (ls.front().*interp)(psi);
    if (t <= ls.back().t) return (ls.back().*interp)(psi);
    const std::size_t ib = f.level_below(t);
    const Level& below = ls[ib];
    const Level& above = ls[ib - 1];
    const double w = (t - below.t) / (above.t - below.t);
    return (1.0 - w) * (below.*interp)(psi) + w * (above.*interp)(psi);
}

}  // namespace

double HodographField::sample_W(double t, double psi) const {
    return sample_field(*this, t, psi, &Level::iW);
}
double HodographField::sample_Z(double t, double psi) const {
    return sample_field(*this, t, psi, &Level::iZ);
}
double HodographField::sample_r(double t, double psi) const {
    return sample_field(*this, t, psi, &Level::ir);
}
double HodographField::sample_theta(double t, double psi) const {
    return sample_field(*this, t, psi, &Level::itheta);
}
double HodographField::sample_L(double t, double psi) const {
    return sample_field(*this, t, psi, &Level::iL);
}

SonicTrace sonic_extrapolate(const HodographField& field) {
    if (field.levels.size() < 2)
        throw std::invalid_argument("sonic_extrapolate: need at least two levels");
    const Level& deep = field.levels.back();
    const Level& up = field.levels[field.levels.size() - 2];
    SonicTrace tr;
    tr.psi = deep.psi;
    const std::size_t n = deep.psi.size();
    tr.W.resize(n);
    tr.Z.resize(n);
    tr.W_merged.resize(n);
    tr.r.resize(n);
    tr.theta.resize(n);
    tr.L.resize(n);
    double supL = 0.0;
    for (const auto& lv : field.levels)
        for (const double l : lv.L) supL = std::max(supL, std::abs(l));
    tr.sup_L = supL;
    const double tn = deep.t, tp = up.t;
    double max_dis = 0.0, max_con = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        const double psi = deep.psi[j];
        auto extrap = [&](Interp1D Level::*iq, std::vector<double> Level::*vq) {
            const double vn = (deep.*vq)[j];
            const double vp = (up.*iq)(psi);
            const double slope = (vp - vn) / (tp - tn);
            return vn - slope * tn;
        };
        tr.W[j] = extrap(&Level::iW, &Level::W);
        tr.Z[j] = extrap(&Level::iZ, &Level::Z);
        tr.r[j] = extrap(&Level::ir, &Level::r);
        tr.theta[j] = extrap(&Level::itheta, &Level::theta);
        tr.L[j] = extrap(&Level::iL, &Level::L);
        tr.W_merged[j] = 0.5 * (tr.W[j] + tr.Z[j]);
        max_dis = std::max(max_dis, std::abs(tr.W[j] - tr.Z[j]));
        max_con = std::max(max_con, std::abs(deep.W[j] - deep.Z[j]) - 2.0 * tn * supL);
    }
    tr.max_disagreement = max_dis;
    tr.disagreement_tol = 3.0 * tn * supL;
    tr.within_tolerance = max_dis <= tr.disagreement_tol;
    tr.constraint_residual = max_con;
    return tr;
}

}  // namespace sspatch
