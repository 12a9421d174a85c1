#include "sspatch/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sspatch {

double holder_quotient(const std::vector<std::array<double, 2>>& positions,
                       const std::vector<double>& values, double exponent,
                       std::uint64_t seed, std::size_t pair_cap) {
    if (positions.size() != values.size() || positions.size() < 2)
        throw std::invalid_argument("holder_quotient: need >= 2 samples");
    if (!(exponent > 0.0) || exponent > 1.0)
        throw std::invalid_argument("holder_quotient: exponent outside (0, 1]");
    const std::size_t n = positions.size();
    auto quotient = [&](std::size_t i, std::size_t j) {
        const double dx = positions[i][0] - positions[j][0];
        const double dy = positions[i][1] - positions[j][1];
        const double dist = std::hypot(dx, dy);
        if (dist == 0.0) return 0.0;
        return std::abs(values[i] - values[j]) / std::pow(dist, exponent);
    };
    double sup = 0.0;
    const std::size_t total = n * (n - 1) / 2;
    if (total <= pair_cap) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) sup = std::max(sup, quotient(i, j));
    } else {
        SplitMix64 rng(seed ^ 0x9d2c5680a7b4f1e3ULL);
        for (std::size_t k = 0; k < pair_cap; ++k) {
            const std::size_t i = rng.below(n);
            std::size_t j = rng.below(n - 1);
            if (j >= i) ++j;
            sup = std::max(sup, quotient(i, j));
        }
    }
    return sup;
}

namespace {

// Structured resampling of one grid on a shared normalized span coordinate;
// all physical-plane finite differences run through this view.
struct StructuredView {
    std::size_t K = 0, M = 0;
    double dt = 0.0, ds = 0.0;
    std::vector<double> t, lo, hi, lo_p, hi_p, pi_lvl, a_lvl, F_lvl, lamc_lvl, c_lvl;
    std::vector<std::vector<double>> x, r, W, Z, L, theta, u, v;
};

StructuredView build_view(const GridArtifacts& g, const HodographBoundary& hb,
                          const OmegaRegion& region, const BernoulliBranch& branch) {
    StructuredView sv;
    sv.K = g.field.levels.size();
    sv.M = g.field.levels.back().psi.size();
    sv.ds = 1.0 / (sv.M - 1);
    sv.t.resize(sv.K);
    sv.lo.resize(sv.K);
    sv.hi.resize(sv.K);
    sv.lo_p.resize(sv.K);
    sv.hi_p.resize(sv.K);
    sv.pi_lvl.resize(sv.K);
    sv.a_lvl.resize(sv.K);
    sv.F_lvl.resize(sv.K);
    sv.lamc_lvl.resize(sv.K);
    sv.c_lvl.resize(sv.K);
    auto alloc = [&](std::vector<std::vector<double>>& q) {
        q.assign(sv.K, std::vector<double>(sv.M, 0.0));
    };
    alloc(sv.x);
    alloc(sv.r);
    alloc(sv.W);
    alloc(sv.Z);
    alloc(sv.L);
    alloc(sv.theta);
    alloc(sv.u);
    alloc(sv.v);
    for (std::size_t k = 0; k < sv.K; ++k) {
        const Level& lv = g.field.levels[k];
        const BranchPoint bp = branch.at(lv.t);
        sv.t[k] = lv.t;
        sv.lo[k] = lv.psi.front();
        sv.hi[k] = lv.psi.back();
        sv.lo_p[k] = hb.psi_tilde_prime(lv.t);
        sv.hi_p[k] = region.barrier_prime(lv.t);
        sv.pi_lvl[k] = bp.pi;
        sv.a_lvl[k] = bp.a;
        sv.F_lvl[k] = bp.F;
        sv.lamc_lvl[k] = bp.lamc;
        sv.c_lvl[k] = bp.c;
        const double speed = bp.a * bp.gamma_a / (bp.gamma * bp.pi);
        for (std::size_t i = 0; i < sv.M; ++i) {
            const double s = i * sv.ds;
            const double psi = sv.lo[k] + s * (sv.hi[k] - sv.lo[k]);
            sv.x[k][i] = g.xf.ix[k](psi);
            sv.r[k][i] = lv.ir(psi);
            sv.W[k][i] = lv.iW(psi);
            sv.Z[k][i] = lv.iZ(psi);
            sv.L[k][i] = lv.iL(psi);
            sv.theta[k][i] = lv.itheta(psi);
            sv.u[k][i] = speed * std::cos(sv.theta[k][i]);
            sv.v[k][i] = speed * std::sin(sv.theta[k][i]);
        }
    }
    sv.dt = (sv.t.front() - sv.t.back()) / (sv.K - 1);
    return sv;
}

// derivatives of one quantity at an interior node, first in (t, psi), then in
// the physical plane through the finite-difference Jacobian
struct NodeDerivs {
    double d_t = 0.0, d_psi = 0.0;  // at fixed psi / fixed t
};

NodeDerivs derivs_of(const StructuredView& sv, const std::vector<std::vector<double>>& q,
                     std::size_t k, std::size_t i) {
    NodeDerivs d;
    const double s = i * sv.ds;
    const double w = sv.hi[k] - sv.lo[k];
    const double q_s = (q[k][i + 1] - q[k][i - 1]) / (2.0 * sv.ds);
    const double q_t_s = (q[k - 1][i] - q[k + 1][i]) / (2.0 * sv.dt);
    const double psi_t = sv.lo_p[k] + s * (sv.hi_p[k] - sv.lo_p[k]);
    d.d_psi = q_s / w;
    d.d_t = q_t_s - d.d_psi * psi_t;
    return d;
}

struct PhysDerivs {
    double d_x = 0.0, d_r = 0.0;
};

struct NodeFrame {
    NodeDerivs x, r;
    double j_fd = 0.0;
};

NodeFrame frame_of(const StructuredView& sv, std::size_t k, std::size_t i) {
    NodeFrame f;
    f.x = derivs_of(sv, sv.x, k, i);
    f.r = derivs_of(sv, sv.r, k, i);
    f.j_fd = f.x.d_t * f.r.d_psi - f.x.d_psi * f.r.d_t;
    return f;
}

PhysDerivs to_physical(const NodeFrame& f, const NodeDerivs& q) {
    PhysDerivs p;
    p.d_x = (q.d_t * f.r.d_psi - q.d_psi * f.r.d_t) / f.j_fd;
    p.d_r = (q.d_psi * f.x.d_t - q.d_t * f.x.d_psi) / f.j_fd;
    return p;
}

// interior iteration with the degenerate corner trimmed away
template <class Fn>
void for_interior(const StructuredView& sv, Fn&& fn) {
    const double w_deep = sv.hi.back() - sv.lo.back();
    for (std::size_t k = 1; k + 1 < sv.K; ++k) {
        if (sv.hi[k] - sv.lo[k] < 0.02 * w_deep) continue;
        for (std::size_t i = 1; i + 1 < sv.M; ++i) fn(k, i);
    }
}

std::string loc_string(double t, double psi) {
    std::ostringstream os;
    os.precision(6);
    os << "(t=" << t << ", psi=" << psi << ")";
    return os.str();
}

double order_from_trend(const std::vector<double>& residuals) {
    // mean halving order between the coarsest and finest grids
    if (residuals.size() < 2 || residuals.front() <= 0.0 || residuals.back() <= 0.0)
        return 0.0;
    const double halvings = static_cast<double>(residuals.size() - 1);
    return std::log2(residuals.front() / residuals.back()) / halvings;
}

}  // namespace

std::vector<CheckReport> run_all(const std::vector<GridArtifacts>& grids,
                                 const DomainParams& params, const OmegaRegion& region,
                                 const HodographBoundary& boundary,
                                 const BernoulliBranch& branch, const StreamlineSpec& spec,
                                 const VerifyConfig& vcfg,
                                 const HodographField* reciprocal_field) {
    if (grids.empty()) throw std::invalid_argument("run_all: no grids");
    std::vector<CheckReport> out;
    const GridArtifacts& fine = grids.back();
    const bool multigrid = grids.size() >= 2;

    std::vector<StructuredView> views;
    views.reserve(grids.size());
    for (const auto& g : grids) views.push_back(build_view(g, boundary, region, branch));

    // --- invariant box (Lemma 4.1) -------------------------------------------
    {
        CheckReport c;
        c.name = "invariant_box_WZ";
        double margin = std::numeric_limits<double>::infinity();
        for (const auto& lv : fine.field.levels)
            for (std::size_t j = 0; j < lv.psi.size(); ++j) {
                const double m = std::min(
                    std::min(lv.W[j] - 0.5 * params.m0_hat, params.M0_hat + 1.0 - lv.W[j]),
                    std::min(lv.Z[j] - 0.5 * params.m0_hat, params.M0_hat + 1.0 - lv.Z[j]));
                if (m < margin) {
                    margin = m;
                    c.location = loc_string(lv.t, lv.psi[j]);
                }
            }
        c.margin = margin;
        c.passed = margin > 0.0;
        out.push_back(c);
    }
    {
        CheckReport c;
        c.name = "r_exponential_bounds";
        double margin = std::numeric_limits<double>::infinity();
        for (const auto& lv : fine.field.levels)
            for (std::size_t j = 0; j < lv.psi.size(); ++j) {
                const double m = std::min(lv.r[j] - params.r_lo, params.r_hi - lv.r[j]);
                if (m < margin) {
                    margin = m;
                    c.location = loc_string(lv.t, lv.psi[j]);
                }
            }
        c.margin = margin;
        c.passed = margin > 0.0;
        out.push_back(c);
    }
    // --- comparison function g(t) bounds W, Z below where it is a barrier ----
    {
        CheckReport c;
        c.name = "comparison_function_lower_bound";
        double margin = std::numeric_limits<double>::infinity();
        for (const auto& lv : fine.field.levels) {
            if (lv.t > params.delta1) continue;
            const double bound = params.g(lv.t) * (1.0 - 1e-9);
            for (std::size_t j = 0; j < lv.psi.size(); ++j) {
                const double m = std::min(lv.W[j], lv.Z[j]) - bound;
                if (m < margin) {
                    margin = m;
                    c.location = loc_string(lv.t, lv.psi[j]);
                }
            }
        }
        c.margin = margin;
        c.passed = margin > 0.0;
        c.note = "checked on levels with t <= delta1 where g <= m0";
        out.push_back(c);
    }
    // --- degeneracy: |W - Z| <= 2 t sup|L|, sup|L| finite (Lemma 4.5) --------
    {
        CheckReport c;
        c.name = "L_bound_and_WZ_pinch";
        double supL = 0.0;
        for (const auto& lv : fine.field.levels)
            for (double l : lv.L) supL = std::max(supL, std::abs(l));
        double margin = std::numeric_limits<double>::infinity();
        for (const auto& lv : fine.field.levels) {
            if (!(lv.t > 0.0)) continue;
            for (std::size_t j = 0; j < lv.psi.size(); ++j) {
                const double m = 2.0 * lv.t * supL * (1.0 + 1e-9) -
                                 std::abs(lv.W[j] - lv.Z[j]);
                if (m < margin) {
                    margin = m;
                    c.location = loc_string(lv.t, lv.psi[j]);
                }
            }
        }
        c.margin = margin;
        c.passed = std::isfinite(supL) && margin >= 0.0;
        if (multigrid) {
            for (const auto& g : grids) {
                double s = 0.0;
                for (const auto& lv : g.field.levels)
                    for (double l : lv.L) s = std::max(s, std::abs(l));
                c.refinement_trend.push_back(s);
            }
            const double rel = std::abs(c.refinement_trend.back() -
                                        c.refinement_trend[c.refinement_trend.size() - 2]) /
                               c.refinement_trend.back();
            c.passed = c.passed && rel < 0.05;
            std::ostringstream os;
            os.precision(3);
            os << "sup|L| stable to " << rel * 100.0 << "% across refinements";
            c.note = os.str();
        }
        out.push_back(c);
    }
    // --- |W - Z| ~ C t on the bottom decade ----------------------------------
    {
        CheckReport c;
        c.name = "WZ_gap_linear_in_t";
        std::vector<double> lt, lg;
        for (const auto& lv : fine.field.levels) {
            if (lv.t <= 0.0 || lv.t > 10.0 * fine.field.t_min) continue;
            double gap = 0.0;
            for (std::size_t j = 0; j < lv.psi.size(); ++j)
                gap = std::max(gap, std::abs(lv.W[j] - lv.Z[j]));
            if (gap > 0.0) {
                lt.push_back(std::log(lv.t));
                lg.push_back(std::log(gap));
            }
        }
        if (lt.size() >= 4) {
            const LineFit fit = fit_line(lt, lg);
            c.margin = 0.1 - std::abs(fit.slope - 1.0);
            c.passed = c.margin > 0.0;
            std::ostringstream os;
            os.precision(4);
            os << "log-log slope " << fit.slope;
            c.note = os.str();
            if (multigrid) {
                for (const auto& g : grids) {
                    std::vector<double> a, b;
                    for (const auto& lv : g.field.levels) {
                        if (lv.t <= 0.0 || lv.t > 10.0 * g.field.t_min) continue;
                        double gap = 0.0;
                        for (std::size_t j = 0; j < lv.psi.size(); ++j)
                            gap = std::max(gap, std::abs(lv.W[j] - lv.Z[j]));
                        if (gap > 0.0) {
                            a.push_back(std::log(lv.t));
                            b.push_back(std::log(gap));
                        }
                    }
                    c.refinement_trend.push_back(fit_line(a, b).slope);
                }
            }
        } else {
            c.passed = false;
            c.note = "too few bottom-decade levels";
        }
        out.push_back(c);
    }
    // --- jacobian positivity and FD agreement (s 5.1.1) ----------------------
    {
        CheckReport c;
        c.name = "jacobian_positive";
        c.margin = fine.sol.jac.min_closed;
        c.passed = fine.sol.jac.min_closed > 0.0;
        out.push_back(c);
        CheckReport c2;
        c2.name = "jacobian_fd_agreement";
        c2.margin = 0.05 - fine.sol.jac.max_rel_gap;
        c2.passed = c2.margin > 0.0;
        std::ostringstream os;
        os.precision(4);
        os << "max relative gap " << fine.sol.jac.max_rel_gap;
        c2.note = os.str();
        if (multigrid)
            for (const auto& g : grids) c2.refinement_trend.push_back(g.sol.jac.max_rel_gap);
        out.push_back(c2);
    }
    // --- injectivity ----------------------------------------------------------
    {
        CheckReport c;
        c.name = "injectivity_monotone_and_unique";
        c.margin = fine.sol.injectivity.min_dx;
        c.passed = fine.sol.injectivity.passed;
        std::ostringstream os;
        os << "collisions=" << fine.sol.injectivity.collision_count
           << " at cell 1e-6; min level dx=" << fine.sol.injectivity.min_dx;
        c.note = os.str();
        out.push_back(c);
    }
    // --- strong determinacy on the computed field -----------------------------
    {
        CheckReport c;
        c.name = "strong_determinacy_field";
        double worst = 0.0;
        std::string loc;
        for (const auto& lv : fine.field.levels) {
            if (!(lv.t > 0.0)) continue;
            const BranchPoint bp = branch.at(lv.t);
            for (std::size_t j = 0; j < lv.psi.size(); ++j) {
                const double v = bp.lamc * lv.r[j] /
                                 (2.0 * bp.F * lv.Z[j] * std::sqrt(1.0 - lv.t * lv.t));
                if (v > worst) {
                    worst = v;
                    loc = loc_string(lv.t, lv.psi[j]);
                }
            }
        }
        c.margin = region.Ktilde - worst;
        c.location = loc;
        c.passed = c.margin > 0.0;
        out.push_back(c);
    }
    // --- boundary reproduction -------------------------------------------------
    {
        CheckReport c;
        c.name = "boundary_reproduction";
        double worst = 0.0;
        for (std::size_t k = 0; k < fine.field.levels.size(); ++k) {
            const Level& lv = fine.field.levels[k];
            const BoundaryState bs = boundary.at_t(lv.t);
            worst = std::max({worst, std::abs(lv.W[0] - bs.b), std::abs(lv.Z[0] - bs.c),
                              std::abs(lv.r[0] - bs.r), std::abs(lv.theta[0] - bs.theta),
                              std::abs(fine.xf.x[k][0] - bs.x)});
            // streamline tangency at the image point
            const double x0 = fine.xf.x[k][0];
            worst = std::max(worst, std::abs(std::tan(lv.theta[0]) - spec.phi.d1(x0)));
        }
        c.margin = vcfg.structural_tol - worst;
        c.passed = c.margin > 0.0;
        out.push_back(c);
    }
    // --- sonic curve geometry ----------------------------------------------------
    {
        CheckReport c;
        c.name = "sonic_curve_geometry";
        const SonicCurve& sc = fine.sol.sonic;
        const bool starts_at_P =
            std::abs(sc.x.front() - spec.x1) < 1e-3 &&
            std::abs(sc.r.front() - spec.phi.f(spec.x1)) < 1e-3;
        c.passed = sc.simple && starts_at_P && sc.grad_norm_min > 0.0 &&
                   std::isfinite(sc.grad_norm_max);
        c.margin = sc.grad_norm_min;
        std::ostringstream os;
        os.precision(4);
        os << "grad norm in [" << sc.grad_norm_min << ", " << sc.grad_norm_max
           << "], simple=" << sc.simple;
        c.note = os.str();
        out.push_back(c);
    }
    // --- DF endpoints ------------------------------------------------------------
    {
        CheckReport c;
        c.name = "df_endpoints";
        const DFCurve& df = fine.sol.df;
        const double cell = std::abs(fine.xf.x[2][0] - fine.xf.x[0][0]) + 1e-12;
        const double dD = std::hypot(df.D[0] - fine.sol.sonic.x.back(),
                                     df.D[1] - fine.sol.sonic.r.back());
        const double dF = std::abs(df.F[1] - spec.phi.f(df.F[0]));
        c.margin = 2.0 * cell - std::max(dD, dF);
        c.passed = c.margin > 0.0;
        std::ostringstream os;
        os.precision(3);
        os << "D gap " << dD << ", F gap " << dF << ", cell " << cell;
        c.note = os.str();
        out.push_back(c);
    }

    // --- discretization-dependent checks ----------------------------------------
    auto order_check = [&](const std::string& name, auto residual_fn, double min_order) {
        CheckReport c;
        c.name = name;
        if (!multigrid || grids.size() < 2) {
            c.passed = false;
            c.note = "skipped: needs >= 2 grids";
            c.margin = 0.0;
            out.push_back(c);
            return;
        }
        for (std::size_t gi = 0; gi < grids.size(); ++gi)
            c.refinement_trend.push_back(residual_fn(gi));
        const double order = order_from_trend(c.refinement_trend);
        c.margin = order - min_order;
        c.passed = c.margin >= 0.0;
        std::ostringstream os;
        os.precision(4);
        os << "order " << order << "; residuals";
        for (double r : c.refinement_trend) os << " " << r;
        c.note = os.str();
        out.push_back(c);
    };

    // (2.21) in the physical plane
    order_check(
        "eq221_residual_order",
        [&](std::size_t gi) {
            const StructuredView& sv = views[gi];
            double worst = 0.0;
            for_interior(sv, [&](std::size_t k, std::size_t i) {
                const NodeFrame f = frame_of(sv, k, i);
                const NodeDerivs th = derivs_of(sv, sv.theta, k, i);
                const PhysDerivs thp = to_physical(f, th);
                const double t = sv.t[k];
                const double omega = std::acos(std::min(1.0, t));
                const double theta = sv.theta[k][i];
                const double alpha = theta + omega, beta = theta - omega;
                const double r = sv.r[k][i];
                const double pi = sv.pi_lvl[k];
                const double s2w = 2.0 * pi * t;
                const double plus = r * (std::cos(alpha) * thp.d_x + std::sin(alpha) * thp.d_r) +
                                    s2w * sv.W[k][i] + pi * std::sin(theta);
                const double minus = r * (std::cos(beta) * thp.d_x + std::sin(beta) * thp.d_r) +
                                     s2w * sv.Z[k][i] - pi * std::sin(theta);
                worst = std::max({worst, std::abs(plus), std::abs(minus)});
            });
            return worst;
        },
        1.5);

    // full system (2.9) including the axisymmetric source
    order_check(
        "eq29_residual_order",
        [&](std::size_t gi) {
            const StructuredView& sv = views[gi];
            const BernoulliConstants& bc = branch.consts();
            (void)bc;
            double worst = 0.0;
            for_interior(sv, [&](std::size_t k, std::size_t i) {
                const NodeFrame f = frame_of(sv, k, i);
                const PhysDerivs up = to_physical(f, derivs_of(sv, sv.u, k, i));
                const PhysDerivs vp = to_physical(f, derivs_of(sv, sv.v, k, i));
                const BranchPoint bp = branch.at(sv.t[k]);
                const double M1 = bp.gamma * sv.u[k][i] / (bp.a * bp.gamma_a);
                const double M2 = bp.gamma * sv.v[k][i] / (bp.a * bp.gamma_a);
                const double R1 = (M1 * M1 - 1.0) * up.d_x + M1 * M2 * (up.d_r + vp.d_x) +
                                  (M2 * M2 - 1.0) * vp.d_r - sv.v[k][i] / sv.r[k][i];
                const double R2 = up.d_r - vp.d_x;
                worst = std::max({worst, std::abs(R1), std::abs(R2)});
            });
            return worst;
        },
        1.5);

    // irrotationality alone (second equation of 2.9)
    order_check(
        "irrotationality_residual",
        [&](std::size_t gi) {
            const StructuredView& sv = views[gi];
            double worst = 0.0;
            for_interior(sv, [&](std::size_t k, std::size_t i) {
                const NodeFrame f = frame_of(sv, k, i);
                const PhysDerivs up = to_physical(f, derivs_of(sv, sv.u, k, i));
                const PhysDerivs vp = to_physical(f, derivs_of(sv, sv.v, k, i));
                worst = std::max(worst, std::abs(up.d_r - vp.d_x));
            });
            return worst;
        },
        1.0);

    // derivative identities (5.105)
    order_check(
        "eq5105_identity_suite",
        [&](std::size_t gi) {
            const StructuredView& sv = views[gi];
            double worst = 0.0;
            for_interior(sv, [&](std::size_t k, std::size_t i) {
                const NodeFrame f = frame_of(sv, k, i);
                const NodeDerivs th = derivs_of(sv, sv.theta, k, i);
                const PhysDerivs thp = to_physical(f, th);
                // pi varies only with the level
                NodeDerivs piD;
                piD.d_psi = 0.0;
                piD.d_t = (sv.pi_lvl[k - 1] - sv.pi_lvl[k + 1]) / (2.0 * sv.dt);
                const PhysDerivs pip = to_physical(f, piD);
                const double t = sv.t[k];
                const double theta = sv.theta[k][i];
                const double r = sv.r[k][i];
                const double W = sv.W[k][i], Z = sv.Z[k][i], L = sv.L[k][i];
                const double rt = sv.pi_lvl[k];
                const double st = std::sin(theta), ct = std::cos(theta);
                const double a = sv.a_lvl[k];
                const double F1h = 4.0 * a * a * (sv.c_lvl[k] + 1.0 - t * t);
                const double theta_x_cf =
                    (t * st * (W - Z) - rt * ct * (W + Z) + st * st) / r;
                const double theta_r_cf =
                    (t * ct * (Z - W) - rt * st * (W + Z) - st * ct) / r;
                const double pi_x_cf =
                    -F1h / (4.0 * a * a * r) * ((W + Z) * st - 2.0 * rt * ct * L);
                const double pi_r_cf =
                    F1h / (4.0 * a * a * r) * ((W + Z) * ct + 2.0 * rt * st * L);
                worst = std::max({worst, std::abs(thp.d_x - theta_x_cf),
                                  std::abs(thp.d_r - theta_r_cf),
                                  std::abs(pip.d_x - pi_x_cf),
                                  std::abs(pip.d_r - pi_r_cf)});
            });
            return worst;
        },
        1.5);

    // cross-family consistency: the plus-family transport of r
    order_check(
        "plus_family_r_consistency",
        [&](std::size_t gi) {
            const StructuredView& sv = views[gi];
            double worst = 0.0;
            for_interior(sv, [&](std::size_t k, std::size_t i) {
                const NodeDerivs rD = derivs_of(sv, sv.r, k, i);
                const double t = sv.t[k];
                const double rt = sv.pi_lvl[k];
                const double theta = sv.theta[k][i];
                const double beta_s = t * std::sin(theta) - rt * std::cos(theta);
                const double lamp = sv.lamc_lvl[k] * sv.r[k][i] * t * t /
                                    (2.0 * sv.F_lvl[k] * sv.Z[k][i] * rt);
                const double lhs = rD.d_t + lamp * rD.d_psi;
                const double rhs = t * sv.r[k][i] * beta_s /
                                   (2.0 * sv.F_lvl[k] * sv.Z[k][i]);
                worst = std::max(worst, std::abs(lhs - rhs));
            });
            return worst;
        },
        1.5);

    // x continuity across neighbouring levels
    order_check(
        "x_continuity",
        [&](std::size_t gi) {
            const GridArtifacts& g = grids[gi];
            double worst = 0.0;
            for (std::size_t k = 1; k < g.field.levels.size(); ++k) {
                const Level& lv = g.field.levels[k];
                for (std::size_t j = 0; j < lv.psi.size(); j += 3) {
                    const double psi = lv.psi[j];
                    if (psi < g.field.levels[k - 1].psi.front() ||
                        psi > g.field.levels[k - 1].psi.back())
                        continue;
                    worst = std::max(worst,
                                     std::abs(g.xf.x[k][j] - g.xf.ix[k - 1](psi)));
                }
            }
            return worst;
        },
        0.9);

    // DF slope against tan(theta - omega), trimmed away from the endpoints
    order_check(
        "df_slope_order",
        [&](std::size_t gi) {
            const DFCurve& df = grids[gi].sol.df;
            double worst = 0.0;
            for (std::size_t i = 1; i + 1 < df.t.size(); ++i) {
                if (df.t[i] < 0.05 * df.delta_bar || df.t[i] > 0.95 * df.delta_bar)
                    continue;
                const double drdx =
                    (df.r[i + 1] - df.r[i - 1]) / (df.x[i + 1] - df.x[i - 1]);
                const double beta = df.theta[i] - std::acos(df.t[i]);
                worst = std::max(worst, std::abs(drdx - std::tan(beta)));
            }
            return worst;
        },
        1.5);

    // Richardson self-convergence of (W, Z, r, theta) at t_min
    {
        CheckReport c;
        c.name = "richardson_orders_WZrtheta";
        if (grids.size() < 3) {
            c.passed = false;
            c.note = "skipped: needs 3 grids";
            out.push_back(c);
        } else {
            const Level& d0 = grids[0].field.deepest();
            const double lo = d0.psi.front(), hi = d0.psi.back();
            auto order_of = [&](auto get) {
                double ec = 0.0, ef = 0.0;
                for (int p = 2; p <= 198; ++p) {
                    const double psi = lo + (hi - lo) * p / 200.0;
                    ec = std::max(ec, std::abs(get(grids[0], psi) - get(grids[1], psi)));
                    ef = std::max(ef, std::abs(get(grids[1], psi) - get(grids[2], psi)));
                }
                return std::log2(ec / ef);
            };
            const double oW = order_of(
                [](const GridArtifacts& g, double p) { return g.field.deepest().iW(p); });
            const double oZ = order_of(
                [](const GridArtifacts& g, double p) { return g.field.deepest().iZ(p); });
            const double oR = order_of(
                [](const GridArtifacts& g, double p) { return g.field.deepest().ir(p); });
            const double oT = order_of([](const GridArtifacts& g, double p) {
                return g.field.deepest().itheta(p);
            });
            c.refinement_trend = {oW, oZ, oR, oT};
            double lo_o = std::min({oW, oZ, oR, oT});
            double hi_o = std::max({oW, oZ, oR, oT});
            c.margin = std::min(lo_o - 1.7, 2.2 - hi_o);
            c.passed = c.margin >= 0.0;
            std::ostringstream os;
            os.precision(4);
            os << "orders W=" << oW << " Z=" << oZ << " r=" << oR << " theta=" << oT;
            c.note = os.str();
            out.push_back(c);
        }
    }

    // Holder quotients at 1/3 on the deepest level (hodograph plane)
    {
        CheckReport c;
        c.name = "holder_quotient_hodograph";
        auto quot = [&](const GridArtifacts& g, const std::vector<double>& vals) {
            const Level& d = g.field.deepest();
            std::vector<std::array<double, 2>> pos(d.psi.size());
            for (std::size_t j = 0; j < d.psi.size(); ++j) pos[j] = {d.psi[j], 0.0};
            return holder_quotient(pos, vals, vcfg.holder_exponent_hodograph, vcfg.seed);
        };
        double qW = quot(fine, fine.field.deepest().W);
        double qZ = quot(fine, fine.field.deepest().Z);
        double qL = quot(fine, fine.field.deepest().L);
        c.margin = std::isfinite(qW + qZ + qL) ? 1.0 : -1.0;
        std::ostringstream os;
        os.precision(4);
        os << "sup quotients W=" << qW << " Z=" << qZ << " L=" << qL;
        c.passed = std::isfinite(qW) && std::isfinite(qZ) && std::isfinite(qL);
        if (multigrid) {
            std::vector<double> trend;
            for (const auto& g : grids) trend.push_back(quot(g, g.field.deepest().W));
            c.refinement_trend = trend;
            const double rel =
                std::abs(trend.back() - trend[trend.size() - 2]) / trend.back();
            c.passed = c.passed && rel < 0.2;
            os << "; W quotient varies " << rel * 100.0 << "% across refinements";
        }
        c.note = os.str();
        out.push_back(c);
    }
    // Holder quotients at 1/6 for the derivative fields in the physical plane
    {
        CheckReport c;
        c.name = "holder_quotient_physical";
        auto quot = [&](const GridArtifacts& g, std::vector<double>& qs) {
            const Level& d = g.field.deepest();
            const BranchPoint bp = branch.at(d.t);
            const double F1h = 4.0 * bp.a * bp.a * (bp.c + 1.0 - d.t * d.t);
            const std::size_t K = g.field.levels.size();
            std::vector<std::array<double, 2>> pos(d.psi.size());
            std::vector<double> tx(d.psi.size()), tr(d.psi.size()), px(d.psi.size()),
                pr(d.psi.size());
            for (std::size_t j = 0; j < d.psi.size(); ++j) {
                pos[j] = {g.xf.x[K - 1][j], d.r[j]};
                const double st = std::sin(d.theta[j]), ct = std::cos(d.theta[j]);
                const double W = d.W[j], Z = d.Z[j], L = d.L[j], r = d.r[j];
                tx[j] = (d.t * st * (W - Z) - bp.pi * ct * (W + Z) + st * st) / r;
                tr[j] = (d.t * ct * (Z - W) - bp.pi * st * (W + Z) - st * ct) / r;
                px[j] = -F1h / (4.0 * bp.a * bp.a * r) *
                        ((W + Z) * st - 2.0 * bp.pi * ct * L);
                pr[j] = F1h / (4.0 * bp.a * bp.a * r) *
                        ((W + Z) * ct + 2.0 * bp.pi * st * L);
            }
            qs = {holder_quotient(pos, tx, vcfg.holder_exponent_physical, vcfg.seed),
                  holder_quotient(pos, tr, vcfg.holder_exponent_physical, vcfg.seed),
                  holder_quotient(pos, px, vcfg.holder_exponent_physical, vcfg.seed),
                  holder_quotient(pos, pr, vcfg.holder_exponent_physical, vcfg.seed)};
            return *std::max_element(qs.begin(), qs.end());
        };
        std::vector<double> qs;
        const double qmax = quot(fine, qs);
        c.passed = std::isfinite(qmax);
        std::ostringstream os;
        os.precision(4);
        os << "sup quotients theta_x=" << qs[0] << " theta_r=" << qs[1] << " pi_x=" << qs[2]
           << " pi_r=" << qs[3];
        if (multigrid) {
            std::vector<double> trend;
            for (const auto& g : grids) {
                std::vector<double> tmp;
                trend.push_back(quot(g, tmp));
            }
            c.refinement_trend = trend;
            const double rel =
                std::abs(trend.back() - trend[trend.size() - 2]) / trend.back();
            c.passed = c.passed && rel < 0.2;
            os << "; varies " << rel * 100.0 << "% across refinements";
        }
        c.margin = c.passed ? 1.0 : -1.0;
        c.note = os.str();
        out.push_back(c);
    }
    // cross-form agreement (primal vs reciprocal)
    {
        CheckReport c;
        c.name = "cross_form_agreement";
        if (reciprocal_field == nullptr || grids.size() < 3) {
            c.passed = false;
            c.note = "skipped: needs the reciprocal march and 3 grids";
            out.push_back(c);
        } else {
            // match the reciprocal march to the grid with the same level count
            const GridArtifacts* mate = nullptr;
            std::size_t mate_idx = 0;
            for (std::size_t gi = 0; gi < grids.size(); ++gi)
                if (grids[gi].n_levels ==
                    static_cast<int>(reciprocal_field->levels.size()) - 1) {
                    mate = &grids[gi];
                    mate_idx = gi;
                }
            if (mate == nullptr || mate_idx + 1 >= grids.size()) {
                c.passed = false;
                c.note = "skipped: reciprocal grid does not match a primal grid";
                out.push_back(c);
            } else {
                const Level& d = mate->field.deepest();
                double gap = 0.0, est = 0.0;
                for (std::size_t j = 1; j + 1 < d.psi.size(); ++j) {
                    gap = std::max(gap, std::abs(reciprocal_field->levels.back().iW(
                                                     d.psi[j]) -
                                                 d.W[j]));
                    est = std::max(est, std::abs(grids[mate_idx + 1]
                                                     .field.deepest()
                                                     .iW(d.psi[j]) -
                                                 d.W[j]));
                }
                c.margin = 3.0 * est - gap;
                c.passed = c.margin > 0.0;
                std::ostringstream os;
                os.precision(3);
                os << "form gap " << gap << " vs 3x estimated error " << 3.0 * est;
                c.note = os.str();
                out.push_back(c);
            }
        }
    }
    return out;
}

std::string checks_to_json(const std::vector<CheckReport>& checks) {
    std::ostringstream os;
    os.precision(17);
    os << "[\n";
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto& c = checks[i];
        os << "  {\"name\": \"" << c.name << "\", \"passed\": " << (c.passed ? "true" : "false")
           << ", \"margin\": " << c.margin << ", \"location\": \"" << c.location
           << "\", \"note\": \"" << c.note << "\", \"refinement_trend\": [";
        for (std::size_t t = 0; t < c.refinement_trend.size(); ++t)
            os << (t ? ", " : "") << c.refinement_trend[t];
        os << "]}" << (i + 1 < checks.size() ? "," : "") << "\n";
    }
    os << "]\n";
    return os.str();
}

}  // namespace sspatch
