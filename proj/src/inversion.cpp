#include "sspatch/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace sspatch {

namespace {

// minus-family transport of x: dx/dt along psi' = lambda_-
double rhs_x(const BranchPoint& bp, double t, double W, double r, double theta) {
    const double rt = std::sqrt(std::max(0.0, 1.0 - t * t));
    return -t * r * (t * std::cos(theta) - rt * std::sin(theta)) / (2.0 * bp.F * W);
}

double lambda_minus_of(const BranchPoint& bp, double t, double W, double r) {
    const double rt = std::sqrt(std::max(0.0, 1.0 - t * t));
    return -bp.lamc * r * t * t / (2.0 * bp.F * W * rt);
}

double lambda_plus_of(const BranchPoint& bp, double t, double Z, double r) {
    const double rt = std::sqrt(std::max(0.0, 1.0 - t * t));
    return bp.lamc * r * t * t / (2.0 * bp.F * Z * rt);
}

}  // namespace

double XField::sample(const HodographField& f, double t, double psi) const {
    const auto& ls = f.levels;
    if (t >= ls.front().t) return ix.front()(psi);
    if (t <= ls.back().t) return ix.back()(psi);
    const std::size_t ib = f.level_below(t);
    const double w = (t - ls[ib].t) / (ls[ib - 1].t - ls[ib].t);
    return (1.0 - w) * ix[ib](psi) + w * ix[ib - 1](psi);
}

XField x_field(const HodographField& field, const HodographBoundary& boundary,
               const BernoulliBranch& branch, int interp_order) {
    XField xf;
    xf.x.resize(field.levels.size());
    xf.ix.resize(field.levels.size());

    // corner level: pure boundary
    {
        const Level& top = field.levels.front();
        xf.x[0].assign(top.psi.size(), boundary.x_of_t(field.delta));
        xf.ix[0] = Interp1D(top.psi, xf.x[0], 1);
    }

    for (std::size_t k = 1; k < field.levels.size(); ++k) {
        const Level& cur = field.levels[k];
        const Level& prev = field.levels[k - 1];
        const BranchPoint bp_new = branch.at(cur.t);
        const BranchPoint bp_prev = branch.at(prev.t);
        auto& xrow = xf.x[k];
        xrow.assign(cur.psi.size(), 0.0);
        const double h_full = prev.t - cur.t;
        for (std::size_t jn = 0; jn < cur.psi.size(); ++jn) {
            const double psi_j = cur.psi[jn];
            if (jn == 0) {
                xrow[jn] = boundary.x_of_t(cur.t);
                continue;
            }
            // predictor foot with the slope at the previous level above the node
            auto foot_of = [&](double lam) {
                struct R {
                    bool bd;
                    double t, psi, h;
                } res{};
                const double land = psi_j + h_full * lam;
                if (land >= prev.psi.front()) {
                    res.bd = false;
                    res.t = prev.t;
                    res.psi = std::min(land, prev.psi.back());
                    res.h = h_full;
                } else {
                    auto g = [&](double tau) {
                        return psi_j + (tau - cur.t) * lam - boundary.psi_tilde(tau);
                    };
                    const double tau =
                        g(cur.t) <= 0.0 ? cur.t
                                        : bisect_secant(g, cur.t, prev.t, 1e-13, 200);
                    res.bd = true;
                    res.t = tau;
                    res.psi = boundary.psi_tilde(tau);
                    res.h = tau - cur.t;
                }
                return res;
            };
            const double lam0 = lambda_minus_of(
                bp_prev, prev.t, prev.iW(psi_j), prev.ir(psi_j));
            auto f0 = foot_of(lam0);
            // states at foot
            auto state_at = [&](double t, double psi, bool bd) {
                struct S {
                    double W, r, th, x;
                    BranchPoint bp;
                } s{};
                if (bd) {
                    const BoundaryState b = boundary.at_t(t);
                    s.W = b.b;
                    s.r = b.r;
                    s.th = b.theta;
                    s.x = b.x;
                    s.bp = branch.at(t);
                } else {
                    s.W = prev.iW(psi);
                    s.r = prev.ir(psi);
                    s.th = prev.itheta(psi);
                    s.x = xf.ix[k - 1](psi);
                    s.bp = bp_prev;
                }
                return s;
            };
            auto sf = state_at(f0.t, f0.psi, f0.bd);
            // refine the foot once with the foot's own slope
            const double lam1 = lambda_minus_of(sf.bp, f0.t, sf.W, sf.r);
            f0 = foot_of(lam1);
            sf = state_at(f0.t, f0.psi, f0.bd);
            // predictor value and state at the new node
            const double x_star = sf.x - f0.h * rhs_x(sf.bp, f0.t, sf.W, sf.r, sf.th);
            (void)x_star;
            const double W_new = cur.iW(psi_j);
            const double r_new = cur.ir(psi_j);
            const double th_new = cur.itheta(psi_j);
            const double lam_new = lambda_minus_of(bp_new, cur.t, W_new, r_new);
            // corrector foot from the averaged slope
            const double lam_avg =
                0.5 * (lambda_minus_of(sf.bp, f0.t, sf.W, sf.r) + lam_new);
            auto f1 = foot_of(lam_avg);
            const auto s1 = state_at(f1.t, f1.psi, f1.bd);
            xrow[jn] = s1.x - 0.5 * f1.h *
                                  (rhs_x(s1.bp, f1.t, s1.W, s1.r, s1.th) +
                                   rhs_x(bp_new, cur.t, W_new, r_new, th_new));
        }
        xf.ix[k] = Interp1D(cur.psi, xrow, interp_order);
    }
    return xf;
}

JacobianField jacobian(const HodographField& field, const XField& xf,
                       const BernoulliBranch& branch) {
    JacobianField out;
    const std::size_t K = field.levels.size();
    out.closed.resize(K);
    out.fd.resize(K);
    out.min_closed = std::numeric_limits<double>::infinity();
    out.max_rel_gap = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const Level& lv = field.levels[k];
        const BranchPoint bp = branch.at(lv.t);
        out.closed[k].assign(lv.psi.size(), 0.0);
        out.fd[k].assign(lv.psi.size(), 0.0);
        for (std::size_t j = 0; j < lv.psi.size(); ++j) {
            const double t = lv.t;
            const double jc = t * (1.0 - t * t) * lv.r[j] * bp.gamma /
                              (bp.a * bp.gamma_a * bp.F * (lv.W[j] + lv.Z[j]));
            out.closed[k][j] = jc;
            if (t > 0.0) {
                if (!(jc > 0.0))
                    throw std::runtime_error(
                        "jacobian: sign change (fold in the mapping) at t=" +
                        std::to_string(t));
                out.min_closed = std::min(out.min_closed, jc);
            }
        }
    }
    // centered differences on interior nodes of interior levels
    for (std::size_t k = 1; k + 1 < K; ++k) {
        const Level& lv = field.levels[k];
        const Level& up = field.levels[k - 1];
        const Level& dn = field.levels[k + 1];
        const double dt = up.t - dn.t;
        for (std::size_t j = 1; j + 1 < lv.psi.size(); ++j) {
            const double psi = lv.psi[j];
            // skip stencils that would leave the covered spans
            if (psi < up.psi.front() || psi > up.psi.back() || psi < dn.psi.front() ||
                psi > dn.psi.back())
                continue;
            const double dpsi = lv.psi[j + 1] - lv.psi[j - 1];
            const double x_t = (xf.ix[k - 1](psi) - xf.ix[k + 1](psi)) / dt;
            const double r_t = (up.ir(psi) - dn.ir(psi)) / dt;
            const double x_psi = (xf.x[k][j + 1] - xf.x[k][j - 1]) / dpsi;
            const double r_psi = (lv.r[j + 1] - lv.r[j - 1]) / dpsi;
            const double jfd = x_t * r_psi - x_psi * r_t;
            out.fd[k][j] = jfd;
            const double rel = std::abs(jfd - out.closed[k][j]) /
                               std::max(std::abs(out.closed[k][j]), 1e-300);
            out.max_rel_gap = std::max(out.max_rel_gap, rel);
        }
    }
    return out;
}

InjectivityReport injectivity_check(const HodographField& field, const XField& xf,
                                    double cell_size) {
    InjectivityReport rep;
    rep.cell_size = cell_size;
    rep.monotone_levels = true;
    rep.min_dx = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < field.levels.size(); ++k) {
        const auto& xs = xf.x[k];
        for (std::size_t j = 0; j + 1 < xs.size(); ++j) {
            const double dx = xs[j + 1] - xs[j];
            if (dx < rep.min_dx) {
                rep.min_dx = dx;
                if (dx <= 0.0 && rep.monotone_levels) {
                    rep.monotone_levels = false;
                    rep.worst_level_t = field.levels[k].t;
                }
            }
        }
    }
    // duplicate-cell test on a spatial hash; grid-adjacent nodes sharing a cell
    // near the domain corner are benign
    struct Key {
        std::int64_t cx, cr;
        bool operator==(const Key& o) const { return cx == o.cx && cr == o.cr; }
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return std::hash<std::int64_t>()(k.cx * 1000003 + k.cr);
        }
    };
    std::unordered_map<Key, std::pair<std::size_t, std::size_t>, KeyHash> cells;
    rep.collision_count = 0;
    for (std::size_t k = 0; k < field.levels.size(); ++k) {
        for (std::size_t j = 0; j < xf.x[k].size(); ++j) {
            const Key key{static_cast<std::int64_t>(std::floor(xf.x[k][j] / cell_size)),
                          static_cast<std::int64_t>(
                              std::floor(field.levels[k].r[j] / cell_size))};
            const auto it = cells.find(key);
            if (it == cells.end()) {
                cells.emplace(key, std::make_pair(k, j));
            } else {
                const auto [k0, j0] = it->second;
                const bool adjacent =
                    (k0 + 2 > k && k + 2 > k0);  // same or neighbouring level
                if (!adjacent) ++rep.collision_count;
                else {
                    // same-level duplicates must be neighbouring nodes
                    if (k0 == k && (j0 + 2 <= j || j + 2 <= j0)) ++rep.collision_count;
                }
            }
        }
    }
    rep.no_duplicates = rep.collision_count == 0;
    rep.passed = rep.monotone_levels && rep.no_duplicates;
    return rep;
}

SonicCurve sonic_curve(const HodographField& field, const XField& xf,
                       const BernoulliBranch& branch) {
    const SonicTrace tr = sonic_extrapolate(field);
    SonicCurve sc;
    sc.psi = tr.psi;
    sc.W = tr.W_merged;
    sc.L = tr.L;
    sc.r = tr.r;
    sc.theta = tr.theta;
    const Level& deep = field.levels.back();
    const Level& up = field.levels[field.levels.size() - 2];
    sc.x.resize(tr.psi.size());
    const std::size_t K = field.levels.size();
    for (std::size_t j = 0; j < tr.psi.size(); ++j) {
        const double psi = tr.psi[j];
        const double xn = xf.x[K - 1][j];
        const double xp = xf.ix[K - 2](psi);
        const double slope = (xp - xn) / (up.t - deep.t);
        sc.x[j] = xn - slope * deep.t;
    }
    // unit tangents from forward differences
    sc.tangent_x.assign(sc.psi.size(), 0.0);
    sc.tangent_r.assign(sc.psi.size(), 0.0);
    for (std::size_t j = 0; j + 1 < sc.psi.size(); ++j) {
        const double dx = sc.x[j + 1] - sc.x[j];
        const double dr = sc.r[j + 1] - sc.r[j];
        const double n = std::hypot(dx, dr);
        if (n > 0) {
            sc.tangent_x[j] = dx / n;
            sc.tangent_r[j] = dr / n;
        }
    }
    if (sc.psi.size() > 1) {
        sc.tangent_x.back() = sc.tangent_x[sc.psi.size() - 2];
        sc.tangent_r.back() = sc.tangent_r[sc.psi.size() - 2];
    }
    // |grad pi|^2 proxy at the deepest computed level:
    // (F1hat/(4 a^2 r))^2 ((W+Z)^2 + 4 pi^2 L^2)
    {
        const BranchPoint bp = branch.at(deep.t);
        const double F1h = 4.0 * bp.a * bp.a * (bp.c + 1.0 - deep.t * deep.t);
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (std::size_t j = 0; j < deep.psi.size(); ++j) {
            const double pre = F1h / (4.0 * bp.a * bp.a * deep.r[j]);
            const double wz = deep.W[j] + deep.Z[j];
            const double val =
                pre * pre * (wz * wz + 4.0 * bp.pi * bp.pi * deep.L[j] * deep.L[j]);
            lo = std::min(lo, val);
            hi = std::max(hi, val);
        }
        sc.grad_norm_min = lo;
        sc.grad_norm_max = hi;
    }
    // brute-force simplicity test: consecutive-segment intersections
    sc.simple = true;
    auto orient = [](double ax, double ay, double bx, double by, double cx, double cy) {
        return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
    };
    for (std::size_t i = 0; i + 1 < sc.psi.size() && sc.simple; ++i) {
        for (std::size_t jn = i + 2; jn + 1 < sc.psi.size(); ++jn) {
            const double o1 = orient(sc.x[i], sc.r[i], sc.x[i + 1], sc.r[i + 1], sc.x[jn], sc.r[jn]);
            const double o2 = orient(sc.x[i], sc.r[i], sc.x[i + 1], sc.r[i + 1], sc.x[jn + 1], sc.r[jn + 1]);
            const double o3 = orient(sc.x[jn], sc.r[jn], sc.x[jn + 1], sc.r[jn + 1], sc.x[i], sc.r[i]);
            const double o4 = orient(sc.x[jn], sc.r[jn], sc.x[jn + 1], sc.r[jn + 1], sc.x[i + 1], sc.r[i + 1]);
            if (o1 * o2 < 0.0 && o3 * o4 < 0.0) {
                sc.simple = false;
                break;
            }
        }
    }
    return sc;
}

DFCurve df_characteristic(const HodographField& field, const XField& xf,
                          const HodographBoundary& boundary, const OmegaRegion& region,
                          const BernoulliBranch& branch) {
    DFCurve out;
    const double t_min = field.t_min;
    const double dt = (field.delta - t_min) / field.levels.size();

    auto lam_at = [&](double t, double psi) {
        const BranchPoint bp = branch.at(t);
        return lambda_plus_of(bp, t, field.sample_Z(t, psi), field.sample_r(t, psi));
    };

    // downward integration of dpsi/dt = lambda_+ from (delta_bar, psi_tilde(delta_bar));
    // returns false if the path escapes through the barrier
    auto integrate_down = [&](double delta_bar, DFCurve& curve) {
        curve.t.clear();
        curve.psi.clear();
        double t = delta_bar;
        double psi = boundary.psi_tilde(delta_bar);
        curve.t.push_back(t);
        curve.psi.push_back(psi);
        const double tol = 1e-7 * std::max(1.0, region.psi_bar0);
        while (t > t_min + 1e-15) {
            const double h = std::min(dt, t - t_min);
            const double k1 = lam_at(t, psi);
            const double psi_mid = psi - h * k1;
            const double k2 = lam_at(t - h, std::max(psi_mid, 0.0));
            psi -= 0.5 * h * (k1 + k2);
            t -= h;
            if (psi > region.barrier(t) + tol) return false;
            if (psi < boundary.psi_tilde(t) - tol) psi = boundary.psi_tilde(t);
            curve.t.push_back(t);
            curve.psi.push_back(psi);
        }
        return true;
    };

    // largest admissible right edge: plus-characteristic grown upward from D'
    auto delta_bar_up = [&]() {
        double t = t_min;
        double psi = region.barrier(t_min);
        while (t < field.delta - 1e-15) {
            const double h = std::min(dt, field.delta - t);
            const double k1 = lam_at(t, psi);
            const double k2 = lam_at(t + h, psi + h * k1);
            const double psi_next = psi + 0.5 * h * (k1 + k2);
            const double tn = t + h;
            if (psi_next <= boundary.psi_tilde(tn)) {
                // crossing inside (t, tn): linear interpolation of the gap
                const double g0 = psi - boundary.psi_tilde(t);
                const double g1 = psi_next - boundary.psi_tilde(tn);
                const double w = g0 / (g0 - g1);
                return t + w * h;
            }
            t = tn;
            psi = psi_next;
        }
        return field.delta;
    };

    out.delta_bar = region.delta;
    if (!integrate_down(out.delta_bar, out)) {
        out.retries = 1;
        out.delta_bar = delta_bar_up();
        if (!integrate_down(out.delta_bar, out))
            throw std::runtime_error(
                "df_characteristic: path exits through the barrier after retry");
    }

    // map to the physical plane; the first point sits on the data curve, where
    // the image is known exactly
    out.x.resize(out.t.size());
    out.r.resize(out.t.size());
    out.theta.resize(out.t.size());
    {
        const BoundaryState bs = boundary.at_t(out.delta_bar);
        out.x[0] = bs.x;
        out.r[0] = bs.r;
        out.theta[0] = bs.theta;
    }
    for (std::size_t i = 1; i < out.t.size(); ++i) {
        out.x[i] = xf.sample(field, out.t[i], out.psi[i]);
        out.r[i] = field.sample_r(out.t[i], out.psi[i]);
        out.theta[i] = field.sample_theta(out.t[i], out.psi[i]);
    }
    out.F = {out.x.front(), out.r.front()};
    out.D = {out.x.back(), out.r.back()};
    return out;
}

PatchSolution physical_fields(const HodographField& field, const XField& xf,
                              const HodographBoundary& boundary, const OmegaRegion& region,
                              const BernoulliBranch& branch) {
    PatchSolution sol;
    sol.injectivity = injectivity_check(field, xf);
    if (!sol.injectivity.passed)
        throw std::runtime_error("physical_fields: the hodograph map is not injective");
    sol.x = xf.x;
    const std::size_t K = field.levels.size();
    sol.u.resize(K);
    sol.v.resize(K);
    sol.a.resize(K);
    sol.j.resize(K);
    sol.jac = jacobian(field, xf, branch);
    for (std::size_t k = 0; k < K; ++k) {
        const Level& lv = field.levels[k];
        const BranchPoint bp = branch.at(lv.t);
        const double pi = bp.pi;
        sol.u[k].resize(lv.psi.size());
        sol.v[k].resize(lv.psi.size());
        sol.a[k].assign(lv.psi.size(), bp.a);
        sol.j[k] = sol.jac.closed[k];
        const double speed_factor = bp.a * bp.gamma_a / (bp.gamma * pi);
        for (std::size_t j = 0; j < lv.psi.size(); ++j) {
            sol.u[k][j] = speed_factor * std::cos(lv.theta[j]);
            sol.v[k][j] = speed_factor * std::sin(lv.theta[j]);
        }
    }
    sol.sonic = sonic_curve(field, xf, branch);
    sol.df = df_characteristic(field, xf, boundary, region, branch);
    return sol;
}

Raster rasterize(const HodographField& field, const XField& xf,
                 const BernoulliBranch& branch, int nx, int nr) {
    Raster ras;
    ras.nx = nx;
    ras.nr = nr;
    // structured resampling on a common normalized span parameter
    const std::size_t K = field.levels.size();
    const std::size_t M = field.levels.back().psi.size();
    std::vector<std::vector<double>> X(K), R(K), TH(K), PI(K), U(K), V(K), A(K);
    double x_lo = 1e300, x_hi = -1e300, r_lo = 1e300, r_hi = -1e300;
    for (std::size_t k = 0; k < K; ++k) {
        const Level& lv = field.levels[k];
        const BranchPoint bp = branch.at(lv.t);
        const double speed_factor = bp.a * bp.gamma_a / (bp.gamma * bp.pi);
        X[k].resize(M);
        R[k].resize(M);
        TH[k].resize(M);
        PI[k].resize(M);
        U[k].resize(M);
        V[k].resize(M);
        A[k].resize(M);
        for (std::size_t i = 0; i < M; ++i) {
            const double s = static_cast<double>(i) / (M - 1);
            const double psi =
                lv.psi.front() + s * (lv.psi.back() - lv.psi.front());
            X[k][i] = xf.ix[k](psi);
            R[k][i] = lv.ir(psi);
            TH[k][i] = lv.itheta(psi);
            PI[k][i] = bp.pi;
            U[k][i] = speed_factor * std::cos(TH[k][i]);
            V[k][i] = speed_factor * std::sin(TH[k][i]);
            A[k][i] = bp.a;
            x_lo = std::min(x_lo, X[k][i]);
            x_hi = std::max(x_hi, X[k][i]);
            r_lo = std::min(r_lo, R[k][i]);
            r_hi = std::max(r_hi, R[k][i]);
        }
    }
    ras.x0 = x_lo;
    ras.x1 = x_hi;
    ras.r0 = r_lo;
    ras.r1 = r_hi;
    const std::size_t N = static_cast<std::size_t>(nx) * nr;
    ras.theta.assign(N, 0.0);
    ras.pi.assign(N, 0.0);
    ras.u.assign(N, 0.0);
    ras.v.assign(N, 0.0);
    ras.a.assign(N, 0.0);
    ras.mask.assign(N, 0);
    const double hx = (x_hi - x_lo) / std::max(1, nx - 1);
    const double hr = (r_hi - r_lo) / std::max(1, nr - 1);
    auto fill_tri = [&](std::array<std::size_t, 2> p0, std::array<std::size_t, 2> p1,
                        std::array<std::size_t, 2> p2) {
        const double ax = X[p0[0]][p0[1]], ay = R[p0[0]][p0[1]];
        const double bx = X[p1[0]][p1[1]], by = R[p1[0]][p1[1]];
        const double cx = X[p2[0]][p2[1]], cy = R[p2[0]][p2[1]];
        const double det = (bx - ax) * (cy - ay) - (cx - ax) * (by - ay);
        if (det == 0.0) return;
        const double xmin = std::min({ax, bx, cx}), xmax = std::max({ax, bx, cx});
        const double ymin = std::min({ay, by, cy}), ymax = std::max({ay, by, cy});
        const int i0 = std::max(0, static_cast<int>(std::floor((xmin - x_lo) / hx)));
        const int i1 = std::min(nx - 1, static_cast<int>(std::ceil((xmax - x_lo) / hx)));
        const int j0 = std::max(0, static_cast<int>(std::floor((ymin - r_lo) / hr)));
        const int j1 = std::min(nr - 1, static_cast<int>(std::ceil((ymax - r_lo) / hr)));
        for (int jj = j0; jj <= j1; ++jj) {
            for (int ii = i0; ii <= i1; ++ii) {
                const double px = x_lo + ii * hx, py = r_lo + jj * hr;
                const double w0 = ((bx - px) * (cy - py) - (cx - px) * (by - py)) / det;
                const double w1 = ((cx - px) * (ay - py) - (ax - px) * (cy - py)) / det;
                const double w2 = 1.0 - w0 - w1;
                if (w0 < -1e-12 || w1 < -1e-12 || w2 < -1e-12) continue;
                const std::size_t idx = static_cast<std::size_t>(jj) * nx + ii;
                auto blend = [&](const std::vector<std::vector<double>>& q) {
                    return w0 * q[p0[0]][p0[1]] + w1 * q[p1[0]][p1[1]] +
                           w2 * q[p2[0]][p2[1]];
                };
                ras.theta[idx] = blend(TH);
                ras.pi[idx] = blend(PI);
                ras.u[idx] = blend(U);
                ras.v[idx] = blend(V);
                ras.a[idx] = blend(A);
                ras.mask[idx] = 1;
            }
        }
    };
    for (std::size_t k = 0; k + 1 < K; ++k)
        for (std::size_t i = 0; i + 1 < M; ++i) {
            fill_tri({k, i}, {k, i + 1}, {k + 1, i});
            fill_tri({k + 1, i}, {k, i + 1}, {k + 1, i + 1});
        }
    return ras;
}

}  // namespace sspatch
