#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "sspatch/solver.hpp"

using namespace sspatch;

namespace {
struct Fixture {
    EquationOfState eos = EquationOfState::quadratic(0.25, 2.0, 0.5);
    BernoulliConstants consts = sonic_normalized_constants(eos, 0.5);
    std::shared_ptr<BernoulliBranch> branch =
        std::make_shared<BernoulliBranch>(eos, consts, 0.55);
    StreamlineSpec spec =
        make_streamline(Poly({1.0, 0.5, -0.25}), Poly({1.0, -0.3}), 0.0, 0.4);
    HodographBoundary hb{spec, branch};
    BoundaryData data = make_boundary_data(spec, branch);
    DomainParams params = compute_params(*branch, spec, hb, data);
    OmegaRegion region = make_region(params, *branch, hb, 0.3);

    SolverConfig cfg(int n) const {
        SolverConfig c;
        c.n_levels = n;
        c.t_min = region.delta / 100.0;
        c.n_psi = 2 * n;
        return c;
    }
};

Fixture& fx() {
    static Fixture f;
    return f;
}

HodographField& ref_field() {
    static HodographField f = march(fx().hb, fx().params, fx().region, fx().cfg(100),
                                    fx().branch);
    return f;
}
}  // namespace

TEST_CASE("char_rates closed forms at a frozen state") {
    auto& F = fx();
    const double t = 0.1, W = 0.2, Z = 0.2, r = 1.0, theta = 0.4;
    const CharRates k = char_rates(F.eos, F.consts, t, W, Z, r, theta);
    // lambda closed forms
    const double pi = std::sqrt(1.0 - t * t);
    const FlowState s = state_from_q(F.eos, F.consts, q_from_pi(F.eos, F.consts, pi));
    const double Fv = F_of_t(F.eos, F.consts, t);
    const double lamp = s.a * r * s.gamma_a * t * t / (2.0 * s.gamma * Fv * Z * pi);
    CHECK(k.lambda_plus == doctest::Approx(lamp).epsilon(1e-10));
    CHECK(k.lambda_minus == doctest::Approx(-lamp * Z / W).epsilon(1e-10));
    // W = Z makes the slopes symmetric: lambda_+ W = -lambda_- Z
    CHECK(k.lambda_plus * W == doctest::Approx(-k.lambda_minus * Z).epsilon(1e-12));
    // characteristic angles
    CHECK(k.alpha == doctest::Approx(theta + std::acos(t)).epsilon(1e-14));
    CHECK(k.beta == doctest::Approx(theta - std::acos(t)).epsilon(1e-14));
    // lambda -> 0 like t^2
    const CharRates k2 = char_rates(F.eos, F.consts, t / 8.0, W, Z, r, theta);
    CHECK(std::abs(k2.lambda_plus) < std::abs(k.lambda_plus) / 32.0);
}

TEST_CASE("char_rates against an independent reciprocal-route evaluation") {
    // The reciprocal form is an independent algebraic route to the same system:
    // dW/dt along the plus family must equal -W^2 (singular + t H1).
    auto& F = fx();
    SplitMix64 rng(99);
    for (int it = 0; it < 25; ++it) {
        const double t = 0.02 + 0.38 * rng.uniform();
        const double W = 0.08 + 0.3 * rng.uniform();
        const double Z = 0.08 + 0.3 * rng.uniform();
        const double r = 0.8 + 0.5 * rng.uniform();
        const double theta = 0.1 + 0.5 * rng.uniform();
        const CharRates k = char_rates(F.eos, F.consts, t, W, Z, r, theta);
        const double L = (W - Z) / (2.0 * t);
        const double Wb = 1.0 / W, Zb = 1.0 / Z;
        const double rhs_W_indep = -W * W * (-L * Wb * Zb + t * k.H1);
        const double rhs_Z_indep = -Z * Z * (L * Wb * Zb + t * k.H2);
        CHECK(k.rhs_W == doctest::Approx(rhs_W_indep).epsilon(1e-12));
        CHECK(k.rhs_Z == doctest::Approx(rhs_Z_indep).epsilon(1e-12));
        // rhs_r and rhs_theta from their displays, coded independently here
        const double sa = t * std::sin(theta) + std::sqrt(1 - t * t) * std::cos(theta);
        const double Fv = F_of_t(F.eos, F.consts, t);
        CHECK(k.rhs_r == doctest::Approx(-t * r * sa / (2 * Fv * W)).epsilon(1e-10));
        CHECK(k.rhs_theta == doctest::Approx(t * std::sqrt(1 - t * t) *
                                             (std::sin(theta) + 2 * t * W) / (2 * Fv * W))
                                 .epsilon(1e-10));
    }
    CHECK_THROWS_AS(char_rates(F.eos, F.consts, 0.1, -0.1, 0.2, 1.0, 0.4), MarchError);
}

TEST_CASE("march: boundary initialization is exact") {
    auto& F = fx();
    const auto& field = ref_field();
    CHECK(field.levels.size() == 101);
    // corner level
    const Level& top = field.levels.front();
    const BoundaryState corner = F.hb.at_t(F.region.delta);
    CHECK(top.W[0] == doctest::Approx(corner.b).epsilon(1e-14));
    CHECK(top.Z[0] == doctest::Approx(corner.c).epsilon(1e-14));
    // every level's first node carries exact boundary data
    for (const auto& lv : field.levels) {
        const BoundaryState bs = F.hb.at_t(lv.t);
        CHECK(lv.W[0] == doctest::Approx(bs.b).epsilon(1e-14));
        CHECK(lv.Z[0] == doctest::Approx(bs.c).epsilon(1e-14));
        CHECK(lv.r[0] == doctest::Approx(bs.r).epsilon(1e-14));
        CHECK(lv.theta[0] == doctest::Approx(bs.theta).epsilon(1e-14));
        CHECK(lv.L[0] == doctest::Approx(-bs.d).epsilon(1e-14));
    }
}

TEST_CASE("march: invariant region and r bounds hold with margin") {
    auto& F = fx();
    const auto& field = ref_field();
    CHECK(field.diag.box_margin > 0.0);
    CHECK(field.diag.r_margin > 0.0);
    CHECK(field.diag.min_W > 0.5 * F.params.m0_hat);
    CHECK(field.diag.max_W < F.params.M0_hat + 1.0);
    CHECK(field.diag.min_Z > 0.5 * F.params.m0_hat);
    CHECK(field.diag.max_Z < F.params.M0_hat + 1.0);
    CHECK(field.diag.min_r >= F.params.r_lo);
    CHECK(field.diag.max_r <= F.params.r_hi);
}

TEST_CASE("march: comparison function bounds W and Z from below where valid") {
    // W, Z > g(t) = (m0/2) exp(Kbar t^2) wherever g stays below the boundary
    // floor m0 (t <= delta1); allow a vanishing grid slack.
    auto& F = fx();
    const auto& field = ref_field();
    const double eps_grid = 1e-6;
    for (std::size_t i = 0; i < field.diag.level_t.size(); ++i) {
        const double t = field.diag.level_t[i];
        if (t > F.params.delta1) continue;
        CHECK(field.diag.level_min_WZ[i] > F.params.g(t) * (1.0 - eps_grid));
    }
}

TEST_CASE("march: degeneracy |W-Z| <= 2 t sup|L| and linear fit") {
    const auto& field = ref_field();
    double supL = 0.0;
    for (const auto& lv : field.levels)
        for (double l : lv.L) supL = std::max(supL, std::abs(l));
    CHECK(supL > 0.0);
    CHECK(supL < 1.0);
    std::vector<double> lt, lwz;
    for (std::size_t i = 0; i < field.diag.level_t.size(); ++i) {
        const double t = field.diag.level_t[i];
        if (t <= 0.0) continue;
        CHECK(field.diag.level_max_absWmZ[i] <= 2.0 * t * supL * (1.0 + 1e-6));
        if (t <= 10.0 * field.t_min && field.diag.level_max_absWmZ[i] > 0.0) {
            lt.push_back(std::log(t));
            lwz.push_back(std::log(field.diag.level_max_absWmZ[i]));
        }
    }
    REQUIRE(lt.size() >= 5);
    const LineFit fit = fit_line(lt, lwz);
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("march: plus-characteristics exit through the data curve") {
    auto& F = fx();
    const auto& field = ref_field();
    SplitMix64 rng(2024);
    int exits = 0;
    for (int it = 0; it < 50; ++it) {
        // random interior launch point
        double t = field.t_min + (field.delta - field.t_min) * (0.05 + 0.6 * rng.uniform());
        const double lo = F.hb.psi_tilde(t), hi = F.region.barrier(t);
        double psi = lo + (hi - lo) * (0.05 + 0.9 * rng.uniform());
        bool exited_data = false;
        const double dt = (field.delta - field.t_min) / 2000.0;
        while (t < field.delta - 1e-12) {
            const double Z = field.sample_Z(t, psi);
            const double r = field.sample_r(t, psi);
            const BranchPoint bp = F.branch->at(t);
            const double lam = bp.lamc * r * t * t /
                               (2.0 * bp.F * Z * std::sqrt(1.0 - t * t));
            const double step = std::min(dt, field.delta - t);
            psi += lam * step;
            t += step;
            if (psi <= F.hb.psi_tilde(t)) {
                exited_data = true;
                break;
            }
            if (psi >= F.region.barrier(t) + 1e-10) break;  // would be a failure
        }
        if (exited_data) ++exits;
    }
    CHECK(exits == 50);
}

TEST_CASE("march: richardson self-convergence order") {
    auto& F = fx();
    std::vector<HodographField> fields;
    for (int n : {100, 200, 400})
        fields.push_back(march(F.hb, F.params, F.region, F.cfg(n), F.branch));
    const Level& d0 = fields[0].deepest();
    const double lo = d0.psi.front(), hi = d0.psi.back();
    auto order_of = [&](auto get) {
        double ec = 0.0, ef = 0.0;
        for (int k = 2; k <= 198; ++k) {
            const double psi = lo + (hi - lo) * k / 200.0;
            ec = std::max(ec, std::abs(get(fields[0], psi) - get(fields[1], psi)));
            ef = std::max(ef, std::abs(get(fields[1], psi) - get(fields[2], psi)));
        }
        return std::log2(ec / ef);
    };
    const double oW =
        order_of([](const HodographField& f, double p) { return f.deepest().iW(p); });
    const double oZ =
        order_of([](const HodographField& f, double p) { return f.deepest().iZ(p); });
    const double oR =
        order_of([](const HodographField& f, double p) { return f.deepest().ir(p); });
    const double oT =
        order_of([](const HodographField& f, double p) { return f.deepest().itheta(p); });
    for (double o : {oW, oZ, oR, oT}) {
        CHECK(o > 1.65);
        CHECK(o < 2.4);
    }
}

TEST_CASE("march: reciprocal form agrees with the primal") {
    auto& F = fx();
    SolverConfig rc = F.cfg(100);
    rc.form = SystemForm::Reciprocal;
    const HodographField frec = march(F.hb, F.params, F.region, rc, F.branch);
    const auto& fpri = ref_field();
    const Level& d = fpri.deepest();
    double gap = 0.0;
    for (std::size_t j = 1; j + 1 < d.psi.size(); ++j)
        gap = std::max(gap, std::abs(frec.deepest().iW(d.psi[j]) - d.W[j]));
    CHECK(gap < 5e-7);  // well inside the discretization error at this grid
}

TEST_CASE("march: cfl bookkeeping and determinacy samples") {
    auto& F = fx();
    const auto& field = ref_field();
    CHECK(field.diag.worst_cfl > 0.0);
    CHECK(field.diag.worst_cfl < 1.0);
    CHECK(field.diag.max_lam_over_t2 < F.region.Ktilde);
}

TEST_CASE("march: determinism") {
    auto& F = fx();
    const HodographField f2 = march(F.hb, F.params, F.region, F.cfg(100), F.branch);
    const auto& f1 = ref_field();
    REQUIRE(f1.levels.size() == f2.levels.size());
    bool same = true;
    for (std::size_t l = 0; l < f1.levels.size(); ++l)
        for (std::size_t j = 0; j < f1.levels[l].W.size(); ++j)
            same = same && f1.levels[l].W[j] == f2.levels[l].W[j] &&
                   f1.levels[l].Z[j] == f2.levels[l].Z[j];
    CHECK(same);
}

TEST_CASE("march: bad configs are rejected") {
    auto& F = fx();
    SolverConfig bad = F.cfg(100);
    bad.t_min = -1.0;
    CHECK_THROWS_AS(march(F.hb, F.params, F.region, bad, F.branch), std::invalid_argument);
    bad = F.cfg(100);
    bad.t_min = F.region.delta * 2.0;
    CHECK_THROWS_AS(march(F.hb, F.params, F.region, bad, F.branch), std::invalid_argument);
}

TEST_CASE("sonic extrapolation") {
    auto& F = fx();
    const auto& field = ref_field();
    const SonicTrace tr = sonic_extrapolate(field);
    CHECK(tr.psi.size() == field.deepest().psi.size());
    // |W-Z|(t_min) <= 2 t_min sup|L|
    CHECK(tr.constraint_residual <= 0.0);
    // extrapolated W equals extrapolated Z within 3 t_min sup|L|
    CHECK(tr.within_tolerance);
    CHECK(tr.max_disagreement <= tr.disagreement_tol);
    // L at P' equals the boundary datum -d(x1)
    CHECK(tr.L.front() == doctest::Approx(-F.data.d_of_x(0.0)).epsilon(1e-4));
    // sonic values W = Z stay inside the invariant box
    for (std::size_t j = 0; j < tr.psi.size(); ++j) {
        CHECK(tr.W_merged[j] > 0.5 * F.params.m0_hat);
        CHECK(tr.W_merged[j] < F.params.M0_hat + 1.0);
    }
}
