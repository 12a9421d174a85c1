#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "sspatch/domain.hpp"

using namespace sspatch;

namespace {
struct Fixture {
    EquationOfState eos = EquationOfState::quadratic(0.25, 2.0, 0.5);
    BernoulliConstants consts = sonic_normalized_constants(eos, 0.5);
    std::shared_ptr<BernoulliBranch> branch = std::make_shared<BernoulliBranch>(eos, consts, 0.6);
    StreamlineSpec spec =
        make_streamline(Poly({1.0, 0.5, -0.25}), Poly({1.0, -0.3}), 0.0, 0.4);
    HodographBoundary hb{spec, branch};
    BoundaryData data = make_boundary_data(spec, branch);
    DomainParams params = compute_params(*branch, spec, hb, data);
};
}  // namespace

TEST_CASE("paper constants satisfy their defining inequalities") {
    Fixture fx;
    const auto& p = fx.params;
    CHECK(p.delta0 == doctest::Approx(std::min(1.0 / std::sqrt(2.0), fx.hb.t0())));
    CHECK(p.delta > 0.0);
    CHECK(p.delta <= p.delta0);
    CHECK(std::exp(p.Kbar * p.delta1 * p.delta1) <= 2.0 + 1e-12);
    CHECK(p.delta1 <= p.kappa * p.m0_hat / 3.0 + 1e-15);
    CHECK(p.Ktilde * p.delta2 < p.m_tilde);
    CHECK(p.delta == doctest::Approx(std::min(p.delta1, p.delta2)));
    CHECK(p.kappa > 0.0);
    CHECK(p.m_tilde > 0.0);
    CHECK(p.r_lo > 0.0);
    CHECK(p.r_lo < p.r_hi);
    // F(t) >= kappa/2 on (0, delta0]
    for (int k = 1; k <= 64; ++k) {
        const double t = p.delta0 * k / 64.0;
        CHECK(fx.branch->F(t) >= 0.5 * p.kappa - 1e-12);
    }
    // comparison function: g(0) = m0/2 and g(delta1) <= m0
    CHECK(p.g(0.0) == doctest::Approx(0.5 * p.m0_hat));
    CHECK(p.g(p.delta1) <= p.m0_hat + 1e-12);
}

TEST_CASE("Kbar decreases when m0_hat grows") {
    Fixture fx;
    // the formula is decreasing in m0_hat: recompute with a doubled lower bound
    const double inv_c = 1.0 / fx.params.c_min;
    auto kbar_of = [&](double m0) {
        return 1.0 + std::max(1.0 + (2.0 * m0 + 1.0) / m0 * inv_c,
                              1.0 + (2.0 * m0 * m0 + 2.0 * m0 + 2.0) / (m0 * m0) * inv_c);
    };
    CHECK(kbar_of(2.0 * fx.params.m0_hat) < kbar_of(fx.params.m0_hat));
    // t0 < 1/sqrt(2) here, so delta0 = t0
    CHECK(fx.params.delta0 == doctest::Approx(fx.hb.t0()));
}

TEST_CASE("barrier curve from the paper constants") {
    Fixture fx;
    const auto region = make_region(fx.params, *fx.branch, fx.hb);
    CHECK(region.delta == doctest::Approx(fx.params.delta));
    CHECK(barrier_curve(region, region.delta) ==
          doctest::Approx(fx.hb.psi_tilde(region.delta)).epsilon(1e-12));
    CHECK(region.psi_bar0 > 0.0);
    CHECK(barrier_curve(region, 0.0) == doctest::Approx(region.psi_bar0));
    // psi_bar'(t) = Ktilde t^2
    const double t = 0.5 * region.delta;
    const double h = region.delta * 1e-6;
    const double fd = (barrier_curve(region, t + h) - barrier_curve(region, t - h)) / (2 * h);
    CHECK(fd == doctest::Approx(region.Ktilde * t * t).epsilon(1e-6));
    // the barrier stays above the data curve inside
    for (int k = 1; k < 32; ++k) {
        const double tt = region.delta * k / 32.0;
        CHECK(barrier_curve(region, tt) > fx.hb.psi_tilde(tt));
    }
}

TEST_CASE("strong determinacy with the invariant-box bounds") {
    Fixture fx;
    FieldBounds box;
    box.r_max = fx.params.r_hi;
    box.Z_min = 0.5 * fx.params.m0_hat;
    const auto chk = check_strong_determinacy(*fx.branch, fx.params, box);
    CHECK(chk.passed);  // the paper's Ktilde is built exactly to dominate
    CHECK(chk.margin > 0.0);
    // Z -> 0 makes the left side blow up
    FieldBounds degenerate = box;
    degenerate.Z_min = 1e-12;
    CHECK_FALSE(check_strong_determinacy(*fx.branch, fx.params, degenerate).passed);
}

TEST_CASE("working region from a user delta") {
    Fixture fx;
    const auto region = make_region(fx.params, *fx.branch, fx.hb, 0.3);
    CHECK(region.delta == doctest::Approx(0.3));
    CHECK(region.psi_bar0 > 0.0);
    CHECK(region.Ktilde > 0.0);
    for (int k = 1; k < 64; ++k) {
        const double tt = region.delta * k / 64.0;
        CHECK(barrier_curve(region, tt) > fx.hb.psi_tilde(tt));
    }
    // an absurd delta is rejected
    CHECK_THROWS(make_region(fx.params, *fx.branch, fx.hb, 0.9));
}

TEST_CASE("sample-based determinacy margin") {
    std::vector<double> ok{0.1, 0.5, 0.9};
    CHECK(determinacy_margin_from_samples(1.0, ok) == doctest::Approx(0.1));
    std::vector<double> bad{0.1, 1.5};
    CHECK(determinacy_margin_from_samples(1.0, bad) < 0.0);
}
