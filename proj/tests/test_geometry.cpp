#include <doctest.h>

#include <cmath>
#include <random>

#include "adsqnm/geometry.hpp"

using namespace adsqnm;

TEST_CASE("metric scalars: static degenerate cases and direct substitution") {
    BlackHoleParams p{1.0, 0.0, 1.5, 0};
    auto ms = metric_scalars(p, 1.0, PI / 2);
    CHECK(ms.delta_r == doctest::Approx(0.0).epsilon(1e-15));  // 1*2 - 2

    // a = 0 kills the theta dependence
    BlackHoleParams p0{0.7, 0.0, 0.5, 0};
    for (double th : {0.3, 1.1, 2.6}) CHECK(metric_scalars(p0, 2.0, th).delta_theta == 1.0);

    // direct-substitution oracle at (M=1, a=0.5, r=2, theta=0):
    // Delta_r = (4+0.25)(1+4) - 4 = 17.25, Delta_theta = 0.75, rho^2 = 4.25
    BlackHoleParams p5{1.0, 0.5, 1.5, 0};
    auto m5 = metric_scalars(p5, 2.0, 0.0);
    CHECK(m5.delta_r == doctest::Approx(17.25).epsilon(1e-15));
    CHECK(m5.delta_theta == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(m5.rho_sq == doctest::Approx(4.25).epsilon(1e-15));
}

TEST_CASE("find_horizon: Schwarzschild-AdS unit mass") {
    BlackHoleParams p{1.0, 0.0, 1.5, 0};
    auto h = find_horizon(p);
    CHECK(h.r_plus == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(delta_r(p, h.r_plus)) <= 1e-12 * (1.0 + std::pow(h.r_plus, 4)));
    // kappa = Delta'(1) / (2*1*1) = 4/2 = 2 (symbolic differentiation oracle)
    CHECK(h.surface_gravity == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(h.hawking_reall);
}

TEST_CASE("find_horizon: naked-singularity parameters throw NoHorizon") {
    BlackHoleParams p{0.05, 0.9, 1.5, 0};
    // global minimum of Delta_r is positive here
    double lo = 1e300;
    for (int i = 1; i <= 20000; ++i) lo = std::min(lo, delta_r(p, 1e-3 * i));
    CHECK(lo > 0.0);
    CHECK_THROWS_AS(find_horizon(p), NoHorizonError);
}

TEST_CASE("find_horizon invariants: positivity beyond r+ and kappa > 0") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uM(0.2, 2.0), ua(-0.6, 0.6);
    int found = 0;
    for (int t = 0; t < 40; ++t) {
        BlackHoleParams p{uM(rng), ua(rng), 1.0, 0};
        HorizonData h;
        try {
            h = find_horizon(p);
        } catch (const NoHorizonError&) {
            continue;
        }
        ++found;
        CHECK(h.surface_gravity > 0.0);
        for (int i = 1; i <= 200; ++i) {
            double r = h.r_plus * (1.0 + 0.05 * i);
            CHECK(delta_r(p, r) > 0.0);
        }
    }
    CHECK(found > 10);
}

TEST_CASE("hawking_reall flag flips at most once along an |a| sweep") {
    BlackHoleParams base{0.15, 0.0, 1.0, 0};
    int flips = 0;
    bool prev = true, first = true;
    for (int i = 0; i <= 60; ++i) {
        BlackHoleParams p = base;
        p.a = 0.0132 * i;
        bool flag;
        try {
            flag = find_horizon(p).hawking_reall;
        } catch (const NoHorizonError&) {
            break;
        }
        if (!first && flag != prev) ++flips;
        prev = flag;
        first = false;
    }
    CHECK(flips <= 1);
}

TEST_CASE("inverse metric: BL reduction at a = 0 and Kerr-star finiteness at r+") {
    BlackHoleParams p{1.0, 0.0, 1.5, 0};
    auto h = find_horizon(p);
    SpacetimePoint pt{2.0, 1.2, Chart::BoyerLindquist};
    auto g = inverse_metric(p, pt, h, 0.05);
    double r = pt.r;
    double rho2 = r * r;
    CHECK(g[0][0] == doctest::Approx(r * r * r * r / (rho2 * delta_r(p, r))).epsilon(1e-12));
    CHECK(g[0][3] == doctest::Approx(0.0).epsilon(1e-14));

    BlackHoleParams pa{1.0, 0.4, 1.5, 0};
    auto ha = find_horizon(pa);
    SpacetimePoint ks{ha.r_plus, 1.0, Chart::KerrStar};
    auto gks = inverse_metric(pa, ks, ha, 0.05 * ha.r_plus);
    for (auto& row : gks)
        for (double v : row) CHECK(std::isfinite(v));

    SpacetimePoint bad{ha.r_plus * 0.9, 1.0, Chart::BoyerLindquist};
    CHECK_THROWS_AS(inverse_metric(pa, bad, ha, 0.0), OutsideChartError);
}

TEST_CASE("inverse metric: BL and Kerr-star agree under the chart Jacobian") {
    // chain rule: g_KS^{mn} = J^m_a J^n_b g_BL^{ab} with t* = t + F_t(r),
    // phi* = phi + F_phi(r); only the derivatives F'_t, F'_phi enter.
    BlackHoleParams p{1.0, 0.3, 1.5, 0};
    auto h = find_horizon(p);
    double r = 3.0, th = 1.0;
    auto gbl = inverse_metric(p, {r, th, Chart::BoyerLindquist}, h, 0.0);
    auto gks = inverse_metric(p, {r, th, Chart::KerrStar}, h, 0.0);

    double Ft = F_t_prime(p, r), Fp = F_phi_prime(p, r);
    // J acts as: dt* = dt + Ft dr, dphi* = dphi + Fp dr
    std::array<std::array<double, 4>, 4> J{};
    J[0][0] = 1.0;
    J[0][1] = Ft;
    J[1][1] = 1.0;
    J[2][2] = 1.0;
    J[3][1] = Fp;
    J[3][3] = 1.0;
    for (int m = 0; m < 4; ++m)
        for (int n = 0; n < 4; ++n) {
            double acc = 0.0;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) acc += J[m][a] * J[n][b] * gbl[a][b];
            CHECK(gks[m][n] == doctest::Approx(acc).epsilon(1e-8).scale(1.0));
        }
}

TEST_CASE("kerr_star_shift: normalization, a = 0, and derivative oracle") {
    BlackHoleParams p{1.0, 0.4, 1.5, 0};
    auto h = find_horizon(p);
    // vanish at infinity
    auto far = kerr_star_shift(p, h, 500.0);
    CHECK(std::abs(far.F_t) < 1e-5);
    CHECK(std::abs(far.F_phi) < 1e-6);

    // finite-difference vs direct formula at r = 2
    double eps = 1e-5;
    auto a1 = kerr_star_shift(p, h, 2.0 - eps);
    auto a2 = kerr_star_shift(p, h, 2.0 + eps);
    double fd = (a2.F_phi - a1.F_phi) / (2.0 * eps);
    CHECK(fd == doctest::Approx(p.a * (1.0 - p.a * p.a) / delta_r(p, 2.0)).epsilon(1e-7));
    double fd_t = (a2.F_t - a1.F_t) / (2.0 * eps);
    CHECK(fd_t == doctest::Approx(F_t_prime(p, 2.0)).epsilon(1e-7));

    BlackHoleParams p0{1.0, 0.0, 1.5, 0};
    auto h0 = find_horizon(p0);
    auto s0 = kerr_star_shift(p0, h0, 2.5);
    CHECK(s0.F_phi == 0.0);
}

TEST_CASE("ergoregion") {
    BlackHoleParams p0{1.0, 0.0, 1.5, 0};
    auto h0 = find_horizon(p0);
    CHECK_FALSE(ergoregion_contains(p0, h0.r_plus * 1.01, PI / 2));
    CHECK_FALSE(ergoregion_contains(p0, 5.0, 1.0));

    BlackHoleParams p{1.0, 0.5, 1.5, 0};
    auto h = find_horizon(p);
    CHECK(ergoregion_contains(p, h.r_plus, PI / 2));
    // direct-substitution check just outside the horizon
    double r = h.r_plus + 0.01, th = PI / 4;
    double c = std::cos(th);
    bool direct = delta_r(p, r) <= p.a * p.a * (1.0 - p.a * p.a * c * c) * (1.0 - c * c);
    CHECK(ergoregion_contains(p, r, th) == direct);
}

TEST_CASE("slice function is timelike-dual on the extended slice") {
    for (double a : {0.0, 0.3, 0.6}) {
        BlackHoleParams p{1.0, a, 1.5, 0};
        auto h = find_horizon(p);
        double delta = default_delta(p, h);
        for (int i = 0; i <= 20; ++i) {
            double r = h.r_plus - delta + (10.0 - h.r_plus + delta) * i / 20.0;
            for (double c : {-0.95, -0.4, 0.0, 0.4, 0.95})
                CHECK(dual_metric_scaled(p, r, c).tt > 0.0);
        }
    }
}

TEST_CASE("closed-form dual metric derivatives match finite differences") {
    BlackHoleParams p{0.8, 0.45, 1.0, 0};
    double r = 1.7, c = 0.3, eps = 1e-6;
    auto num_dr = [&](auto entry) {
        return (entry(dual_metric_scaled(p, r + eps, c)) -
                entry(dual_metric_scaled(p, r - eps, c))) /
               (2 * eps);
    };
    auto num_dc = [&](auto entry) {
        return (entry(dual_metric_scaled(p, r, c + eps)) -
                entry(dual_metric_scaled(p, r, c - eps))) /
               (2 * eps);
    };
    auto dr = dual_metric_scaled_dr(p, r, c);
    auto dc = dual_metric_scaled_dc(p, r, c);
#define CHECK_ENTRY(E)                                                       \
    CHECK(dr.E == doctest::Approx(num_dr([](auto& g) { return g.E; })).epsilon(1e-6)); \
    CHECK(dc.E == doctest::Approx(num_dc([](auto& g) { return g.E; })).epsilon(1e-6));
    CHECK_ENTRY(tt)
    CHECK_ENTRY(tr)
    CHECK_ENTRY(tphi)
    CHECK_ENTRY(rr)
    CHECK_ENTRY(rphi)
    CHECK_ENTRY(thth)
    CHECK_ENTRY(phiphi)
    CHECK_ENTRY(rho_sq)
#undef CHECK_ENTRY
}
