#include <doctest.h>

#include <cmath>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "adsqnm/grid.hpp"

using namespace adsqnm;

TEST_CASE("build_grid: monotone nodes and count validation") {
    BlackHoleParams p{1.0, 0.0, 1.5, 0};
    auto g = build_grid(p, 8, 4, 0.95);
    for (int i = 1; i < g->n_radial; ++i) CHECK(g->s[i] > g->s[i - 1]);
    // radial nodes strictly monotone in r (descending as s ascends)
    for (int i = 2; i < g->n_radial; ++i) CHECK(g->r[i] < g->r[i - 1]);
    CHECK(g->s[0] == 0.0);
    CHECK(g->s[g->n_radial - 1] == doctest::Approx(1.0 / 0.95));

    CHECK_THROWS_AS(build_grid(p, 7, 4, 1.0), InvalidCountsError);
    CHECK_THROWS_AS(build_grid(p, 8, 3, 1.0), InvalidCountsError);
}

TEST_CASE("radial differentiation: analytic derivative of 1/r^2") {
    BlackHoleParams p{1.0, 0.0, 1.5, 0};
    auto g = build_grid(p, 64, 4, 0.95);
    // f(r) = 1/r^2 = s^2; df/dr = -2/r^3 = -2 s^3.
    VectorXd f(g->n_radial);
    for (int i = 0; i < g->n_radial; ++i) f[i] = g->s[i] * g->s[i];
    VectorXd dfds = g->D_s * f;
    for (int i = 1; i + 1 < g->n_radial; ++i) {
        double dfdr = -g->s[i] * g->s[i] * dfds[i];
        CHECK(dfdr == doctest::Approx(-2.0 * std::pow(g->s[i], 3)).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("radial quadrature matches adaptive reference for a bump") {
    BlackHoleParams p{1.0, 0.0, 1.5, 0};
    auto g = build_grid(p, 64, 4, 0.95);
    auto bump = [&](double s) {
        double mid = 0.5 * g->s_max, w = 0.18 * g->s_max;
        double x = (s - mid) / w;
        return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
    };
    double q = 0.0;
    for (int i = 0; i < g->n_radial; ++i) q += g->w_s[i] * bump(g->s[i]);
    double err;
    double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        bump, 0.0, g->s_max, 10, 1e-12, &err);
    CHECK(q == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("gauss-legendre nodes integrate polynomials exactly") {
    VectorXd x, w;
    gauss_legendre(12, x, w);
    CHECK(x.size() == 12);
    // symmetric nodes
    for (int j = 0; j < 6; ++j) CHECK(x[j] == doctest::Approx(-x[11 - j]).epsilon(1e-14));
    // exact for degree <= 23: check x^4 and P_8 (integral zero)
    double q4 = 0.0, q8 = 0.0, q0 = 0.0;
    for (int j = 0; j < 12; ++j) {
        q4 += w[j] * std::pow(x[j], 4);
        q8 += w[j] * legendre_p(8, x[j]);
        q0 += w[j];
    }
    CHECK(q0 == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(q4 == doctest::Approx(2.0 / 5.0).epsilon(1e-13));
    CHECK(q8 == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("angular differentiation matrix is spectrally accurate") {
    VectorXd x, w;
    gauss_legendre(24, x, w);
    MatrixXd D = diff_matrix(x);
    VectorXd f(24), dfe(24);
    for (int j = 0; j < 24; ++j) {
        f[j] = std::sin(2.0 * x[j]);
        dfe[j] = 2.0 * std::cos(2.0 * x[j]);
    }
    VectorXd df = D * f;
    for (int j = 0; j < 24; ++j) CHECK(df[j] == doctest::Approx(dfe[j]).epsilon(1e-10));
}

TEST_CASE("barycentric radial interpolation reproduces smooth samples") {
    BlackHoleParams p{1.0, 0.0, 1.5, 0};
    auto g = build_grid(p, 48, 4, 1.0);
    VectorXd f(g->n_radial);
    for (int i = 0; i < g->n_radial; ++i) f[i] = std::cos(3.0 * g->s[i]);
    for (double s : {0.1234, 0.456, 0.789})
        CHECK(g->interp_radial(f, s) == doctest::Approx(std::cos(3.0 * s)).epsilon(1e-10));
}
