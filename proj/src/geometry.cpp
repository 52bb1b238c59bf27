#include "adsqnm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace adsqnm {

void BlackHoleParams::validate() const {
    if (!(M > 0.0)) throw ConfigInvalidError("BlackHoleParams: M must be positive");
    if (!(std::abs(a) < 1.0))
        throw ConfigInvalidError("BlackHoleParams: regularity requires |a| < 1");
    if (!(nu > 0.0)) throw ConfigInvalidError("BlackHoleParams: nu must be positive");
}

MetricScalars metric_scalars(const BlackHoleParams& p, double r, double theta) {
    double c = std::cos(theta);
    return {delta_r(p, r), 1.0 - p.a * p.a * c * c, r * r + p.a * p.a * c * c};
}

double delta_r(const BlackHoleParams& p, double r) {
    return (r * r + p.a * p.a) * (1.0 + r * r) - 2.0 * p.M * r;
}

double delta_r_prime(const BlackHoleParams& p, double r) {
    return 2.0 * r * (1.0 + r * r) + (r * r + p.a * p.a) * 2.0 * r - 2.0 * p.M;
}

double delta_theta(const BlackHoleParams& p, double costh) {
    return 1.0 - p.a * p.a * costh * costh;
}

double f_plus(const BlackHoleParams& p, double r) {
    return (p.a * p.a - 1.0) / (r * r + 1.0);
}

double f_plus_dr(const BlackHoleParams& p, double r) {
    double d = r * r + 1.0;
    return -(p.a * p.a - 1.0) * 2.0 * r / (d * d);
}

HorizonData find_horizon(const BlackHoleParams& p) {
    p.validate();
    // Delta_r is quartic with positive leading coefficient; bracket the
    // largest root by scanning a geometric grid on (0, 10(1+M)].
    const int n_scan = 4000;
    const double r_hi = 10.0 * (1.0 + p.M);
    const double r_lo = 1e-8 * (1.0 + p.M);
    double ratio = std::pow(r_hi / r_lo, 1.0 / (n_scan - 1));
    double bracket_lo = -1.0, bracket_hi = -1.0;
    double prev_r = r_hi, prev_f = delta_r(p, r_hi);
    // walk downward so the first sign change is the largest root
    for (int i = 1; i < n_scan; ++i) {
        double r = r_hi / std::pow(ratio, i);
        double f = delta_r(p, r);
        if (prev_f > 0.0 && f <= 0.0) {
            bracket_lo = r;
            bracket_hi = prev_r;
            break;
        }
        prev_r = r;
        prev_f = f;
    }
    if (bracket_lo < 0.0)
        throw NoHorizonError("find_horizon: Delta_r > 0 for all r > 0 (no horizon)");

    double lo = bracket_lo, hi = bracket_hi;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (delta_r(p, mid) <= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double rp = 0.5 * (lo + hi);
    // Newton polish
    for (int it = 0; it < 8; ++it) {
        double f = delta_r(p, rp), df = delta_r_prime(p, rp);
        if (df == 0.0) break;
        rp -= f / df;
    }

    double scale = 1.0 + rp * rp * rp * rp;
    if (std::abs(delta_r(p, rp)) > 1e-12 * scale)
        throw NoHorizonError("find_horizon: root residual exceeds tolerance");
    double dprime = delta_r_prime(p, rp);
    if (dprime <= 1e-10 * (1.0 + rp * rp * rp))
        throw DegenerateHorizonError("find_horizon: Delta_r'(r+) <= tolerance (extremal)");

    HorizonData h;
    h.r_plus = rp;
    h.surface_gravity = dprime / (2.0 * (1.0 - p.a * p.a) * (rp * rp + p.a * p.a));
    h.killing_coeff = p.a / (rp * rp + p.a * p.a);
    h.hawking_reall = std::abs(p.a) < rp * rp;
    return h;
}

std::array<std::array<double, 4>, 4> DualMetricScaled::as_matrix() const {
    return {{{tt, tr, 0.0, tphi},
             {tr, rr, 0.0, rphi},
             {0.0, 0.0, thth, 0.0},
             {tphi, rphi, 0.0, phiphi}}};
}

double DualMetricScaled::quad(const std::array<double, 4>& z) const {
    return pair(z, z);
}

double DualMetricScaled::pair(const std::array<double, 4>& z1,
                              const std::array<double, 4>& z2) const {
    return tt * z1[0] * z2[0] + rr * z1[1] * z2[1] + thth * z1[2] * z2[2] +
           phiphi * z1[3] * z2[3] + tr * (z1[0] * z2[1] + z1[1] * z2[0]) +
           tphi * (z1[0] * z2[3] + z1[3] * z2[0]) +
           rphi * (z1[1] * z2[3] + z1[3] * z2[1]);
}

DualMetricScaled dual_metric_scaled(const BlackHoleParams& p, double r, double costh) {
    const double a = p.a, one_m_a2 = 1.0 - a * a;
    const double dr = delta_r(p, r);
    const double dth = delta_theta(p, costh);
    const double s2 = 1.0 - costh * costh;  // sin^2(theta)
    const double fp = f_plus(p, r);
    const double r2a2 = r * r + a * a;

    DualMetricScaled g;
    g.rho_sq = r * r + a * a * costh * costh;
    g.rr = -dr;
    g.thth = -dth;
    g.tr = -dr * fp - one_m_a2 * r2a2;
    g.rphi = -one_m_a2 * a;
    g.tt = -dr * fp * fp - 2.0 * one_m_a2 * r2a2 * fp - one_m_a2 * one_m_a2 * a * a * s2 / dth;
    g.tphi = -one_m_a2 * a * fp - one_m_a2 * one_m_a2 * a / dth;
    g.phiphi = -one_m_a2 * one_m_a2 / (dth * s2);
    return g;
}

DualMetricScaled dual_metric_scaled_dr(const BlackHoleParams& p, double r, double costh) {
    const double a = p.a, one_m_a2 = 1.0 - a * a;
    const double dr = delta_r(p, r), ddr = delta_r_prime(p, r);
    const double fp = f_plus(p, r), dfp = f_plus_dr(p, r);
    const double r2a2 = r * r + a * a;

    DualMetricScaled g{};
    g.rho_sq = 2.0 * r;
    g.rr = -ddr;
    g.thth = 0.0;
    g.tr = -ddr * fp - dr * dfp - one_m_a2 * 2.0 * r;
    g.rphi = 0.0;
    g.tt = -ddr * fp * fp - 2.0 * dr * fp * dfp -
           2.0 * one_m_a2 * (2.0 * r * fp + r2a2 * dfp);
    g.tphi = -one_m_a2 * a * dfp;
    g.phiphi = 0.0;
    return g;
}

DualMetricScaled dual_metric_scaled_dc(const BlackHoleParams& p, double r, double costh) {
    const double a = p.a, one_m_a2 = 1.0 - a * a;
    const double dth = delta_theta(p, costh);
    const double s2 = 1.0 - costh * costh;
    const double ddth = -2.0 * a * a * costh;  // d(Delta_theta)/dc
    const double ds2 = -2.0 * costh;           // d(sin^2)/dc

    DualMetricScaled g{};
    g.rho_sq = 2.0 * a * a * costh;
    // d/dc of  -A^2 a^2 s2/dth  with A^2 = (1-a^2)^2
    g.tt = -one_m_a2 * one_m_a2 * a * a * (ds2 * dth - s2 * ddth) / (dth * dth);
    g.tphi = one_m_a2 * one_m_a2 * a * ddth / (dth * dth);
    g.thth = -ddth;
    g.phiphi = one_m_a2 * one_m_a2 * (ddth * s2 + dth * ds2) / (dth * s2 * dth * s2);
    return g;
}

std::array<std::array<double, 4>, 4>
inverse_metric(const BlackHoleParams& p, const SpacetimePoint& pt,
               const HorizonData& hor, double delta_extension) {
    if (pt.chart == Chart::BoyerLindquist) {
        if (pt.r <= hor.r_plus)
            throw OutsideChartError("inverse_metric: Boyer-Lindquist chart needs r > r+");
        const double a = p.a, one_m_a2 = 1.0 - p.a * p.a;
        const double r = pt.r, c = std::cos(pt.theta);
        const double dr = delta_r(p, r), dth = delta_theta(p, c);
        const double s2 = 1.0 - c * c;
        const double rho2 = r * r + a * a * c * c;
        const double r2a2 = r * r + a * a;
        std::array<std::array<double, 4>, 4> g{};
        double A2 = one_m_a2 * one_m_a2;
        g[1][1] = -dr / rho2;
        g[2][2] = -dth / rho2;
        g[0][0] = -A2 * a * a * s2 / (rho2 * dth) + A2 * r2a2 * r2a2 / (rho2 * dr);
        g[0][3] = g[3][0] = -A2 * a / (rho2 * dth) + A2 * r2a2 * a / (rho2 * dr);
        g[3][3] = -A2 / (rho2 * dth * s2) + A2 * a * a / (rho2 * dr);
        return g;
    }
    if (pt.r <= hor.r_plus - delta_extension)
        throw OutsideChartError("inverse_metric: Kerr-star chart needs r > r+ - delta");
    auto G = dual_metric_scaled(p, pt.r, std::cos(pt.theta));
    auto m = G.as_matrix();
    for (auto& row : m)
        for (auto& v : row) v /= G.rho_sq;
    return m;
}

double F_t_prime(const BlackHoleParams& p, double r) {
    return (1.0 - p.a * p.a) * (r * r + p.a * p.a) / delta_r(p, r) + f_plus(p, r);
}

double F_phi_prime(const BlackHoleParams& p, double r) {
    return p.a * (1.0 - p.a * p.a) / delta_r(p, r);
}

KerrStarShift kerr_star_shift(const BlackHoleParams& p, const HorizonData& hor, double r) {
    if (r <= hor.r_plus)
        throw OutsideChartError("kerr_star_shift: requires r > r+");
    // F(r) = -int_r^inf F'(rho) drho, compactified with u = 1/rho. Both
    // integrands decay like rho^-4 (the f_+ term cancels the rho^-2 tail
    // of F'_t), so the u-integrands are regular at u = 0.
    using boost::math::quadrature::gauss_kronrod;
    auto integrate = [&](auto&& fprime) {
        double err = 0.0;
        double val = gauss_kronrod<double, 61>::integrate(
            [&](double u) {
                double rho = 1.0 / u;
                return fprime(rho) * rho * rho;
            },
            0.0, 1.0 / r, 12, 1e-11, &err);
        if (std::abs(err) > 1e-10 * (1.0 + std::abs(val)))
            throw QuadratureFailureError("kerr_star_shift: tolerance unreachable near r+");
        return -val;
    };
    KerrStarShift out;
    out.F_t = integrate([&](double rho) { return F_t_prime(p, rho); });
    out.F_phi = integrate([&](double rho) { return F_phi_prime(p, rho); });
    return out;
}

bool ergoregion_contains(const BlackHoleParams& p, double r, double theta, double slack) {
    double c = std::cos(theta);
    double s2 = 1.0 - c * c;
    return delta_r(p, r) <= p.a * p.a * delta_theta(p, c) * s2 + slack;
}

SliceGeometry slice_geometry(const BlackHoleParams& p, double r, double costh) {
    auto G = dual_metric_scaled(p, r, costh);
    if (!(G.tt > 0.0))
        throw OutsideChartError("slice_geometry: slice not spacelike here (G^tt <= 0)");
    SliceGeometry out;
    double rho = std::sqrt(G.rho_sq);
    double sinth = std::sqrt(std::max(0.0, 1.0 - costh * costh));
    double one_m_a2 = 1.0 - p.a * p.a;
    out.lapse = rho / std::sqrt(G.tt);
    out.sqrt_h = rho * std::sqrt(G.tt) * sinth / (one_m_a2 * one_m_a2);

    // g_{mu nu} = rho^2 (G^{-1})_{mu nu}; theta decouples, invert the (t,r,phi)
    // block analytically via the adjugate.
    double A = G.tt, B = G.tr, C = G.tphi, D = G.rr, E = G.rphi, F = G.phiphi;
    double det = A * (D * F - E * E) - B * (B * F - C * E) + C * (B * E - C * D);
    if (det == 0.0) throw OutsideChartError("slice_geometry: singular dual metric");
    double i_tt = (D * F - E * E) / det;
    double i_tr = -(B * F - C * E) / det;
    double i_tp = (B * E - C * D) / det;
    double i_rr = (A * F - C * C) / det;
    double i_rp = -(A * E - B * C) / det;
    double i_pp = (A * D - B * B) / det;

    auto& g = out.g_dn;
    for (auto& row : g) row.fill(0.0);
    g[0][0] = G.rho_sq * i_tt;
    g[0][1] = g[1][0] = G.rho_sq * i_tr;
    g[0][3] = g[3][0] = G.rho_sq * i_tp;
    g[1][1] = G.rho_sq * i_rr;
    g[1][3] = g[3][1] = G.rho_sq * i_rp;
    g[3][3] = G.rho_sq * i_pp;
    g[2][2] = G.rho_sq / G.thth;  // 1/g^{theta theta} since the block is diagonal

    // h_ij = -g_ij on the slice; invert {r,phi} 2x2 and theta separately.
    double h_rr = -g[1][1], h_rp = -g[1][3], h_pp = -g[3][3], h_thth = -g[2][2];
    double det2 = h_rr * h_pp - h_rp * h_rp;
    out.h_up_rr = h_pp / det2;
    out.h_up_rphi = -h_rp / det2;
    out.h_up_phiphi = h_rr / det2;
    out.h_up_thth = 1.0 / h_thth;
    return out;
}

double default_delta(const BlackHoleParams& p, const HorizonData& hor) {
    double delta = 0.05 * hor.r_plus;
    // Validate: simple-root monotonicity and spacelike slices down to r+ - delta.
    for (int tries = 0; tries < 8; ++tries) {
        bool ok = true;
        for (int i = 0; i <= 32 && ok; ++i) {
            double r = hor.r_plus - delta + delta * i / 32.0;
            if (delta_r_prime(p, r) <= 0.0) ok = false;
            for (double c : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
                if (dual_metric_scaled(p, r, c).tt <= 0.0) ok = false;
            }
        }
        if (ok) return delta;
        delta *= 0.5;
    }
    throw DegenerateHorizonError("default_delta: could not validate an extension depth");
}

}  // namespace adsqnm
