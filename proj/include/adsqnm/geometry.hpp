// Exact Kerr-AdS geometry in units with Lambda = -3: metric scalars, horizon
// location and surface gravity, Kerr-star coordinate shifts, the extended dual
// metric (polynomial in Delta_r, hence smooth across the horizon), and the
// ergoregion test.
#pragma once

#include <array>
#include "adsqnm/common.hpp"

namespace adsqnm {

struct BlackHoleParams {
    double M = 1.0;   // black hole mass, M > 0
    double a = 0.0;   // rotation speed, |a| < 1
    double nu = 1.5;  // Klein-Gordon mass parameter, nu > 0
    int k = 0;        // axial mode

    void validate() const;
};

struct HorizonData {
    double r_plus = 0.0;
    double surface_gravity = 0.0;  // kappa = Delta_r'(r+) / (2(1-a^2)(r+^2+a^2))
    double killing_coeff = 0.0;    // a / (r+^2 + a^2), coefficient of Phi in K
    bool hawking_reall = false;    // |a| < r+^2
};

enum class Chart { BoyerLindquist, KerrStar };

struct SpacetimePoint {
    double r = 0.0;
    double theta = PI / 2;
    Chart chart = Chart::KerrStar;
};

struct MetricScalars {
    double delta_r;      // (r^2+a^2)(1+r^2) - 2Mr
    double delta_theta;  // 1 - a^2 cos^2(theta)
    double rho_sq;       // r^2 + a^2 cos^2(theta)
};

MetricScalars metric_scalars(const BlackHoleParams& p, double r, double theta);

double delta_r(const BlackHoleParams& p, double r);
double delta_r_prime(const BlackHoleParams& p, double r);
double delta_theta(const BlackHoleParams& p, double costh);

// Slice function choice making {t* = const} spacelike: f_+ = (a^2-1)/(r^2+1).
double f_plus(const BlackHoleParams& p, double r);
double f_plus_dr(const BlackHoleParams& p, double r);

HorizonData find_horizon(const BlackHoleParams& p);

// Entries of rho^2 g^{-1} in Kerr-star coordinates (t*, r, theta, phi*),
// index order {t, r, theta, phi}. Polynomial in Delta_r: finite at r = r+.
struct DualMetricScaled {
    // Symmetric storage of G^{mu nu} = rho^2 g^{mu nu}.
    double tt, tr, tphi, rr, rphi, thth, phiphi;
    double rho_sq;

    std::array<std::array<double, 4>, 4> as_matrix() const;
    // G(zeta, zeta) for covector zeta = (zeta_t, zeta_r, zeta_theta, zeta_phi)
    double quad(const std::array<double, 4>& z) const;
    double pair(const std::array<double, 4>& z1, const std::array<double, 4>& z2) const;
};

DualMetricScaled dual_metric_scaled(const BlackHoleParams& p, double r, double costh);

// Radial (d/dr) and polar (d/dcos(theta)) derivatives of the entries above,
// in closed form; used by the Hamilton vector field.
DualMetricScaled dual_metric_scaled_dr(const BlackHoleParams& p, double r, double costh);
DualMetricScaled dual_metric_scaled_dc(const BlackHoleParams& p, double r, double costh);

// g^{-1} itself as a 4x4 array in the requested chart.
// BoyerLindquist requires r > r+; KerrStar requires r > r+ - delta.
std::array<std::array<double, 4>, 4>
inverse_metric(const BlackHoleParams& p, const SpacetimePoint& pt,
               const HorizonData& hor, double delta_extension);

struct KerrStarShift {
    double F_t;
    double F_phi;
};

// F_t, F_phi normalized to vanish at infinity (integrals of eq. F'_t, F'_phi
// compactified by u = 1/r). Throws QuadratureFailureError near the horizon.
KerrStarShift kerr_star_shift(const BlackHoleParams& p, const HorizonData& hor, double r);

double F_t_prime(const BlackHoleParams& p, double r);
double F_phi_prime(const BlackHoleParams& p, double r);

// Delta_r(r) <= a^2 Delta_theta sin^2(theta), with an optional slack for
// sampling-based checks near the boundary of the region.
bool ergoregion_contains(const BlackHoleParams& p, double r, double theta,
                         double slack = 0.0);

// Default horizon extension depth and its validation (Delta_r' > 0 and
// dt* timelike-dual on [r+ - delta, r+]).
double default_delta(const BlackHoleParams& p, const HorizonData& hor);

// Data of the {t* = const} foliation at a point (r, c = cos theta):
// lapse, induced metric density, covariant metric and inverse slice metric.
// Lapse and sqrt(det h) come from closed forms; the index-lowered metric is a
// numerical 4x4 inversion of rho^2 g^{-1} (regular across the horizon).
struct SliceGeometry {
    double lapse;    // A = rho / sqrt(G^{tt})
    double sqrt_h;   // sqrt(det h) = rho sqrt(G^{tt}) sin(theta) / (1-a^2)^2
    std::array<std::array<double, 4>, 4> g_dn;  // g_{mu nu}, order (t,r,theta,phi)
    // Inverse of the induced Riemannian slice metric h_ij = -g_ij.
    double h_up_rr, h_up_rphi, h_up_phiphi, h_up_thth;
};

SliceGeometry slice_geometry(const BlackHoleParams& p, double r, double costh);

}  // namespace adsqnm
