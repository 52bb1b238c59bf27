// Collocation grid for the time slice: Chebyshev-Lobatto nodes in the
// compactified radial variable s = 1/r on [0, 1/r_inner] (s = 0 is the
// conformal boundary row), Gauss-Legendre nodes in c = cos(theta).
#pragma once

#include <memory>
#include "adsqnm/geometry.hpp"
#include "adsqnm/linalg.hpp"

namespace adsqnm {

struct GridSpec {
    int n_radial = 0;
    int n_angular = 0;
    double r_inner = 0.0;  // inner edge of the radial domain (r+ - delta, or r1)
    double delta = 0.0;    // horizon extension actually used (0 for truncated grids)
    double s_max = 0.0;    // 1 / r_inner

    VectorXd s;        // radial nodes, ascending, s[0] = 0
    VectorXd r;        // 1/s, r[0] = inf sentinel (stored as 0 -> use s)
    MatrixXd D_s;      // d/ds differentiation matrix
    VectorXd w_s;      // Clenshaw-Curtis weights for ds-integrals on [0, s_max]
    VectorXd c;        // angular nodes in (-1, 1), ascending, symmetric
    MatrixXd D_c;      // d/dc differentiation matrix
    VectorXd w_c;      // Gauss-Legendre weights

    int size() const { return n_radial * n_angular; }
    int index(int i_rad, int j_ang) const { return i_rad * n_angular + j_ang; }

    // Barycentric interpolation of radial samples onto arbitrary s in [0, s_max].
    double interp_radial(const VectorXd& values, double s_eval) const;
    Complex interp_radial(const VectorXcd& values, double s_eval) const;
};

// Throws InvalidCountsError for n_radial < 8 or n_angular < 4.
std::shared_ptr<const GridSpec> build_grid(const BlackHoleParams& p, int n_radial,
                                           int n_angular, double r_inner);

// Gauss-Legendre rule on (-1, 1) by Newton iteration on P_n.
void gauss_legendre(int n, VectorXd& nodes, VectorXd& weights);

// Polynomial collocation differentiation matrix for arbitrary distinct nodes.
MatrixXd diff_matrix(const VectorXd& nodes);

// Legendre polynomial P_l(x).
double legendre_p(int l, double x);

}  // namespace adsqnm
