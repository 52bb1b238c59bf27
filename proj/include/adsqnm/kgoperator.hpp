// Collocation discretization of the stationary operator P(lambda) at a fixed
// axial mode k. The working unknown is the twisted w = r^{3/2-nu} u, for which
// the conformal-boundary branches are w ~ g_-(s^2) + s^{2nu} g_+(s^2). The
// discrete operator is a quadratic matrix polynomial P0 + lambda P1 +
// lambda^2 P2 with value/derivative rows at s = 0 implementing the Dirichlet
// or Robin condition; no row is imposed at the inner edge, where smooth
// collocation across the horizon encodes outgoing behavior.
#pragma once

#include <functional>
#include <memory>
#include "adsqnm/grid.hpp"

namespace adsqnm {

struct BoundaryCondition {
    enum class Kind { Dirichlet, Robin };
    Kind kind = Kind::Dirichlet;
    // Real-valued Robin function on Y, as a function of c = cos(theta).
    // Axisymmetric by construction (no phi dependence).
    std::function<double(double)> beta;

    static BoundaryCondition dirichlet() { return {}; }
    static BoundaryCondition robin(double beta_const) {
        BoundaryCondition bc;
        bc.kind = Kind::Robin;
        bc.beta = [beta_const](double) { return beta_const; };
        return bc;
    }
};

struct AssemblyOptions {
    bool wall_at_inner = false;  // Dirichlet wall row at the inner radial edge
};

struct WeightedNorms {
    double l2 = 0.0;
    double h1 = 0.0;
};

struct DiscreteOperator {
    MatrixXcd P0, P1, P2;  // row-equilibrated; row_scale records the scaling
    BlackHoleParams params;
    HorizonData horizon;
    std::shared_ptr<const GridSpec> grid;
    BoundaryCondition bc;
    int k = 0;
    double nu = 0.0;
    bool wall_at_inner = false;

    VectorXd row_scale;     // multiplier applied to each PDE row
    std::vector<bool> is_bc_row;
    VectorXd norm_w;        // ||u||_L2^2 = sum norm_w |w|^2
    VectorXd res_w;         // ||P(lam)u||_L2^2 = sum res_w |(A(lam)w)|^2, 0 on BC rows
    VectorXd h1_w;          // gradient-term quadrature weight (without h^{ij})
    VectorXd trace_minus;   // radial functional: gamma_- u (exact: e_0)
    VectorXd trace_plus;    // radial functional for gamma_+ u (empty if nu >= 1)

    // inverse slice metric at nodes, for the H^1 norm
    VectorXd hup_rr, hup_rphi, hup_phiphi, hup_thth;

    int size() const { return grid->size(); }

    MatrixXcd evaluate_at(Complex lambda) const;

    // Structured application path, equivalent to evaluate_at(lambda) * w but
    // assembled from the stored coefficient fields; used for cross-checks.
    VectorXcd apply(Complex lambda, const VectorXcd& w) const;

    // h^2 P(z/h)
    MatrixXcd semiclassical_rescale(double h, Complex z) const;

    WeightedNorms norms(const VectorXcd& w) const;
    double weighted_l2(const VectorXcd& w) const;
    // ||P(lambda) u|| in the weighted L2, from a raw matrix application.
    double residual_l2(const VectorXcd& matrix_times_w) const;

    // gamma_- u and gamma_+ u at the angular nodes (gamma_+ requires nu in (0,1)).
    VectorXcd gamma_minus(const VectorXcd& w) const;
    VectorXcd gamma_plus(const VectorXcd& w) const;
};

DiscreteOperator assemble(const BlackHoleParams& p,
                          std::shared_ptr<const GridSpec> grid,
                          const BoundaryCondition& bc, int k,
                          const AssemblyOptions& opts = {});

// Coefficient fields of the twisted operator at one node, exposed for
// diagnostics and independent checks of the assembled matrices.
struct TwistedCoefficients {
    double c02;       // multiplies w_ss
    double c01;       // multiplies w_s (Bessel 1/s singularity lives here)
    Complex c00;      // zeroth order part of P0 (includes k terms)
    Complex c01_k;    // k-dependent addition to the w_s coefficient
    double ang2;      // multiplies w_cc
    double ang1;      // multiplies w_c
    Complex p1_ds;    // P1 coefficient of w_s
    Complex p1_diag;  // P1 zeroth order
    double p2_diag;   // P2 (diagonal)
};

TwistedCoefficients twisted_coefficients(const BlackHoleParams& p, int k, double s,
                                         double c);

}  // namespace adsqnm
