// Operational quasimode construction: trapped eigenmodes of the operator
// restricted to {r >= r1} with a Dirichlet wall at r1, extended to the full
// slice by a smooth cutoff and zero, with the full-grid residual measured.
#pragma once

#include "adsqnm/spectra.hpp"

namespace adsqnm {

struct Quasimode {
    int ell = -1;              // branch index (dominant angular degree)
    double lambda_sharp = 0.0; // real projection of the selected eigenvalue
    VectorXcd vector;          // on the full X_delta grid, zero for r <= r1
    double residual = 0.0;     // ||P(lambda_sharp) u||_{L2} on the full grid
    double r1 = 0.0;
    double transition_width = 0.0;
    double norm_check = 0.0;   // ||u||_{L2} after renormalization
    double discarded_imag = 0.0;
};

struct TruncatedMode {
    Complex lambda;
    VectorXcd mode;      // on the truncated grid, unit weighted-L2 norm
    bool nearly_real = false;
    int ell_hint = -1;
};

// Quadratic eigenproblem on [r1, inf) with a Dirichlet wall row at r1 and the
// boundary condition at Y; eigenvalues sorted by real part, modes normalized
// in the truncated weighted L2. Throws NoTrappedModesError if no nearly-real
// eigenvalue lies in [re_min, re_max].
std::vector<TruncatedMode> solve_truncated(const DiscreteOperator& op_truncated,
                                           double re_min, double re_max);

// C^4 cutoff rising over [r1, r1 + transition_width], zero-extension onto the
// full grid, renormalization, and the full-grid residual. Throws
// CutoffTooSharpError when the residual exceeds the wall-decay heuristic.
Quasimode extend_cutoff(const DiscreteOperator& op_full,
                        const DiscreteOperator& op_truncated,
                        const TruncatedMode& mode, double r1,
                        double transition_width);

struct ResidualRow {
    int ell;
    double lambda_sharp;
    double residual;
};

struct ResidualSequence {
    std::vector<ResidualRow> rows;
    double slope = 0.0;      // least-squares slope of log(residual) vs ell
    double intercept = 0.0;
    double r_squared = 0.0;
    double freq_slope = 0.0; // slope of lambda_sharp vs ell
};

// Builds the ladder ell -> (lambda_sharp, residual) by selecting, per angular
// degree ell, the lowest nearly-real eigenvalue whose mode is dominated by
// Legendre index ell. Throws InsufficientResolutionError with fewer than 4
// usable branches.
ResidualSequence residual_sequence(const DiscreteOperator& op_full,
                                   const DiscreteOperator& op_truncated,
                                   int ell_min, int ell_max, double r1,
                                   double transition_width,
                                   std::vector<Quasimode>* out_modes = nullptr);

// Default wall location: midpoint between r+ and the trapping barrier
// inferred from the maximum of Delta_r / (r^2+a^2)^2 over r > r+.
double default_r1(const BlackHoleParams& p, const HorizonData& hor);

// Smooth C^4 transition profile, 0 at x<=0 and 1 at x>=1.
double smoothstep_c4(double x);

}  // namespace adsqnm
