// QNF computation: companion linearization of the quadratic pencil
// (P0, P1, P2), resolvent-norm scans over semiclassical rectangles, and
// quasimode-to-pole matching.
#pragma once

#include <optional>
#include "adsqnm/kgoperator.hpp"

namespace adsqnm {

struct SearchRegion {
    double re_min = 0.0, re_max = 0.0;
    double im_min = 0.0, im_max = 0.0;
    bool contains(Complex z) const {
        return z.real() >= re_min && z.real() <= re_max && z.imag() >= im_min &&
               z.imag() <= im_max;
    }
};

struct SpectrumEntry {
    Complex lambda;
    double residual = 0.0;   // ||P(lambda)v|| / ||v|| in the weighted L2
    VectorXcd mode;
    bool converged = false;
    double delta_fine = 0.0; // |lambda - nearest fine-grid eigenvalue|
    int ell_hint = -1;       // dominant Legendre index of the angular profile
};

struct Spectrum {
    std::vector<SpectrumEntry> entries;
    int n_radial = 0, n_angular = 0, k = 0;
};

// All pencil eigenvalues inside the region, polished by residual inverse
// iteration, with the converged flag set from the fine-grid operator.
// The angular reflection symmetry c -> -c is exploited to split the
// linearized solve into two half-size parity blocks.
Spectrum solve_qnf(const DiscreteOperator& op, const SearchRegion& region,
                   const DiscreteOperator& op_fine);

// Eigenvalues only (no vectors), same parity-split linearization.
std::vector<Complex> pencil_eigenvalues(const DiscreteOperator& op);

// All finite eigenpairs of the linearized pencil, vectors on the full grid.
struct PencilPair {
    Complex lambda;
    VectorXcd mode;
};
std::vector<PencilPair> pencil_eigenpairs(const DiscreteOperator& op);

// Discrete surrogate for ||R(z)||_{L2 -> L2}: 1/sigma_min of the weighted
// matrix D_row P(z) D_col^{-1}. Boundary-condition rows carry a large fixed
// weight so the minimizer respects the constraints; infinity is returned as
// a sentinel when sigma_min underflows.
double resolvent_norm(const DiscreteOperator& op, Complex z);

struct ScanSpec {
    double re_min = 0.0, re_max = 0.0;
    double c_minus = 0.0, c_plus = 0.0;  // im range is h*[c_minus, c_plus]
    double h = 1.0;
    int n_re = 0, n_im = 0;
    double candidate_threshold = 1e5;
};

struct ResolventScan {
    ScanSpec spec;
    std::vector<Complex> z;      // row-major n_im x n_re
    std::vector<double> value;   // 1/sigma_min at z
    std::vector<Complex> candidates;  // local maxima above threshold
};

// Validates c_minus > -kappa/2 against the operator's horizon data.
ResolventScan scan_rectangle(const DiscreteOperator& op, const ScanSpec& spec,
                             unsigned workers = 1);

struct MatchWindow {
    double c_match = 1e3;
    double gamma = 10.0;  // desk-scale stand-in for the h^{-10} log factor
};

struct PoleMatch {
    double lambda_sharp = 0.0;
    double window = 0.0;        // W = c_match * residual * (1+lambda_sharp)^gamma
    std::optional<Complex> found;
    Complex nearest{0.0, 0.0};  // closest converged pole regardless of window
    double distance = 0.0;      // |found (or nearest) - lambda_sharp|
};

PoleMatch match_pole(const Spectrum& spectrum, double lambda_sharp, double residual,
                     const MatchWindow& win = {});

// Residual inverse iteration for one eigenpair of the quadratic pencil.
void polish_eigenpair(const DiscreteOperator& op, Complex& lambda, VectorXcd& v,
                      int iterations = 3);

int dominant_legendre_index(const GridSpec& grid, const VectorXcd& mode);

}  // namespace adsqnm
