// Thin wrappers over LAPACK dense kernels used by the spectral solvers.
#pragma once

#include <Eigen/Dense>
#include <vector>
#include "adsqnm/common.hpp"

namespace adsqnm {

using MatrixXcd = Eigen::MatrixXcd;
using VectorXcd = Eigen::VectorXcd;
using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;

struct GeneralizedEig {
    std::vector<Complex> alpha;
    std::vector<Complex> beta;   // eigenvalue = alpha/beta, beta ~ 0 at infinity
    MatrixXcd right_vectors;     // empty when vectors were not requested
};

// QZ on the pencil (A, B). Throws LinearizationFailureError on LAPACK failure.
GeneralizedEig eig_generalized(const MatrixXcd& A, const MatrixXcd& B,
                               bool want_vectors);

// Smallest singular value via a values-only divide-and-conquer SVD.
double sigma_min(const MatrixXcd& A);

// Full singular value list, descending.
std::vector<double> singular_values(const MatrixXcd& A);

}  // namespace adsqnm
