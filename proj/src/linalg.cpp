#include "adsqnm/linalg.hpp"

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

namespace adsqnm {

GeneralizedEig eig_generalized(const MatrixXcd& A, const MatrixXcd& B,
                               bool want_vectors) {
    const lapack_int n = static_cast<lapack_int>(A.rows());
    if (A.cols() != n || B.rows() != n || B.cols() != n)
        throw LinearizationFailureError("eig_generalized: non-square pencil");

    MatrixXcd a = A, b = B;  // zggev overwrites
    GeneralizedEig out;
    out.alpha.resize(n);
    out.beta.resize(n);
    MatrixXcd vr;
    if (want_vectors) vr.resize(n, n);

    lapack_int info = LAPACKE_zggev(
        LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n,
        a.data(), n, b.data(), n, out.alpha.data(), out.beta.data(),
        nullptr, 1, want_vectors ? vr.data() : nullptr, want_vectors ? n : 1);
    if (info != 0)
        throw LinearizationFailureError("zggev failed, info = " + std::to_string(info));
    if (want_vectors) out.right_vectors = std::move(vr);
    return out;
}

std::vector<double> singular_values(const MatrixXcd& A) {
    const lapack_int m = static_cast<lapack_int>(A.rows());
    const lapack_int n = static_cast<lapack_int>(A.cols());
    MatrixXcd a = A;
    std::vector<double> s(std::min(m, n));
    lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m,
                                     s.data(), nullptr, 1, nullptr, 1);
    if (info != 0)
        throw Error("zgesdd failed, info = " + std::to_string(info));
    return s;
}

double sigma_min(const MatrixXcd& A) {
    auto s = singular_values(A);
    return s.empty() ? 0.0 : s.back();
}

}  // namespace adsqnm
