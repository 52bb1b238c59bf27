#include "adsqnm/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace adsqnm {

namespace {

// Parity blocks: the metric coefficients are even in c and the Gauss nodes
// are symmetric, so the pencil commutes with the reflection
// (Rw)(i,j) = w(i, na-1-j). Project onto even/odd subspaces spanned by the
// first na/2 angular indices.
struct ParityBlock {
    MatrixXcd P0, P1, P2;
    int sign = +1;
};

std::vector<ParityBlock> parity_blocks(const DiscreteOperator& op) {
    const int nr = op.grid->n_radial, na = op.grid->n_angular;
    std::vector<ParityBlock> out;
    if (na % 2 != 0) {
        out.push_back({op.P0, op.P1, op.P2, 0});
        return out;
    }
    const int nh = na / 2;
    const int Nb = nr * nh;
    for (int sign : {+1, -1}) {
        ParityBlock b;
        b.sign = sign;
        b.P0.resize(Nb, Nb);
        b.P1.resize(Nb, Nb);
        b.P2.resize(Nb, Nb);
        for (int i = 0; i < nr; ++i)
            for (int j = 0; j < nh; ++j) {
                int row = op.grid->index(i, j);
                int brow = i * nh + j;
                for (int i2 = 0; i2 < nr; ++i2)
                    for (int j2 = 0; j2 < nh; ++j2) {
                        int col = op.grid->index(i2, j2);
                        int mcol = op.grid->index(i2, na - 1 - j2);
                        int bcol = i2 * nh + j2;
                        b.P0(brow, bcol) = op.P0(row, col) + double(sign) * op.P0(row, mcol);
                        b.P1(brow, bcol) = op.P1(row, col) + double(sign) * op.P1(row, mcol);
                        b.P2(brow, bcol) = op.P2(row, col) + double(sign) * op.P2(row, mcol);
                    }
            }
        out.push_back(std::move(b));
    }
    return out;
}

VectorXcd expand_parity(const DiscreteOperator& op, const VectorXcd& half, int sign) {
    const int nr = op.grid->n_radial, na = op.grid->n_angular;
    if (sign == 0) return half;
    const int nh = na / 2;
    VectorXcd full(nr * na);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nh; ++j) {
            Complex v = half[i * nh + j];
            full[op.grid->index(i, j)] = v;
            full[op.grid->index(i, na - 1 - j)] = double(sign) * v;
        }
    return full;
}

struct RawPair {
    Complex lambda;
    VectorXcd half_vector;  // empty if vectors were not requested
    int sign = 0;
};

std::vector<RawPair> companion_solve(const DiscreteOperator& op, bool want_vectors) {
    std::vector<RawPair> pairs;
    for (auto& blk : parity_blocks(op)) {
        const int n = static_cast<int>(blk.P0.rows());
        MatrixXcd A = MatrixXcd::Zero(2 * n, 2 * n);
        MatrixXcd B = MatrixXcd::Zero(2 * n, 2 * n);
        A.block(0, n, n, n) = MatrixXcd::Identity(n, n);
        A.block(n, 0, n, n) = -blk.P0;
        A.block(n, n, n, n) = -blk.P1;
        B.block(0, 0, n, n) = MatrixXcd::Identity(n, n);
        B.block(n, n, n, n) = blk.P2;

        auto eig = eig_generalized(A, B, want_vectors);
        for (int i = 0; i < 2 * n; ++i) {
            Complex al = eig.alpha[i], be = eig.beta[i];
            if (std::abs(be) <= 1e-14 * std::abs(al) || be == 0.0) continue;  // infinite
            RawPair rp;
            rp.lambda = al / be;
            rp.sign = blk.sign;
            if (want_vectors) {
                VectorXcd x = eig.right_vectors.col(i);
                VectorXcd top = x.head(n), bot = x.tail(n);
                // pick the better-conditioned block of the companion vector
                double scale = std::abs(rp.lambda);
                if (scale > 1.0 && bot.norm() > 1e-8 * top.norm())
                    rp.half_vector = bot / rp.lambda;
                else
                    rp.half_vector = top;
                double nn = rp.half_vector.norm();
                if (nn > 0) rp.half_vector /= nn;
            }
            pairs.push_back(std::move(rp));
        }
    }
    return pairs;
}

}  // namespace

std::vector<Complex> pencil_eigenvalues(const DiscreteOperator& op) {
    std::vector<Complex> out;
    for (auto& rp : companion_solve(op, false)) out.push_back(rp.lambda);
    return out;
}

std::vector<PencilPair> pencil_eigenpairs(const DiscreteOperator& op) {
    std::vector<PencilPair> out;
    for (auto& rp : companion_solve(op, true))
        out.push_back({rp.lambda, expand_parity(op, rp.half_vector, rp.sign)});
    return out;
}

void polish_eigenpair(const DiscreteOperator& op, Complex& lambda, VectorXcd& v,
                      int iterations) {
    for (int it = 0; it < iterations; ++it) {
        MatrixXcd A = op.evaluate_at(lambda);
        MatrixXcd Ap = op.P1 + 2.0 * lambda * op.P2;
        Eigen::PartialPivLU<MatrixXcd> lu(A);
        VectorXcd rhs = Ap * v;
        VectorXcd z = lu.solve(rhs);
        double zn = z.norm();
        if (!(zn > 0.0) || !std::isfinite(zn)) break;
        // Rayleigh-functional update lambda <- lambda - (v^H A v)/(v^H A' v)
        Complex num = v.dot(A * v);    // Eigen dot conjugates the first argument
        Complex den = v.dot(rhs);
        if (std::abs(den) > 0.0) lambda -= num / den;
        v = z / zn;
    }
}

int dominant_legendre_index(const GridSpec& grid, const VectorXcd& mode) {
    const int nr = grid.n_radial, na = grid.n_angular;
    // radial node of the largest angular slice mass
    int istar = 0;
    double best = -1.0;
    for (int i = 0; i < nr; ++i) {
        double m = 0.0;
        for (int j = 0; j < na; ++j) m += std::norm(mode[grid.index(i, j)]);
        if (m > best) {
            best = m;
            istar = i;
        }
    }
    int lbest = 0;
    double amax = -1.0;
    for (int l = 0; l < na; ++l) {
        Complex acc = 0.0;
        for (int j = 0; j < na; ++j)
            acc += grid.w_c[j] * legendre_p(l, grid.c[j]) * mode[grid.index(istar, j)];
        double norm_l = std::sqrt((2.0 * l + 1.0) / 2.0);
        double val = std::abs(acc) * norm_l;
        if (val > amax) {
            amax = val;
            lbest = l;
        }
    }
    return lbest;
}

Spectrum solve_qnf(const DiscreteOperator& op, const SearchRegion& region,
                   const DiscreteOperator& op_fine) {
    Spectrum spec;
    spec.n_radial = op.grid->n_radial;
    spec.n_angular = op.grid->n_angular;
    spec.k = op.k;

    auto raw = companion_solve(op, true);
    std::vector<Complex> fine;
    for (auto& rp : companion_solve(op_fine, false))
        if (region.contains(rp.lambda)) fine.push_back(rp.lambda);

    for (auto& rp : raw) {
        if (!region.contains(rp.lambda)) continue;
        SpectrumEntry e;
        e.lambda = rp.lambda;
        e.mode = expand_parity(op, rp.half_vector, rp.sign);
        polish_eigenpair(op, e.lambda, e.mode, 2);
        if (!region.contains(e.lambda)) continue;

        double vn = op.weighted_l2(e.mode);
        if (!(vn > 0.0)) continue;
        e.residual = op.residual_l2(op.apply(e.lambda, e.mode)) / vn;

        double dmin = std::numeric_limits<double>::infinity();
        for (auto& lf : fine) dmin = std::min(dmin, std::abs(lf - e.lambda));
        e.delta_fine = dmin;
        double tol = 1e-6 * (1.0 + std::abs(e.lambda));
        e.converged = (dmin <= tol) && (e.residual <= 1e-8);
        e.ell_hint = dominant_legendre_index(*op.grid, e.mode);
        spec.entries.push_back(std::move(e));
    }

    // dedupe near-identical eigenvalues (keep the smaller residual)
    std::sort(spec.entries.begin(), spec.entries.end(),
              [](const SpectrumEntry& a, const SpectrumEntry& b) {
                  if (a.lambda.real() != b.lambda.real())
                      return a.lambda.real() < b.lambda.real();
                  return a.lambda.imag() < b.lambda.imag();
              });
    std::vector<SpectrumEntry> dedup;
    for (auto& e : spec.entries) {
        bool merged = false;
        for (auto& d : dedup) {
            if (std::abs(d.lambda - e.lambda) < 1e-9 * (1.0 + std::abs(e.lambda))) {
                if (e.residual < d.residual) d = e;
                merged = true;
                break;
            }
        }
        if (!merged) dedup.push_back(e);
    }
    spec.entries = std::move(dedup);

    if (spec.entries.empty())
        throw NoEigenvaluesInRegionError("solve_qnf: no pencil eigenvalues in the region");
    return spec;
}

double resolvent_norm(const DiscreteOperator& op, Complex z) {
    const int N = op.size();
    // row and column weights; BC rows get a large fixed weight so the
    // sigma_min minimizer respects the constraints (surrogate knob).
    std::vector<double> pos;
    for (int i = 0; i < N; ++i)
        if (!op.is_bc_row[i] && op.res_w[i] > 0.0) pos.push_back(std::sqrt(op.res_w[i]));
    std::sort(pos.begin(), pos.end());
    double med = pos.empty() ? 1.0 : pos[pos.size() / 2];
    double bc_weight = 1e4 * med;

    double min_pos_col = std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i)
        if (op.norm_w[i] > 0.0) min_pos_col = std::min(min_pos_col, std::sqrt(op.norm_w[i]));

    MatrixXcd A = op.evaluate_at(z);
    for (int i = 0; i < N; ++i) {
        double wr = op.is_bc_row[i] ? bc_weight : std::sqrt(op.res_w[i]);
        A.row(i) *= wr;
    }
    for (int j = 0; j < N; ++j) {
        double wc = op.norm_w[j] > 0.0 ? std::sqrt(op.norm_w[j]) : min_pos_col;
        A.col(j) /= wc;
    }
    double sm = sigma_min(A);
    if (!(sm > 1e-300)) return std::numeric_limits<double>::infinity();
    return 1.0 / sm;
}

ResolventScan scan_rectangle(const DiscreteOperator& op, const ScanSpec& spec,
                             unsigned workers) {
    if (spec.n_re < 1 || spec.n_im < 1)
        throw InvalidCountsError("scan_rectangle: sample counts must be positive");
    double kappa = op.horizon.surface_gravity;
    if (!(spec.c_minus > -0.5 * kappa))
        throw Error("scan_rectangle: rectangle must respect C_- > -kappa/2");

    ResolventScan out;
    out.spec = spec;
    out.z.resize(std::size_t(spec.n_re) * spec.n_im);
    out.value.assign(out.z.size(), 0.0);
    for (int iy = 0; iy < spec.n_im; ++iy) {
        double ci = spec.n_im == 1
                        ? 0.5 * (spec.c_minus + spec.c_plus)
                        : spec.c_minus + (spec.c_plus - spec.c_minus) * iy / (spec.n_im - 1);
        for (int ix = 0; ix < spec.n_re; ++ix) {
            double x = spec.n_re == 1
                           ? 0.5 * (spec.re_min + spec.re_max)
                           : spec.re_min + (spec.re_max - spec.re_min) * ix / (spec.n_re - 1);
            out.z[std::size_t(iy) * spec.n_re + ix] = Complex(x, spec.h * ci);
        }
    }
    parallel_for(out.z.size(), workers, [&](std::size_t i) {
        out.value[i] = resolvent_norm(op, out.z[i]);
    });

    // local maxima above the threshold
    auto at = [&](int iy, int ix) { return out.value[std::size_t(iy) * spec.n_re + ix]; };
    for (int iy = 0; iy < spec.n_im; ++iy)
        for (int ix = 0; ix < spec.n_re; ++ix) {
            double v = at(iy, ix);
            if (!(v > spec.candidate_threshold)) continue;
            bool peak = true;
            if (ix > 0 && at(iy, ix - 1) > v) peak = false;
            if (ix + 1 < spec.n_re && at(iy, ix + 1) > v) peak = false;
            if (iy > 0 && at(iy - 1, ix) > v) peak = false;
            if (iy + 1 < spec.n_im && at(iy + 1, ix) > v) peak = false;
            if (peak) out.candidates.push_back(out.z[std::size_t(iy) * spec.n_re + ix]);
        }
    return out;
}

PoleMatch match_pole(const Spectrum& spectrum, double lambda_sharp, double residual,
                     const MatchWindow& win) {
    if (!(lambda_sharp > 0.0)) throw Error("match_pole: lambda_sharp must be positive");
    if (!(residual > 0.0)) throw Error("match_pole: residual must be positive");

    PoleMatch m;
    m.lambda_sharp = lambda_sharp;
    m.window = win.c_match * residual * std::pow(1.0 + lambda_sharp, win.gamma);

    double dmin = std::numeric_limits<double>::infinity();
    for (auto& e : spectrum.entries) {
        if (!e.converged) continue;
        double d = std::abs(e.lambda - Complex(lambda_sharp, 0.0));
        if (d < dmin) {
            dmin = d;
            m.nearest = e.lambda;
        }
    }
    m.distance = dmin;
    if (std::isfinite(dmin) && std::abs(m.nearest.real() - lambda_sharp) <= m.window &&
        -m.nearest.imag() <= m.window) {
        m.found = m.nearest;
    }
    return m;
}

}  // namespace adsqnm
