#include "adsqnm/kgoperator.hpp"

#include <cmath>

namespace adsqnm {

namespace {

double dhat(const BlackHoleParams& p, double s) {
    return (1.0 + s * s) * (1.0 + p.a * p.a * s * s) - 2.0 * p.M * s * s * s;
}

double dhat_prime(const BlackHoleParams& p, double s) {
    return 2.0 * s * (1.0 + p.a * p.a * s * s) + 2.0 * p.a * p.a * s * (1.0 + s * s) -
           6.0 * p.M * s * s;
}

// Delta_hat'(s)/s, regular at s = 0.
double dhat_prime_over_s(const BlackHoleParams& p, double s) {
    return 2.0 * (1.0 + p.a * p.a * s * s) + 2.0 * p.a * p.a * (1.0 + s * s) -
           6.0 * p.M * s;
}

// G^{rt} = -2M(1-a^2) s / (1+s^2) in the compactified variable.
double grt(const BlackHoleParams& p, double s) {
    return -2.0 * p.M * (1.0 - p.a * p.a) * s / (1.0 + s * s);
}

double grt_dr(const BlackHoleParams& p, double s) {
    // d/dr = -s^2 d/ds
    double d = 1.0 + s * s;
    double dds = -2.0 * p.M * (1.0 - p.a * p.a) * (1.0 - s * s) / (d * d);
    return -s * s * dds;
}

double gtphi(const BlackHoleParams& p, double s, double c) {
    double one_m_a2 = 1.0 - p.a * p.a;
    double dth = 1.0 - p.a * p.a * c * c;
    return one_m_a2 * one_m_a2 * p.a * (s * s / (1.0 + s * s) - 1.0 / dth);
}

double gtt(const BlackHoleParams& p, double s, double c) {
    double one_m_a2 = 1.0 - p.a * p.a;
    double dth = 1.0 - p.a * p.a * c * c;
    double d = 1.0 + s * s;
    return one_m_a2 * one_m_a2 *
           (2.0 * (1.0 + p.a * p.a * s * s) / d - dhat(p, s) / (d * d) -
            p.a * p.a * (1.0 - c * c) / dth);
}

}  // namespace

TwistedCoefficients twisted_coefficients(const BlackHoleParams& p, int k, double s,
                                         double c) {
    const double nu = p.nu;
    const double tw = 1.5 - nu;
    const double a = p.a, one_m_a2 = 1.0 - a * a;
    const double dth = 1.0 - a * a * c * c;
    const double nu2m = nu * nu - 2.25;

    TwistedCoefficients o;
    const double Dh = dhat(p, s), Dhp = dhat_prime(p, s);
    o.c02 = -Dh;
    // 1/s blowup is genuine (Bessel structure); only interior nodes see it.
    o.c01 = -(Dhp + (2.0 * tw - 2.0) * Dh / (s == 0.0 ? 1.0 : s));
    o.c00 = Complex(-tw * dhat_prime_over_s(p, s) -
                        nu2m * (1.0 + a * a * (1.0 - c * c) + a * a * s * s -
                                2.0 * p.M * s),
                    0.0);
    o.c01_k = 0.0;
    if (k != 0) {
        // phi-mixing from the constant G^{r phi} = -(1-a^2) a
        Complex ik(0.0, static_cast<double>(k));
        o.c00 += 2.0 * ik * a * one_m_a2 * tw * s;
        o.c01_k = 2.0 * ik * a * one_m_a2 * s * s;
        o.c00 += Complex(k * k * one_m_a2 * one_m_a2 / (dth * (1.0 - c * c)), 0.0);
    }
    o.ang2 = -(1.0 - c * c) * dth;
    o.ang1 = 2.0 * c * (dth + a * a * (1.0 - c * c));

    const double Grt = grt(p, s);
    o.p1_ds = Complex(0.0, 2.0 * Grt * s * s);
    o.p1_diag = Complex(0.0, -grt_dr(p, s) + 2.0 * Grt * tw * s) +
                Complex(2.0 * k * gtphi(p, s, c), 0.0);
    o.p2_diag = -gtt(p, s, c);
    return o;
}

namespace {

// Two-branch trace stencil: fit w(s_l) = sum_q a_q sig^q + s^{2nu} sum_q b_q sig^q
// (sig = s^2) on the nodes closest to s = 0 and read off gamma_+ = -2 nu b_0.
VectorXd gamma_plus_stencil(const GridSpec& g, double nu) {
    const int d = 4;
    const int m = 2 * d + 2;
    if (g.n_radial < m + 2)
        throw InvalidCountsError("gamma_plus stencil needs more radial nodes");
    const double smax = g.s[m - 1];
    const double sgmax = smax * smax;

    MatrixXd V = MatrixXd::Zero(m, m);
    for (int l = 0; l < m; ++l) {
        double sig = g.s[l] * g.s[l] / sgmax;
        double br = (l == 0) ? 0.0 : std::pow(g.s[l] / smax, 2.0 * nu);
        double pw = 1.0;
        for (int q = 0; q <= d; ++q) {
            V(l, q) = pw;
            V(l, d + 1 + q) = br * pw;
            pw *= sig;
        }
    }
    Eigen::FullPivLU<MatrixXd> lu(V);
    if (!lu.isInvertible())
        throw AssemblyFailureError("gamma_plus stencil: singular trace system");
    MatrixXd Vinv = lu.inverse();
    VectorXd row = VectorXd::Zero(g.n_radial);
    double scale = -2.0 * nu / std::pow(smax, 2.0 * nu);
    for (int l = 0; l < m; ++l) row[l] = scale * Vinv(d + 1, l);
    return row;
}

}  // namespace

DiscreteOperator assemble(const BlackHoleParams& p,
                          std::shared_ptr<const GridSpec> grid,
                          const BoundaryCondition& bc, int k,
                          const AssemblyOptions& opts) {
    p.validate();
    if (std::abs(k) > grid->n_angular)
        throw InvalidCountsError("assemble: |k| exceeds the angular resolution safeguard");

    const int nr = grid->n_radial, na = grid->n_angular, N = nr * na;
    const double nu = p.nu;
    const bool robin_active = bc.kind == BoundaryCondition::Kind::Robin && nu < 1.0;
    if (robin_active && !bc.beta)
        throw AssemblyFailureError("assemble: Robin condition without a beta function");

    DiscreteOperator op;
    op.params = p;
    op.horizon = find_horizon(p);
    op.grid = grid;
    op.bc = bc;
    op.k = k;
    op.nu = nu;
    op.wall_at_inner = opts.wall_at_inner;

    op.P0 = MatrixXcd::Zero(N, N);
    op.P1 = MatrixXcd::Zero(N, N);
    op.P2 = MatrixXcd::Zero(N, N);
    op.is_bc_row.assign(N, false);

    MatrixXd Ds2 = grid->D_s * grid->D_s;
    MatrixXd Dc2 = grid->D_c * grid->D_c;

    for (int i = 0; i < nr; ++i) {
        bool bc_row = (i == 0) || (opts.wall_at_inner && i == nr - 1);
        for (int j = 0; j < na; ++j) {
            int row = grid->index(i, j);
            if (bc_row) {
                op.is_bc_row[row] = true;
                continue;
            }
            auto cf = twisted_coefficients(p, k, grid->s[i], grid->c[j]);
            bool finite = std::isfinite(cf.c02) && std::isfinite(cf.c01) &&
                          std::isfinite(cf.ang2) && std::isfinite(cf.ang1) &&
                          std::isfinite(cf.c00.real()) && std::isfinite(cf.c00.imag()) &&
                          std::isfinite(cf.p2_diag);
            if (!finite)
                throw AssemblyFailureError("assemble: non-finite coefficient at node (i=" +
                                           std::to_string(i) + ", j=" + std::to_string(j) + ")");
            Complex c_first = Complex(cf.c01, 0.0) + cf.c01_k;
            for (int i2 = 0; i2 < nr; ++i2) {
                int col = grid->index(i2, j);
                op.P0(row, col) += cf.c02 * Ds2(i, i2) + c_first * grid->D_s(i, i2);
                op.P1(row, col) += cf.p1_ds * grid->D_s(i, i2);
            }
            for (int j2 = 0; j2 < na; ++j2) {
                int col = grid->index(i, j2);
                op.P0(row, col) += cf.ang2 * Dc2(j, j2) + cf.ang1 * grid->D_c(j, j2);
            }
            op.P0(row, row) += cf.c00;
            op.P1(row, row) += cf.p1_diag;
            op.P2(row, row) += cf.p2_diag;
        }
    }

    // trace functionals
    op.trace_minus = VectorXd::Zero(nr);
    op.trace_minus[0] = 1.0;
    if (nu < 1.0) op.trace_plus = gamma_plus_stencil(*grid, nu);

    // boundary rows at s = 0
    for (int j = 0; j < na; ++j) {
        int row = grid->index(0, j);
        if (robin_active) {
            double beta_j = bc.beta(grid->c[j]);
            for (int i2 = 0; i2 < nr; ++i2)
                op.P0(row, grid->index(i2, j)) = op.trace_plus[i2];
            op.P0(row, grid->index(0, j)) += beta_j;  // + beta gamma_-
        } else {
            op.P0(row, row) = 1.0;  // Dirichlet-branch value row
        }
    }
    // Dirichlet wall at the inner edge for truncated (quasimode) grids
    if (opts.wall_at_inner) {
        for (int j = 0; j < na; ++j) {
            int row = grid->index(nr - 1, j);
            op.P0(row, row) = 1.0;
        }
    }

    // Weighted-norm data. The L2 measure on w-values is
    //   C w_s w_c sqrt(rho_hat G^tt) s^{1-2nu},
    // with the s = 0 limit taken literally (0 for nu < 1/2, finite at 1/2,
    // dropped for nu > 1/2 where admissible functions vanish there anyway).
    const double C_norm = 2.0 * PI / ((1.0 - p.a * p.a) * (1.0 - p.a * p.a));
    op.norm_w = VectorXd::Zero(N);
    op.h1_w = VectorXd::Zero(N);
    op.hup_rr = VectorXd::Zero(N);
    op.hup_rphi = VectorXd::Zero(N);
    op.hup_phiphi = VectorXd::Zero(N);
    op.hup_thth = VectorXd::Zero(N);
    for (int i = 0; i < nr; ++i) {
        double s = grid->s[i];
        for (int j = 0; j < na; ++j) {
            int idx = grid->index(i, j);
            double c = grid->c[j];
            double rho_hat = 1.0 + p.a * p.a * c * c * s * s;
            double Gtt = gtt(p, s, c);
            double base = C_norm * grid->w_s[i] * grid->w_c[j] * std::sqrt(rho_hat * Gtt);
            double expo = 1.0 - 2.0 * nu;
            double spow;
            if (i == 0)
                spow = (expo > 0.0) ? 0.0 : (expo == 0.0 ? 1.0 : 0.0);
            else
                spow = std::pow(s, expo);
            op.norm_w[idx] = base * spow;
            if (i > 0) {
                // gradient-term weight r^2 q^2 mu = sqrt(rho_hat G^tt) s^{-1-2nu};
                // the h^{ij} factors carry the rest of the geometry.
                op.h1_w[idx] = base * std::pow(s, expo - 2.0);
                auto sg = slice_geometry(p, 1.0 / s, c);
                op.hup_rr[idx] = sg.h_up_rr;
                op.hup_rphi[idx] = sg.h_up_rphi;
                op.hup_phiphi[idx] = sg.h_up_phiphi;
                op.hup_thth[idx] = sg.h_up_thth;
            }
        }
    }

    // Row equilibration: scale PDE rows so sup-norms are O(1); eigenvalues are
    // unchanged and res_w compensates so physical residuals are preserved.
    op.row_scale = VectorXd::Ones(N);
    for (int row = 0; row < N; ++row) {
        if (op.is_bc_row[row]) continue;
        double m = std::max({op.P0.row(row).cwiseAbs().maxCoeff(),
                             op.P1.row(row).cwiseAbs().maxCoeff(),
                             op.P2.row(row).cwiseAbs().maxCoeff()});
        if (m > 0.0 && std::isfinite(m)) op.row_scale[row] = 1.0 / m;
    }
    for (int row = 0; row < N; ++row) {
        double sc = op.row_scale[row];
        if (sc != 1.0) {
            op.P0.row(row) *= sc;
            op.P1.row(row) *= sc;
            op.P2.row(row) *= sc;
        }
    }
    op.res_w = VectorXd::Zero(N);
    for (int row = 0; row < N; ++row) {
        if (op.is_bc_row[row]) continue;
        op.res_w[row] = op.norm_w[row] / (op.row_scale[row] * op.row_scale[row]);
    }
    return op;
}

MatrixXcd DiscreteOperator::evaluate_at(Complex lambda) const {
    return P0 + lambda * P1 + (lambda * lambda) * P2;
}

MatrixXcd DiscreteOperator::semiclassical_rescale(double h, Complex z) const {
    if (!(h > 0.0)) throw Error("semiclassical_rescale: h must be positive");
    return (h * h) * evaluate_at(z / h);
}

VectorXcd DiscreteOperator::apply(Complex lambda, const VectorXcd& w) const {
    const int nr = grid->n_radial, na = grid->n_angular, N = nr * na;
    if (w.size() != N) throw Error("apply: vector length mismatch");

    // matricize: W(i, j)
    MatrixXcd W(nr, na);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < na; ++j) W(i, j) = w[grid->index(i, j)];

    MatrixXcd Ws = grid->D_s * W;
    MatrixXcd Wss = grid->D_s * Ws;
    MatrixXcd Wc = W * grid->D_c.transpose();
    MatrixXcd Wcc = Wc * grid->D_c.transpose();

    VectorXcd out = VectorXcd::Zero(N);
    for (int i = 0; i < nr; ++i) {
        for (int j = 0; j < na; ++j) {
            int row = grid->index(i, j);
            if (is_bc_row[row]) {
                // same value the assembled BC row produces
                Complex acc = 0.0;
                for (int i2 = 0; i2 < nr; ++i2)
                    acc += P0(row, grid->index(i2, j)) * W(i2, j);
                out[row] = acc;
                continue;
            }
            auto cf = twisted_coefficients(params, k, grid->s[i], grid->c[j]);
            Complex val = cf.c02 * Wss(i, j) + (Complex(cf.c01, 0.0) + cf.c01_k) * Ws(i, j) +
                          cf.ang2 * Wcc(i, j) + cf.ang1 * Wc(i, j) + cf.c00 * W(i, j);
            val += lambda * (cf.p1_ds * Ws(i, j) + cf.p1_diag * W(i, j));
            val += lambda * lambda * cf.p2_diag * W(i, j);
            out[row] = row_scale[row] * val;
        }
    }
    return out;
}

double DiscreteOperator::weighted_l2(const VectorXcd& w) const {
    double acc = 0.0;
    for (int i = 0; i < w.size(); ++i) acc += norm_w[i] * std::norm(w[i]);
    return std::sqrt(acc);
}

double DiscreteOperator::residual_l2(const VectorXcd& mw) const {
    double acc = 0.0;
    for (int i = 0; i < mw.size(); ++i) acc += res_w[i] * std::norm(mw[i]);
    return std::sqrt(acc);
}

WeightedNorms DiscreteOperator::norms(const VectorXcd& w) const {
    const int nr = grid->n_radial, na = grid->n_angular;
    if (w.size() != size()) throw Error("norms: vector length mismatch");
    WeightedNorms out;
    out.l2 = weighted_l2(w);

    MatrixXcd W(nr, na);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < na; ++j) W(i, j) = w[grid->index(i, j)];
    MatrixXcd Ws = grid->D_s * W;
    MatrixXcd Wc = W * grid->D_c.transpose();

    double grad = 0.0;
    for (int i = 1; i < nr; ++i) {
        double s = grid->s[i];
        for (int j = 0; j < na; ++j) {
            int idx = grid->index(i, j);
            double sinth = std::sqrt(1.0 - grid->c[j] * grid->c[j]);
            Complex dr = -s * s * Ws(i, j);             // (d w / dr)
            Complex dth = -sinth * Wc(i, j);            // (d w / dtheta)
            Complex dph = Complex(0.0, double(k)) * W(i, j);
            double term = hup_rr[idx] * std::norm(dr) + hup_thth[idx] * std::norm(dth) +
                          hup_phiphi[idx] * std::norm(dph) +
                          2.0 * hup_rphi[idx] * (dr * std::conj(dph)).real();
            grad += h1_w[idx] * term;
        }
    }
    out.h1 = std::sqrt(out.l2 * out.l2 + grad);
    return out;
}

VectorXcd DiscreteOperator::gamma_minus(const VectorXcd& w) const {
    const int na = grid->n_angular;
    VectorXcd out(na);
    for (int j = 0; j < na; ++j) {
        Complex acc = 0.0;
        for (int i = 0; i < grid->n_radial; ++i)
            if (trace_minus[i] != 0.0) acc += trace_minus[i] * w[grid->index(i, j)];
        out[j] = acc;
    }
    return out;
}

VectorXcd DiscreteOperator::gamma_plus(const VectorXcd& w) const {
    if (trace_plus.size() == 0)
        throw Error("gamma_plus trace is defined for nu in (0,1) only");
    const int na = grid->n_angular;
    VectorXcd out(na);
    for (int j = 0; j < na; ++j) {
        Complex acc = 0.0;
        for (int i = 0; i < grid->n_radial; ++i)
            if (trace_plus[i] != 0.0) acc += trace_plus[i] * w[grid->index(i, j)];
        out[j] = acc;
    }
    return out;
}

}  // namespace adsqnm
