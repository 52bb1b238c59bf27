#include "adsqnm/grid.hpp"

#include <cmath>

namespace adsqnm {

double legendre_p(int l, double x) {
    if (l == 0) return 1.0;
    double pm2 = 1.0, pm1 = x;
    for (int n = 2; n <= l; ++n) {
        double pn = ((2 * n - 1) * x * pm1 - (n - 1) * pm2) / n;
        pm2 = pm1;
        pm1 = pn;
    }
    return l == 0 ? 1.0 : pm1;
}

void gauss_legendre(int n, VectorXd& nodes, VectorXd& weights) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Chebyshev initial guess, Newton on P_n
        double x = std::cos(PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[n - 1 - i] = x;  // ascending
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

MatrixXd diff_matrix(const VectorXd& x) {
    const int n = static_cast<int>(x.size());
    // barycentric weights
    VectorXd w(n);
    for (int i = 0; i < n; ++i) {
        double prod = 1.0;
        for (int j = 0; j < n; ++j)
            if (j != i) prod *= (x[i] - x[j]);
        w[i] = 1.0 / prod;
    }
    // rescale to avoid overflow for larger n
    double wmax = w.cwiseAbs().maxCoeff();
    w /= wmax;

    MatrixXd D(n, n);
    for (int i = 0; i < n; ++i) {
        double diag = 0.0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            D(i, j) = (w[j] / w[i]) / (x[i] - x[j]);
            diag -= D(i, j);
        }
        D(i, i) = diag;  // rows annihilate constants exactly
    }
    return D;
}

namespace {

// Clenshaw-Curtis weights on Chebyshev-Lobatto points mapped to [0, L],
// nodes ordered by ascending coordinate.
VectorXd clenshaw_curtis(int n, double L) {
    const int m = n - 1;
    VectorXd w(n);
    for (int i = 0; i < n; ++i) {
        double theta = PI * i / m;
        double sum = 0.0;
        for (int j = 1; j <= m / 2; ++j) {
            double b = (2 * j == m) ? 1.0 : 2.0;
            sum += b / (4.0 * j * j - 1.0) * std::cos(2.0 * j * theta);
        }
        double v = 1.0 - sum;
        double scale = (i == 0 || i == m) ? 1.0 / m : 2.0 / m;
        w[i] = scale * v;
    }
    // ascending map s = L(1 - cos(pi i / m))/2 reverses nothing (weights symmetric)
    return w * (L / 2.0);
}

}  // namespace

std::shared_ptr<const GridSpec> build_grid(const BlackHoleParams& p, int n_radial,
                                           int n_angular, double r_inner) {
    if (n_radial < 8) throw InvalidCountsError("build_grid: n_radial must be >= 8");
    if (n_angular < 4) throw InvalidCountsError("build_grid: n_angular must be >= 4");
    if (!(r_inner > 0.0)) throw InvalidCountsError("build_grid: r_inner must be positive");
    (void)p;

    auto g = std::make_shared<GridSpec>();
    g->n_radial = n_radial;
    g->n_angular = n_angular;
    g->r_inner = r_inner;
    g->s_max = 1.0 / r_inner;

    const int m = n_radial - 1;
    g->s.resize(n_radial);
    g->r.resize(n_radial);
    for (int i = 0; i < n_radial; ++i) {
        double x = std::cos(PI * i / m);         // 1 ... -1
        double s = g->s_max * (1.0 - x) / 2.0;   // 0 ... s_max, ascending
        g->s[i] = s;
        g->r[i] = (i == 0) ? 0.0 : 1.0 / s;      // r[0] is the boundary sentinel
    }
    g->D_s = diff_matrix(g->s);
    g->w_s = clenshaw_curtis(n_radial, g->s_max);

    gauss_legendre(n_angular, g->c, g->w_c);
    g->D_c = diff_matrix(g->c);
    return g;
}

namespace {
template <typename Vec, typename Scalar>
Scalar bary_interp(const VectorXd& x, const Vec& f, double xe) {
    const int n = static_cast<int>(x.size());
    // exact node hit
    for (int i = 0; i < n; ++i)
        if (xe == x[i]) return f[i];
    // weights for Chebyshev-Lobatto-type nodes: recompute generically (n small)
    Scalar num = Scalar(0);
    double den = 0.0;
    static thread_local VectorXd w_cache;
    static thread_local VectorXd x_cache;
    if (x_cache.size() != x.size() || x_cache != x) {
        w_cache.resize(n);
        for (int i = 0; i < n; ++i) {
            double prod = 1.0;
            for (int j = 0; j < n; ++j)
                if (j != i) prod *= (x[i] - x[j]);
            w_cache[i] = 1.0 / prod;
        }
        w_cache /= w_cache.cwiseAbs().maxCoeff();
        x_cache = x;
    }
    for (int i = 0; i < n; ++i) {
        double t = w_cache[i] / (xe - x[i]);
        num += t * f[i];
        den += t;
    }
    return num / den;
}
}  // namespace

double GridSpec::interp_radial(const VectorXd& values, double s_eval) const {
    return bary_interp<VectorXd, double>(s, values, s_eval);
}

Complex GridSpec::interp_radial(const VectorXcd& values, double s_eval) const {
    return bary_interp<VectorXcd, Complex>(s, values, s_eval);
}

}  // namespace adsqnm
