#include "adsqnm/quasimodes.hpp"

#include <algorithm>
#include <cmath>

namespace adsqnm {

double smoothstep_c4(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    // S4(x): first four derivatives vanish at both ends
    double x5 = x * x * x * x * x;
    return x5 * (126.0 + x * (-420.0 + x * (540.0 + x * (-315.0 + x * 70.0))));
}

double default_r1(const BlackHoleParams& p, const HorizonData& hor) {
    // barrier of the eikonal radial potential Delta_r/(r^2+a^2)^2
    double rp = hor.r_plus;
    double best_r = rp, best_v = -1.0;
    for (int i = 1; i <= 6000; ++i) {
        double r = rp * (1.0 + 0.002 * i);
        double v = delta_r(p, r) / std::pow(r * r + p.a * p.a, 2);
        if (v > best_v) {
            best_v = v;
            best_r = r;
        }
    }
    return 0.5 * (rp + best_r);
}

std::vector<TruncatedMode> solve_truncated(const DiscreteOperator& op, double re_min,
                                           double re_max) {
    if (!op.wall_at_inner)
        throw Error("solve_truncated: operator must be assembled with a wall row");

    std::vector<TruncatedMode> out;
    for (auto& pp : pencil_eigenpairs(op)) {
        TruncatedMode tm;
        tm.lambda = pp.lambda;
        tm.mode = pp.mode;
        polish_eigenpair(op, tm.lambda, tm.mode, 2);
        double n = op.weighted_l2(tm.mode);
        if (!(n > 0.0) || !std::isfinite(n)) continue;
        tm.mode /= n;
        tm.nearly_real =
            std::abs(tm.lambda.imag()) <= 1e-6 * (1.0 + std::abs(tm.lambda.real()));
        tm.ell_hint = dominant_legendre_index(*op.grid, tm.mode);
        out.push_back(std::move(tm));
    }
    std::sort(out.begin(), out.end(), [](const TruncatedMode& a, const TruncatedMode& b) {
        return a.lambda.real() < b.lambda.real();
    });

    bool any = false;
    for (auto& tm : out)
        if (tm.nearly_real && tm.lambda.real() >= re_min && tm.lambda.real() <= re_max)
            any = true;
    if (!any)
        throw NoTrappedModesError("solve_truncated: no nearly-real eigenvalue in range");
    return out;
}

Quasimode extend_cutoff(const DiscreteOperator& op_full,
                        const DiscreteOperator& op_trunc, const TruncatedMode& mode,
                        double r1, double transition_width) {
    const auto& gf = *op_full.grid;
    const auto& gt = *op_trunc.grid;
    const int nrf = gf.n_radial, naf = gf.n_angular;
    if (naf != gt.n_angular)
        throw Error("extend_cutoff: angular grids must agree");

    Quasimode q;
    q.r1 = r1;
    q.transition_width = transition_width;
    q.discarded_imag = std::abs(mode.lambda.imag());
    if (q.discarded_imag > 1e-6 * std::abs(mode.lambda.real()))
        throw Error("extend_cutoff: selected eigenvalue is not nearly real");
    q.lambda_sharp = mode.lambda.real();
    q.ell = mode.ell_hint;

    // Interpolate the truncated mode radially and apply the cutoff.
    q.vector = VectorXcd::Zero(op_full.size());
    for (int i = 0; i < nrf; ++i) {
        double s = gf.s[i];
        double r = (i == 0) ? std::numeric_limits<double>::infinity() : 1.0 / s;
        if (r <= r1) continue;  // zero-extension
        double chi = smoothstep_c4((r - r1) / transition_width);
        if (chi == 0.0) continue;
        for (int j = 0; j < naf; ++j) {
            // same angular nodes; radial barycentric interpolation per column
            VectorXcd col(gt.n_radial);
            for (int it = 0; it < gt.n_radial; ++it) col[it] = mode.mode[gt.index(it, j)];
            Complex v = (s <= gt.s_max) ? gt.interp_radial(col, s) : Complex(0.0, 0.0);
            q.vector[gf.index(i, j)] = chi * v;
        }
    }

    double n = op_full.weighted_l2(q.vector);
    if (!(n > 0.0))
        throw CutoffTooSharpError("extend_cutoff: cutoff annihilated the mode");
    q.vector /= n;
    q.norm_check = op_full.weighted_l2(q.vector);

    q.residual = op_full.residual_l2(
        op_full.apply(Complex(q.lambda_sharp, 0.0), q.vector));

    // Wall-decay heuristic: if the truncated mode still carries substantial
    // mass where the cutoff varies, the measured residual is cutoff-dominated.
    double annulus = 0.0, total = 0.0;
    for (int i = 0; i < gt.n_radial; ++i) {
        double st = gt.s[i];
        double r = (i == 0) ? std::numeric_limits<double>::infinity() : 1.0 / st;
        for (int j = 0; j < naf; ++j) {
            double m = op_trunc.norm_w[gt.index(i, j)] *
                       std::norm(mode.mode[gt.index(i, j)]);
            total += m;
            if (r <= r1 + 2.0 * transition_width) annulus += m;
        }
    }
    double tail_fraction = std::sqrt(std::max(annulus, 0.0) / std::max(total, 1e-300));
    double lam2 = (1.0 + q.lambda_sharp) * (1.0 + q.lambda_sharp);
    if (q.residual > 1e3 * (tail_fraction + 1e-14) * lam2)
        throw CutoffTooSharpError(
            "extend_cutoff: residual exceeds the wall-decay estimate (tail fraction " +
            std::to_string(tail_fraction) + ")");
    return q;
}

ResidualSequence residual_sequence(const DiscreteOperator& op_full,
                                   const DiscreteOperator& op_trunc, int ell_min,
                                   int ell_max, double r1, double transition_width,
                                   std::vector<Quasimode>* out_modes) {
    auto modes = solve_truncated(op_trunc, 0.0,
                                 std::numeric_limits<double>::infinity());

    ResidualSequence seq;
    for (int ell = ell_min; ell <= ell_max; ++ell) {
        // lowest nearly-real positive eigenvalue with dominant angular degree ell
        const TruncatedMode* pick = nullptr;
        for (auto& tm : modes) {
            if (!tm.nearly_real || tm.lambda.real() <= 0.0) continue;
            if (tm.ell_hint != ell) continue;
            pick = &tm;
            break;  // modes sorted by real part
        }
        if (!pick) continue;
        try {
            Quasimode q = extend_cutoff(op_full, op_trunc, *pick, r1, transition_width);
            seq.rows.push_back({ell, q.lambda_sharp, q.residual});
            if (out_modes) out_modes->push_back(std::move(q));
        } catch (const CutoffTooSharpError&) {
            // reported by omission from the fitted ladder
            continue;
        }
    }
    if (seq.rows.size() < 4)
        throw InsufficientResolutionError(
            "residual_sequence: fewer than 4 converged branches");

    // least squares of log(residual) and lambda_sharp against ell
    auto fit = [](const std::vector<double>& x, const std::vector<double>& y, double& a,
                  double& b, double& r2) {
        double n = double(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            sx += x[i];
            sy += y[i];
            sxx += x[i] * x[i];
            sxy += x[i] * y[i];
            syy += y[i] * y[i];
        }
        double denom = n * sxx - sx * sx;
        a = (n * sxy - sx * sy) / denom;
        b = (sy - a * sx) / n;
        double ss_tot = syy - sy * sy / n;
        double ss_res = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double e = y[i] - (a * x[i] + b);
            ss_res += e * e;
        }
        r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    };
    std::vector<double> xs, ylog, yfreq;
    for (auto& row : seq.rows) {
        xs.push_back(double(row.ell));
        ylog.push_back(std::log(std::max(row.residual, 1e-300)));
        yfreq.push_back(row.lambda_sharp);
    }
    double dummy_b, dummy_r2;
    fit(xs, ylog, seq.slope, seq.intercept, seq.r_squared);
    fit(xs, yfreq, seq.freq_slope, dummy_b, dummy_r2);
    return seq;
}

}  // namespace adsqnm
