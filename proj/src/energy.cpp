#include "adsqnm/energy.hpp"

#include <cmath>

namespace adsqnm {

namespace {

double fit_log_slope(const std::vector<double>& lx, const std::vector<double>& ly) {
    double n = double(lx.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

double twist_potential_closed_form(const BlackHoleParams& p, double nu, double s,
                                   double c) {
    // Q = -(nu-3/2)[(nu-5/2) Delta_r/r^2 + Delta_r'/r] / rho^2, written in s.
    double a = p.a;
    double dh = (1.0 + s * s) * (1.0 + a * a * s * s) - 2.0 * p.M * s * s * s;
    double rho_hat = 1.0 + a * a * c * c * s * s;
    double t1 = (nu - 2.5) * dh + 4.0 + (2.0 * (1.0 + a * a) - 2.0 * p.M * s) * s * s;
    return -(nu - 1.5) * t1 / rho_hat;
}

TwistData twisting_potential(const DiscreteOperator& op) {
    const auto& g = *op.grid;
    const int nr = g.n_radial, na = g.n_angular;
    const double nu = op.nu;
    const double nu2m = nu * nu - 2.25;

    TwistData td;
    td.nu = nu;
    td.Q_values = VectorXd::Zero(op.size());

    VectorXcd ones = VectorXcd::Ones(op.size());
    VectorXcd Pw = op.apply(0.0, ones);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < na; ++j) {
            int idx = g.index(i, j);
            if (op.is_bc_row[idx]) {
                td.Q_values[idx] = 2.25 - nu * nu;  // s -> 0 limit
                continue;
            }
            double s = g.s[i];
            double rho_hat = 1.0 + op.params.a * op.params.a * g.c[j] * g.c[j] * s * s;
            double raw = (Pw[idx] / op.row_scale[idx]).real();
            td.Q_values[idx] = raw * s * s / rho_hat - nu2m;
        }

    // decay fit of max_c |Q + nu^2 - 9/4| over the boundary-adjacent nodes
    std::vector<double> lx, ly;
    double s1 = g.s[1];
    for (int i = 1; i < nr; ++i) {
        double s = g.s[i];
        if (s > std::min(100.0 * s1, 0.3 * g.s_max)) break;
        double m = 0.0;
        for (int j = 0; j < na; ++j)
            m = std::max(m, std::abs(td.Q_values[g.index(i, j)] + nu2m));
        if (m > 1e-13) {
            lx.push_back(std::log(s));
            ly.push_back(std::log(m));
        }
    }
    td.decay_power = (lx.size() >= 4) ? fit_log_slope(lx, ly)
                                      : std::numeric_limits<double>::quiet_NaN();
    return td;
}

namespace {

struct ModeFields {
    // pointwise fields of the mode at t* = 0 (u = q w and twisted derivatives)
    VectorXcd u, dtu, dru_tw, dthu, dphu;
};

ModeFields mode_fields(const DiscreteOperator& op, const VectorXcd& w, Complex lambda) {
    const auto& g = *op.grid;
    const int nr = g.n_radial, na = g.n_angular;
    const double tw = 1.5 - op.nu;

    MatrixXcd W(nr, na);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < na; ++j) W(i, j) = w[g.index(i, j)];
    MatrixXcd Ws = g.D_s * W;
    MatrixXcd Wc = W * g.D_c.transpose();

    ModeFields f;
    f.u = VectorXcd::Zero(op.size());
    f.dtu = VectorXcd::Zero(op.size());
    f.dru_tw = VectorXcd::Zero(op.size());
    f.dthu = VectorXcd::Zero(op.size());
    f.dphu = VectorXcd::Zero(op.size());
    for (int i = 1; i < nr; ++i) {
        double s = g.s[i];
        double q = std::pow(s, tw);
        for (int j = 0; j < na; ++j) {
            int idx = g.index(i, j);
            double sinth = std::sqrt(1.0 - g.c[j] * g.c[j]);
            f.u[idx] = q * W(i, j);
            f.dtu[idx] = -1.0i * lambda * f.u[idx];              // Tv at t = 0
            f.dru_tw[idx] = q * (-s * s) * Ws(i, j);             // q d_r(q^{-1} v)
            f.dthu[idx] = q * (-sinth) * Wc(i, j);
            f.dphu[idx] = 1.0i * double(op.k) * f.u[idx];        // Phi v
        }
    }
    return f;
}

}  // namespace

StressEnergyField stress_energy(const DiscreteOperator& op, const VectorXcd& w,
                                Complex lambda, KillingChoice Y) {
    const auto& g = *op.grid;
    const int nr = g.n_radial, na = g.n_angular;
    const auto& p = op.params;
    const double Om = op.horizon.killing_coeff;
    const double nu2m = op.nu * op.nu - 2.25;

    auto f = mode_fields(op, w, lambda);

    StressEnergyField out;
    out.t_nbar = VectorXd::Zero(op.size());
    out.F1 = VectorXd::Zero(op.size());
    out.F2 = VectorXd::Zero(op.size());
    out.F3 = VectorXd::Zero(op.size());
    out.E1 = VectorXd::Zero(op.size());
    out.E2 = VectorXd::Zero(op.size());

    for (int i = 1; i < nr; ++i) {
        double s = g.s[i], r = 1.0 / s;
        for (int j = 0; j < na; ++j) {
            int idx = g.index(i, j);
            double c = g.c[j];
            auto G = dual_metric_scaled(p, r, c);
            double rho2 = G.rho_sq;
            double A = std::sqrt(rho2 / G.tt);
            double Q = twist_potential_closed_form(p, op.nu, s, c);

            Complex Tv = f.dtu[idx], Rv = f.dru_tw[idx], THv = f.dthu[idx],
                    PHv = f.dphu[idx];
            Complex Yv = (Y == KillingChoice::T) ? Tv : (Tv + Om * PHv);

            // g^{-1}(d~v, d~v-bar), hermitian pairing
            double quad =
                (G.tt * std::norm(Tv) + G.rr * std::norm(Rv) + G.thth * std::norm(THv) +
                 G.phiphi * std::norm(PHv) + 2.0 * G.tr * (Tv * std::conj(Rv)).real() +
                 2.0 * G.tphi * (Tv * std::conj(PHv)).real() +
                 2.0 * G.rphi * (Rv * std::conj(PHv)).real()) /
                rho2;

            Complex Ntv = (A / rho2) * (G.tt * Tv + G.tr * Rv + G.tphi * PHv);
            double u2 = std::norm(f.u[idx]);
            double tn = (Yv * std::conj(Ntv)).real() -
                        0.5 * A * (quad - (Q + nu2m) * u2);
            out.t_nbar[idx] = r * tn;

            double Ar = A * r;
            out.F1[idx] = 0.5 * Ar * G.tt / rho2;
            out.F2[idx] = 0.5 * Ar * (-G.rr) / rho2;  // Delta_r / rho^2
            out.F3[idx] = 0.5 * Ar * (-G.thth) / rho2;
            out.E1[idx] = Ar * (G.rphi - Om * G.tr) / rho2;
            if (Y == KillingChoice::K) {
                double known = out.F1[idx] * std::norm(lambda) * u2 +
                               out.F2[idx] * std::norm(Rv) + out.F3[idx] * std::norm(THv) +
                               out.E1[idx] * op.k *
                                   (f.u[idx] * std::conj(Rv)).imag();
                double denom = std::max(u2, 1e-14);
                out.E2[idx] = (out.t_nbar[idx] - known) / denom;
            }
        }
    }
    return out;
}

VectorXd boundary_measure(const DiscreteOperator& op) {
    const auto& g = *op.grid;
    double one_m_a2 = 1.0 - op.params.a * op.params.a;
    VectorXd out(g.n_angular);
    for (int j = 0; j < g.n_angular; ++j) {
        double dth = 1.0 - op.params.a * op.params.a * g.c[j] * g.c[j];
        out[j] = 2.0 * PI * g.w_c[j] * std::sqrt(dth) / std::pow(one_m_a2, 2.5);
    }
    return out;
}

VectorXd horizon_measure(const DiscreteOperator& op) {
    const auto& g = *op.grid;
    VectorXd out(g.n_angular);
    double r_in = g.r_inner;
    for (int j = 0; j < g.n_angular; ++j) {
        auto sg = slice_geometry(op.params, r_in, g.c[j]);
        double h_thth = -sg.g_dn[2][2], h_pp = -sg.g_dn[3][3];
        double sinth = std::sqrt(1.0 - g.c[j] * g.c[j]);
        out[j] = 2.0 * PI * g.w_c[j] * std::sqrt(h_thth * h_pp) / sinth;
    }
    return out;
}

FluxReport verify_identity(const DiscreteOperator& op, const VectorXcd& w,
                           Complex lambda, KillingChoice Y,
                           const VectorXcd* P_u_values) {
    const auto& g = *op.grid;
    const int nr = g.n_radial, na = g.n_angular;
    const auto& p = op.params;
    const double Om = op.horizon.killing_coeff;
    const double nu2m = op.nu * op.nu - 2.25;
    const double tw = 1.5 - op.nu;
    const double C2 = 2.0 * PI / ((1.0 - p.a * p.a) * (1.0 - p.a * p.a));

    FluxReport rep;
    auto f = mode_fields(op, w, lambda);
    auto se = stress_energy(op, w, lambda, Y);

    // time-derivative term: 2 Im(lambda) * int T~(Y, Nbar_t) r^{-1} dS_t
    double td_int = 0.0;
    for (int i = 1; i < nr; ++i) {
        double s = g.s[i];
        for (int j = 0; j < na; ++j) {
            int idx = g.index(i, j);
            double c = g.c[j];
            double rho_hat = 1.0 + p.a * p.a * c * c * s * s;
            double Gtt_v = dual_metric_scaled(p, 1.0 / s, c).tt;
            double mu = std::sqrt(rho_hat * Gtt_v) / (s * s);
            td_int += C2 * g.w_s[i] * g.w_c[j] * mu * se.t_nbar[idx];
        }
    }
    rep.time_derivative_term = 2.0 * lambda.imag() * td_int;

    // conformal boundary pairing
    Complex cY = (Y == KillingChoice::T)
                     ? -1.0i * lambda
                     : 1.0i * (double(op.k) * Om - lambda);
    if (op.nu < 1.0) {
        VectorXcd gm = op.gamma_minus(w);
        VectorXcd gp = op.gamma_plus(w);
        VectorXd bm = boundary_measure(op);
        double acc = 0.0;
        for (int j = 0; j < na; ++j)
            acc += bm[j] * (cY * gm[j] * std::conj(gp[j])).real();
        rep.boundary_Y_term = acc;
    } else {
        rep.boundary_Y_term = 0.0;  // gamma_- vanishes for admissible modes
    }

    // horizon flux at the inner radial row
    VectorXd hm = horizon_measure(op);
    rep.horizon_integrand = VectorXd::Zero(na);
    double hacc = 0.0;
    {
        int i = nr - 1;
        for (int j = 0; j < na; ++j) {
            int idx = g.index(i, j);
            double c = g.c[j];
            auto sg = slice_geometry(p, g.r_inner, c);
            auto G = dual_metric_scaled(p, g.r_inner, c);
            double rho2 = G.rho_sq;
            Complex Tv = f.dtu[idx], Rv = f.dru_tw[idx], THv = f.dthu[idx],
                    PHv = f.dphu[idx];
            Complex Kv = Tv + Om * PHv;
            Complex Yv = (Y == KillingChoice::T) ? Tv : Kv;
            double gYK;
            {
                double g_tt = sg.g_dn[0][0], g_tp = sg.g_dn[0][3], g_pp = sg.g_dn[3][3];
                double gTK = g_tt + Om * g_tp;
                double gKK = g_tt + 2.0 * Om * g_tp + Om * Om * g_pp;
                gYK = (Y == KillingChoice::T) ? gTK : gKK;
            }
            double quad =
                (G.tt * std::norm(Tv) + G.rr * std::norm(Rv) + G.thth * std::norm(THv) +
                 G.phiphi * std::norm(PHv) + 2.0 * G.tr * (Tv * std::conj(Rv)).real() +
                 2.0 * G.tphi * (Tv * std::conj(PHv)).real() +
                 2.0 * G.rphi * (Rv * std::conj(PHv)).real()) /
                rho2;
            double Q = twist_potential_closed_form(p, op.nu, g.s[i], c);
            double u2 = std::norm(f.u[idx]);
            double val = (Yv * std::conj(Kv)).real() -
                         0.5 * gYK * (quad - (Q + nu2m) * u2);
            rep.horizon_integrand[j] = val;
            hacc += hm[j] * val;
        }
    }
    rep.horizon_term = hacc;

    // bulk term: int Re(F Y v-bar) A dS_t, with rho^2 F = P(lambda)u
    VectorXcd Pu;
    if (P_u_values) {
        Pu = *P_u_values;
    } else {
        VectorXcd raw = op.apply(lambda, w);
        Pu = VectorXcd::Zero(op.size());
        for (int i = 1; i < nr; ++i) {
            double q = std::pow(g.s[i], tw);
            for (int j = 0; j < na; ++j) {
                int idx = g.index(i, j);
                if (!op.is_bc_row[idx]) Pu[idx] = q * raw[idx] / op.row_scale[idx];
            }
        }
        double vn = op.weighted_l2(w);
        if (vn > 0.0) {
            double res = op.residual_l2(raw) / vn;
            rep.nonconverged_input = res > 1e-6;
        }
    }
    double bacc = 0.0;
    for (int i = 1; i < nr; ++i) {
        double s = g.s[i];
        for (int j = 0; j < na; ++j) {
            int idx = g.index(i, j);
            Complex Yv = (Y == KillingChoice::T) ? f.dtu[idx] : (f.dtu[idx] + Om * f.dphu[idx]);
            bacc += C2 * g.w_s[i] * g.w_c[j] / (s * s) * (Pu[idx] * std::conj(Yv)).real();
        }
    }
    rep.bulk_term = bacc;

    rep.residual = std::abs(rep.time_derivative_term - rep.boundary_Y_term +
                            rep.horizon_term - rep.bulk_term);
    return rep;
}

std::vector<ProbeRow> upper_bound_probe(const DiscreteOperator& op,
                                        const std::vector<Complex>& samples,
                                        double c0_exclusion) {
    std::vector<ProbeRow> out;
    for (auto z : samples) {
        if (!(z.imag() > 0.0))
            throw Error("upper_bound_probe: samples must have Im(lambda) > 0");
        if (!(std::abs(z) > c0_exclusion))
            throw Error("upper_bound_probe: sample inside the excluded strip");
        double rn = resolvent_norm(op, z);
        out.push_back({z, rn * std::abs(z) * z.imag()});
    }
    return out;
}

IndicialRoots indicial_roots(const BlackHoleParams& p, const HorizonData& hor,
                             Complex lambda, int k) {
    IndicialRoots out;
    double rp = hor.r_plus;
    out.s_value = 2.0 * (1.0 - p.a * p.a) *
                  (p.a * double(k) - (rp * rp + p.a * p.a) * lambda);
    double dprime = delta_r_prime(p, rp);
    out.roots = {Complex(0.0, 0.0), -1.0i * out.s_value / dprime};
    return out;
}

}  // namespace adsqnm
