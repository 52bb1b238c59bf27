#include "adsqnm/symbol_flow.hpp"

#include <algorithm>
#include <cmath>
#include <boost/numeric/odeint.hpp>

namespace adsqnm {

namespace {

std::array<double, 4> covector(const PhasePoint& pt) {
    return {-pt.z, pt.xi_r, pt.xi_theta, pt.xi_phi};
}

double xi_norm_sq(const PhasePoint& pt) {
    return pt.xi_r * pt.xi_r + pt.xi_theta * pt.xi_theta + pt.xi_phi * pt.xi_phi;
}

}  // namespace

double principal_symbol(const BlackHoleParams& p, const PhasePoint& pt) {
    auto G = dual_metric_scaled(p, pt.r, std::cos(pt.theta));
    return -G.quad(covector(pt)) / G.rho_sq;
}

double classification_pairing(const BlackHoleParams& p, const PhasePoint& pt) {
    auto G = dual_metric_scaled(p, pt.r, std::cos(pt.theta));
    std::array<double, 4> dt = {1.0, 0.0, 0.0, 0.0};
    double pairing = G.pair(covector(pt), dt) / G.rho_sq;
    return pairing / std::sqrt(1.0 + xi_norm_sq(pt));
}

CharClass classify(const BlackHoleParams& p, const PhasePoint& pt, double char_tol) {
    if (pt.z == 0.0) throw Error("classify: requires z != 0");
    double xi2 = 1.0 + xi_norm_sq(pt);
    double pv = principal_symbol(p, pt);
    if (std::abs(pv) > char_tol * xi2 * (1.0 + pt.z * pt.z))
        return CharClass::NotCharacteristic;
    double pairing = classification_pairing(p, pt);
    double scale = std::sqrt(1.0 + pt.z * pt.z);
    if (std::abs(pairing) <= 1e-10 * scale)
        throw AmbiguousClassificationError(
            "classify: on-characteristic point with vanishing pairing "
            "(spacelike-slice assumption violated by discretization?)");
    return pairing < 0.0 ? CharClass::SigmaPlus : CharClass::SigmaMinus;
}

HamiltonRhs hamilton_rhs(const BlackHoleParams& p, const PhasePoint& pt) {
    double c = std::cos(pt.theta), sinth = std::sin(pt.theta);
    auto G = dual_metric_scaled(p, pt.r, c);
    auto Gr = dual_metric_scaled_dr(p, pt.r, c);
    auto Gc = dual_metric_scaled_dc(p, pt.r, c);
    auto zeta = covector(pt);
    double rho2 = G.rho_sq;
    double pv = -G.quad(zeta) / rho2;
    double inv_norm = 1.0 / std::sqrt(1.0 + xi_norm_sq(pt));

    HamiltonRhs h;
    h.r_dot = inv_norm * (-2.0 / rho2) *
              (G.rr * pt.xi_r + G.tr * (-pt.z) + G.rphi * pt.xi_phi);
    h.theta_dot = inv_norm * (-2.0 / rho2) * G.thth * pt.xi_theta;
    h.phi_dot = inv_norm * (-2.0 / rho2) *
                (G.phiphi * pt.xi_phi + G.tphi * (-pt.z) + G.rphi * pt.xi_r);
    // dp/dr = -2r p/rho^2 - (dG/dr)(zeta,zeta)/rho^2
    double dp_dr = -Gr.rho_sq * pv / rho2 - Gr.quad(zeta) / rho2;
    double dp_dc = -Gc.rho_sq * pv / rho2 - Gc.quad(zeta) / rho2;
    double dp_dtheta = -sinth * dp_dc;
    h.xi_r_dot = -inv_norm * dp_dr;
    h.xi_theta_dot = -inv_norm * dp_dtheta;
    h.xi_phi_dot = 0.0;  // axisymmetry
    return h;
}

std::vector<double> characteristic_xi_r(const BlackHoleParams& p, double r,
                                        double theta, double xi_theta, double xi_phi,
                                        double z) {
    auto G = dual_metric_scaled(p, r, std::cos(theta));
    // G(zeta,zeta) = A xi_r^2 + B xi_r + C = 0
    double A = G.rr;
    double B = 2.0 * (G.tr * (-z) + G.rphi * xi_phi);
    double C = G.tt * z * z + G.thth * xi_theta * xi_theta +
               G.phiphi * xi_phi * xi_phi + 2.0 * G.tphi * (-z) * xi_phi;
    std::vector<double> roots;
    if (A == 0.0) {
        if (B != 0.0) roots.push_back(-C / B);
        return roots;
    }
    double disc = B * B - 4.0 * A * C;
    if (disc < 0.0) return roots;
    double sq = std::sqrt(disc);
    // numerically stable pair
    double q = -0.5 * (B + (B >= 0.0 ? sq : -sq));
    roots.push_back(q / A);
    if (q != 0.0) roots.push_back(C / q);
    std::sort(roots.begin(), roots.end());
    return roots;
}

namespace {

// Compactified state: (r, theta, phi, rho, w_r, w_th, w_ph).
using FlowState = std::array<double, 7>;

struct CompactField {
    const BlackHoleParams& p;
    double z;
    double direction;  // +1 forward, -1 backward

    void operator()(const FlowState& y, FlowState& dydt, double) const {
        const double r = y[0], c = std::cos(y[1]), sinth = std::sin(y[1]);
        const double rho = y[3];
        const double wr = y[4], wth = y[5], wph = y[6];
        auto G = dual_metric_scaled(p, r, c);
        auto Gr = dual_metric_scaled_dr(p, r, c);
        auto Gc = dual_metric_scaled_dc(p, r, c);
        const double rho2g = G.rho_sq;

        // p = p2(x, xi) + z p1(x, xi) + z^2 p0(x), xi = omega/rho
        auto p2_of = [&](const DualMetricScaled& g) {
            return -(g.rr * wr * wr + g.thth * wth * wth + g.phiphi * wph * wph +
                     2.0 * g.rphi * wr * wph);
        };
        auto p1_of = [&](const DualMetricScaled& g) {
            return 2.0 * (g.tr * wr + g.tphi * wph);
        };
        // value pieces with the 1/rho^2(x) factor and its x-derivative
        double p2v = p2_of(G) / rho2g;
        double p1v = p1_of(G) / rho2g;
        double p0v = -G.tt / rho2g;

        double dp2_dr = p2_of(Gr) / rho2g - Gr.rho_sq * p2v / rho2g;
        double dp2_dc = p2_of(Gc) / rho2g - Gc.rho_sq * p2v / rho2g;
        double dp1_dr = p1_of(Gr) / rho2g - Gr.rho_sq * p1v / rho2g;
        double dp1_dc = p1_of(Gc) / rho2g - Gc.rho_sq * p1v / rho2g;
        double dp0_dr = -Gr.tt / rho2g - Gr.rho_sq * p0v / rho2g;
        double dp0_dc = -Gc.tt / rho2g - Gc.rho_sq * p0v / rho2g;

        const double common = 1.0 / std::sqrt(1.0 + rho * rho);

        // v = rho * d(xi)/dt  (regular at rho = 0)
        double vr = -common * (dp2_dr + rho * z * dp1_dr + rho * rho * z * z * dp0_dr);
        double vc = -common * (dp2_dc + rho * z * dp1_dc + rho * rho * z * z * dp0_dc);
        double vth = -sinth * vc;  // d/dtheta from d/dc
        double vph = 0.0;

        // dxi p2(x, omega) and dxi p1
        double d2r = -(2.0 / rho2g) * (G.rr * wr + G.rphi * wph);
        double d2th = -(2.0 / rho2g) * G.thth * wth;
        double d2ph = -(2.0 / rho2g) * (G.phiphi * wph + G.rphi * wr);
        double d1r = 2.0 * G.tr / rho2g;
        double d1ph = 2.0 * G.tphi / rho2g;

        dydt[0] = common * (d2r + rho * z * d1r);
        dydt[1] = common * d2th;
        dydt[2] = common * (d2ph + rho * z * d1ph);
        double wdotv = wr * vr + wth * vth + wph * vph;
        dydt[3] = -rho * wdotv;
        dydt[4] = vr - wdotv * wr;
        dydt[5] = vth - wdotv * wth;
        dydt[6] = vph - wdotv * wph;
        for (auto& d : dydt) d *= direction;
    }
};

double compact_symbol(const BlackHoleParams& p, double z, const FlowState& y) {
    // rho^2 p / (1 + rho^2): smooth through fiber infinity
    const double rho = y[3];
    PhasePoint pt;
    pt.r = y[0];
    pt.theta = y[1];
    pt.phi = y[2];
    pt.z = z;
    auto G = dual_metric_scaled(p, pt.r, std::cos(pt.theta));
    double wr = y[4], wth = y[5], wph = y[6];
    double p2 = -(G.rr * wr * wr + G.thth * wth * wth + G.phiphi * wph * wph +
                  2.0 * G.rphi * wr * wph) /
                G.rho_sq;
    double p1 = 2.0 * (G.tr * wr + G.tphi * wph) / G.rho_sq;
    double p0 = -G.tt / G.rho_sq;
    return (p2 + rho * z * p1 + rho * rho * z * z * p0) / (1.0 + rho * rho);
}

PhasePoint state_to_point(const FlowState& y, double z) {
    PhasePoint pt;
    pt.r = y[0];
    pt.theta = y[1];
    pt.phi = y[2];
    double rho = std::max(y[3], 1e-300);
    pt.xi_r = y[4] / rho;
    pt.xi_theta = y[5] / rho;
    pt.xi_phi = y[6] / rho;
    pt.z = z;
    return pt;
}

}  // namespace

FlowTrajectory integrate(const BlackHoleParams& p, const HorizonData& hor,
                         const PhasePoint& start, double horizon_window_delta,
                         const FlowOptions& opts) {
    namespace ode = boost::numeric::odeint;
    const double r_outer = opts.r_outer > 0.0 ? opts.r_outer : 20.0 * (1.0 + p.M);
    const double r_inner = hor.r_plus - horizon_window_delta;

    double xin = std::sqrt(xi_norm_sq(start));
    if (!(xin > 0.0)) throw Error("integrate: zero fiber direction");
    FlowState y = {start.r,
                   start.theta,
                   start.phi,
                   1.0 / xin,
                   start.xi_r / xin,
                   start.xi_theta / xin,
                   start.xi_phi / xin};

    CompactField field{p, start.z, opts.forward ? 1.0 : -1.0};
    auto stepper =
        ode::make_controlled(opts.abs_tol, opts.rel_tol,
                             ode::runge_kutta_dopri5<FlowState>());

    FlowTrajectory tr;
    double t = 0.0, dt = 1e-3;
    double p0 = principal_symbol(p, start);
    double pc0 = compact_symbol(p, start.z, y);

    auto record = [&](double tt, const FlowState& yy) {
        FlowSample smp;
        smp.t = tt;
        smp.point = state_to_point(yy, start.z);
        double rho = yy[3];
        smp.fiber_scale = rho / std::sqrt(1.0 + rho * rho);
        double pc = compact_symbol(p, start.z, yy);
        smp.p_value = pc * (1.0 + rho * rho) / std::max(rho * rho, 1e-300);
        tr.max_compact_drift = std::max(tr.max_compact_drift, std::abs(pc - pc0));
        if (rho >= 1e-3)
            tr.max_p_drift = std::max(tr.max_p_drift, std::abs(smp.p_value - p0));
        tr.samples.push_back(smp);
    };
    record(0.0, y);

    int capture_plus = 0, capture_minus = 0;
    while (t < opts.t_max) {
        FlowState y_prev = y;
        double t_prev = t;
        ode::controlled_step_result res = stepper.try_step(field, y, t, dt);
        if (res == ode::fail) {
            if (dt < 1e-13 * std::max(1.0, std::abs(t))) {
                tr.exit_reason = ExitReason::MaxTime;
                throw StepSizeUnderflowError(std::move(tr));
            }
            continue;
        }
        // reject on conserved-symbol drift beyond budget
        double pc = compact_symbol(p, start.z, y);
        if (std::abs(pc - pc0) > 1e-9 * (1.0 + std::abs(pc0)) &&
            dt > 1e-12 * std::max(1.0, std::abs(t_prev))) {
            y = y_prev;
            t = t_prev;
            dt *= 0.5;
            continue;
        }
        record(t, y);
        if (static_cast<int>(tr.samples.size()) >= opts.max_samples) {
            tr.exit_reason = ExitReason::MaxTime;
            return tr;
        }

        if (y[0] <= r_inner) {
            tr.exit_reason = ExitReason::ReachedInnerBoundary;
            return tr;
        }
        if (y[0] >= r_outer || y[3] >= 1e9) {
            tr.exit_reason = ExitReason::ReachedOuterBound;
            return tr;
        }
        // distance to L_pm in the (r, rho, omega) chart
        double dr = y[0] - hor.r_plus;
        double base = std::sqrt(dr * dr + y[3] * y[3]);
        double dplus = std::hypot(base, std::hypot(y[4] - 1.0, std::hypot(y[5], y[6])));
        double dminus = std::hypot(base, std::hypot(y[4] + 1.0, std::hypot(y[5], y[6])));
        capture_plus = (dplus < opts.l_capture_dist) ? capture_plus + 1 : 0;
        capture_minus = (dminus < opts.l_capture_dist) ? capture_minus + 1 : 0;
        if (capture_plus >= opts.l_capture_steps) {
            tr.exit_reason = ExitReason::ConvergedToL_plus;
            return tr;
        }
        if (capture_minus >= opts.l_capture_steps) {
            tr.exit_reason = ExitReason::ConvergedToL_minus;
            return tr;
        }
    }
    tr.exit_reason = ExitReason::MaxTime;
    return tr;
}

}  // namespace adsqnm
