// Semiclassical principal symbol of P_h(z), characteristic-set classification,
// and the rescaled Hamilton flow <xi>^{-1} H_p integrated in the compactified
// fiber chart (x, rho = |xi|^{-1}, omega = xi/|xi|), which is regular through
// fiber infinity and identical to the flow of <xi>^{-1} H_p for xi != 0.
#pragma once

#include "adsqnm/geometry.hpp"

namespace adsqnm {

struct PhasePoint {
    double r = 0.0, theta = PI / 2, phi = 0.0;
    double xi_r = 0.0, xi_theta = 0.0, xi_phi = 0.0;
    double z = 1.0;  // real frequency parameter, nonzero
};

enum class CharClass { SigmaPlus, SigmaMinus, NotCharacteristic };

enum class ExitReason {
    ReachedInnerBoundary,
    ReachedOuterBound,
    ConvergedToL_plus,
    ConvergedToL_minus,
    MaxTime
};

struct FlowSample {
    double t;
    PhasePoint point;
    double p_value;
    double fiber_scale;  // <xi>^{-1}
};

struct FlowTrajectory {
    std::vector<FlowSample> samples;
    ExitReason exit_reason = ExitReason::MaxTime;
    double max_p_drift = 0.0;        // measured where rho >= 1e-3
    double max_compact_drift = 0.0;  // drift of rho^2 p / (1+rho^2), everywhere
};

struct StepSizeUnderflowError : Error {
    FlowTrajectory partial;
    explicit StepSizeUnderflowError(FlowTrajectory tr)
        : Error("flow integration: step size underflow"), partial(std::move(tr)) {}
};

// p(x, xi; z) = -g^{-1}(xi dx - z dt*, xi dx - z dt*)
double principal_symbol(const BlackHoleParams& p, const PhasePoint& pt);

// <xi>^{-1} g(xi dx - z dt*, dt*), the classification pairing.
double classification_pairing(const BlackHoleParams& p, const PhasePoint& pt);

CharClass classify(const BlackHoleParams& p, const PhasePoint& pt,
                   double char_tol = 1e-8);

struct HamiltonRhs {
    double r_dot, theta_dot, phi_dot;
    double xi_r_dot, xi_theta_dot, xi_phi_dot;
};

// <xi>^{-1} times the canonical Hamilton field of principal_symbol,
// from closed-form metric derivatives.
HamiltonRhs hamilton_rhs(const BlackHoleParams& p, const PhasePoint& pt);

struct FlowOptions {
    double t_max = 200.0;
    double r_outer = 0.0;        // 0 -> 20 (1 + M)
    double l_capture_dist = 1e-6;
    int l_capture_steps = 10;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    bool forward = true;
    int max_samples = 20000;
};

FlowTrajectory integrate(const BlackHoleParams& p, const HorizonData& hor,
                         const PhasePoint& start, double horizon_window_delta,
                         const FlowOptions& opts = {});

// Roots xi_r of p = 0 at fixed (r, theta, xi_theta, xi_phi, z); 0, 1 or 2.
std::vector<double> characteristic_xi_r(const BlackHoleParams& p, double r,
                                        double theta, double xi_theta, double xi_phi,
                                        double z);

}  // namespace adsqnm
