// Twisted stress-energy tensor, the energy identity with its conformal
// boundary pairing and horizon flux, upper-half-plane resolvent probes, and
// the horizon indicial roots.
#pragma once

#include "adsqnm/spectra.hpp"

namespace adsqnm {

struct TwistData {
    double nu = 0.0;
    VectorXd Q_values;    // Q = q^{-1} Box_g q on the grid (boundary row by limit)
    double decay_power = 0.0;  // fitted s-power of Q + nu^2 - 9/4 near s = 0
};

// Q computed by applying the assembled zero-frequency operator to the
// constant twist profile; decay fit over the last decade of s.
TwistData twisting_potential(const DiscreteOperator& op);

// Closed form of the same potential, used as an independent check.
double twist_potential_closed_form(const BlackHoleParams& p, double nu, double s,
                                   double c);

enum class KillingChoice { T, K };

struct StressEnergyField {
    VectorXd t_nbar;  // pointwise T~(Y, Nbar_t); boundary radial row is zero
    // coefficient decomposition for Y = K (lambda/k-independent pieces)
    VectorXd F1, F2, F3, E1;
    VectorXd E2;      // extracted remainder, depends on (lambda, k)
};

StressEnergyField stress_energy(const DiscreteOperator& op, const VectorXcd& w_mode,
                                Complex lambda, KillingChoice Y);

struct FluxReport {
    double time_derivative_term = 0.0;
    double boundary_Y_term = 0.0;
    double horizon_term = 0.0;
    double bulk_term = 0.0;
    double residual = 0.0;  // |TD - boundary + horizon - bulk|
    bool nonconverged_input = false;
    VectorXd horizon_integrand;  // pointwise at the inner radial row
};

// Energy identity on the operator's slice domain. P_u_values, when given,
// supplies exact samples of P(lambda)u at the nodes (manufactured solutions);
// otherwise the assembled operator provides them.
FluxReport verify_identity(const DiscreteOperator& op, const VectorXcd& w_mode,
                           Complex lambda, KillingChoice Y,
                           const VectorXcd* P_u_values = nullptr);

struct ProbeRow {
    Complex lambda;
    double product;  // resolvent_norm * |lambda| * Im(lambda)
};

// Upper-half-plane bound probe; samples must satisfy Im(lambda) > 0 and
// |lambda| > c0_exclusion.
std::vector<ProbeRow> upper_bound_probe(const DiscreteOperator& op,
                                        const std::vector<Complex>& samples,
                                        double c0_exclusion = 2.0);

struct IndicialRoots {
    Complex s_value;             // 2(1-a^2)(ak - (r+^2+a^2) lambda)
    std::array<Complex, 2> roots;  // {0, -i s / Delta_r'(r+)}
};

IndicialRoots indicial_roots(const BlackHoleParams& p, const HorizonData& hor,
                             Complex lambda, int k);

// Quadrature weights of the conformal boundary pairing measure Abar dKbar_0
// per angular node (phi already integrated out).
VectorXd boundary_measure(const DiscreteOperator& op);

// Quadrature weights of d sigma on the inner radial row per angular node.
VectorXd horizon_measure(const DiscreteOperator& op);

}  // namespace adsqnm
