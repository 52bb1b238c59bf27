// File outputs: CSV exports with fixed schemas, self-contained SVG plots,
// and a little-endian binary dump of the operator matrices for
// cross-language regression.
//
// Binary layout (all little-endian):
//   char magic[8] = "ADSQNMB1"
//   u32 kind (1 = operator triple, 2 = vector)
//   u32 n_radial, u32 n_angular, i32 k
//   f64 M, a, nu, delta, r_inner
//   operator: u32 N, then P0, P1, P2 as row-major complex<f64>
//   vector:   u32 N, then N complex<f64>
#pragma once

#include <string>
#include "adsqnm/energy.hpp"
#include "adsqnm/quasimodes.hpp"
#include "adsqnm/symbol_flow.hpp"

namespace adsqnm {

std::string fmt_g(double v);  // %.17g, deterministic

void write_qnf_csv(const std::string& path, const Spectrum& spec);
void write_scan_csv(const std::string& path, const ResolventScan& scan);
// rows: (ell, quasimode residual, match)
void write_match_csv(const std::string& path,
                     const std::vector<std::tuple<int, double, PoleMatch>>& rows);
void write_quasimodes_csv(const std::string& path, const std::vector<Quasimode>& qs);
void write_energy_csv(const std::string& path,
                      const std::vector<std::pair<int, FluxReport>>& refinement_pairs);
void write_indicial_csv(const std::string& path,
                        const std::vector<std::tuple<int, Complex, IndicialRoots>>& rows);
void write_trajectory_csv(const std::string& path, const FlowTrajectory& tr);

std::string csv_header(const std::string& name);  // documented schema lookup

void dump_operator(const std::string& path, const DiscreteOperator& op);
struct OperatorDump {
    int n_radial, n_angular, k;
    double M, a, nu, delta, r_inner;
    MatrixXcd P0, P1, P2;
};
OperatorDump load_operator(const std::string& path);

void dump_vector(const std::string& path, const DiscreteOperator& op,
                 const VectorXcd& v);

// SVG plots (no external assets; fixed-size canvas with labeled axes)
void plot_spectrum_svg(const std::string& path, const Spectrum& spec,
                       const std::vector<double>& quasimode_freqs);
void plot_residual_trend_svg(const std::string& path, const ResidualSequence& seq);
void plot_scan_heatmap_svg(const std::string& path, const ResolventScan& scan);
void plot_flow_portrait_svg(const std::string& path,
                            const std::vector<FlowTrajectory>& trajectories,
                            double r_plus);

}  // namespace adsqnm
