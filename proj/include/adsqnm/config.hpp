// Run configuration (JSON) and the run manifest.
#pragma once

#include <map>
#include "adsqnm/kgoperator.hpp"

namespace adsqnm {

struct SolveConfig {
    double re_min = 2.0, re_max = 15.0;
    double im_min = -8.0, im_max = 0.5;
    int n_radial = 40, n_angular = 12;
    double fine_factor = 2.0;  // radial refinement for the convergence check
};

struct ScanConfig {
    double re_min = 2.0, re_max = 6.0;
    double c_minus = -0.2, c_plus = 1.0;
    double h = 1.0;
    int n_re = 16, n_im = 8;
    double threshold = 1e5;
    int n_radial = 28, n_angular = 8;
};

struct QuasimodeConfig {
    int ell_min = 3, ell_max = 9;
    double r1 = 0.0;               // 0 -> automatic (barrier midpoint)
    double transition_factor = 0.5;  // width = factor * r_plus
    int n_radial = 48, n_angular = 14;
};

struct MatchConfig {
    double c_match = 1e3;
    double gamma = 10.0;
};

struct ProbeConfig {
    double c0 = 2.0;
    double re_min = 5.0, re_max = 20.0;
    double im_min = 0.5, im_max = 5.0;
    int n_re = 4, n_im = 4;
    int n_radial = 28, n_angular = 8;
};

struct FlowConfig {
    int n_seeds = 24;
    double z_min = 1.0, z_max = 2.0;
    double t_max = 60.0;
};

struct RunConfig {
    BlackHoleParams params;
    double delta_factor = 0.05;  // delta = factor * r_plus (validated)
    BoundaryCondition bc;
    double robin_beta = 0.0;
    bool robin = false;
    std::vector<std::string> pipeline{"horizon", "assemble", "solve"};
    SolveConfig solve;
    ScanConfig scan;
    QuasimodeConfig quasimodes;
    MatchConfig match;
    ProbeConfig probe;
    FlowConfig flow;
    std::string output_dir = "out";
    unsigned workers = 1;
    uint64_t seed = 20240915;
    bool dump_operator_binary = false;

    void validate() const;  // throws ConfigInvalidError
};

RunConfig load_config(const std::string& path);
uint64_t fnv1a64(const std::string& bytes);

struct StageRecord {
    std::string name;
    std::string status;  // "ok", "failed", "skipped"
    double seconds = 0.0;
};

struct RunManifest {
    int schema_version = 1;
    std::string artifact_version = "0.1.0";
    uint64_t config_hash = 0;
    uint64_t seed = 0;
    std::string output_dir;
    std::vector<StageRecord> stages;
    std::vector<std::string> outputs;
    bool partial_success = false;

    void write(const std::string& path) const;
};

}  // namespace adsqnm
