// Batch pipeline: executes the requested stages in dependency order, writing
// CSV/SVG outputs and a manifest into the output directory.
#pragma once

#include "adsqnm/config.hpp"

namespace adsqnm {

struct StageFailure : Error {
    std::string stage;
    StageFailure(std::string st, const std::string& msg)
        : Error("stage '" + st + "' failed: " + msg), stage(std::move(st)) {}
};

// Returns the manifest (also written to <output_dir>/manifest.json).
// Throws StageFailure when a required stage fails; optional stages (plot)
// set the partial-success flag instead.
RunManifest run_pipeline(const RunConfig& cfg, uint64_t config_hash, bool verbose);

// Regenerate one plot kind from a manifest's output directory.
void plot_from_outputs(const std::string& manifest_path, const std::string& kind);

}  // namespace adsqnm
