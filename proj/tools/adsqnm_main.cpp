// adsqnm: batch front-end for the Kerr-AdS quasinormal-mode laboratory.
//
//   adsqnm run <config.json> [--out DIR] [--workers N] [-v]
//   adsqnm validate <config.json>
//   adsqnm plot <manifest.json> --kind {spectrum,residual_trend,scan_heatmap,flow_portrait}
//
// Exit codes: 0 success, 1 stage failure, 2 config invalid.
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "adsqnm/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Kerr-AdS quasinormal mode laboratory"};
    app.require_subcommand(1);

    std::string config_path, manifest_path, out_dir, plot_kind;
    unsigned workers = 0;
    bool verbose = false;

    auto* run = app.add_subcommand("run", "execute the configured pipeline");
    run->add_option("config", config_path, "JSON config file")->required();
    run->add_option("--out", out_dir, "override output directory");
    run->add_option("--workers", workers, "worker threads for scans/flows");
    run->add_flag("-v,--verbose", verbose, "progress to stderr");

    auto* val = app.add_subcommand("validate", "validate a config file");
    val->add_option("config", config_path, "JSON config file")->required();

    auto* plot = app.add_subcommand("plot", "regenerate a plot from run outputs");
    plot->add_option("manifest", manifest_path, "manifest.json of a finished run")
        ->required();
    plot->add_option("--kind", plot_kind, "spectrum|residual_trend|scan_heatmap|flow_portrait")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (val->parsed()) {
            adsqnm::load_config(config_path);
            std::cout << "config ok\n";
            return 0;
        }
        if (run->parsed()) {
            adsqnm::RunConfig cfg;
            std::string raw;
            {
                std::ifstream f(config_path);
                if (!f) throw adsqnm::ConfigInvalidError("cannot open " + config_path);
                std::ostringstream ss;
                ss << f.rdbuf();
                raw = ss.str();
            }
            cfg = adsqnm::load_config(config_path);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            if (workers > 0) cfg.workers = workers;
            auto man = adsqnm::run_pipeline(cfg, adsqnm::fnv1a64(raw), verbose);
            std::cout << "run complete: " << man.output_dir << "/manifest.json\n";
            return 0;
        }
        if (plot->parsed()) {
            adsqnm::plot_from_outputs(manifest_path, plot_kind);
            std::cout << "plot written\n";
            return 0;
        }
    } catch (const adsqnm::ConfigInvalidError& e) {
        std::cerr << "config invalid: " << e.what() << "\n";
        return 2;
    } catch (const adsqnm::MissingStageOutputError& e) {
        std::cerr << "missing stage output: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
