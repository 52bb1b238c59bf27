#include "adsqnm/config.hpp"

#include <fstream>
#include <sstream>
#include <json.hpp>

#include "adsqnm/io.hpp"

namespace adsqnm {

using nlohmann::json;

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void RunConfig::validate() const {
    params.validate();
    if (std::abs(params.nu - 1.0) < 0.01)
        throw ConfigInvalidError(
            "config: nu within 0.01 of the logarithmic value 1 is outside the "
            "validated window");
    if (delta_factor <= 0.0 || delta_factor > 0.5)
        throw ConfigInvalidError("config: delta_factor must be in (0, 0.5]");
    if (solve.n_radial < 8 || solve.n_angular < 4 || quasimodes.n_radial < 8 ||
        quasimodes.n_angular < 4)
        throw ConfigInvalidError("config: grid counts below minimums");
    static const std::vector<std::string> known = {
        "horizon", "assemble", "solve", "scan", "quasimodes",
        "match",   "verify",   "flow",  "plot"};
    for (auto& st : pipeline) {
        bool ok = false;
        for (auto& kn : known)
            if (st == kn) ok = true;
        if (!ok) throw ConfigInvalidError("config: unknown pipeline stage '" + st + "'");
    }
    // physical invariants re-checked at load
    find_horizon(params);
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigInvalidError("config: cannot open " + path);
    json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw ConfigInvalidError(std::string("config: JSON parse error: ") + e.what());
    }

    RunConfig c;
    try {
        auto jp = j.at("params");
        c.params.M = jp.at("M").get<double>();
        c.params.a = jp.at("a").get<double>();
        c.params.nu = jp.at("nu").get<double>();
        c.params.k = jp.value("k", 0);
        c.delta_factor = j.value("delta_factor", 0.05);

        if (j.contains("bc")) {
            std::string kind = j["bc"].value("kind", "dirichlet");
            if (kind == "dirichlet") {
                c.bc = BoundaryCondition::dirichlet();
            } else if (kind == "robin") {
                c.robin = true;
                c.robin_beta = j["bc"].value("beta", 0.0);
                c.bc = BoundaryCondition::robin(c.robin_beta);
            } else {
                throw ConfigInvalidError("config: bc.kind must be dirichlet or robin");
            }
        }
        if (j.contains("pipeline"))
            c.pipeline = j["pipeline"].get<std::vector<std::string>>();

        if (j.contains("solve")) {
            auto& js = j["solve"];
            c.solve.re_min = js.value("re_min", c.solve.re_min);
            c.solve.re_max = js.value("re_max", c.solve.re_max);
            c.solve.im_min = js.value("im_min", c.solve.im_min);
            c.solve.im_max = js.value("im_max", c.solve.im_max);
            c.solve.n_radial = js.value("n_radial", c.solve.n_radial);
            c.solve.n_angular = js.value("n_angular", c.solve.n_angular);
            c.solve.fine_factor = js.value("fine_factor", c.solve.fine_factor);
        }
        if (j.contains("scan")) {
            auto& js = j["scan"];
            c.scan.re_min = js.value("re_min", c.scan.re_min);
            c.scan.re_max = js.value("re_max", c.scan.re_max);
            c.scan.c_minus = js.value("c_minus", c.scan.c_minus);
            c.scan.c_plus = js.value("c_plus", c.scan.c_plus);
            c.scan.h = js.value("h", c.scan.h);
            c.scan.n_re = js.value("n_re", c.scan.n_re);
            c.scan.n_im = js.value("n_im", c.scan.n_im);
            c.scan.threshold = js.value("threshold", c.scan.threshold);
            c.scan.n_radial = js.value("n_radial", c.scan.n_radial);
            c.scan.n_angular = js.value("n_angular", c.scan.n_angular);
        }
        if (j.contains("quasimodes")) {
            auto& js = j["quasimodes"];
            c.quasimodes.ell_min = js.value("ell_min", c.quasimodes.ell_min);
            c.quasimodes.ell_max = js.value("ell_max", c.quasimodes.ell_max);
            c.quasimodes.r1 = js.value("r1", c.quasimodes.r1);
            c.quasimodes.transition_factor =
                js.value("transition_factor", c.quasimodes.transition_factor);
            c.quasimodes.n_radial = js.value("n_radial", c.quasimodes.n_radial);
            c.quasimodes.n_angular = js.value("n_angular", c.quasimodes.n_angular);
        }
        if (j.contains("match")) {
            c.match.c_match = j["match"].value("c_match", c.match.c_match);
            c.match.gamma = j["match"].value("gamma", c.match.gamma);
        }
        if (j.contains("probe")) {
            auto& js = j["probe"];
            c.probe.c0 = js.value("c0", c.probe.c0);
            c.probe.re_min = js.value("re_min", c.probe.re_min);
            c.probe.re_max = js.value("re_max", c.probe.re_max);
            c.probe.im_min = js.value("im_min", c.probe.im_min);
            c.probe.im_max = js.value("im_max", c.probe.im_max);
            c.probe.n_re = js.value("n_re", c.probe.n_re);
            c.probe.n_im = js.value("n_im", c.probe.n_im);
        }
        if (j.contains("flow")) {
            auto& js = j["flow"];
            c.flow.n_seeds = js.value("n_seeds", c.flow.n_seeds);
            c.flow.z_min = js.value("z_min", c.flow.z_min);
            c.flow.z_max = js.value("z_max", c.flow.z_max);
            c.flow.t_max = js.value("t_max", c.flow.t_max);
        }
        c.output_dir = j.value("output_dir", c.output_dir);
        c.workers = j.value("workers", c.workers);
        c.seed = j.value("seed", c.seed);
        c.dump_operator_binary = j.value("dump_operator", false);
    } catch (const ConfigInvalidError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigInvalidError(std::string("config: schema violation: ") + e.what());
    }
    c.validate();
    return c;
}

void RunManifest::write(const std::string& path) const {
    json j;
    j["schema_version"] = schema_version;
    j["artifact_version"] = artifact_version;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["partial_success"] = partial_success;
    j["csv_schemas"] = {
        {"qnf", csv_header("qnf")},           {"scan", csv_header("scan")},
        {"match", csv_header("match")},       {"quasimodes", csv_header("quasimodes")},
        {"energy", csv_header("energy")},     {"indicial", csv_header("indicial")},
        {"trajectory", csv_header("trajectory")}};
    j["stages"] = json::array();
    for (auto& s : stages)
        j["stages"].push_back({{"name", s.name}, {"status", s.status},
                               {"seconds", s.seconds}});
    j["outputs"] = outputs;
    std::ofstream f(path);
    if (!f) throw Error("cannot write manifest: " + path);
    f << j.dump(2) << "\n";
}

}  // namespace adsqnm
