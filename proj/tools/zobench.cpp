// Experiment runner CLI: executes method-comparison runs and validation
// suites from a config file and writes CSV artifacts.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "zo/claims.hpp"
#include "zo/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"zeroth-order optimization benchmark harness"};

    std::string config_path;
    std::string output_dir;
    std::size_t workers = 0;
    bool validate_only = false;
    bool list_claims = false;

    app.add_option("-c,--config", config_path, "experiment config file (INI-style)");
    app.add_option("-o,--output-dir", output_dir, "override the config's output directory");
    app.add_option("-j,--workers", workers, "override the config's worker count");
    app.add_flag("--validate-only", validate_only, "skip runs, execute only the validations");
    app.add_flag("--list-claims", list_claims, "print every validation claim id and exit");

    CLI11_PARSE(app, argc, argv);

    if (list_claims) {
        for (const auto& id : zo::claim_ids()) {
            std::printf("%s\n", id.c_str());
        }
        return 0;
    }
    if (config_path.empty()) {
        std::fprintf(stderr, "error: --config is required (or use --list-claims)\n");
        return 2;
    }

    try {
        zo::ExperimentConfig cfg = zo::parse_config(config_path);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        if (workers > 0) cfg.workers = workers;
        if (validate_only) cfg.runs.clear();

        const zo::ExperimentResult result = zo::run_experiment(cfg);
        for (const auto& rep : result.validation_reports) {
            std::printf("[%s] %s: estimate=%.6g bound=%.6g se=%.3g n=%zu\n",
                        rep.pass ? "pass" : "FAIL", rep.claim_id.c_str(), rep.estimate, rep.bound,
                        rep.se, rep.n_trials);
        }
        if (result.exit_code != 0) {
            nlohmann::json failures = nlohmann::json::array();
            for (const auto& f : result.failures) failures.push_back(f);
            std::printf("%s\n", nlohmann::json{{"failures", failures}}.dump().c_str());
        } else {
            std::printf("ok: artifacts written to %s\n", cfg.output_dir.c_str());
        }
        return result.exit_code;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 2;
    }
}
