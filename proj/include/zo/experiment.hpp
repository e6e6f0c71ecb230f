#pragma once

// Experiment runner: INI-style configuration, method comparison runs across
// seeds with a worker pool, and CSV artifacts (loss curves, summary, latency
// breakdown, validation reports, correlation trajectories).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "zo/claims.hpp"
#include "zo/csv.hpp"
#include "zo/errors.hpp"
#include "zo/objectives.hpp"
#include "zo/optimizer.hpp"
#include "zo/serialize.hpp"
#include "zo/validate.hpp"

namespace zo {

// ---------------------------------------------------------------------------
// Configuration file parsing. Grammar (documented in the README): blank
// lines and lines starting with '#' or ';' are ignored; '[name]' opens a
// section; 'key = value' assigns within the current section. Lists are
// comma-separated; 'VxN' repeats value V N times.
// ---------------------------------------------------------------------------

namespace cfgdetail {

struct Section {
    std::string name;
    std::map<std::string, std::string> entries;
    std::set<std::string> consumed;
};

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

// Inline comments start at whitespace followed by '#' or ';'.
inline std::string strip_inline_comment(const std::string& s) {
    for (std::size_t i = 1; i < s.size(); ++i) {
        if ((s[i] == '#' || s[i] == ';') && (s[i - 1] == ' ' || s[i - 1] == '\t')) {
            return s.substr(0, i);
        }
    }
    return s;
}

inline std::vector<Section> parse_sections(std::istream& is, const std::string& origin) {
    std::vector<Section> sections;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#' || text[0] == ';') continue;
        if (text.front() == '[') {
            if (text.back() != ']') {
                throw config_error(origin + ":" + std::to_string(lineno) + ": unterminated section");
            }
            sections.push_back({trim(text.substr(1, text.size() - 2)), {}, {}});
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw config_error(origin + ":" + std::to_string(lineno) + ": expected key = value");
        }
        if (sections.empty()) {
            throw config_error(origin + ":" + std::to_string(lineno) + ": entry outside any section");
        }
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(strip_inline_comment(text.substr(eq + 1)));
        if (key.empty()) {
            throw config_error(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        auto& entries = sections.back().entries;
        if (entries.count(key)) {
            throw config_error(origin + ": duplicate key '" + key + "' in [" +
                               sections.back().name + "]");
        }
        entries[key] = value;
    }
    return sections;
}

inline std::optional<std::string> take(Section& s, const std::string& key) {
    const auto it = s.entries.find(key);
    if (it == s.entries.end()) return std::nullopt;
    s.consumed.insert(key);
    return it->second;
}

inline void reject_unknown(const Section& s) {
    std::string unknown;
    for (const auto& [key, value] : s.entries) {
        if (!s.consumed.count(key)) {
            if (!unknown.empty()) unknown += ", ";
            unknown += key;
        }
    }
    if (!unknown.empty()) {
        throw config_error("unknown keys in [" + s.name + "]: " + unknown);
    }
}

inline double to_double(const std::string& v, const std::string& what) {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw config_error(what + ": not a number: '" + v + "'");
    }
    if (used != v.size()) {
        throw config_error(what + ": trailing characters in '" + v + "'");
    }
    return out;
}

inline std::uint64_t to_u64(const std::string& v, const std::string& what) {
    std::size_t used = 0;
    std::uint64_t out = 0;
    try {
        out = std::stoull(v, &used);
    } catch (const std::exception&) {
        throw config_error(what + ": not a non-negative integer: '" + v + "'");
    }
    if (used != v.size()) {
        throw config_error(what + ": trailing characters in '" + v + "'");
    }
    return out;
}

inline bool to_bool(const std::string& v, const std::string& what) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw config_error(what + ": expected true/false, got '" + v + "'");
}

// Comma-separated values; each item may be 'VxN' to repeat V N times.
template <typename T, typename Fn>
std::vector<T> parse_list(const std::string& text, const std::string& what, Fn&& convert) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) {
            throw config_error(what + ": empty list item");
        }
        const auto x = item.find('x');
        if (x != std::string::npos && x + 1 < item.size() &&
            item.find_first_not_of("0123456789", x + 1) == std::string::npos) {
            const std::uint64_t repeat = to_u64(item.substr(x + 1), what);
            const T value = convert(item.substr(0, x));
            for (std::uint64_t i = 0; i < repeat; ++i) out.push_back(value);
        } else {
            out.push_back(convert(item));
        }
    }
    if (out.empty()) {
        throw config_error(what + ": empty list");
    }
    return out;
}

} // namespace cfgdetail

enum class InitKind { ones, zeros, gauss };

struct ObjectiveSpec {
    std::string kind; // quadratic | logistic | mlp | constant
    std::vector<std::size_t> sizes;
    std::vector<double> scales;
    std::size_t n_samples = 64;
    std::uint64_t data_seed = 0;
    std::size_t cost_iters = 0;
    InitKind init = InitKind::ones;
    double init_scale = 1.0;

    std::unique_ptr<Objective> build() const {
        if (kind == "quadratic") return quadratic_hetero(scales, sizes);
        if (kind == "logistic") return logistic_synthetic(n_samples, sizes, data_seed);
        if (kind == "mlp") return mlp_tiny(sizes, data_seed, n_samples);
        if (kind == "constant") return constant_cost(sizes, cost_iters);
        throw config_error("unknown objective kind: " + kind);
    }

    LayeredParams initial_params(const Objective& obj) const {
        LayeredParams p = obj.make_params();
        switch (init) {
            case InitKind::zeros: break;
            case InitKind::ones: p.fill(1.0); break;
            case InitKind::gauss: {
                GaussianStream g(derive_seed(data_seed, 4, SeedPurpose::data));
                g.fill(p.flat());
                break;
            }
        }
        if (init_scale != 1.0) {
            for (double& v : p.flat()) v *= init_scale;
        }
        return p;
    }
};

struct RunVariant {
    std::string label;
    RunConfig config; // master_seed filled per experiment seed
    bool save_final_params = false;
};

struct ExperimentConfig {
    ObjectiveSpec objective;
    std::vector<RunVariant> runs;
    std::vector<std::uint64_t> seeds;
    std::string output_dir = "out";
    std::size_t workers = 1;
    std::vector<std::string> validations;
};

inline ExperimentConfig parse_config_stream(std::istream& is, const std::string& origin) {
    using namespace cfgdetail;
    auto sections = parse_sections(is, origin);

    ExperimentConfig cfg;
    bool saw_experiment = false, saw_objective = false;
    for (auto& sec : sections) {
        if (sec.name == "experiment") {
            saw_experiment = true;
            if (auto v = take(sec, "seeds")) {
                cfg.seeds = parse_list<std::uint64_t>(*v, "seeds",
                                                      [](const std::string& s) { return to_u64(s, "seeds"); });
            }
            if (auto v = take(sec, "output_dir")) cfg.output_dir = *v;
            if (auto v = take(sec, "workers")) {
                cfg.workers = static_cast<std::size_t>(to_u64(*v, "workers"));
                if (cfg.workers < 1) throw config_error("workers must be >= 1");
            }
            if (auto v = take(sec, "validations")) {
                cfg.validations = parse_list<std::string>(*v, "validations",
                                                          [](const std::string& s) { return s; });
            }
            reject_unknown(sec);
        } else if (sec.name == "objective") {
            saw_objective = true;
            auto& spec = cfg.objective;
            if (auto v = take(sec, "kind")) spec.kind = *v;
            if (auto v = take(sec, "sizes")) {
                spec.sizes = parse_list<std::size_t>(*v, "sizes", [](const std::string& s) {
                    const auto n = to_u64(s, "sizes");
                    if (n == 0) throw config_error("sizes: layer sizes must be >= 1");
                    return static_cast<std::size_t>(n);
                });
            }
            if (auto v = take(sec, "scales")) {
                spec.scales = parse_list<double>(*v, "scales", [](const std::string& s) {
                    const double a = to_double(s, "scales");
                    if (!(a > 0.0)) throw config_error("scales: must be > 0");
                    return a;
                });
            }
            if (auto v = take(sec, "n_samples")) {
                spec.n_samples = static_cast<std::size_t>(to_u64(*v, "n_samples"));
                if (spec.n_samples < 1) throw config_error("n_samples must be >= 1");
            }
            if (auto v = take(sec, "data_seed")) spec.data_seed = to_u64(*v, "data_seed");
            if (auto v = take(sec, "cost_iters")) {
                spec.cost_iters = static_cast<std::size_t>(to_u64(*v, "cost_iters"));
            }
            if (auto v = take(sec, "init")) {
                if (*v == "ones") spec.init = InitKind::ones;
                else if (*v == "zeros") spec.init = InitKind::zeros;
                else if (*v == "gauss") spec.init = InitKind::gauss;
                else throw config_error("init: expected ones|zeros|gauss, got '" + *v + "'");
            }
            if (auto v = take(sec, "init_scale")) spec.init_scale = to_double(*v, "init_scale");
            reject_unknown(sec);
        } else if (sec.name.rfind("run.", 0) == 0) {
            RunVariant variant;
            variant.label = sec.name.substr(4);
            if (variant.label.empty()) {
                throw config_error("run section needs a label: [run.<label>]");
            }
            RunConfig& rc = variant.config;
            if (auto v = take(sec, "method")) {
                if (*v == "mezo") rc.method = Method::mezo;
                else if (*v == "adalezo") rc.method = Method::adalezo;
                else if (*v == "random_sparse") rc.method = Method::random_sparse;
                else throw config_error("method: expected mezo|adalezo|random_sparse, got '" + *v + "'");
            } else {
                throw config_error("[" + sec.name + "]: method is required");
            }
            if (auto v = take(sec, "steps")) {
                rc.steps = static_cast<std::size_t>(to_u64(*v, "steps"));
                if (rc.steps < 1) throw config_error("steps must be >= 1");
            }
            if (auto v = take(sec, "eta")) {
                rc.eta = to_double(*v, "eta");
                if (!(rc.eta > 0.0)) throw config_error("eta must be > 0");
            }
            if (auto v = take(sec, "mu")) {
                rc.mu = to_double(*v, "mu");
                if (!(rc.mu > 0.0)) throw config_error("mu must be > 0");
            }
            if (auto v = take(sec, "eval_every")) {
                rc.eval_every = static_cast<std::size_t>(to_u64(*v, "eval_every"));
                if (rc.eval_every < 1) throw config_error("eval_every must be >= 1");
            }
            if (auto v = take(sec, "record_probs")) rc.record_probs = to_bool(*v, "record_probs");
            if (auto v = take(sec, "record_oracle_corr")) {
                rc.record_oracle_corr = to_bool(*v, "record_oracle_corr");
                if (rc.record_oracle_corr) rc.record_probs = true;
            }
            if (auto v = take(sec, "lr_schedule")) {
                if (*v == "constant") rc.schedule = LrSchedule::constant;
                else if (*v == "inv_sqrt_total") rc.schedule = LrSchedule::inv_sqrt_total;
                else throw config_error("lr_schedule: expected constant|inv_sqrt_total");
            }
            if (auto v = take(sec, "rho")) {
                rc.bandit.rho = to_double(*v, "rho");
                if (!(rc.bandit.rho > 0.0 && rc.bandit.rho <= 1.0)) {
                    throw config_error("rho must be in (0,1]");
                }
            }
            if (auto v = take(sec, "tau")) {
                rc.bandit.tau = to_double(*v, "tau");
                if (!(rc.bandit.tau > 0.0)) throw config_error("tau must be > 0");
            }
            if (auto v = take(sec, "gamma")) {
                rc.bandit.gamma = to_double(*v, "gamma");
                if (!(rc.bandit.gamma >= 0.0 && rc.bandit.gamma <= 1.0)) {
                    throw config_error("gamma must be in [0,1]");
                }
            }
            if (auto v = take(sec, "alpha")) {
                rc.bandit.alpha = to_double(*v, "alpha");
                if (!(rc.bandit.alpha > 0.0 && rc.bandit.alpha <= 1.0)) {
                    throw config_error("alpha must be in (0,1]");
                }
            }
            if (auto v = take(sec, "clip_c")) {
                rc.bandit.clip_c = to_double(*v, "clip_c");
                if (!(rc.bandit.clip_c >= 1.0)) throw config_error("clip_c must be >= 1");
            }
            if (auto v = take(sec, "save_final_params")) {
                variant.save_final_params = to_bool(*v, "save_final_params");
            }
            reject_unknown(sec);
            cfg.runs.push_back(std::move(variant));
        } else {
            throw config_error("unknown section: [" + sec.name + "]");
        }
    }

    if (!saw_experiment) throw config_error("missing [experiment] section");
    if (cfg.seeds.empty()) throw config_error("seeds: at least one seed is required");
    if (cfg.runs.empty() && cfg.validations.empty()) {
        throw config_error("config declares neither [run.*] sections nor validations");
    }
    if (!cfg.runs.empty()) {
        if (!saw_objective) throw config_error("runs are configured but [objective] is missing");
        if (cfg.objective.kind.empty()) throw config_error("[objective]: kind is required");
        if (cfg.objective.sizes.empty()) throw config_error("[objective]: sizes is required");
        if (cfg.objective.kind == "quadratic" &&
            cfg.objective.scales.size() != cfg.objective.sizes.size()) {
            throw config_error("[objective]: quadratic needs one scale per layer");
        }
        std::set<std::string> labels;
        for (const auto& variant : cfg.runs) {
            if (!labels.insert(variant.label).second) {
                throw config_error("duplicate run label: " + variant.label);
            }
            variant.config.validate();
            if (variant.config.record_probs && variant.config.method == Method::mezo) {
                throw config_error("record_probs: the dense method has no sampling distribution");
            }
            if (variant.config.record_oracle_corr && cfg.objective.kind == "constant") {
                throw config_error("record_oracle_corr needs an objective with an analytic gradient");
            }
        }
        // smoke-build to surface objective construction errors at parse time
        (void)cfg.objective.build();
    }
    for (const auto& claim : cfg.validations) {
        if (std::find(claim_ids().begin(), claim_ids().end(), claim) == claim_ids().end()) {
            throw config_error("unknown validation claim: " + claim);
        }
    }
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw config_error("cannot open config file: " + path);
    }
    return parse_config_stream(is, path);
}

// ---------------------------------------------------------------------------
// Latency breakdown aggregation.
// ---------------------------------------------------------------------------

struct BreakdownRow {
    double median_perturb = 0.0;
    double median_forward = 0.0;
    double median_update = 0.0;
    // empty when all medians are zero (fractions undefined)
    std::optional<double> frac_perturb;
    std::optional<double> frac_forward;
    std::optional<double> frac_update;
};

namespace detail {
inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}
} // namespace detail

inline BreakdownRow compute_breakdown(std::span<const StepReport> reports) {
    std::vector<double> perturb, forward, update;
    perturb.reserve(reports.size());
    for (const auto& rep : reports) {
        perturb.push_back(rep.t_perturb);
        forward.push_back(rep.t_forward);
        update.push_back(rep.t_update);
    }
    BreakdownRow row;
    row.median_perturb = detail::median(std::move(perturb));
    row.median_forward = detail::median(std::move(forward));
    row.median_update = detail::median(std::move(update));
    const double total = row.median_perturb + row.median_forward + row.median_update;
    if (total > 0.0) {
        row.frac_perturb = row.median_perturb / total;
        row.frac_forward = row.median_forward / total;
        row.frac_update = row.median_update / total;
    }
    return row;
}

// ---------------------------------------------------------------------------
// Experiment execution.
// ---------------------------------------------------------------------------

struct ExperimentResult {
    int exit_code = 0;
    std::vector<std::string> failures; // machine-readable failure identifiers
    std::vector<ValidationReport> validation_reports;
};

namespace detail {

struct JobOutput {
    RunResult result;
    double total_time = 0.0;                   // summed phase time over steps
    double mean_perturb = 0.0, mean_forward = 0.0, mean_update = 0.0;
    std::vector<CorrelationReport> correlation;
};

inline void write_curve_csv(const std::string& path, const RunResult& run_result,
                            std::size_t layer_count, bool with_probs) {
    std::vector<std::string> header{"step", "wall_clock_s", "loss",
                                    "t_perturb", "t_forward", "t_update"};
    if (with_probs) {
        for (std::size_t l = 0; l < layer_count; ++l) {
            header.push_back("p_" + std::to_string(l));
        }
    }
    CsvWriter csv(path, header);
    for (const auto& rep : run_result.reports) {
        csv.field(rep.step).field(rep.wall_clock_s);
        if (std::isnan(rep.eval_loss)) {
            csv.field(std::nullopt);
        } else {
            csv.field(rep.eval_loss);
        }
        csv.field(rep.t_perturb).field(rep.t_forward).field(rep.t_update);
        if (with_probs) {
            const bool have = rep.probs.size() == layer_count;
            for (std::size_t l = 0; l < layer_count; ++l) {
                if (have) {
                    csv.field(rep.probs[l]);
                } else {
                    csv.field(std::nullopt);
                }
            }
        }
        csv.end_row();
    }
}

} // namespace detail

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    ExperimentResult result;
    fs::create_directories(cfg.output_dir);

    struct Job {
        std::size_t variant;
        std::size_t seed_index;
    };
    std::vector<Job> jobs;
    for (std::size_t v = 0; v < cfg.runs.size(); ++v) {
        for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
            jobs.push_back({v, s});
        }
    }

    std::unique_ptr<Objective> objective;
    const OracleObjective* oracle = nullptr;
    LayeredParams init;
    if (!cfg.runs.empty()) {
        objective = cfg.objective.build();
        oracle = dynamic_cast<const OracleObjective*>(objective.get());
        init = cfg.objective.initial_params(*objective);
    }

    std::vector<detail::JobOutput> outputs(jobs.size());
    std::atomic<std::size_t> next{0};
    const std::size_t worker_count = std::min<std::size_t>(std::max<std::size_t>(cfg.workers, 1),
                                                           jobs.empty() ? 1 : jobs.size());
    auto worker = [&]() {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            const Job& job = jobs[j];
            const RunVariant& variant = cfg.runs[job.variant];
            RunConfig rc = variant.config;
            rc.master_seed = cfg.seeds[job.seed_index];

            detail::JobOutput& out = outputs[j];
            try {
                if (rc.record_oracle_corr && oracle != nullptr) {
                    CorrelationTracker tracker(*oracle);
                    out.result = run(*objective, rc, init,
                                     [&tracker](const LayeredParams& p, const StepReport& rep) {
                                         tracker.observe(p, rep);
                                     });
                    out.correlation = tracker.reports();
                } else {
                    out.result = run(*objective, rc, init);
                }
            } catch (const std::exception& err) {
                out.result.aborted = true;
                out.result.abort_reason = err.what();
            }
            double perturb = 0.0, forward = 0.0, update = 0.0;
            for (const auto& rep : out.result.reports) {
                perturb += rep.t_perturb;
                forward += rep.t_forward;
                update += rep.t_update;
            }
            const double n = static_cast<double>(std::max<std::size_t>(1, out.result.reports.size()));
            out.total_time = perturb + forward + update;
            out.mean_perturb = perturb / n;
            out.mean_forward = forward / n;
            out.mean_update = update / n;
        }
    };
    {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < worker_count; ++w) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) th.join();
    }

    // per-run curve files, in deterministic (variant, seed) order
    const fs::path out_dir(cfg.output_dir);
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const Job& job = jobs[j];
        const RunVariant& variant = cfg.runs[job.variant];
        const std::uint64_t seed = cfg.seeds[job.seed_index];
        const detail::JobOutput& out = outputs[j];

        const std::string stem = variant.label + "_" + std::to_string(seed);
        detail::write_curve_csv((out_dir / ("curve_" + stem + ".csv")).string(), out.result,
                                objective->layer_count(), variant.config.record_probs);
        if (out.result.aborted) {
            result.failures.push_back("run:" + stem + ":" + out.result.abort_reason);
        } else if (variant.save_final_params) {
            save_params((out_dir / ("params_" + stem + ".zob")).string(), out.result.final_params);
        }
        if (!out.correlation.empty()) {
            CsvWriter csv((out_dir / ("correlation_" + stem + ".csv")).string(),
                          {"step", "instantaneous_r", "cumulative_r"});
            for (const auto& rec : out.correlation) {
                csv.field(rec.step).field(rec.instantaneous_r).field(rec.cumulative_r);
                csv.end_row();
            }
        }
    }

    // summary with per-seed speedup against the mezo variant, when present
    if (!jobs.empty()) {
        std::map<std::uint64_t, double> mezo_total;
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            const RunVariant& variant = cfg.runs[jobs[j].variant];
            if (variant.config.method == Method::mezo && !outputs[j].result.aborted) {
                mezo_total.emplace(cfg.seeds[jobs[j].seed_index], outputs[j].total_time);
            }
        }
        CsvWriter csv((out_dir / "summary.csv").string(),
                      {"method", "seed", "final_loss", "mean_t_perturb", "mean_t_forward",
                       "mean_t_update", "total_time_s", "speedup_vs_mezo"});
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            const Job& job = jobs[j];
            const RunVariant& variant = cfg.runs[job.variant];
            const detail::JobOutput& out = outputs[j];
            const std::uint64_t seed = cfg.seeds[job.seed_index];
            csv.field(variant.label).field(static_cast<std::size_t>(seed));
            if (out.result.aborted || out.result.reports.empty()) {
                csv.field(std::nullopt);
            } else {
                csv.field(out.result.reports.back().eval_loss);
            }
            csv.field(out.mean_perturb).field(out.mean_forward).field(out.mean_update);
            csv.field(out.total_time);
            const auto it = mezo_total.find(seed);
            if (it != mezo_total.end() && out.total_time > 0.0) {
                csv.field(it->second / out.total_time);
            } else {
                csv.field(std::nullopt);
            }
            csv.end_row();
        }

        CsvWriter breakdown((out_dir / "breakdown.csv").string(),
                            {"method", "seed", "median_t_perturb", "median_t_forward",
                             "median_t_update", "frac_perturb", "frac_forward", "frac_update"});
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            const Job& job = jobs[j];
            const BreakdownRow row = compute_breakdown(outputs[j].result.reports);
            breakdown.field(cfg.runs[job.variant].label)
                .field(static_cast<std::size_t>(cfg.seeds[job.seed_index]))
                .field(row.median_perturb)
                .field(row.median_forward)
                .field(row.median_update)
                .field(row.frac_perturb)
                .field(row.frac_forward)
                .field(row.frac_update);
            breakdown.end_row();
        }
    }

    // requested validation claims
    if (!cfg.validations.empty()) {
        CsvWriter csv((out_dir / "validation.csv").string(),
                      {"claim_id", "bound", "estimate", "se", "n", "pass"});
        for (const auto& claim : cfg.validations) {
            const auto reports = run_claim(claim, cfg.seeds.front());
            for (const auto& rep : reports) {
                csv.field(rep.claim_id)
                    .field(rep.bound)
                    .field(rep.estimate)
                    .field(rep.se)
                    .field(rep.n_trials)
                    .field(rep.pass);
                csv.end_row();
                if (!rep.pass) {
                    result.failures.push_back("validation:" + rep.claim_id);
                }
                result.validation_reports.push_back(rep);
            }
        }
    }

    result.exit_code = result.failures.empty() ? 0 : 1;
    return result;
}

} // namespace zo
