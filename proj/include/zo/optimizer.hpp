#pragma once

// The three training loops: dense full-perturbation (mezo), bandit-adaptive
// sparse (adalezo), and uniform random sparse. Each step is instrumented
// with per-phase wall-clock timings (perturb / forward / update).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "zo/bandit.hpp"
#include "zo/errors.hpp"
#include "zo/estimator.hpp"
#include "zo/noise.hpp"
#include "zo/objectives.hpp"
#include "zo/params.hpp"
#include "zo/rng.hpp"

namespace zo {

enum class Method { mezo, adalezo, random_sparse };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::mezo: return "mezo";
        case Method::adalezo: return "adalezo";
        case Method::random_sparse: return "random_sparse";
    }
    return "?";
}

enum class LrSchedule {
    constant,     // eta_t = eta
    inv_sqrt_total // eta_t = eta / sqrt(T), the theoretical rate
};

struct RunConfig {
    Method method = Method::adalezo;
    std::size_t steps = 1;
    double eta = 1e-3;
    double mu = 1e-3;
    BanditConfig bandit;
    std::uint64_t master_seed = 0;
    bool record_probs = false;
    bool record_oracle_corr = false;
    std::size_t eval_every = 100;
    LrSchedule schedule = LrSchedule::constant;

    void validate() const {
        if (steps < 1) throw domain_error("run config: steps must be >= 1");
        if (!(eta > 0.0)) throw domain_error("run config: eta must be > 0");
        if (!(mu > 0.0)) throw domain_error("run config: mu must be > 0");
        if (eval_every < 1) throw domain_error("run config: eval_every must be >= 1");
        bandit.validate();
    }

    double step_eta() const {
        return schedule == LrSchedule::inv_sqrt_total
                   ? eta / std::sqrt(static_cast<double>(steps))
                   : eta;
    }
};

struct StepReport {
    std::size_t step = 0;
    double loss_plus = 0.0;
    double loss_minus = 0.0;
    double scalar_grad = 0.0;
    std::vector<std::size_t> active;
    std::vector<std::uint32_t> counts;
    double t_perturb = 0.0; // seconds, the three perturbation passes
    double t_forward = 0.0; // seconds, exactly the two loss evaluations
    double t_update = 0.0;  // seconds, the parameter update
    double eval_loss = std::numeric_limits<double>::quiet_NaN(); // unperturbed loss, eval steps only
    double wall_clock_s = 0.0; // cumulative run wall clock at step end
    std::vector<double> probs; // sampling distribution, when recorded
};

// Mutable per-run state for the sparse methods: the bandit values and the
// draw that will be consumed by the next step.
struct LoopState {
    BanditState bandit;
    SampleDraw draw;
};

namespace detail {

class PhaseTimer {
public:
    PhaseTimer() : start_(std::chrono::steady_clock::now()) {}
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

inline std::vector<std::size_t> all_layers(std::size_t count) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

// Shared three-phase probe: perturb(+mu), eval, perturb(-2mu), eval,
// perturb(+mu) restore. Fills the loss pair and the perturb/forward timings.
inline ScalarGrad two_point_probe(LayeredParams& params, const Objective& obj,
                                  std::span<const std::size_t> active, double mu,
                                  const NoiseStream& stream, StepReport& rep) {
    PhaseTimer t0;
    perturb_layers(params, active, mu, stream);
    rep.t_perturb += t0.elapsed();

    PhaseTimer t1;
    const double loss_plus = obj.loss(params);
    rep.t_forward += t1.elapsed();

    PhaseTimer t2;
    perturb_layers(params, active, -2.0 * mu, stream);
    rep.t_perturb += t2.elapsed();

    PhaseTimer t3;
    const double loss_minus = obj.loss(params);
    rep.t_forward += t3.elapsed();

    PhaseTimer t4;
    perturb_layers(params, active, mu, stream);
    rep.t_perturb += t4.elapsed();

    return projected_scalar(loss_plus, loss_minus, mu);
}

} // namespace detail

// One adaptive sparse step (three phases: probe, count-aware update,
// resample for the next step). With rho = 1 the step runs in dense mode:
// every layer active once with unit weight, no multinomial draw.
inline StepReport adalezo_step(LayeredParams& params, const Objective& obj, LoopState& state,
                               const RunConfig& cfg, std::size_t t) {
    StepReport rep;
    rep.step = t;
    const std::uint64_t noise_seed = derive_seed(cfg.master_seed, t, SeedPurpose::noise);
    const NoiseStream stream{noise_seed};
    const bool dense_mode = cfg.bandit.rho == 1.0;

    if (dense_mode) {
        SampleDraw dense;
        dense.k_draws = params.layer_count();
        dense.counts.assign(params.layer_count(), 1);
        dense.active = detail::all_layers(params.layer_count());
        state.draw = std::move(dense);
    }
    const SampleDraw& draw = state.draw;
    if (cfg.record_probs) {
        rep.probs = state.bandit.probs;
    }

    const ScalarGrad scalar =
        detail::two_point_probe(params, obj, draw.active, cfg.mu, stream, rep);

    SparseGradSpec spec;
    if (dense_mode) {
        spec.active = draw.active;
        spec.counts = draw.counts;
        spec.weights.assign(params.layer_count(), 1.0);
        spec.scalar = scalar;
        spec.noise_seed = noise_seed;
    } else {
        spec = make_sparse_spec(draw, state.bandit.probs, cfg.bandit.clip_c, scalar, noise_seed);
    }

    detail::PhaseTimer tu;
    sparse_update(params, spec, cfg.step_eta(), stream);
    rep.t_update = tu.elapsed();

    rep.loss_plus = scalar.loss_plus;
    rep.loss_minus = scalar.loss_minus;
    rep.scalar_grad = scalar.value;
    // record the consumed draw before resampling replaces it
    rep.active = draw.active;
    rep.counts = draw.counts;

    update_reward(state.bandit, rep.active, std::abs(scalar.value), cfg.bandit);
    state.bandit.probs = sampling_probs(state.bandit.q_values, cfg.bandit);
    state.bandit.step = t + 1;
    if (!dense_mode) {
        CounterRng rng(derive_seed(cfg.master_seed, t + 1, SeedPurpose::sample));
        state.draw = resample(state.bandit.probs, cfg.bandit, rng);
    }
    return rep;
}

// Dense baseline step: full perturbation, full update, no bandit bookkeeping.
inline StepReport mezo_step(LayeredParams& params, const Objective& obj, const RunConfig& cfg,
                            std::size_t t) {
    StepReport rep;
    rep.step = t;
    const std::uint64_t noise_seed = derive_seed(cfg.master_seed, t, SeedPurpose::noise);
    const NoiseStream stream{noise_seed};
    const auto active = detail::all_layers(params.layer_count());

    const ScalarGrad scalar = detail::two_point_probe(params, obj, active, cfg.mu, stream, rep);

    detail::PhaseTimer tu;
    dense_estimate_apply(params, scalar, cfg.step_eta(), stream);
    rep.t_update = tu.elapsed();

    rep.loss_plus = scalar.loss_plus;
    rep.loss_minus = scalar.loss_minus;
    rep.scalar_grad = scalar.value;
    rep.active = active;
    rep.counts.assign(params.layer_count(), 1);
    return rep;
}

// Uniform sparse ablation: fixed uniform sampling distribution, no reward
// tracking, IPW weights still applied so the estimator stays unbiased.
inline StepReport random_sparse_step(LayeredParams& params, const Objective& obj, LoopState& state,
                                     const RunConfig& cfg, std::size_t t) {
    StepReport rep;
    rep.step = t;
    const std::uint64_t noise_seed = derive_seed(cfg.master_seed, t, SeedPurpose::noise);
    const NoiseStream stream{noise_seed};
    const SampleDraw& draw = state.draw;
    if (cfg.record_probs) {
        rep.probs = state.bandit.probs;
    }

    const ScalarGrad scalar =
        detail::two_point_probe(params, obj, draw.active, cfg.mu, stream, rep);

    const SparseGradSpec spec =
        make_sparse_spec(draw, state.bandit.probs, cfg.bandit.clip_c, scalar, noise_seed);

    detail::PhaseTimer tu;
    sparse_update(params, spec, cfg.step_eta(), stream);
    rep.t_update = tu.elapsed();

    rep.loss_plus = scalar.loss_plus;
    rep.loss_minus = scalar.loss_minus;
    rep.scalar_grad = scalar.value;
    // record the consumed draw before resampling replaces it
    rep.active = draw.active;
    rep.counts = draw.counts;

    CounterRng rng(derive_seed(cfg.master_seed, t + 1, SeedPurpose::sample));
    state.draw = resample(state.bandit.probs, cfg.bandit, rng);
    return rep;
}

struct RunResult {
    std::vector<StepReport> reports;
    LayeredParams final_params;
    bool aborted = false;
    std::string abort_reason;
};

// Called after every step with the current parameters and the step report.
using StepObserver = std::function<void(const LayeredParams&, const StepReport&)>;

inline RunResult run(const Objective& obj, const RunConfig& cfg, const LayeredParams& init,
                     const StepObserver& observer = {}) {
    cfg.validate();
    LayeredParams params = init;
    const std::size_t layers = params.layer_count();

    LoopState state;
    state.bandit = BanditState(layers);
    if (cfg.method == Method::adalezo) {
        state.bandit.probs = sampling_probs(state.bandit.q_values, cfg.bandit);
    }
    if (cfg.method != Method::mezo && cfg.bandit.rho != 1.0) {
        // initial draw, made before step 0 from the uniform start distribution
        CounterRng rng(derive_seed(cfg.master_seed, 0, SeedPurpose::sample));
        state.draw = resample(state.bandit.probs, cfg.bandit, rng);
    }

    RunResult result;
    result.reports.reserve(cfg.steps);
    const auto run_start = std::chrono::steady_clock::now();
    for (std::size_t t = 0; t < cfg.steps; ++t) {
        StepReport rep;
        try {
            switch (cfg.method) {
                case Method::mezo: rep = mezo_step(params, obj, cfg, t); break;
                case Method::adalezo: rep = adalezo_step(params, obj, state, cfg, t); break;
                case Method::random_sparse:
                    rep = random_sparse_step(params, obj, state, cfg, t);
                    break;
            }
        } catch (const numeric_error& err) {
            result.aborted = true;
            result.abort_reason = "step " + std::to_string(t) + ": " + err.what();
            break;
        }
        if (t % cfg.eval_every == 0 || t + 1 == cfg.steps) {
            rep.eval_loss = obj.loss(params);
        }
        rep.wall_clock_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start).count();
        if (observer) {
            observer(params, rep);
        }
        result.reports.push_back(std::move(rep));
    }
    result.final_params = std::move(params);
    return result;
}

} // namespace zo
