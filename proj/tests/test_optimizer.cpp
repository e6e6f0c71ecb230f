#include <doctest.h>

#include <cmath>
#include <vector>

#include "zo/objectives.hpp"
#include "zo/optimizer.hpp"

using namespace zo;

namespace {

RunConfig base_config(Method m, std::size_t steps, std::uint64_t seed) {
    RunConfig cfg;
    cfg.method = m;
    cfg.steps = steps;
    cfg.eta = 1e-2;
    cfg.mu = 1e-3;
    cfg.master_seed = seed;
    cfg.eval_every = 10;
    return cfg;
}

std::vector<double> losses(const RunResult& r) {
    std::vector<double> out;
    out.reserve(r.reports.size());
    for (const auto& rep : r.reports) {
        out.push_back(rep.loss_plus);
        out.push_back(rep.loss_minus);
    }
    return out;
}

} // namespace

TEST_CASE("identical configs give bit-identical trajectories") {
    auto obj = quadratic_hetero({1.0, 0.5, 2.0}, {4, 4, 4});
    LayeredParams init = obj->make_params();
    init.fill(1.0);
    for (Method m : {Method::mezo, Method::adalezo, Method::random_sparse}) {
        const RunConfig cfg = base_config(m, 50, 99);
        const RunResult a = run(*obj, cfg, init);
        const RunResult b = run(*obj, cfg, init);
        CHECK(losses(a) == losses(b));
        for (std::size_t i = 0; i < init.total_dim(); ++i) {
            CHECK(a.final_params.flat()[i] == b.final_params.flat()[i]);
        }
    }
}

TEST_CASE("T = 1 produces exactly one report") {
    auto obj = quadratic_hetero({1.0}, {4});
    LayeredParams init = obj->make_params();
    init.fill(0.5);
    const RunResult r = run(*obj, base_config(Method::adalezo, 1, 3), init);
    CHECK(r.reports.size() == 1);
    CHECK(!std::isnan(r.reports[0].eval_loss)); // final step always evaluates

    RunConfig bad = base_config(Method::adalezo, 1, 3);
    bad.steps = 0;
    CHECK_THROWS_AS(run(*obj, bad, init), domain_error);
}

TEST_CASE("sparse steps never touch layers outside the active set") {
    auto obj = quadratic_hetero({1.0, 2.0, 0.5, 3.0}, {8, 8, 8, 8});
    LayeredParams params = obj->make_params();
    params.fill(1.0);

    RunConfig cfg = base_config(Method::adalezo, 1, 7);
    LoopState state;
    state.bandit = BanditState(4);
    state.bandit.probs = sampling_probs(state.bandit.q_values, cfg.bandit);
    CounterRng rng(derive_seed(cfg.master_seed, 0, SeedPurpose::sample));
    state.draw = resample(state.bandit.probs, cfg.bandit, rng);

    const LayeredParams shadow = params;
    const std::vector<std::size_t> consumed = state.draw.active;
    const StepReport rep = adalezo_step(params, *obj, state, cfg, 0);
    CHECK(rep.active == consumed); // the report describes the draw it consumed

    std::vector<bool> is_active(4, false);
    for (std::size_t l : rep.active) is_active[l] = true;
    for (std::size_t l = 0; l < 4; ++l) {
        if (is_active[l]) continue;
        for (std::size_t i = 0; i < 8; ++i) {
            CHECK(params.layer(l)[i] == shadow.layer(l)[i]);
        }
    }
}

TEST_CASE("single-layer adalezo step equals the mezo step bitwise") {
    auto obj = quadratic_hetero({1.3}, {16});
    LayeredParams a = obj->make_params();
    GaussianStream init(55);
    init.fill(a.flat());
    LayeredParams b = a;

    RunConfig cfg = base_config(Method::adalezo, 1, 77);
    const RunResult ra = run(*obj, cfg, a);
    cfg.method = Method::mezo;
    const RunResult rb = run(*obj, cfg, b);

    CHECK(ra.reports[0].loss_plus == rb.reports[0].loss_plus);
    CHECK(ra.reports[0].loss_minus == rb.reports[0].loss_minus);
    CHECK(ra.reports[0].scalar_grad == rb.reports[0].scalar_grad);
    for (std::size_t i = 0; i < a.total_dim(); ++i) {
        CHECK(ra.final_params.flat()[i] == rb.final_params.flat()[i]);
    }
}

TEST_CASE("rho = 1 dense mode equals the mezo fast path bitwise") {
    auto obj = quadratic_hetero({1.0, 0.2, 2.5}, {8, 4, 8});
    LayeredParams init = obj->make_params();
    GaussianStream g(3);
    g.fill(init.flat());

    RunConfig cfg = base_config(Method::adalezo, 20, 123);
    cfg.bandit.rho = 1.0;
    const RunResult dense = run(*obj, cfg, init);
    cfg.method = Method::mezo;
    cfg.bandit.rho = 0.2; // irrelevant for mezo
    const RunResult fast = run(*obj, cfg, init);

    CHECK(losses(dense) == losses(fast));
    for (std::size_t i = 0; i < init.total_dim(); ++i) {
        CHECK(dense.final_params.flat()[i] == fast.final_params.flat()[i]);
    }
}

TEST_CASE("gamma = 1 adalezo draws the same layers as random_sparse on a shared seed") {
    auto obj = quadratic_hetero({1.0, 5.0, 0.1, 2.0}, {4, 4, 4, 4});
    LayeredParams init = obj->make_params();
    init.fill(1.0);

    RunConfig cfg = base_config(Method::adalezo, 40, 31);
    cfg.bandit.gamma = 1.0; // pure exploration: the policy is uniform every step
    const RunResult ada = run(*obj, cfg, init);
    cfg.method = Method::random_sparse;
    const RunResult rs = run(*obj, cfg, init);

    REQUIRE(ada.reports.size() == rs.reports.size());
    for (std::size_t t = 0; t < ada.reports.size(); ++t) {
        CHECK(ada.reports[t].active == rs.reports[t].active);
        CHECK(ada.reports[t].counts == rs.reports[t].counts);
    }
    CHECK(losses(ada) == losses(rs));
}

TEST_CASE("random_sparse weights are exactly L/K when unclipped") {
    auto obj = quadratic_hetero({1.0, 1.0, 1.0, 1.0, 1.0}, {2, 2, 2, 2, 2});
    LayeredParams params = obj->make_params();
    params.fill(1.0);
    RunConfig cfg = base_config(Method::random_sparse, 1, 5);
    cfg.bandit.rho = 0.4;     // K = 2, L = 5 -> L/K = 2.5
    cfg.bandit.clip_c = 16.0; // no clipping
    LoopState state;
    state.bandit = BanditState(5);
    CounterRng rng(derive_seed(cfg.master_seed, 0, SeedPurpose::sample));
    state.draw = resample(state.bandit.probs, cfg.bandit, rng);
    random_sparse_step(params, *obj, state, cfg, 0);
    for (std::size_t l = 0; l < 5; ++l) {
        CHECK(ipw_weight(2, state.bandit.probs[l], cfg.bandit.clip_c) ==
              doctest::Approx(2.5).epsilon(1e-12));
    }
}

TEST_CASE("phase order reuses one noise seed per step") {
    // After the probe and the update, the noise regenerated from the step's
    // seed must reconstruct the exact displacement that was applied.
    auto obj = quadratic_hetero({0.8}, {32});
    LayeredParams before = obj->make_params();
    GaussianStream g(12);
    g.fill(before.flat());
    LayeredParams params = before;

    RunConfig cfg = base_config(Method::mezo, 1, 2024);
    const RunResult r = run(*obj, cfg, params);
    const std::uint64_t seed = derive_seed(cfg.master_seed, 0, SeedPurpose::noise);
    const std::vector<double> z = gaussian_noise(NoiseStream{seed}, 0, 32);
    const double eta = cfg.step_eta();
    const double scalar = r.reports[0].scalar_grad;
    for (std::size_t i = 0; i < 32; ++i) {
        const double predicted = before.flat()[i] - eta * scalar * z[i];
        CHECK(r.final_params.flat()[i] == doctest::Approx(predicted).epsilon(1e-12));
    }
}

TEST_CASE("exact line step: eta = 1/z^2 lands on the 1-d minimum") {
    // scalar = z on the quadratic, so theta1 = 1 - (1/z^2) z z = 0
    auto obj = quadratic_hetero({1.0}, {1});
    LayeredParams init = obj->make_params();
    init.flat()[0] = 1.0;
    RunConfig cfg = base_config(Method::mezo, 1, 606);
    const double z =
        NoiseStream{derive_seed(cfg.master_seed, 0, SeedPurpose::noise)}.layer_stream(0).at(0);
    cfg.eta = 1.0 / (z * z);
    const RunResult r = run(*obj, cfg, init);
    CHECK(std::abs(r.final_params.flat()[0]) <= 1e-12);
}

TEST_CASE("mean single-step displacement recovers the gradient") {
    // E[(theta0 - theta1) / eta] = grad L for quadratics (smoothing is exact)
    auto obj = quadratic_hetero({1.0, 2.0}, {5, 5});
    LayeredParams init = obj->make_params();
    init.fill(1.0);
    const LayeredParams grad = obj->oracle_grad(init);

    const std::size_t trials = 40000;
    std::vector<double> sum(init.total_dim(), 0.0), sum_sq(init.total_dim(), 0.0);
    RunConfig cfg = base_config(Method::mezo, 1, 0);
    cfg.eta = 1e-3;
    for (std::size_t s = 0; s < trials; ++s) {
        cfg.master_seed = s;
        const RunResult r = run(*obj, cfg, init);
        for (std::size_t j = 0; j < init.total_dim(); ++j) {
            const double x = (init.flat()[j] - r.final_params.flat()[j]) / cfg.eta;
            sum[j] += x;
            sum_sq[j] += x * x;
        }
    }
    for (std::size_t j = 0; j < init.total_dim(); ++j) {
        const double mean = sum[j] / trials;
        const double var = (sum_sq[j] - trials * mean * mean) / (trials - 1.0);
        const double se = std::sqrt(var / trials);
        CHECK(std::abs(mean - grad.flat()[j]) <= 4.0 * se);
    }
}

TEST_CASE("loss decreases in expectation on the quadratic") {
    auto obj = quadratic_hetero({1.0, 0.3, 2.0, 0.7}, {4, 4, 4, 4});
    LayeredParams init = obj->make_params();
    init.fill(1.0);
    for (Method m : {Method::mezo, Method::adalezo, Method::random_sparse}) {
        double delta_sum = 0.0;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            RunConfig cfg = base_config(m, 200, seed);
            cfg.eta = 2e-3;
            const RunResult r = run(*obj, cfg, init);
            REQUIRE(!r.aborted);
            delta_sum += r.reports.back().eval_loss - r.reports.front().eval_loss;
        }
        CHECK(delta_sum / 50.0 < 0.0);
    }
}

TEST_CASE("record_probs fills one probability per layer") {
    auto obj = quadratic_hetero({1.0, 1.0, 1.0}, {2, 2, 2});
    LayeredParams init = obj->make_params();
    init.fill(1.0);
    RunConfig cfg = base_config(Method::adalezo, 3, 8);
    cfg.record_probs = true;
    const RunResult r = run(*obj, cfg, init);
    for (const auto& rep : r.reports) {
        CHECK(rep.probs.size() == 3);
    }
    cfg.record_probs = false;
    const RunResult r2 = run(*obj, cfg, init);
    CHECK(r2.reports[0].probs.empty());
}

namespace {

// Loss blows up to infinity once the iterate leaves a ball, standing in for
// an objective that numerically overflows.
struct ExplodingObjective final : Objective {
    std::vector<std::size_t> sizes{8};
    double loss(const LayeredParams& p) const override {
        const double sq = p.squared_norm();
        return sq > 4.0 ? std::numeric_limits<double>::infinity() : sq;
    }
    const std::vector<std::size_t>& layer_sizes() const override { return sizes; }
};

} // namespace

TEST_CASE("diverging runs abort with a diagnostic instead of clamping") {
    ExplodingObjective obj;
    LayeredParams init(obj.sizes);
    init.fill(0.5); // squared norm 2, one big step away from the cliff
    RunConfig cfg = base_config(Method::mezo, 5000, 17);
    cfg.eta = 50.0;
    const RunResult r = run(obj, cfg, init);
    CHECK(r.aborted);
    CHECK(!r.abort_reason.empty());
    CHECK(r.reports.size() < cfg.steps);
}

TEST_CASE("inv-sqrt schedule divides eta by sqrt(T)") {
    RunConfig cfg;
    cfg.steps = 400;
    cfg.eta = 1.0;
    cfg.schedule = LrSchedule::inv_sqrt_total;
    CHECK(cfg.step_eta() == doctest::Approx(1.0 / 20.0));
    cfg.schedule = LrSchedule::constant;
    CHECK(cfg.step_eta() == 1.0);
}

TEST_CASE("timings are non-negative and populated") {
    auto obj = quadratic_hetero({1.0, 1.0}, {256, 256});
    LayeredParams init = obj->make_params();
    init.fill(0.5);
    const RunResult r = run(*obj, base_config(Method::adalezo, 10, 44), init);
    for (const auto& rep : r.reports) {
        CHECK(rep.t_perturb >= 0.0);
        CHECK(rep.t_forward >= 0.0);
        CHECK(rep.t_update >= 0.0);
        CHECK(rep.wall_clock_s >= 0.0);
    }
}
