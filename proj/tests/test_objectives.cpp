#include <doctest.h>

#include <cmath>
#include <vector>

#include "zo/objectives.hpp"
#include "zo/rng.hpp"

using namespace zo;

namespace {

// Central-difference gradient, the independent oracle every analytic
// gradient is checked against.
LayeredParams central_difference_grad(const Objective& obj, const LayeredParams& at,
                                      double h = 1e-5) {
    LayeredParams grad(at.layer_sizes());
    LayeredParams probe = at;
    auto flat = probe.flat();
    auto out = grad.flat();
    for (std::size_t j = 0; j < flat.size(); ++j) {
        const double orig = flat[j];
        flat[j] = orig + h;
        const double up = obj.loss(probe);
        flat[j] = orig - h;
        const double down = obj.loss(probe);
        flat[j] = orig;
        out[j] = (up - down) / (2.0 * h);
    }
    return grad;
}

double max_relative_error(const LayeredParams& a, const LayeredParams& b) {
    double worst = 0.0;
    const auto fa = a.flat(), fb = b.flat();
    for (std::size_t j = 0; j < fa.size(); ++j) {
        const double scale = std::max({std::abs(fa[j]), std::abs(fb[j]), 1e-8});
        worst = std::max(worst, std::abs(fa[j] - fb[j]) / scale);
    }
    return worst;
}

LayeredParams random_point(const Objective& obj, std::uint64_t seed, double scale = 1.0) {
    LayeredParams p = obj.make_params();
    GaussianStream g(seed);
    g.fill(p.flat());
    for (double& v : p.flat()) v *= scale;
    return p;
}

} // namespace

TEST_CASE("quadratic closed forms") {
    {
        auto obj = quadratic_hetero({1.0}, {1});
        LayeredParams p = obj->make_params();
        p.flat()[0] = 2.0;
        CHECK(obj->loss(p) == doctest::Approx(2.0));
        CHECK(obj->oracle_grad(p).flat()[0] == doctest::Approx(2.0));
    }
    {
        auto obj = quadratic_hetero({1.0, 4.0}, {1, 1});
        LayeredParams p = obj->make_params();
        p.fill(1.0);
        CHECK(obj->loss(p) == doctest::Approx(2.5));
        const LayeredParams g = obj->oracle_grad(p);
        CHECK(g.flat()[0] == doctest::Approx(1.0));
        CHECK(g.flat()[1] == doctest::Approx(4.0));
    }
    {
        auto obj = quadratic_hetero({3.0, 0.5}, {2, 3});
        const LayeredParams zero = obj->make_params();
        CHECK(obj->loss(zero) == 0.0);
        CHECK(obj->oracle_grad(zero).squared_norm() == 0.0);
    }
    CHECK_THROWS_AS(quadratic_hetero({-1.0}, {1}), domain_error);
    CHECK_THROWS_AS(quadratic_hetero({1.0, 1.0}, {1}), dimension_error);
}

TEST_CASE("logistic loss at zero is ln 2 and decreases along the planted ray") {
    auto obj = logistic_synthetic(64, {3, 5}, 11);
    const LayeredParams zero = obj->make_params();
    CHECK(obj->loss(zero) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    const LayeredParams dir = obj->planted_direction();
    double prev = obj->loss(zero);
    for (double scale : {1.0, 2.0, 4.0}) {
        LayeredParams p = dir;
        for (double& v : p.flat()) v *= scale;
        const double cur = obj->loss(p);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("logistic analytic gradient matches central differences") {
    auto obj = logistic_synthetic(48, {4, 4}, 3);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const LayeredParams p = random_point(*obj, 1000 + seed, 0.7);
        const double err = max_relative_error(obj->oracle_grad(p), central_difference_grad(*obj, p));
        CHECK(err <= 1e-6);
    }
}

TEST_CASE("quadratic analytic gradient matches central differences") {
    auto obj = quadratic_hetero({0.5, 2.0, 3.5}, {3, 4, 2});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const LayeredParams p = random_point(*obj, 3000 + seed);
        const double err = max_relative_error(obj->oracle_grad(p), central_difference_grad(*obj, p));
        CHECK(err <= 1e-5);
    }
}

TEST_CASE("mlp loss at zero params equals mean squared targets") {
    auto obj = mlp_tiny({3, 6, 2}, 5);
    CHECK(obj->layer_count() == 4); // W1, b1, W2, b2
    const LayeredParams zero = obj->make_params();
    CHECK(obj->loss(zero) == doctest::Approx(obj->mean_squared_targets()).epsilon(1e-12));
}

TEST_CASE("mlp backprop matches central differences") {
    auto obj = mlp_tiny({3, 5, 4, 1}, 9, 16);
    CHECK(obj->layer_count() == 6);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const LayeredParams p = random_point(*obj, 2000 + seed, 0.5);
        const double err = max_relative_error(obj->oracle_grad(p), central_difference_grad(*obj, p));
        CHECK(err <= 1e-5);
    }
}

TEST_CASE("mlp smoothness estimate is positive and usable") {
    auto obj = mlp_tiny({2, 4, 1}, 13);
    const OracleConfig cfg = obj->oracle_config();
    CHECK(cfg.smoothness_L_g > 0.0);
    CHECK(cfg.grad_bound_G > 0.0);
}

TEST_CASE("smoothed gradient of a quadratic matches the analytic gradient") {
    auto obj = quadratic_hetero({1.0, 2.5}, {4, 4});
    const LayeredParams at = random_point(*obj, 31);
    const LayeredParams exact = obj->oracle_grad(at);
    const SmoothedGrad sg = smoothed_grad_mc(*obj, at, 1e-3, 20000, 77);
    const auto mean = sg.mean.flat(), se = sg.se.flat(), ref = exact.flat();
    for (std::size_t j = 0; j < ref.size(); ++j) {
        CHECK(std::abs(mean[j] - ref[j]) <= 3.0 * se[j] + 1e-9);
    }
}

TEST_CASE("smoothing gap bound is linear in mu") {
    const double a = smoothing_gap_bound(1e-3, 100, 2.0);
    const double b = smoothing_gap_bound(5e-4, 100, 2.0);
    CHECK(a == doctest::Approx(2.0 * b));
}

TEST_CASE("smoothed gradient estimate is deterministic in its seed") {
    auto obj = quadratic_hetero({1.0}, {3});
    const LayeredParams at = random_point(*obj, 4);
    const SmoothedGrad a = smoothed_grad_mc(*obj, at, 1e-3, 1, 5);
    const SmoothedGrad b = smoothed_grad_mc(*obj, at, 1e-3, 1, 5);
    for (std::size_t j = 0; j < at.total_dim(); ++j) {
        CHECK(a.mean.flat()[j] == b.mean.flat()[j]);
    }
}

TEST_CASE("mlp smoothing gap stays within the lemma bound") {
    auto obj = mlp_tiny({2, 3, 1}, 21, 12);
    const LayeredParams at = random_point(*obj, 17, 0.4);
    const double mu = 1e-2;
    const double L_g = obj->oracle_config().smoothness_L_g;
    const SmoothedGrad sg = smoothed_grad_mc(*obj, at, mu, 60000, 23, L_g);
    const LayeredParams exact = obj->oracle_grad(at);
    double gap_sq = 0.0, se_sq = 0.0;
    const auto mean = sg.mean.flat(), se = sg.se.flat(), ref = exact.flat();
    for (std::size_t j = 0; j < ref.size(); ++j) {
        const double dj = mean[j] - ref[j];
        gap_sq += dj * dj;
        se_sq += se[j] * se[j];
    }
    CHECK(std::sqrt(gap_sq) <= sg.gap_bound + 3.0 * std::sqrt(se_sq));
}

TEST_CASE("objectives built from equal data seeds agree exactly") {
    auto a = mlp_tiny({2, 3, 1}, 77);
    auto b = mlp_tiny({2, 3, 1}, 77);
    auto c = mlp_tiny({2, 3, 1}, 78);
    const LayeredParams p = random_point(*a, 5, 0.3);
    CHECK(a->loss(p) == b->loss(p));
    CHECK(a->loss(p) != c->loss(p));
}

TEST_CASE("permuting two training samples leaves the loss unchanged") {
    std::vector<double> inputs(8 * 2), targets(8);
    GaussianStream g(41);
    g.fill(inputs);
    GaussianStream h(42);
    h.fill(targets);
    std::vector<double> inputs_swapped = inputs;
    std::vector<double> targets_swapped = targets;
    std::swap_ranges(inputs_swapped.begin() + 2, inputs_swapped.begin() + 4,
                     inputs_swapped.begin() + 10);
    std::swap(targets_swapped[1], targets_swapped[5]);

    const TinyMlp original({2, 3, 1}, inputs, targets);
    const TinyMlp permuted({2, 3, 1}, inputs_swapped, targets_swapped);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const LayeredParams p = random_point(original, 6000 + seed, 0.4);
        // equal up to summation order
        CHECK(original.loss(p) == doctest::Approx(permuted.loss(p)).epsilon(1e-14));
    }
}

TEST_CASE("constant objective ignores parameters") {
    auto obj = constant_cost({8, 8}, 10);
    LayeredParams p = obj->make_params();
    const double l0 = obj->loss(p);
    p.fill(123.0);
    CHECK(obj->loss(p) == l0);
}
