#include <doctest.h>

#include <cmath>
#include <vector>

#include "zo/estimator.hpp"

using namespace zo;

TEST_CASE("projected scalar arithmetic") {
    CHECK(projected_scalar(1.2, 1.0, 0.001).value == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(projected_scalar(0.7, 0.7, 0.5).value == 0.0);
    CHECK_THROWS_AS(projected_scalar(1.0, 1.0, 0.0), domain_error);
    CHECK_THROWS_AS(projected_scalar(std::numeric_limits<double>::infinity(), 0.0, 1e-3),
                    numeric_error);
    CHECK_THROWS_AS(projected_scalar(0.0, std::numeric_limits<double>::quiet_NaN(), 1e-3),
                    numeric_error);
}

TEST_CASE("quadratic identity: the scalar equals z for any mu") {
    // f = theta^2 / 2 at theta = 1: f(1 + mu z) - f(1 - mu z) = 2 mu z
    const double theta = 1.0;
    for (double z : {-1.7, 0.3, 2.4}) {
        for (double mu : {1e-1, 1e-3, 1e-6}) {
            const double lp = 0.5 * (theta + mu * z) * (theta + mu * z);
            const double lm = 0.5 * (theta - mu * z) * (theta - mu * z);
            CHECK(projected_scalar(lp, lm, mu).value == doctest::Approx(z).epsilon(1e-9));
        }
    }
}

TEST_CASE("ipw weight closed forms") {
    CHECK(ipw_weight(6, 0.05, 4.0) == doctest::Approx(1.0 / 0.3).epsilon(1e-12));
    CHECK(ipw_weight(6, 0.01, 4.0) == 4.0);
    CHECK(ipw_weight(3, 0.9, 1.0) <= 1.0);
    CHECK(ipw_weight(2, 0.4, std::numeric_limits<double>::infinity()) ==
          doctest::Approx(1.25).epsilon(1e-12));
    CHECK_THROWS_AS(ipw_weight(0, 0.5, 4.0), domain_error);
    CHECK_THROWS_AS(ipw_weight(2, 0.0, 4.0), domain_error);
}

namespace {

SparseGradSpec make_spec(std::vector<std::size_t> active, std::vector<std::uint32_t> counts,
                         std::vector<double> weights, double scalar, std::uint64_t seed) {
    SparseGradSpec spec;
    spec.active = std::move(active);
    spec.counts = std::move(counts);
    spec.weights = std::move(weights);
    spec.scalar = ScalarGrad{scalar, 0.0, 0.0, 1e-3};
    spec.noise_seed = seed;
    return spec;
}

} // namespace

TEST_CASE("zero scalar leaves parameters unchanged") {
    LayeredParams p = partition(std::vector<double>{1.0, 2.0, 3.0, 4.0}, {2, 2});
    const std::vector<double> before(p.flat().begin(), p.flat().end());
    const auto spec = make_spec({0, 1}, {1, 1}, {1.0, 1.0}, 0.0, 9);
    sparse_update(p, spec, 0.1, NoiseStream{9});
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(p.flat()[i] == before[i]);
    }
}

TEST_CASE("doubling the multiplicity doubles the update exactly") {
    const NoiseStream stream{21};
    LayeredParams once(std::vector<std::size_t>{16});
    LayeredParams twice(std::vector<std::size_t>{16});
    const double eta = 0.05, scalar = 1.3, w = 2.5;

    sparse_update(once, make_spec({0}, {1}, {w}, scalar, 21), eta, stream);
    sparse_update(twice, make_spec({0}, {2}, {w}, scalar, 21), eta, stream);
    for (std::size_t i = 0; i < 16; ++i) {
        CHECK(twice.flat()[i] == doctest::Approx(2.0 * once.flat()[i]).epsilon(1e-15));
    }
}

TEST_CASE("layers outside the active set are bit-identical") {
    LayeredParams p(std::vector<std::size_t>{8, 8, 8});
    p.fill(1.0);
    const auto spec = make_spec({1}, {0, 3, 0}, {0.0, 1.5, 0.0}, 0.7, 4);
    sparse_update(p, spec, 0.01, NoiseStream{4});
    for (double v : p.layer(0)) CHECK(v == 1.0);
    for (double v : p.layer(2)) CHECK(v == 1.0);
    bool moved = false;
    for (double v : p.layer(1)) moved = moved || (v != 1.0);
    CHECK(moved);
}

TEST_CASE("dense apply equals sparse update with all layers at unit weight") {
    const NoiseStream stream{33};
    LayeredParams dense(std::vector<std::size_t>{5, 7, 3});
    LayeredParams sparse(std::vector<std::size_t>{5, 7, 3});
    dense.fill(0.25);
    sparse.fill(0.25);
    const double eta = 0.02, scalar = -0.9;

    dense_estimate_apply(dense, ScalarGrad{scalar, 0, 0, 1e-3}, eta, stream);
    sparse_update(sparse, make_spec({0, 1, 2}, {1, 1, 1}, {1.0, 1.0, 1.0}, scalar, 33), eta,
                  stream);
    for (std::size_t i = 0; i < dense.total_dim(); ++i) {
        CHECK(dense.flat()[i] == sparse.flat()[i]); // bitwise
    }
}

TEST_CASE("eta = 0 never moves parameters") {
    LayeredParams p(std::vector<std::size_t>{4});
    p.fill(2.0);
    dense_estimate_apply(p, ScalarGrad{5.0, 0, 0, 1e-3}, 0.0, NoiseStream{8});
    for (double v : p.flat()) CHECK(v == 2.0);
}

TEST_CASE("one dense step on the 1-d quadratic lands where the hand formula says") {
    // f = theta^2 / 2 from theta0 = 1 with the seeded z: theta1 = 1 - eta z^2
    const std::uint64_t seed = 424242;
    const NoiseStream stream{seed};
    const double z = stream.layer_stream(0).at(0);
    const double mu = 1e-3, eta = 0.1;
    LayeredParams p(std::vector<std::size_t>{1});
    p.flat()[0] = 1.0;

    const double lp = 0.5 * (1.0 + mu * z) * (1.0 + mu * z);
    const double lm = 0.5 * (1.0 - mu * z) * (1.0 - mu * z);
    const ScalarGrad scalar = projected_scalar(lp, lm, mu);
    CHECK(scalar.value == doctest::Approx(z).epsilon(1e-12));

    dense_estimate_apply(p, scalar, eta, stream);
    CHECK(p.flat()[0] == doctest::Approx(1.0 - eta * z * z).epsilon(1e-12));
}

TEST_CASE("make_sparse_spec computes weights from the generating distribution") {
    SampleDraw draw;
    draw.k_draws = 4;
    draw.counts = {2, 0, 2};
    draw.active = {0, 2};
    const std::vector<double> probs{0.02, 0.18, 0.8};
    const auto spec = make_sparse_spec(draw, probs, 4.0, ScalarGrad{1.0, 0, 0, 1e-3}, 5);
    CHECK(spec.weights[0] == 4.0); // 1/(4*0.02) = 12.5, clipped
    CHECK(spec.weights[1] == 0.0);
    CHECK(spec.weights[2] == doctest::Approx(1.0 / 3.2).epsilon(1e-12));
    CHECK(spec.noise_seed == 5);
}
