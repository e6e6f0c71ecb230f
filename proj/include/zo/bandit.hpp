#pragma once

// Non-stationary bandit over layers: EMA reward tracking, temperature
// softmax mixed with uniform exploration, and multinomial sampling with
// replacement.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "zo/errors.hpp"
#include "zo/rng.hpp"

namespace zo {

struct BanditConfig {
    double rho = 0.2;    // sampling ratio, (0, 1]
    double tau = 0.6;    // softmax temperature, > 0
    double gamma = 0.1;  // uniform exploration mix, [0, 1]
    double alpha = 0.1;  // EMA factor, (0, 1]
    double clip_c = 4.0; // IPW clipping threshold, >= 1 (may be +inf)

    void validate() const {
        if (!(rho > 0.0 && rho <= 1.0)) throw domain_error("bandit: rho must be in (0,1]");
        if (!(tau > 0.0)) throw domain_error("bandit: tau must be > 0");
        if (!(gamma >= 0.0 && gamma <= 1.0)) throw domain_error("bandit: gamma must be in [0,1]");
        if (!(alpha > 0.0 && alpha <= 1.0)) throw domain_error("bandit: alpha must be in (0,1]");
        if (!(clip_c >= 1.0)) throw domain_error("bandit: clip_c must be >= 1");
    }
};

struct BanditState {
    std::vector<double> q_values;
    std::vector<double> probs;
    std::uint64_t step = 0;

    explicit BanditState(std::size_t layers = 0)
        : q_values(layers, 0.0), probs(layers, layers ? 1.0 / static_cast<double>(layers) : 0.0) {}
};

struct SampleDraw {
    std::size_t k_draws = 0;
    std::vector<std::uint32_t> counts; // multiplicity per layer, sums to k_draws
    std::vector<std::size_t> active;   // ascending indices with counts > 0
};

// K = max(1, floor(rho * L))
inline std::size_t draw_count(double rho, std::size_t layers) {
    const auto k = static_cast<std::size_t>(std::floor(rho * static_cast<double>(layers)));
    return std::max<std::size_t>(1, k);
}

// p = (1 - gamma) * softmax(q / tau) + gamma / L. The uniform term gives the
// exact floor p(l) >= gamma / L regardless of q.
inline std::vector<double> sampling_probs(std::span<const double> q, const BanditConfig& cfg) {
    if (q.empty()) {
        throw domain_error("sampling_probs: empty q");
    }
    if (!(cfg.tau > 0.0)) {
        throw domain_error("sampling_probs: tau must be > 0");
    }
    double max_logit = -std::numeric_limits<double>::infinity();
    for (double v : q) {
        if (!std::isfinite(v)) {
            throw numeric_error("sampling_probs: non-finite q value");
        }
        max_logit = std::max(max_logit, v / cfg.tau);
    }
    std::vector<double> p(q.size());
    double norm = 0.0;
    for (std::size_t l = 0; l < q.size(); ++l) {
        p[l] = std::exp(q[l] / cfg.tau - max_logit);
        norm += p[l];
    }
    const double uniform = 1.0 / static_cast<double>(q.size());
    for (double& v : p) {
        v = (1.0 - cfg.gamma) * (v / norm) + cfg.gamma * uniform;
    }
    return p;
}

// Q <- (1 - alpha) Q + alpha * reward on the active layers only.
inline void update_reward(BanditState& state, std::span<const std::size_t> active, double reward,
                          const BanditConfig& cfg) {
    if (!(reward >= 0.0)) {
        throw domain_error("update_reward: reward is a magnitude, must be >= 0");
    }
    for (std::size_t l : active) {
        double& q = state.q_values.at(l);
        q = (1.0 - cfg.alpha) * q + cfg.alpha * reward;
    }
}

// k independent categorical draws with replacement from p.
inline SampleDraw multinomial_draw(std::span<const double> p, std::size_t k, CounterRng& rng) {
    const std::size_t layers = p.size();
    if (layers == 0) {
        throw domain_error("multinomial_draw: empty distribution");
    }
    if (k < 1) {
        throw domain_error("multinomial_draw: k must be >= 1");
    }
    SampleDraw draw;
    draw.k_draws = k;
    draw.counts.assign(layers, 0);
    for (std::size_t j = 0; j < k; ++j) {
        const double u = rng.next_unit();
        double cum = 0.0;
        std::size_t pick = layers - 1;
        for (std::size_t l = 0; l < layers; ++l) {
            cum += p[l];
            if (u < cum) {
                pick = l;
                break;
            }
        }
        ++draw.counts[pick];
    }
    for (std::size_t l = 0; l < layers; ++l) {
        if (draw.counts[l] > 0) {
            draw.active.push_back(l);
        }
    }
    return draw;
}

inline SampleDraw resample(std::span<const double> p, const BanditConfig& cfg, CounterRng& rng) {
    return multinomial_draw(p, draw_count(cfg.rho, p.size()), rng);
}

} // namespace zo
