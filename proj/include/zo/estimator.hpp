#pragma once

// Zeroth-order gradient machinery: the two-point projected scalar, clipped
// inverse-probability weights, and the count-aware sparse parameter update,
// plus the dense update used by the full-perturbation baseline.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "zo/bandit.hpp"
#include "zo/errors.hpp"
#include "zo/noise.hpp"
#include "zo/params.hpp"

namespace zo {

struct ScalarGrad {
    double value = 0.0;
    double loss_plus = 0.0;
    double loss_minus = 0.0;
    double mu = 0.0;
};

// (loss_plus - loss_minus) / (2 mu). A non-finite loss means the run has
// diverged; callers abort rather than clamp.
inline ScalarGrad projected_scalar(double loss_plus, double loss_minus, double mu) {
    if (!(mu > 0.0)) {
        throw domain_error("projected_scalar: mu must be > 0");
    }
    if (!std::isfinite(loss_plus) || !std::isfinite(loss_minus)) {
        throw numeric_error("projected_scalar: non-finite loss (diverged run)");
    }
    return {(loss_plus - loss_minus) / (2.0 * mu), loss_plus, loss_minus, mu};
}

// w = min(1 / (k * p_l), clip_c). clip_c = +inf gives the unclipped weight.
inline double ipw_weight(std::size_t k, double p_l, double clip_c) {
    if (k < 1) {
        throw domain_error("ipw_weight: k must be >= 1");
    }
    if (!(p_l > 0.0 && p_l <= 1.0)) {
        throw domain_error("ipw_weight: p_l must be in (0,1]");
    }
    if (!(clip_c > 0.0)) {
        throw domain_error("ipw_weight: clip threshold must be > 0");
    }
    return std::min(1.0 / (static_cast<double>(k) * p_l), clip_c);
}

struct SparseGradSpec {
    std::vector<std::size_t> active;
    std::vector<std::uint32_t> counts;  // length L
    std::vector<double> weights;        // length L; w_l for active layers
    ScalarGrad scalar;
    std::uint64_t noise_seed = 0;
};

// Assembles the per-layer weights for a draw from the probabilities that
// produced it.
inline SparseGradSpec make_sparse_spec(const SampleDraw& draw, std::span<const double> probs,
                                       double clip_c, const ScalarGrad& scalar,
                                       std::uint64_t noise_seed) {
    SparseGradSpec spec;
    spec.active = draw.active;
    spec.counts = draw.counts;
    spec.weights.assign(probs.size(), 0.0);
    for (std::size_t l : draw.active) {
        spec.weights[l] = ipw_weight(draw.k_draws, probs[l], clip_c);
    }
    spec.scalar = scalar;
    spec.noise_seed = noise_seed;
    return spec;
}

// theta^(l) -= eta * g_scalar * w_l * n_l * z^(l) on active layers, with
// z^(l) regenerated from the same stream the perturbation used.
inline void sparse_update(LayeredParams& params, const SparseGradSpec& spec, double eta,
                          const NoiseStream& stream) {
    for (std::size_t l : spec.active) {
        const double coeff = -eta * spec.scalar.value * spec.weights[l] *
                             static_cast<double>(spec.counts[l]);
        stream.layer_stream(l).add_scaled(params.layer(l), coeff);
    }
}

// Dense baseline update: theta^(l) -= eta * g_scalar * z^(l) on every layer.
inline void dense_estimate_apply(LayeredParams& params, const ScalarGrad& scalar, double eta,
                                 const NoiseStream& stream) {
    const double coeff = -eta * scalar.value;
    for (std::size_t l = 0; l < params.layer_count(); ++l) {
        stream.layer_stream(l).add_scaled(params.layer(l), coeff);
    }
}

} // namespace zo
