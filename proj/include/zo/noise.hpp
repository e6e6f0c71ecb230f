#pragma once

// Deterministic per-(seed, layer) Gaussian perturbation. Layer l draws from
// the stream seeded base_seed + l, so a perturbation can be re-applied or
// undone later by regenerating the identical noise instead of storing it.

#include <cstdint>
#include <span>
#include <vector>

#include "zo/params.hpp"
#include "zo/rng.hpp"

namespace zo {

struct NoiseStream {
    std::uint64_t base_seed = 0;

    GaussianStream layer_stream(std::size_t layer) const {
        return GaussianStream(base_seed + static_cast<std::uint64_t>(layer));
    }
};

// len i.i.d. standard normal draws for one layer. Deterministic in
// (base_seed, layer); distinct (seed, layer) pairs give independent streams.
inline std::vector<double> gaussian_noise(const NoiseStream& stream, std::size_t layer,
                                          std::size_t len) {
    std::vector<double> out(len);
    stream.layer_stream(layer).fill(out);
    return out;
}

// theta^(l) += scale * z^(l) for every l in active; other layers untouched.
// The noise is streamed straight into the parameter buffer, so no
// perturbation vector is ever materialized.
template <typename T>
void perturb_layers(BasicLayeredParams<T>& params, std::span<const std::size_t> active,
                    double scale, const NoiseStream& stream) {
    for (std::size_t l : active) {
        stream.layer_stream(l).add_scaled(params.layer(l), scale);
    }
}

} // namespace zo
