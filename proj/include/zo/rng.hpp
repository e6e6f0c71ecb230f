#pragma once

// Counter-based random number generation (Philox4x32-10) with Box-Muller
// normals. Every value is a pure function of (seed, element index), so noise
// vectors can be regenerated on demand instead of stored, and any element can
// be accessed in O(1) without advancing a shared state.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>

namespace zo {

namespace detail {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

struct Philox4x32Block {
    std::uint32_t v[4];
};

// Philox4x32-10 (Salmon et al.): 10 rounds over a 128-bit counter with a
// 64-bit key. Matches the Random123 reference test vectors.
inline Philox4x32Block philox4x32(std::uint64_t counter, std::uint64_t key) {
    std::uint32_t c0 = static_cast<std::uint32_t>(counter);
    std::uint32_t c1 = static_cast<std::uint32_t>(counter >> 32);
    std::uint32_t c2 = 0;
    std::uint32_t c3 = 0;
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c0;
        const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c2;
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        const std::uint32_t n0 = hi1 ^ c1 ^ k0;
        const std::uint32_t n1 = lo1;
        const std::uint32_t n2 = hi0 ^ c3 ^ k1;
        const std::uint32_t n3 = lo0;
        c0 = n0;
        c1 = n1;
        c2 = n2;
        c3 = n3;
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return {{c0, c1, c2, c3}};
}

// Full-width variant used by the Random123 known-answer tests.
inline Philox4x32Block philox4x32_raw(const std::array<std::uint32_t, 4>& ctr,
                                      const std::array<std::uint32_t, 2>& key) {
    std::uint32_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
    std::uint32_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c0;
        const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c2;
        const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
        const std::uint32_t n1 = static_cast<std::uint32_t>(p1);
        const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
        const std::uint32_t n3 = static_cast<std::uint32_t>(p0);
        c0 = n0;
        c1 = n1;
        c2 = n2;
        c3 = n3;
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return {{c0, c1, c2, c3}};
}

inline std::uint64_t join64(std::uint32_t lo, std::uint32_t hi) {
    return static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
}

// [0, 1): top 53 bits of a 64-bit word.
inline double unit_from_bits(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// (0, 1]: never zero, so it is safe under log().
inline double unit_open_from_bits(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

} // namespace detail

// SplitMix64 finalizer; a fixed 64-bit mixing function.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Disjoint purposes for seeds derived from one master seed. Keeps the
// perturbation noise, the bandit's multinomial draws, and synthetic data
// generation on unrelated streams even though layer seeds are formed by
// small additive offsets.
enum class SeedPurpose : std::uint64_t {
    noise = 0x714AC2C30FA7BB0Bull,
    sample = 0x9B30A2E44C1D8E63ull,
    data = 0xC6FD5F3B2A91D0F5ull,
    trial = 0x3D81AB1C67E0249Dull,
};

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, SeedPurpose purpose) {
    return mix64(mix64(master ^ static_cast<std::uint64_t>(purpose)) + index);
}

// One infinite stream of standard normals, fully determined by its seed.
// Element i is addressable directly: the Box-Muller pair (2b, 2b+1) comes
// from Philox block b, and both outputs of each pair are used.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    double at(std::uint64_t i) const {
        double z0, z1;
        pair_at(i >> 1, z0, z1);
        return (i & 1u) ? z1 : z0;
    }

    // values[i] = at(start + i). Walks whole Box-Muller pairs, so filling a
    // layer costs one Philox block per two elements. Generation is always
    // 64-bit; a float target just narrows on store.
    template <typename T = double>
    void fill(std::span<T> values, std::uint64_t start = 0) const {
        std::uint64_t i = start;
        std::size_t w = 0;
        double z0, z1;
        if ((i & 1u) && w < values.size()) {
            values[w++] = static_cast<T>(at(i++));
        }
        while (w + 1 < values.size()) {
            pair_at(i >> 1, z0, z1);
            values[w] = static_cast<T>(z0);
            values[w + 1] = static_cast<T>(z1);
            w += 2;
            i += 2;
        }
        if (w < values.size()) {
            values[w] = static_cast<T>(at(i));
        }
    }

    template <typename T>
    void fill(std::vector<T>& values, std::uint64_t start = 0) const {
        fill(std::span<T>(values.data(), values.size()), start);
    }

    // target[i] += scale * at(start + i), without materializing the noise.
    template <typename T = double>
    void add_scaled(std::span<T> target, double scale, std::uint64_t start = 0) const {
        std::uint64_t i = start;
        std::size_t w = 0;
        double z0, z1;
        if ((i & 1u) && w < target.size()) {
            target[w] = static_cast<T>(target[w] + scale * at(i++));
            ++w;
        }
        while (w + 1 < target.size()) {
            pair_at(i >> 1, z0, z1);
            target[w] = static_cast<T>(target[w] + scale * z0);
            target[w + 1] = static_cast<T>(target[w + 1] + scale * z1);
            w += 2;
            i += 2;
        }
        if (w < target.size()) {
            target[w] = static_cast<T>(target[w] + scale * at(i));
        }
    }

    template <typename T>
    void add_scaled(std::vector<T>& target, double scale, std::uint64_t start = 0) const {
        add_scaled(std::span<T>(target.data(), target.size()), scale, start);
    }

private:
    void pair_at(std::uint64_t block, double& z0, double& z1) const {
        const auto r = detail::philox4x32(block, seed_);
        const double u1 = detail::unit_open_from_bits(detail::join64(r.v[0], r.v[1]));
        const double u2 = detail::unit_from_bits(detail::join64(r.v[2], r.v[3]));
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = detail::kTwoPi * u2;
        z0 = radius * std::cos(angle);
        z1 = radius * std::sin(angle);
    }

    std::uint64_t seed_;
};

// Sequential convenience view over a counter stream: uniform and normal
// draws advance an element index, so the whole sequence is reproducible
// from (seed, starting index).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed), index_(0) {}

    // Uniform on [0, 1).
    double next_unit() {
        const std::uint64_t i = index_++;
        const auto r = detail::philox4x32(i, seed_);
        return detail::unit_from_bits(detail::join64(r.v[0], r.v[1]));
    }

    double next_normal() { return normals_.at(index_++); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t index() const { return index_; }

private:
    std::uint64_t seed_;
    std::uint64_t index_;
    GaussianStream normals_{seed_ ^ 0x5851F42D4C957F2Dull};
};

} // namespace zo
