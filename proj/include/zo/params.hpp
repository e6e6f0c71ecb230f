#pragma once

// Layered parameter storage: one contiguous buffer partitioned into L layer
// blocks. Layer order is fixed for the lifetime of the object.

#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "zo/errors.hpp"

namespace zo {

template <typename T>
class BasicLayeredParams {
public:
    using value_type = T;

    BasicLayeredParams() = default;

    // Zero-initialized parameters with the given layer sizes.
    explicit BasicLayeredParams(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
        if (sizes_.empty()) {
            throw domain_error("LayeredParams: layer size list is empty");
        }
        offsets_.reserve(sizes_.size() + 1);
        offsets_.push_back(0);
        for (std::size_t s : sizes_) {
            if (s == 0) {
                throw domain_error("LayeredParams: layer sizes must be >= 1");
            }
            offsets_.push_back(offsets_.back() + s);
        }
        data_.assign(offsets_.back(), T{0});
    }

    std::size_t layer_count() const { return sizes_.size(); }
    std::size_t layer_size(std::size_t l) const { return sizes_.at(l); }
    const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
    std::size_t total_dim() const { return data_.size(); }

    std::span<T> layer(std::size_t l) {
        return {data_.data() + offsets_.at(l), sizes_[l]};
    }
    std::span<const T> layer(std::size_t l) const {
        return {data_.data() + offsets_.at(l), sizes_[l]};
    }

    std::span<T> flat() { return {data_.data(), data_.size()}; }
    std::span<const T> flat() const { return {data_.data(), data_.size()}; }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    bool same_shape(const BasicLayeredParams& other) const { return sizes_ == other.sizes_; }

    double squared_norm() const {
        double s = 0.0;
        for (T v : data_) s += static_cast<double>(v) * static_cast<double>(v);
        return s;
    }

    double layer_squared_norm(std::size_t l) const {
        double s = 0.0;
        for (T v : layer(l)) s += static_cast<double>(v) * static_cast<double>(v);
        return s;
    }

private:
    std::vector<T> data_;
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> offsets_;
};

// 64-bit storage everywhere by default; the 32-bit instantiation exists for
// memory-bound runs, while every statistical check runs in 64-bit.
using LayeredParams = BasicLayeredParams<double>;
using LayeredParams32 = BasicLayeredParams<float>;

// Splits a flat value sequence into layer blocks.
template <typename T>
BasicLayeredParams<T> partition(std::span<const T> flat, std::vector<std::size_t> sizes) {
    if (sizes.empty()) {
        throw domain_error("partition: layer size list is empty");
    }
    std::size_t total = 0;
    for (std::size_t s : sizes) {
        if (s == 0) {
            throw domain_error("partition: layer sizes must be >= 1");
        }
        total += s;
    }
    if (total != flat.size()) {
        throw dimension_error("partition: sum(sizes) = " + std::to_string(total) +
                              " but flat sequence has " + std::to_string(flat.size()) +
                              " values");
    }
    BasicLayeredParams<T> out(std::move(sizes));
    std::copy(flat.begin(), flat.end(), out.flat().begin());
    return out;
}

template <typename T>
BasicLayeredParams<T> partition(const std::vector<T>& flat, std::vector<std::size_t> sizes) {
    return partition(std::span<const T>(flat.data(), flat.size()), std::move(sizes));
}

} // namespace zo
