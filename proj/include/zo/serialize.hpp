#pragma once

// Parameter snapshot files: magic "ZOB1", layer count as little-endian
// uint32, the layer sizes as little-endian uint64, then the flat parameter
// values as little-endian IEEE-754 doubles.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "zo/errors.hpp"
#include "zo/params.hpp"

namespace zo {

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "snapshot i/o assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& os, const T& value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
}

} // namespace detail

inline void save_params(const std::string& path, const LayeredParams& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw std::runtime_error("save_params: cannot open " + path);
    }
    os.write("ZOB1", 4);
    detail::write_pod(os, static_cast<std::uint32_t>(params.layer_count()));
    for (std::size_t l = 0; l < params.layer_count(); ++l) {
        detail::write_pod(os, static_cast<std::uint64_t>(params.layer_size(l)));
    }
    const auto flat = params.flat();
    os.write(reinterpret_cast<const char*>(flat.data()),
             static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!os) {
        throw std::runtime_error("save_params: write failed for " + path);
    }
}

inline LayeredParams load_params(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw std::runtime_error("load_params: cannot open " + path);
    }
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "ZOB1", 4) != 0) {
        throw std::runtime_error("load_params: bad magic in " + path);
    }
    const auto layer_count = detail::read_pod<std::uint32_t>(is);
    if (layer_count == 0) {
        throw std::runtime_error("load_params: zero layers in " + path);
    }
    std::vector<std::size_t> sizes(layer_count);
    for (auto& s : sizes) {
        s = static_cast<std::size_t>(detail::read_pod<std::uint64_t>(is));
    }
    if (!is) {
        throw std::runtime_error("load_params: truncated header in " + path);
    }
    LayeredParams params(std::move(sizes));
    auto flat = params.flat();
    is.read(reinterpret_cast<char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!is) {
        throw std::runtime_error("load_params: truncated data in " + path);
    }
    return params;
}

} // namespace zo
