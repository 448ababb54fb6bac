#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace htlob {

using Rng = std::mt19937_64;

// FNV-1a hash of a substream name, so named streams are stable across builds.
constexpr std::uint64_t stream_key(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Independent generator for (seed, stream, index). Monte Carlo batches use the batch
// index, so results do not depend on how batches are scheduled over threads.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

inline Rng make_rng(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0) {
    return make_rng(seed, stream_key(stream), index);
}

// Uniform on the open interval (0, 1); safe to pass to log().
inline double uniform_open(Rng& rng) {
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    return (static_cast<double>(rng() >> 11) + 0.5) * scale;
}

}  // namespace htlob
