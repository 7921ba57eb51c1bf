#pragma once

#include <cstdint>
#include <random>

namespace cokrig {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Independent sub-seed for `stream` derived from a master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline std::mt19937_64 make_engine(std::uint64_t seed) { return std::mt19937_64(splitmix64(seed)); }

} // namespace cokrig
