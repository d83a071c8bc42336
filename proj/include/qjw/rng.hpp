// rng.hpp — Counter-based random number generation (Philox4x32-10).
//
// Every draw is a pure function of (master_seed, stream_index, counter),
// so ensembles can be distributed over threads in any order and still
// reproduce bit-identically. Stream i is reserved for trajectory i.

#pragma once

#include <array>
#include <cstdint>

namespace qjw {

namespace detail {

inline constexpr uint32_t kPhiloxW32A = 0x9E3779B9u;
inline constexpr uint32_t kPhiloxW32B = 0xBB67AE85u;
inline constexpr uint32_t kPhiloxM4x32A = 0xD2511F53u;
inline constexpr uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void philox_round(std::array<uint32_t, 4>& ctr, const std::array<uint32_t, 2>& key) {
    const uint64_t p0 = static_cast<uint64_t>(kPhiloxM4x32A) * ctr[0];
    const uint64_t p1 = static_cast<uint64_t>(kPhiloxM4x32B) * ctr[2];
    const uint32_t lo0 = static_cast<uint32_t>(p0), hi0 = static_cast<uint32_t>(p0 >> 32);
    const uint32_t lo1 = static_cast<uint32_t>(p1), hi1 = static_cast<uint32_t>(p1 >> 32);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

/// One 128-bit Philox4x32-10 block.
inline std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr,
                                          std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW32A;
            key[1] += kPhiloxW32B;
        }
        philox_round(ctr, key);
    }
    return ctr;
}

}  // namespace detail

/// Stateless-by-construction uniform stream: the key is (master_seed),
/// the counter block carries (draw counter, stream index).
class RngStream {
public:
    RngStream() = default;
    RngStream(uint64_t master_seed, uint64_t stream_index)
        : seed_(master_seed), stream_(stream_index) {}

    uint64_t master_seed() const { return seed_; }
    uint64_t stream_index() const { return stream_; }
    uint64_t draws() const { return counter_; }

    /// Next 64 uniform bits.
    uint64_t next_u64() {
        const std::array<uint32_t, 4> ctr = {
            static_cast<uint32_t>(counter_), static_cast<uint32_t>(counter_ >> 32),
            static_cast<uint32_t>(stream_), static_cast<uint32_t>(stream_ >> 32)};
        const std::array<uint32_t, 2> key = {static_cast<uint32_t>(seed_),
                                             static_cast<uint32_t>(seed_ >> 32)};
        const auto out = detail::philox4x32(ctr, key);
        ++counter_;
        return (static_cast<uint64_t>(out[0]) << 32) | out[1];
    }

    /// Uniform double in [0, 1), 53 significant bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

private:
    uint64_t seed_ = 0;
    uint64_t stream_ = 0;
    uint64_t counter_ = 0;
};

}  // namespace qjw
