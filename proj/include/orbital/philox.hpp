#pragma once

#include <array>
#include <cstdint>

namespace orbital {

/// Generator recorded in every sample batch. Counter-based, so draw i of
/// stream s under seed k is a pure function of (k, s, i) and independent of
/// how work is scheduled across threads.
inline constexpr const char* kGeneratorId = "philox4x32-10";

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

}  // namespace detail

/// One 10-round philox4x32 block: 128-bit counter, 64-bit key, 128-bit output.
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(detail::kPhiloxM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(detail::kPhiloxM1) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += detail::kPhiloxW0;
        key[1] += detail::kPhiloxW1;
    }
    return ctr;
}

/// A deterministic stream of uniforms addressed by (seed, stream id, index).
/// Each draw consumes one philox block; 53 bits of it make the double.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint32_t stream, std::uint64_t index)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          index_(index),
          stream_(stream) {}

    /// Uniform double in [0, 1).
    double next_double() {
        const std::array<std::uint32_t, 4> ctr = {
            draw_++, static_cast<std::uint32_t>(index_),
            static_cast<std::uint32_t>(index_ >> 32), stream_};
        const auto block = philox4x32_10(ctr, key_);
        const std::uint64_t bits =
            (static_cast<std::uint64_t>(block[1]) << 32) | block[0];
        return static_cast<double>(bits >> 11) * 0x1.0p-53;
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t index_;
    std::uint32_t stream_;
    std::uint32_t draw_ = 0;
};

}  // namespace orbital
