#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace cvqrng {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer (Stafford mix13 constants).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Maps (seed, stream) to a well-separated starting point so that streams
// derived from the same master seed never overlap in practice.
constexpr std::uint64_t derive_stream_base(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64((seed + kGoldenGamma) ^ mix64(stream * 0xD1342543DE82EF95ULL + kGoldenGamma));
}

// Stream ids carry a purpose tag in the top byte so per-shot streams cannot
// collide with auxiliary streams of the same master seed.
enum class StreamKind : std::uint64_t {
    shot_signal = 1,
    shot_measure = 2,
    aux = 3,
};

constexpr std::uint64_t stream_id(StreamKind kind, std::uint64_t index) noexcept {
    return (static_cast<std::uint64_t>(kind) << 56) | (index & 0x00FF'FFFF'FFFF'FFFFULL);
}

// Counter-based generator: output i is a pure function of (seed, stream, i).
// Recreating the stream for any shot index is O(1), which keeps simulation
// results independent of scheduling and worker count.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : base_(derive_stream_base(seed, stream)) {}

    std::uint64_t next_u64() noexcept { return mix64(base_ + (counter_++) * kGoldenGamma); }

    // Uniform in (0, 1), 53-bit resolution, never exactly 0 or 1.
    double next_unit() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Box-Muller pair; consumes exactly two uniforms, no rejection step.
    std::pair<double, double> next_normal_pair() noexcept {
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * kPi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    double next_normal() noexcept { return next_normal_pair().first; }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    static constexpr double kPi = 3.14159265358979323846264338327950288;

    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

}  // namespace cvqrng
