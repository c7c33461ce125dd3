#pragma once

#include <cstdint>

namespace ballbandit {

// SplitMix64, used for seeding and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t x) {
    std::uint64_t s = x;
    return splitmix64(s);
}

namespace detail {
// 256-layer ziggurat tables for the standard normal.
struct ZigguratTables {
    double x[257];
    double f[257];
    std::uint64_t cmp[256];
};
const ZigguratTables& ziggurat_tables();
}  // namespace detail

// Seedable counter-style PRNG (PCG64 XSL-RR with selectable stream).
// Identical (seed, stream) pairs reproduce bit-identical sequences; sources
// created with distinct stream ids give statistically independent streams, so
// every Monte Carlo replication, estimator instance and policy owns a child.
class RandomSource {
  public:
    RandomSource() : RandomSource(0, 0) {}

    RandomSource(std::uint64_t seed, std::uint64_t stream)
        : zig_(&detail::ziggurat_tables()), seed_(seed), stream_(stream) {
        std::uint64_t s = seed ^ 0x853C49E6748FEA9BULL;
        const std::uint64_t s_hi = splitmix64(s), s_lo = splitmix64(s);
        std::uint64_t q = stream ^ 0xDA3E39CB94B95BDBULL;
        const std::uint64_t q_hi = splitmix64(q), q_lo = splitmix64(q);
        inc_ = ((((static_cast<uint128>(q_hi) << 64) | q_lo)) << 1) | 1;
        state_ = 0;
        next_u64();
        state_ += (static_cast<uint128>(s_hi) << 64) | s_lo;
        next_u64();
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    // Derived source for an independent sub-stream (replication, estimator
    // instance, ...). Deterministic in (seed, stream, key).
    RandomSource child(std::uint64_t key) const {
        return RandomSource(seed_, mix64(stream_ ^ mix64(key + 0x9E3779B97F4A7C15ULL)));
    }

    std::uint64_t next_u64() {
        state_ = state_ * kMult + inc_;
        const std::uint64_t hi = static_cast<std::uint64_t>(state_ >> 64);
        const std::uint64_t lo = static_cast<std::uint64_t>(state_);
        const unsigned rot = static_cast<unsigned>(state_ >> 122);
        const std::uint64_t x = hi ^ lo;
        return (x >> rot) | (x << ((-rot) & 63u));
    }

    // Uniform double in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform double in (0, 1]; safe as a log() argument.
    double uniform01_open0() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    // Unbiased integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t x = next_u64();
            if (x >= threshold) return x % n;
        }
    }

    // Standard normal via the ziggurat.
    double normal() {
        for (;;) {
            const std::uint64_t bits = next_u64();
            const int idx = static_cast<int>(bits & 0xFF);
            const std::int64_t mant = static_cast<std::int64_t>(bits >> 11) - (1LL << 52);
            const std::uint64_t amant = static_cast<std::uint64_t>(mant < 0 ? -mant : mant);
            const double u = static_cast<double>(mant) * 0x1.0p-52;
            const double x = u * zig_->x[idx];
            if (amant < zig_->cmp[idx]) return x;
            if (idx == 0) return normal_tail(u < 0);
            if (wedge_accept(idx, x)) return x;
        }
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

  private:
    using uint128 = unsigned __int128;
    static constexpr uint128 kMult =
        (static_cast<uint128>(0x2360ED051FC65DA4ULL) << 64) | 0x4385DF649FCCF645ULL;

    double normal_tail(bool negative);
    bool wedge_accept(int idx, double x);

    const detail::ZigguratTables* zig_;
    uint128 state_;
    uint128 inc_;
    std::uint64_t seed_;
    std::uint64_t stream_;
};

}  // namespace ballbandit
