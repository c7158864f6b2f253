#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace lobgeom {

struct RngSeed {
    std::uint64_t value = 1;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// xoshiro256** seeded through splitmix64. Fully specified here so that
// trajectories are bit-identical across platforms and standard libraries;
// std::uniform_int_distribution is deliberately avoided for the same reason.
class Xoshiro256 {
public:
    explicit Xoshiro256(RngSeed seed) {
        std::uint64_t sm = seed.value;
        for (auto& w : s_) w = detail::splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Unbiased integer in [0, bound) via Lemire's multiply-shift rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        using u128 = unsigned __int128;
        std::uint64_t x = next_u64();
        u128 m = static_cast<u128>(x) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0ULL - bound) % bound;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<u128>(x) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Marsaglia polar method.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, q;
        do {
            u = 2.0 * next_double() - 1.0;
            v = 2.0 * next_double() - 1.0;
            q = u * u + v * v;
        } while (q >= 1.0 || q == 0.0);
        const double f = std::sqrt(-2.0 * std::log(q) / q);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Independent child stream, for per-trial / per-stage seeding.
    RngSeed derive(std::uint64_t salt) const {
        std::uint64_t sm = s_[0] ^ (salt * 0x9e3779b97f4a7c15ULL + 0x243f6a8885a308d3ULL);
        return RngSeed{detail::splitmix64(sm)};
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Deterministic sub-seed derivation without instantiating a generator.
inline RngSeed derive_seed(RngSeed base, std::uint64_t salt) {
    std::uint64_t sm = base.value ^ (salt * 0xd6e8feb86659fd93ULL + 0x2545f4914f6cdd1dULL);
    const std::uint64_t a = detail::splitmix64(sm);
    return RngSeed{a};
}

}  // namespace lobgeom
