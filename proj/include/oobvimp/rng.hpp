#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

// Self-contained random machinery with bit-identical behaviour on every
// platform. <random> distributions are implementation-defined, so everything
// downstream of a seed goes through the generators in this header:
//
//   * SplitMix64 (Vigna) for seed derivation and per-index stream seeds,
//   * xoshiro256++ (Blackman & Vigna 2019) as the workhorse generator,
//   * explicit integer/real/normal sampling with fixed algorithms.

namespace oobvimp {

// n-th output of SplitMix64 started at `seed`. Used to derive independent,
// order-free stream seeds: seed_b = split_seed(master, b).
constexpr std::uint64_t split_seed(std::uint64_t seed, std::uint64_t n) {
    std::uint64_t z = seed + (n + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t seed) {
        // state filled from SplitMix64 as the authors recommend
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

// Unbiased integer in [0, n). Lemire's multiply-shift with rejection.
inline std::uint64_t uniform_below(Xoshiro256pp& g, std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(g.next()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
        const std::uint64_t t = (0 - n) % n;
        while (lo < t) {
            m = static_cast<unsigned __int128>(g.next()) * n;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_real(Xoshiro256pp& g) {
    return static_cast<double>(g.next() >> 11) * 0x1.0p-53;
}

// Uniform double strictly inside (0, 1); safe to take log of.
inline double uniform_open(Xoshiro256pp& g) {
    return (static_cast<double>(g.next() >> 12) + 0.5) * 0x1.0p-52;
}

// Exponential with the given rate, strictly positive.
inline double exponential(Xoshiro256pp& g, double rate) {
    return -std::log(uniform_open(g)) / rate;
}

// Standard normal via the Marsaglia polar method (no trig).
inline double standard_normal(Xoshiro256pp& g) {
    while (true) {
        const double u = 2.0 * uniform_real(g) - 1.0;
        const double v = 2.0 * uniform_real(g) - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
}

// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(Xoshiro256pp& g, std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_below(g, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace oobvimp
