#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "phtess/base.hpp"

namespace phtess {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256** seeded through SplitMix64. Replicate streams are derived from
// (master seed, replicate index), so results are independent of scheduling.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
    }

    static Rng replicate_stream(std::uint64_t master_seed, std::uint64_t replicate_index) {
        std::uint64_t sm = master_seed;
        std::uint64_t mixed = splitmix64_next(sm) ^ (0x9E3779B97F4A7C15ULL * (replicate_index + 1));
        return Rng(mixed);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ULL; }

    result_type operator()() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
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

    // uniform in (0, 1); never returns 0 so logs are safe
    double uniform01() {
        return (static_cast<double>(operator()() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // exponential inter-arrival sum; exact and fast at the means used here
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        double budget = mean;
        int count = 0;
        while (true) {
            budget += std::log(uniform01());
            if (budget < 0.0) break;
            ++count;
        }
        return count;
    }

    // index draw from cumulative weights (last entry ~ 1)
    int discrete(const std::vector<double>& cumulative) {
        double u = uniform01();
        int lo = 0, hi = static_cast<int>(cumulative.size()) - 1;
        while (lo < hi) {
            int mid = (lo + hi) / 2;
            if (cumulative[mid] < u) lo = mid + 1;
            else hi = mid;
        }
        return lo;
    }

    bool coin() { return (operator()() >> 63) != 0; }

private:
    std::uint64_t s_[4]{};
};

} // namespace phtess
