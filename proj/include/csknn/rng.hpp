#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace csknn {

// splitmix64 step; used to decorrelate seeds and derive substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derive an independent stream seed from (base, stream id).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t s = base ^ (stream * 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

// Seeded generator. All distributions are hand-rolled on top of the
// mt19937_64 bit stream, so output is identical for identical seeds on
// any conforming standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(scramble(seed)) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform on [0, 1) with 53 bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // inclusive range, unbiased via rejection.
    std::uint64_t uniform_index(std::uint64_t n) {
        // returns value in [0, n)
        const std::uint64_t limit = n * (UINT64_MAX / n);
        std::uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % n;
    }

    // standard normal, Box-Muller with cached spare.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double two_pi = 6.283185307179586476925286766559;
        spare_ = mag * std::sin(two_pi * u2);
        has_spare_ = true;
        return mag * std::cos(two_pi * u2);
    }

private:
    static std::uint64_t scramble(std::uint64_t seed) {
        std::uint64_t s = seed;
        return splitmix64(s);
    }

    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace csknn
