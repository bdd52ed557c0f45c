#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace sdft {

// Deterministic random stream. Distributions are implemented here rather than
// taken from <random> so that draw sequences are pinned down exactly; the
// mt19937_64 engine itself is fully specified by the standard.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    // Independent stream derived from a master seed and a consumer name.
    // Separate streams per consumer keep draw sequences stable when one
    // consumer is disabled (e.g. a loss term with zero weight).
    static Rng substream(uint64_t master_seed, std::string_view name) {
        return Rng(splitmix(master_seed ^ fnv1a(name)));
    }

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of randomness.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi) {
        const uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
        // Multiply-high map of a 64-bit draw onto the range. The bias is
        // below 2^-50 for any range used here.
        const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * range;
        return lo + static_cast<int>(wide >> 64);
    }

    // Standard normal via Box-Muller; always consumes exactly two draws.
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
    }

    void fill_normal(std::span<double> out) {
        for (double& v : out) v = normal();
    }

private:
    static constexpr double pi = 3.141592653589793238462643383279502884;

    static uint64_t splitmix(uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static uint64_t fnv1a(std::string_view s) {
        uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    std::mt19937_64 engine_;
};

}  // namespace sdft
