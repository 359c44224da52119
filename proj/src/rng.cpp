#include "fransim/rng.hpp"

#include <cmath>

#include "fransim/errors.hpp"

namespace fransim {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

BinStream::BinStream(std::uint64_t seed, std::uint64_t bin_index) {
    // Mix the bin index into the seeding chain so neighbouring bins get
    // unrelated states.
    std::uint64_t x = seed ^ (0xd1342543de82ef95ULL * (bin_index + 1));
    for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t BinStream::next_u64() {
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

double BinStream::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t BinStream::next_poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean)) throw Error("poisson mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    if (mean < 30.0) {
        // Sequential inversion: walk the CDF until it passes u.
        const double l = std::exp(-mean);
        double p = l, f = l;
        const double u = next_uniform();
        std::uint64_t k = 0;
        while (u > f) {
            ++k;
            p *= mean / static_cast<double>(k);
            f += p;
            if (k > 1000000) throw Error("poisson inversion failed to converge");
        }
        return k;
    }
    // Hormann's PTRS transformed-rejection sampler.
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = next_uniform() - 0.5;
        const double v = next_uniform();
        const double us = 0.5 - std::fabs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        const double log_accept = std::log(v * inv_alpha / (a / (us * us) + b));
        const double log_pmf = k * std::log(mean) - mean - std::lgamma(k + 1.0);
        if (log_accept <= log_pmf) return static_cast<std::uint64_t>(k);
    }
}

}  // namespace fransim
