#pragma once

#include <cstdint>

namespace fransim {

/// Counter-derived xoshiro256** stream.  Each (seed, bin) pair yields an
/// independent stream, so bins can be drawn in any order or on any thread
/// and still produce identical values.
class BinStream {
public:
    BinStream(std::uint64_t seed, std::uint64_t bin_index);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double next_uniform();

    /// Poisson draw.  Sequential inversion below mean 30, the PTRS
    /// transformed-rejection sampler above; both consume only next_uniform()
    /// so results are reproducible bit for bit.
    std::uint64_t next_poisson(double mean);

private:
    std::uint64_t s_[4];
};

inline BinStream derive_bin_stream(std::uint64_t seed, std::uint64_t bin_index) {
    return BinStream(seed, bin_index);
}

}  // namespace fransim
