#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fransim {

struct InterferogramBin {
    std::uint64_t bin_index = 0;
    double elapsed_s = 0.0;        // bin start, seconds from scan start
    double phase_rad = 0.0;        // scanned phase at bin center
    double path_diff_ps = 0.0;     // differential arrival delay at bin center
    std::uint64_t coincidences = 0;
    double accidental_est = 0.0;   // expected accidentals in this bin
    std::uint64_t singles_a = 0;
    std::uint64_t singles_b = 0;

    bool operator==(const InterferogramBin&) const = default;
};

struct Interferogram {
    std::vector<InterferogramBin> bins;

    bool operator==(const Interferogram&) const = default;
};

/// Column order, formats, and header are pinned; equal inputs serialize to
/// byte-identical text.
void write_interferogram_csv(std::ostream& out, const Interferogram& gram);
void write_interferogram_csv(const std::string& path, const Interferogram& gram);

Interferogram read_interferogram_csv(std::istream& in, const std::string& origin = "<stream>");
Interferogram read_interferogram_csv(const std::string& path);

}  // namespace fransim
