#pragma once

#include <cstdint>

#include "fransim/collapse.hpp"
#include "fransim/interferogram.hpp"
#include "fransim/optics.hpp"

namespace fransim {

struct ScanPlan {
    double duration_s = 21600.0;
    double bin_width_s = 100.0;    // duration / bin_width must be an integer >= 1
    double phase_start_rad = 0.0;  // applied to interferometer A
    double phase_rate_rad_per_s = 0.0;
    std::uint64_t seed = 1;
};

/// Fraction of a Gaussian wave packet (sigma = spread_sigma_ps, centered at
/// path_diff_ps) lying outside the symmetric window [-window_ps, +window_ps].
/// Multiplies the model visibility where the window suppresses correlations.
/// With zero spread this is a sharp indicator, 1/2 exactly on the boundary.
double smoothed_visibility_factor(double path_diff_ps, double window_ps,
                                  double spread_sigma_ps);

/// Simulate a full phase scan, one bin at a time.  Per bin: the drifted path
/// difference and scanned phase are evaluated at the bin center; the pair
/// timing is classified in the choice-device frames; the model's visibility
/// (smoothed by the two-photon spread where the model suppresses a timing
/// window) gives the coincidence probability; singles, true coincidences and
/// accidentals are drawn in that order from the bin's own random stream, so
/// results are identical at any thread count.  The recorded accidental
/// estimate is the one an experimenter would form, drawn_singles_a *
/// drawn_singles_b * tau_w / bin_width.
///
/// Throws ConfigInvalid for inconsistent plans or configs and propagates
/// AmbiguousOrdering when a zero-spread pair timing lands exactly on a frame
/// ordering boundary.
Interferogram simulate_scan(const ExperimentConfig& cfg, const CollapseModelSpec& model,
                            const ScanPlan& plan, int threads = 1);

}  // namespace fransim
