#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fransim/interferogram.hpp"
#include "fransim/vec3.hpp"

namespace fransim {

struct FitResult {
    double visibility = 0.0;     // amplitude / baseline, >= 0
    double amplitude = 0.0;      // counts per bin
    double baseline = 0.0;       // counts per bin, > 0
    double phase_offset_rad = 0.0;
    double sigma_visibility = 0.0;
    double sigma_amplitude = 0.0;
    double sigma_baseline = 0.0;
    double sigma_phase_offset = 0.0;
    bool bell_threshold_exceeded = false;  // visibility > 1/sqrt(2)
};

/// Weighted least-squares fit of accidental-subtracted counts to
/// B + A cos(phase + phase_offset).  Weights are Poisson, taken from a
/// first-pass model mean rather than the raw counts so low-count bins do
/// not bias the fit.  `accidental_per_bin` overrides the per-bin
/// accidental_est column when given.
///
/// Throws FitDegenerate for fewer than 8 bins, a phase span below one
/// fringe period, a rank-deficient system, or a non-positive baseline.
FitResult fit_interferogram(const Interferogram& data,
                            std::optional<double> accidental_per_bin = std::nullopt);

struct VisibilityWindow {
    double center_ps = 0.0;
    double visibility = 0.0;
    double sigma_visibility = 0.0;
    bool degenerate = false;  // window skipped, visibility fields meaningless
    std::optional<double> dip_significance;  // (V_outside - V_inside) / combined sigma
};

struct WindowedVisibilityResult {
    std::vector<VisibilityWindow> windows;
    std::optional<double> max_dip_significance;
    std::optional<double> best_center_ps;  // center of the most significant dip
};

/// Sliding-window visibility across the path-difference axis.  Each window
/// fits the bins inside [center-width/2, center+width/2] and compares
/// against a fit of everything outside.  Degenerate windows are kept in the
/// output but flagged.
WindowedVisibilityResult windowed_visibility(const Interferogram& data,
                                             double window_width_ps, double step_ps);

struct BoundResult {
    double distance_m = 0.0;
    double delay_s = 0.0;
    double v_min_m_per_s = 0.0;  // distance / delay
    double ratio_to_c = 0.0;
    std::string frame_label;
};

BoundResult speed_bound(double distance_m, double delay_s,
                        const std::string& frame_label = "lab");

/// Cosmic-background dipole model for the lab velocity, en route to the
/// preferred-frame bound.
struct CbrSpec {
    double dipole_speed_m_per_s = 371000.0;
    double dipole_ra_rad = 167.94 * 3.14159265358979323846 / 180.0;
    double dipole_dec_rad = -6.94 * 3.14159265358979323846 / 180.0;
    bool include_orbital = false;
    double orbital_speed_m_per_s = 29780.0;
    int day_samples = 1440;
};

constexpr double kSiderealDaySeconds = 86164.0905;

/// Lab velocity in the dipole rest frame as a function of elapsed time,
/// expressed in local east/north/up coordinates: the fixed-in-space dipole
/// direction sweeps with the hour angle while the Earth-rotation surface
/// velocity stays due east.  With include_orbital the orbital speed is
/// added along the dipole direction as a conservative envelope (its true
/// direction sweeps the ecliptic over a year).
std::function<Vec3(double)> cbr_lab_velocity_model(double lab_latitude_rad,
                                                   const CbrSpec& spec);

/// Worst-case frame delay over one sidereal day: the maximum of
/// gamma * (|v(t) . baseline| / c^2 + timing_uncertainty) across uniformly
/// sampled instants.  Throws FrameSuperluminal if any sampled |v| >= c.
double cbr_worst_case_delay(const Vec3& baseline_m,
                            const std::function<Vec3(double)>& lab_velocity,
                            double timing_uncertainty_s, int day_samples);

}  // namespace fransim
