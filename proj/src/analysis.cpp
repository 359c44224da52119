#include "fransim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fransim/errors.hpp"
#include "fransim/kinematics.hpp"

namespace fransim {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

struct Sym3 {
    // symmetric 3x3, row-major upper triangle
    double m00 = 0, m01 = 0, m02 = 0, m11 = 0, m12 = 0, m22 = 0;
};

struct Solved {
    double theta[3];
    double cov[3][3];
};

/// Solve M theta = b and invert M; M must be well conditioned relative to
/// its largest entry or the fit is rank-deficient.
Solved solve_sym3(const Sym3& m, const double b[3]) {
    const double a[3][3] = {{m.m00, m.m01, m.m02}, {m.m01, m.m11, m.m12}, {m.m02, m.m12, m.m22}};
    const double c00 = a[1][1] * a[2][2] - a[1][2] * a[2][1];
    const double c01 = a[1][2] * a[2][0] - a[1][0] * a[2][2];
    const double c02 = a[1][0] * a[2][1] - a[1][1] * a[2][0];
    const double det = a[0][0] * c00 + a[0][1] * c01 + a[0][2] * c02;
    double scale = 0.0;
    for (const auto& row : a)
        for (double v : row) scale = std::max(scale, std::fabs(v));
    if (scale <= 0.0 || std::fabs(det) <= 1e-12 * scale * scale * scale)
        throw FitDegenerate("normal equations are rank-deficient");
    const double inv[3][3] = {
        {c00 / det, (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det,
         (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det},
        {c01 / det, (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det,
         (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det},
        {c02 / det, (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det,
         (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det}};
    Solved s{};
    for (int i = 0; i < 3; ++i) {
        s.theta[i] = inv[i][0] * b[0] + inv[i][1] * b[1] + inv[i][2] * b[2];
        for (int j = 0; j < 3; ++j) s.cov[i][j] = inv[i][j];
    }
    return s;
}

double quad_form(const double cov[3][3], const double g[3]) {
    double q = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) q += g[i] * cov[i][j] * g[j];
    return std::max(q, 0.0);
}

FitResult fit_bins(const std::vector<const InterferogramBin*>& bins,
                   std::optional<double> accidental_per_bin) {
    if (bins.size() < 8) throw FitDegenerate("need at least 8 bins");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto* b : bins) {
        lo = std::min(lo, b->phase_rad);
        hi = std::max(hi, b->phase_rad);
    }
    if (hi - lo < kTwoPi * (1.0 - 1e-9))
        throw FitDegenerate("phase span below one fringe period");

    const auto accidental = [&](const InterferogramBin& b) {
        return accidental_per_bin ? *accidental_per_bin : b.accidental_est;
    };

    // Pass 1: unit weights seed the model mean; pass 2: Poisson weights
    // 1 / Var(counts) with Var taken from the pass-1 model plus accidentals.
    Solved fit{};
    for (int pass = 0; pass < 2; ++pass) {
        Sym3 m;
        double rhs[3] = {0, 0, 0};
        for (const auto* bin : bins) {
            const double acc = accidental(*bin);
            const double y = static_cast<double>(bin->coincidences) - acc;
            const double c = std::cos(bin->phase_rad);
            const double s = std::sin(bin->phase_rad);
            double w = 1.0;
            if (pass == 1) {
                const double mean =
                    fit.theta[0] + fit.theta[1] * c + fit.theta[2] * s + acc;
                w = 1.0 / std::max(mean, 1.0);
            }
            m.m00 += w;
            m.m01 += w * c;
            m.m02 += w * s;
            m.m11 += w * c * c;
            m.m12 += w * c * s;
            m.m22 += w * s * s;
            rhs[0] += w * y;
            rhs[1] += w * y * c;
            rhs[2] += w * y * s;
        }
        fit = solve_sym3(m, rhs);
    }

    const double base = fit.theta[0], cc = fit.theta[1], ss = fit.theta[2];
    if (base <= 0.0) throw FitDegenerate("fitted baseline is not positive");
    const double amp = std::hypot(cc, ss);

    FitResult r;
    r.baseline = base;
    r.amplitude = amp;
    r.phase_offset_rad = std::atan2(-ss, cc);
    r.visibility = amp / base;
    r.sigma_baseline = std::sqrt(fit.cov[0][0]);
    if (amp > 0.0) {
        const double ga[3] = {0.0, cc / amp, ss / amp};
        const double gp[3] = {0.0, ss / (amp * amp), -cc / (amp * amp)};
        const double gv[3] = {-amp / (base * base), cc / (amp * base), ss / (amp * base)};
        r.sigma_amplitude = std::sqrt(quad_form(fit.cov, ga));
        r.sigma_phase_offset = std::sqrt(quad_form(fit.cov, gp));
        r.sigma_visibility = std::sqrt(quad_form(fit.cov, gv));
    } else {
        // Amplitude exactly zero: direction is undefined, use the mean
        // component variance as the scale.
        const double var = 0.5 * (fit.cov[1][1] + fit.cov[2][2]);
        r.sigma_amplitude = std::sqrt(var);
        r.sigma_phase_offset = 0.0;
        r.sigma_visibility = std::sqrt(var) / base;
    }
    r.bell_threshold_exceeded = r.visibility > 1.0 / std::sqrt(2.0);
    return r;
}

}  // namespace

FitResult fit_interferogram(const Interferogram& data,
                            std::optional<double> accidental_per_bin) {
    std::vector<const InterferogramBin*> bins;
    bins.reserve(data.bins.size());
    for (const auto& b : data.bins) bins.push_back(&b);
    return fit_bins(bins, accidental_per_bin);
}

WindowedVisibilityResult windowed_visibility(const Interferogram& data,
                                             double window_width_ps, double step_ps) {
    if (window_width_ps <= 0.0 || step_ps <= 0.0)
        throw Error("window width and step must be positive");
    if (data.bins.empty()) throw FitDegenerate("no bins");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& b : data.bins) {
        lo = std::min(lo, b.path_diff_ps);
        hi = std::max(hi, b.path_diff_ps);
    }
    const double span = hi - lo;
    if (span < window_width_ps)
        throw FitDegenerate("path-difference span is below the window width");

    WindowedVisibilityResult result;
    const double half = 0.5 * window_width_ps;
    const double first = lo + half;
    const double last = hi - half;
    const double edge_tol = 1e-9 * std::max({1.0, std::fabs(lo), std::fabs(hi)});

    for (double center = first; center <= last + 0.5 * step_ps; center += step_ps) {
        const double c = std::min(center, last);
        std::vector<const InterferogramBin*> inside, outside;
        for (const auto& b : data.bins) {
            if (std::fabs(b.path_diff_ps - c) <= half + edge_tol)
                inside.push_back(&b);
            else
                outside.push_back(&b);
        }
        VisibilityWindow w;
        w.center_ps = c;
        try {
            const FitResult in = fit_bins(inside, std::nullopt);
            w.visibility = in.visibility;
            w.sigma_visibility = in.sigma_visibility;
            try {
                const FitResult out = fit_bins(outside, std::nullopt);
                const double denom = std::hypot(in.sigma_visibility, out.sigma_visibility);
                if (denom > 0.0)
                    w.dip_significance = (out.visibility - in.visibility) / denom;
            } catch (const FitDegenerate&) {
                // no complement to compare against; window keeps its V only
            }
        } catch (const FitDegenerate&) {
            w.degenerate = true;
        }
        if (w.dip_significance &&
            (!result.max_dip_significance || *w.dip_significance > *result.max_dip_significance)) {
            result.max_dip_significance = *w.dip_significance;
            result.best_center_ps = w.center_ps;
        }
        result.windows.push_back(std::move(w));
        if (c >= last) break;
    }
    return result;
}

BoundResult speed_bound(double distance_m, double delay_s, const std::string& frame_label) {
    if (distance_m <= 0.0) throw Error("distance must be positive");
    if (delay_s <= 0.0) throw Error("delay must be positive");
    BoundResult r;
    r.distance_m = distance_m;
    r.delay_s = delay_s;
    r.v_min_m_per_s = distance_m / delay_s;
    r.ratio_to_c = r.v_min_m_per_s / kSpeedOfLight;
    r.frame_label = frame_label;
    return r;
}

std::function<Vec3(double)> cbr_lab_velocity_model(double lab_latitude_rad,
                                                   const CbrSpec& spec) {
    if (spec.dipole_speed_m_per_s < 0.0 || spec.orbital_speed_m_per_s < 0.0)
        throw Error("speeds must be non-negative");
    constexpr double kEarthRadius = 6371000.0;
    const double omega = kTwoPi / kSiderealDaySeconds;
    const double surface_speed = omega * kEarthRadius * std::cos(lab_latitude_rad);
    const double sin_lat = std::sin(lab_latitude_rad);
    const double cos_lat = std::cos(lab_latitude_rad);
    const double sin_dec = std::sin(spec.dipole_dec_rad);
    const double cos_dec = std::cos(spec.dipole_dec_rad);
    const double speed =
        spec.dipole_speed_m_per_s + (spec.include_orbital ? spec.orbital_speed_m_per_s : 0.0);
    return [=](double t) {
        const double hour_angle = omega * t;  // dipole crosses the meridian at t = 0
        const double sin_h = std::sin(hour_angle);
        const double cos_h = std::cos(hour_angle);
        const Vec3 dipole_dir{-cos_dec * sin_h,
                              sin_dec * cos_lat - cos_dec * cos_h * sin_lat,
                              sin_dec * sin_lat + cos_dec * cos_h * cos_lat};
        return dipole_dir * speed + Vec3{surface_speed, 0.0, 0.0};
    };
}

double cbr_worst_case_delay(const Vec3& baseline_m,
                            const std::function<Vec3(double)>& lab_velocity,
                            double timing_uncertainty_s, int day_samples) {
    if (day_samples < 1) throw Error("day_samples must be >= 1");
    if (timing_uncertainty_s < 0.0) throw Error("timing uncertainty must be >= 0");
    double worst = 0.0;
    for (int k = 0; k < day_samples; ++k) {
        const double t = kSiderealDaySeconds * static_cast<double>(k) /
                         static_cast<double>(day_samples);
        const Vec3 v = lab_velocity(t);
        const double gamma = lorentz_gamma(v);
        const double delay =
            gamma * (std::fabs(dot(v, baseline_m)) / kSpeedOfLightSq + timing_uncertainty_s);
        worst = std::max(worst, delay);
    }
    return worst;
}

}  // namespace fransim
