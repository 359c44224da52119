#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <functional>

#include "fransim/analysis.hpp"
#include "fransim/errors.hpp"
#include "fransim/kinematics.hpp"
#include "fransim/rng.hpp"

using namespace fransim;

namespace {

constexpr double kPi = 3.14159265358979323846;

InterferogramBin make_bin(std::uint64_t i, double phase, std::uint64_t counts,
                          double acc = 0.0, double pd = 0.0) {
    InterferogramBin b;
    b.bin_index = i;
    b.elapsed_s = 100.0 * static_cast<double>(i);
    b.phase_rad = phase;
    b.path_diff_ps = pd;
    b.coincidences = counts;
    b.accidental_est = acc;
    return b;
}

Interferogram exact_sinusoid(double baseline, double amplitude, double phase_offset,
                             int n = 48) {
    Interferogram g;
    for (int i = 0; i < n; ++i) {
        const double phase = i * (4.0 * kPi / n);
        const double mean = baseline + amplitude * std::cos(phase + phase_offset);
        g.bins.push_back(make_bin(i, phase, static_cast<std::uint64_t>(std::llround(mean))));
    }
    return g;
}

}  // namespace

TEST_CASE("fit_interferogram recovers an exact sinusoid") {
    const FitResult r = fit_interferogram(exact_sinusoid(100000.0, 50000.0, 0.7));
    CHECK(r.visibility == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(r.amplitude == doctest::Approx(50000.0).epsilon(1e-4));
    CHECK(r.baseline == doctest::Approx(100000.0).epsilon(1e-4));
    CHECK(r.phase_offset_rad == doctest::Approx(0.7).epsilon(1e-3));
    CHECK_FALSE(r.bell_threshold_exceeded);
    CHECK(r.sigma_visibility > 0.0);
    CHECK(r.sigma_visibility < 0.01);

    const FitResult high = fit_interferogram(exact_sinusoid(100000.0, 80000.0, -1.1));
    CHECK(high.visibility == doctest::Approx(0.8).epsilon(1e-4));
    CHECK(high.phase_offset_rad == doctest::Approx(-1.1).epsilon(1e-3));
    CHECK(high.bell_threshold_exceeded);
}

TEST_CASE("fit_interferogram subtracts the accidental column or its override") {
    Interferogram g;
    for (int i = 0; i < 48; ++i) {
        const double phase = i * (4.0 * kPi / 48.0);
        const double mean = 20000.0 + 500.0 + 5000.0 * std::cos(phase);
        g.bins.push_back(
            make_bin(i, phase, static_cast<std::uint64_t>(std::llround(mean)), 500.0));
    }
    const FitResult sub = fit_interferogram(g);
    CHECK(sub.visibility == doctest::Approx(5000.0 / 20000.0).epsilon(1e-3));
    const FitResult keep = fit_interferogram(g, 0.0);
    CHECK(keep.visibility == doctest::Approx(5000.0 / 20500.0).epsilon(1e-3));
    CHECK(keep.baseline == doctest::Approx(20500.0).epsilon(1e-3));
}

TEST_CASE("fit uncertainties cover the true visibility") {
    int covered = 0;
    for (int run = 0; run < 100; ++run) {
        BinStream s(9000 + run, 0);
        Interferogram g;
        for (int i = 0; i < 64; ++i) {
            const double phase = i * (6.0 * kPi / 64.0);
            const double mean = 500.0 * (1.0 + 0.83 * std::cos(phase)) + 200.0;
            g.bins.push_back(make_bin(i, phase, s.next_poisson(mean), 200.0));
        }
        const FitResult r = fit_interferogram(g);
        if (std::fabs(r.visibility - 0.83) <= 2.0 * r.sigma_visibility) ++covered;
    }
    // Nominal 2-sigma coverage is 95.45%.
    CHECK(covered >= 95);
}

TEST_CASE("fit on flat noise reports visibility consistent with zero") {
    BinStream s(4242, 0);
    Interferogram g;
    for (int i = 0; i < 64; ++i) {
        const double phase = i * (4.0 * kPi / 64.0);
        g.bins.push_back(make_bin(i, phase, s.next_poisson(1000.0)));
    }
    const FitResult r = fit_interferogram(g);
    CHECK(r.visibility < 4.0 * r.sigma_visibility);
    CHECK(r.sigma_visibility > 0.003);
    CHECK(r.sigma_visibility < 0.01);
    CHECK_FALSE(r.bell_threshold_exceeded);
}

TEST_CASE("fit_interferogram rejects degenerate inputs") {
    // Too few bins.
    Interferogram few;
    for (int i = 0; i < 7; ++i) few.bins.push_back(make_bin(i, i * 1.0, 100));
    CHECK_THROWS_AS(fit_interferogram(few), FitDegenerate);

    // Phase span below one fringe.
    Interferogram narrow;
    for (int i = 0; i < 16; ++i) narrow.bins.push_back(make_bin(i, i * 0.35, 100));
    CHECK_THROWS_AS(fit_interferogram(narrow), FitDegenerate);

    // Two distinct phases cannot pin three parameters.
    Interferogram twophase;
    for (int i = 0; i < 8; ++i) twophase.bins.push_back(make_bin(i, (i % 2) * 7.0, 100));
    CHECK_THROWS_AS(fit_interferogram(twophase), FitDegenerate);

    // All-zero counts leave no positive baseline.
    Interferogram zeros;
    for (int i = 0; i < 16; ++i) zeros.bins.push_back(make_bin(i, i * 0.7, 0));
    CHECK_THROWS_AS(fit_interferogram(zeros), FitDegenerate);

    // Counts below the accidental level drive the baseline negative.
    Interferogram drowned;
    for (int i = 0; i < 16; ++i) drowned.bins.push_back(make_bin(i, i * 0.7, 0, 100.0));
    CHECK_THROWS_AS(fit_interferogram(drowned), FitDegenerate);
}

TEST_CASE("windowed_visibility validates its arguments") {
    const Interferogram g = exact_sinusoid(1000.0, 500.0, 0.0);
    CHECK_THROWS_AS(windowed_visibility(g, 0.0, 0.5), Error);
    CHECK_THROWS_AS(windowed_visibility(g, 4.0, -1.0), Error);
    CHECK_THROWS_AS(windowed_visibility(Interferogram{}, 4.0, 0.5), FitDegenerate);
    // All bins share path difference zero: span below any window width.
    CHECK_THROWS_AS(windowed_visibility(g, 4.0, 0.5), FitDegenerate);
}

TEST_CASE("windowed_visibility over the full span reproduces the global fit") {
    Interferogram g;
    for (int i = 0; i < 64; ++i) {
        const double phase = i * 0.2;
        const double mean = 1000.0 + 600.0 * std::cos(phase + 0.3);
        g.bins.push_back(make_bin(i, phase, static_cast<std::uint64_t>(std::llround(mean)),
                                  0.0, i * 0.1));
    }
    const double span = 63 * 0.1;
    const WindowedVisibilityResult w = windowed_visibility(g, span, 1.0);
    REQUIRE(w.windows.size() == 1);
    CHECK_FALSE(w.windows[0].degenerate);
    CHECK_FALSE(w.windows[0].dip_significance.has_value());
    CHECK_FALSE(w.max_dip_significance.has_value());
    CHECK_FALSE(w.best_center_ps.has_value());
    const FitResult global = fit_interferogram(g);
    CHECK(w.windows[0].visibility == doctest::Approx(global.visibility).epsilon(1e-12));
    CHECK(w.windows[0].sigma_visibility ==
          doctest::Approx(global.sigma_visibility).epsilon(1e-12));
}

TEST_CASE("windowed_visibility localizes a visibility dip") {
    Interferogram g;
    BinStream s(1234, 0);
    for (int i = 0; i < 240; ++i) {
        const double pd = i * 0.05 - 6.0;
        const double phase = i * (2.0 * kPi / 16.0);
        const double vis = std::fabs(pd) <= 2.0 ? 0.0 : 0.8;
        const double mean = 1000.0 * (1.0 + vis * std::cos(phase));
        g.bins.push_back(make_bin(i, phase, s.next_poisson(mean), 0.0, pd));
    }
    const WindowedVisibilityResult w = windowed_visibility(g, 4.0, 0.5);

    // Centers run from lo+half to hi-half, then one clamped final window.
    CHECK(w.windows.size() == 17);
    CHECK(w.windows.front().center_ps == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK(w.windows.back().center_ps == doctest::Approx(3.95).epsilon(1e-9));

    REQUIRE(w.max_dip_significance.has_value());
    REQUIRE(w.best_center_ps.has_value());
    CHECK(*w.max_dip_significance > 5.0);
    CHECK(std::fabs(*w.best_center_ps) <= 0.6);

    // The dip window itself fits a visibility near zero.
    for (const auto& win : w.windows) {
        if (win.center_ps == *w.best_center_ps) {
            CHECK(win.visibility < 0.1);
            CHECK(win.dip_significance.has_value());
        }
    }
}

TEST_CASE("speed_bound scales distance over delay") {
    const BoundResult r = speed_bound(10600.0, 5e-12);
    CHECK(r.v_min_m_per_s == doctest::Approx(2.12e15).epsilon(1e-12));
    CHECK(r.ratio_to_c == doctest::Approx(7071558.8182).epsilon(1e-9));
    CHECK(r.frame_label == "lab");
    CHECK(r.distance_m == 10600.0);
    CHECK(r.delay_s == 5e-12);

    CHECK(speed_bound(10600.0, 37e-9).ratio_to_c == doctest::Approx(955.6160565).epsilon(1e-9));
    CHECK(speed_bound(10600.0, 2.36e-9).ratio_to_c ==
          doctest::Approx(14982.1161403).epsilon(1e-9));
    CHECK(speed_bound(1.0, 1.0, "icrf").frame_label == "icrf");

    // Homogeneity: common rescaling of distance and delay leaves the bound.
    for (double k : {3.7, 1e-3, 2e6}) {
        const BoundResult scaled = speed_bound(10600.0 * k, 5e-12 * k);
        CHECK(scaled.v_min_m_per_s == doctest::Approx(r.v_min_m_per_s).epsilon(1e-12));
        CHECK(scaled.ratio_to_c == doctest::Approx(r.ratio_to_c).epsilon(1e-12));
    }

    CHECK_THROWS_AS(speed_bound(0.0, 1e-9), Error);
    CHECK_THROWS_AS(speed_bound(-1.0, 1e-9), Error);
    CHECK_THROWS_AS(speed_bound(10600.0, 0.0), Error);
    CHECK_THROWS_AS(speed_bound(10600.0, -1e-9), Error);
}

TEST_CASE("cbr_worst_case_delay on constant velocities") {
    const Vec3 east_baseline{10600.0, 0.0, 0.0};
    const auto orthogonal = [](double) { return Vec3{0.0, 371000.0, 0.0}; };
    CHECK(cbr_worst_case_delay(east_baseline, orthogonal, 0.0, 16) == 0.0);

    const auto aligned = [](double) { return Vec3{371000.0, 0.0, 0.0}; };
    CHECK(cbr_worst_case_delay(east_baseline, aligned, 0.0, 16) ==
          doctest::Approx(4.3756109610e-8).epsilon(1e-9));

    CHECK_THROWS_AS(cbr_worst_case_delay(east_baseline, aligned, -1e-9, 16), Error);
    CHECK_THROWS_AS(cbr_worst_case_delay(east_baseline, aligned, 0.0, 0), Error);
    const auto lightspeed = [](double) { return Vec3{kSpeedOfLight, 0.0, 0.0}; };
    CHECK_THROWS_AS(cbr_worst_case_delay(east_baseline, lightspeed, 0.0, 4),
                    FrameSuperluminal);
}

TEST_CASE("cbr velocity model stays near the dipole speed and repeats daily") {
    const double lat = 0.8063421144213802;
    const CbrSpec spec;
    const auto v = cbr_lab_velocity_model(lat, spec);
    for (int k = 0; k < 48; ++k) {
        const double t = kSiderealDaySeconds * k / 48.0;
        const double speed = norm(v(t));
        // Dipole speed plus at most the 322 m/s surface rotation speed.
        CHECK(speed > 371000.0 - 325.0);
        CHECK(speed < 371000.0 + 325.0);
    }
    const Vec3 start = v(0.0);
    const Vec3 day = v(kSiderealDaySeconds);
    CHECK(std::fabs(start.x - day.x) < 1e-6);
    CHECK(std::fabs(start.y - day.y) < 1e-6);
    CHECK(std::fabs(start.z - day.z) < 1e-6);

    CbrSpec bad = spec;
    bad.dipole_speed_m_per_s = -1.0;
    CHECK_THROWS_AS(cbr_lab_velocity_model(lat, bad), Error);
}

TEST_CASE("station-geometry worst-case delay sits inside the dipole envelope") {
    const double lat = 0.8063421144213802;
    const Vec3 baseline = Vec3{std::sin(kPi), std::cos(kPi), 0.0} * 10600.0;
    const auto v = cbr_lab_velocity_model(lat, CbrSpec{});
    const double worst = cbr_worst_case_delay(baseline, v, 0.0, 1440);
    CHECK(worst >= 30e-9);
    CHECK(worst <= 44e-9);
    CHECK(worst <= 4.3756109610e-8 * (1.0 + 1e-6));

    // Monotone in the timing uncertainty, with at least the added term.
    const double with_u = cbr_worst_case_delay(baseline, v, 5e-9, 1440);
    CHECK(with_u > worst);
    CHECK(with_u >= worst + 5e-9);

    // Monotone in the dipole speed.
    CbrSpec faster;
    faster.dipole_speed_m_per_s *= 1.2;
    const double worse =
        cbr_worst_case_delay(baseline, cbr_lab_velocity_model(lat, faster), 0.0, 1440);
    CHECK(worse > worst);

    // The orbital envelope only adds speed.
    CbrSpec orbital;
    orbital.include_orbital = true;
    const double padded =
        cbr_worst_case_delay(baseline, cbr_lab_velocity_model(lat, orbital), 0.0, 1440);
    CHECK(padded > worst);
}
