#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fransim/analysis.hpp"
#include "fransim/cli.hpp"
#include "fransim/collapse.hpp"
#include "fransim/config.hpp"
#include "fransim/kinematics.hpp"
#include "fransim/mc_engine.hpp"
#include "fransim/optics.hpp"

using namespace fransim;
using nlohmann::json;

namespace {

void report(int n, const char* name, bool ok, const std::string& detail) {
    std::printf("ACCEPTANCE %d (%s): %s %s\n", n, name, ok ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    CHECK_MESSAGE(ok, name << ": " << detail);
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

LoadedConfig reference_config() { return load_config(PAPER_CFG_PATH); }

}  // namespace

TEST_CASE("ordering window") {
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream out, err;
    const int code = run_command({"window", "--L", "10600", "--v", "100"}, out, err);
    const double elapsed_ms = ms_since(t0);

    bool ok = code == 0;
    double window_ps = 0.0, half_ps = 0.0;
    if (ok) {
        const json j = json::parse(out.str());
        window_ps = j["window_ps"].get<double>();
        half_ps = j["half_window_ps"].get<double>();
        ok = std::fabs(window_ps - 11.80) <= 0.01 && std::fabs(half_ps - 5.9) <= 0.01 &&
             half_ps > 5.0 && elapsed_ms < 1000.0;
    }
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "window=%.4f ps (want 11.80 +- 0.01), half=%.4f ps, %.1f ms", window_ps,
                  half_ps, elapsed_ms);
    report(1, "ordering-window", ok, detail);
}

TEST_CASE("influence speed bound") {
    const BoundResult b = speed_bound(10600.0, 5e-12);
    const bool ok = std::fabs(b.v_min_m_per_s / 2.0e15 - 1.0) < 0.10 &&
                    std::fabs(b.ratio_to_c / (2.0 / 3.0 * 1e7) - 1.0) < 0.10 &&
                    std::fabs(b.v_min_m_per_s / 2.12e15 - 1.0) < 1e-12;
    char detail[160];
    std::snprintf(detail, sizeof detail, "v_min=%.3e m/s (want ~2e15), ratio=%.4e c (want ~0.667e7)",
                  b.v_min_m_per_s, b.ratio_to_c);
    report(2, "influence-speed-bound", ok, detail);
}

TEST_CASE("wheel rim speed") {
    const double v = wheel_rim_speed(0.10, 10000.0);
    const bool ok = std::fabs(v / 105.0 - 1.0) < 0.01;
    char detail[96];
    std::snprintf(detail, sizeof detail, "rim=%.4f m/s (want within 1%% of 105)", v);
    report(3, "wheel-rim-speed", ok, detail);
}

TEST_CASE("sidereal frame bounds") {
    // Baseline permanently aligned with the dipole motion: the analytic
    // worst case gamma*v*L/c^2.
    const Vec3 aligned_baseline{10600.0, 0.0, 0.0};
    const auto aligned_velocity = [](double) { return Vec3{371000.0, 0.0, 0.0}; };
    const double aligned = cbr_worst_case_delay(aligned_baseline, aligned_velocity, 0.0, 1440);
    bool ok = std::fabs(aligned / 43.76e-9 - 1.0) < 1e-3;

    const LoadedConfig cfg = reference_config();
    const Vec3 baseline =
        cfg.experiment.baseline_unit() * cfg.experiment.geometry.baseline_length_m;
    const auto velocity =
        cbr_lab_velocity_model(cfg.experiment.geometry.lab_latitude_rad, cfg.cbr);
    const double site = cbr_worst_case_delay(baseline, velocity, 0.0, cfg.cbr.day_samples);
    ok = ok && site >= 30e-9 && site <= 44e-9 && site <= aligned * (1.0 + 1e-6);

    const double ratio_37ns = speed_bound(10600.0, 37e-9).ratio_to_c;
    const double ratio_236ns = speed_bound(10600.0, 2.36e-9).ratio_to_c;
    ok = ok && ratio_37ns > 900.0 && ratio_37ns < 1000.0 &&
         std::fabs(ratio_236ns / 1.5e4 - 1.0) < 0.05;

    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "aligned=%.4f ns (want 43.76 +- 0.1%%), site=%.2f ns (want 30..44), "
                  "bounds %.1fc / %.0fc",
                  aligned * 1e9, site * 1e9, ratio_37ns, ratio_236ns);
    report(4, "sidereal-frame-bounds", ok, detail);
}

TEST_CASE("visibility recovery") {
    LoadedConfig cfg = reference_config();
    cfg.model.variant = CollapseVariant::STANDARD_QM;

    int in_band = 0;
    double v_min = 1e9, v_max = -1e9;
    double first_scan_ms = 0.0;
    double singles_per_s = 0.0, cc_per_s = 0.0, acc_per_s = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        cfg.plan.seed = seed;
        const auto t0 = std::chrono::steady_clock::now();
        const Interferogram gram = simulate_scan(cfg.experiment, cfg.model, cfg.plan, 4);
        if (seed == 1) {
            first_scan_ms = ms_since(t0);
            double sa = 0.0, cc = 0.0, acc = 0.0;
            for (const auto& b : gram.bins) {
                sa += static_cast<double>(b.singles_a);
                cc += static_cast<double>(b.coincidences);
                acc += b.accidental_est;
            }
            singles_per_s = sa / cfg.plan.duration_s;
            cc_per_s = cc / cfg.plan.duration_s;
            acc_per_s = acc / cfg.plan.duration_s;
        }
        const FitResult fit = fit_interferogram(gram);
        v_min = std::min(v_min, fit.visibility);
        v_max = std::max(v_max, fit.visibility);
        if (fit.visibility >= 0.79 && fit.visibility <= 0.87) ++in_band;
    }

    const bool rates_ok = singles_per_s > 1900.0 && singles_per_s < 2100.0 &&
                          cc_per_s > 3.0 && cc_per_s < 3.8 && acc_per_s > 2.1 &&
                          acc_per_s < 2.65;
    const bool ok = in_band >= 45 && first_scan_ms < 60000.0 && rates_ok;
    char detail[240];
    std::snprintf(detail, sizeof detail,
                  "%d/50 fits in [0.79, 0.87] (range %.3f..%.3f), scan %.0f ms, "
                  "singles %.0f/s cc %.2f/s acc %.2f/s",
                  in_band, v_min, v_max, first_scan_ms, singles_per_s, cc_per_s, acc_per_s);
    report(5, "visibility-recovery", ok, detail);
}

TEST_CASE("model discrimination") {
    LoadedConfig cfg = reference_config();

    int dips = 0;
    double dip_min = 1e9;
    cfg.model.variant = CollapseVariant::SUAREZ_SCARANI;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        cfg.plan.seed = seed;
        const Interferogram gram = simulate_scan(cfg.experiment, cfg.model, cfg.plan, 4);
        const WindowedVisibilityResult res = windowed_visibility(gram, 6.0, 0.5);
        const double sig = res.max_dip_significance.value_or(0.0);
        dip_min = std::min(dip_min, sig);
        if (sig > 5.0) ++dips;
    }

    int false_alarms = 0;
    double qm_max = 0.0;
    cfg.model.variant = CollapseVariant::STANDARD_QM;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        cfg.plan.seed = seed;
        const Interferogram gram = simulate_scan(cfg.experiment, cfg.model, cfg.plan, 4);
        const WindowedVisibilityResult res = windowed_visibility(gram, 6.0, 0.5);
        const double sig = res.max_dip_significance.value_or(0.0);
        qm_max = std::max(qm_max, sig);
        if (sig > 3.0) ++false_alarms;
    }

    const bool ok = dips >= 45 && false_alarms <= 2;
    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "dip>5 sigma in %d/50 collapse runs (min %.1f); dip>3 sigma in %d/50 "
                  "reference runs (max %.2f)",
                  dips, dip_min, false_alarms, qm_max);
    report(6, "model-discrimination", ok, detail);
}

TEST_CASE("dispersion budget") {
    PhotonPairSource src;
    src.zero_dispersion_offset_nm = 0.2;
    src.filter_bandwidth_nm = 10.0;
    FiberLink link;
    link.optical_length_m = 10000.0;
    link.dispersion_slope_ps_nm2_km = 0.07;
    const double spread = two_photon_spread_ps(src, link, link);

    // Independent check: integrate D(l) = S (l - l0) numerically (Simpson)
    // to the group delay, then form the same +-delta RMS composition.
    const auto tau_ps = [&](double lambda_nm) {
        const double l0 = link.zero_dispersion_wavelength_nm;
        const int n = 512;
        const double h = (lambda_nm - l0) / n;
        double sum = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double l = l0 + h * i;
            const double d = link.dispersion_slope_ps_nm2_km * (l - l0);
            const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            sum += w * d;
        }
        return sum * h / 3.0 * (link.optical_length_m / 1000.0);
    };
    const double lc = link.zero_dispersion_wavelength_nm + src.zero_dispersion_offset_nm;
    const double delta = 0.5 * src.filter_bandwidth_nm;
    const double base = tau_ps(lc) - tau_ps(lc);
    const double dp = tau_ps(lc + delta) - tau_ps(lc - delta) - base;
    const double dm = tau_ps(lc - delta) - tau_ps(lc + delta) - base;
    const double oracle = std::sqrt(0.5 * (dp * dp + dm * dm));

    const bool ok = spread <= 5.0 && std::fabs(spread / oracle - 1.0) <= 1e-3;
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "spread=%.4f ps (budget 5 ps), oracle=%.4f ps, rel diff %.2e", spread,
                  oracle, std::fabs(spread / oracle - 1.0));
    report(7, "dispersion-budget", ok, detail);
}

TEST_CASE("property suites") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const auto rand_sym = [&](double scale) { return (2.0 * uni(rng) - 1.0) * scale; };
    std::string fail;

    // Ordering antisymmetry under event swap, any frame.
    for (int i = 0; i < 200 && fail.empty(); ++i) {
        const SpacetimeEvent a{rand_sym(1e-5), {rand_sym(1e4), rand_sym(1e4), rand_sym(1e4)}, "a"};
        const SpacetimeEvent b{rand_sym(1e-5), {rand_sym(1e4), rand_sym(1e4), rand_sym(1e4)}, "b"};
        const InertialFrame f{{rand_sym(0.5 * kSpeedOfLight), rand_sym(0.5 * kSpeedOfLight),
                               rand_sym(0.5 * kSpeedOfLight)}};
        const Ordering ab = order_in_frame(a, b, f);
        const Ordering ba = order_in_frame(b, a, f);
        const bool good = (ab == Ordering::A_FIRST && ba == Ordering::B_FIRST) ||
                          (ab == Ordering::B_FIRST && ba == Ordering::A_FIRST) ||
                          (ab == Ordering::SIMULTANEOUS && ba == Ordering::SIMULTANEOUS);
        if (!good) fail = "ordering antisymmetry";
    }

    // Timelike pairs keep their order in every frame.
    const SpacetimeEvent ta{0.0, {0.0, 0.0, 0.0}, "a"};
    const SpacetimeEvent tb{1e-4, {10600.0, 0.0, 0.0}, "b"};
    for (int i = 0; i < 1000 && fail.empty(); ++i) {
        Vec3 v{rand_sym(1.0), rand_sym(1.0), rand_sym(1.0)};
        const double n = norm(v);
        const double speed = 0.99 * kSpeedOfLight * uni(rng);
        if (n > 0.0) v = v * (speed / n);
        if (order_in_frame(ta, tb, InertialFrame{v}) != Ordering::A_FIRST)
            fail = "timelike frame-invariance";
    }

    // Boosting there and back recovers the interval.
    for (int i = 0; i < 500 && fail.empty(); ++i) {
        const IntervalSpec iv{rand_sym(1e-4), {rand_sym(1e5), rand_sym(1e5), rand_sym(1e5)}};
        Vec3 v{rand_sym(1.0), rand_sym(1.0), rand_sym(1.0)};
        const double n = norm(v);
        const double speed = 0.99 * kSpeedOfLight * uni(rng);
        if (n > 0.0) v = v * (speed / n);
        const IntervalSpec once = boost_interval(iv, InertialFrame{v});
        const IntervalSpec back = boost_interval(once, InertialFrame{-v});
        const double dt_err = std::fabs(back.dt - iv.dt) / std::max(std::fabs(iv.dt), 1e-30);
        const double dx_err = norm(back.dx - iv.dx) / std::max(norm(iv.dx), 1e-30);
        if (dt_err > 1e-12 || dx_err > 1e-12) fail = "boost round-trip";
    }

    // Every model yields a normalized distribution with uniform marginals.
    const ChoiceEvent bb_a{{0.0, {-5300.0, 0.0, 0.0}, "a"}, {{-105.0, 0.0, 0.0}}};
    const ChoiceEvent bb_b{{-5e-12, {5300.0, 0.0, 0.0}, "b"}, {{0.0, 0.0, 0.0}}};
    const ChoiceEvent aa_a{{0.0, {-5300.0, 0.0, 0.0}, "a"}, {{105.0, 0.0, 0.0}}};
    const ChoiceEvent aa_b{{5e-12, {5300.0, 0.0, 0.0}, "b"}, {{0.0, 0.0, 0.0}}};
    const ChoiceEvent nm_b{{5e-11, {5300.0, 0.0, 0.0}, "b"}, {{0.0, 0.0, 0.0}}};

    std::vector<CollapseModelSpec> specs;
    specs.push_back({CollapseVariant::STANDARD_QM, 0.83, AfterAfterRule::CORRELATED, {}, {}});
    specs.push_back({CollapseVariant::SUAREZ_SCARANI, 0.83, AfterAfterRule::CORRELATED, {}, {}});
    specs.push_back({CollapseVariant::SUAREZ_SCARANI, 0.83, AfterAfterRule::UNCORRELATED, {}, {}});
    specs.push_back({CollapseVariant::FINITE_SPEED, 0.83, AfterAfterRule::CORRELATED,
                     InertialFrame{{0.0, 0.0, 0.0}}, 3e15});
    specs.push_back({CollapseVariant::FINITE_SPEED, 0.83, AfterAfterRule::CORRELATED,
                     InertialFrame{{0.0, 0.0, 0.0}}, 2e15});
    const std::vector<std::pair<ChoiceEvent, ChoiceEvent>> pairs = {
        {bb_a, bb_b}, {aa_a, aa_b}, {bb_a, nm_b}};
    for (int i = 0; i < 200 && fail.empty(); ++i) {
        const double alpha = uni(rng) * 6.283185307179586;
        const double beta = uni(rng) * 6.283185307179586;
        for (const auto& spec : specs) {
            for (const auto& [ca, cb] : pairs) {
                const PairClass cls = classify_pair(ca, cb);
                const JointDistribution d = model_joint(spec, cls, ca, cb, alpha, beta);
                const double total = d.p_pp + d.p_pm + d.p_mp + d.p_mm;
                if (std::fabs(total - 1.0) > 1e-12) fail = "normalization";
                if (std::fabs(d.p_pp + d.p_pm - 0.5) > 1e-12 ||
                    std::fabs(d.p_pp + d.p_mp - 0.5) > 1e-12)
                    fail = "uniform marginals";
            }
        }
    }

    // An unbounded influence speed reproduces the reference model exactly.
    const CollapseModelSpec fast{CollapseVariant::FINITE_SPEED, 0.83,
                                 AfterAfterRule::CORRELATED, InertialFrame{{0.0, 0.0, 0.0}},
                                 1e30};
    const CollapseModelSpec qm{CollapseVariant::STANDARD_QM, 0.83,
                               AfterAfterRule::CORRELATED, {}, {}};
    for (int i = 0; i < 100 && fail.empty(); ++i) {
        const double alpha = uni(rng) * 6.283185307179586;
        const double beta = uni(rng) * 6.283185307179586;
        const PairClass cls = classify_pair(bb_a, bb_b);
        const JointDistribution df = model_joint(fast, cls, bb_a, bb_b, alpha, beta);
        const JointDistribution dq = model_joint(qm, cls, bb_a, bb_b, alpha, beta);
        if (df.p_pp != dq.p_pp || df.p_pm != dq.p_pm || df.p_mp != dq.p_mp ||
            df.p_mm != dq.p_mm)
            fail = "unbounded-speed reduction";
    }

    // Bitwise identical scans regardless of worker count.
    if (fail.empty()) {
        LoadedConfig cfg = reference_config();
        cfg.model.variant = CollapseVariant::SUAREZ_SCARANI;
        cfg.plan.duration_s = 2000.0;
        cfg.plan.seed = 7;
        const Interferogram one = simulate_scan(cfg.experiment, cfg.model, cfg.plan, 1);
        const Interferogram four = simulate_scan(cfg.experiment, cfg.model, cfg.plan, 4);
        if (!(one == four)) fail = "thread-count reproducibility";
    }

    report(8, "property-suites", fail.empty(),
           fail.empty() ? "antisymmetry, frame-invariance, boost round-trip, "
                          "normalization, marginals, speed-limit reduction, threading"
                        : "failed: " + fail);
}
