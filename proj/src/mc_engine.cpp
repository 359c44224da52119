#include "fransim/mc_engine.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "fransim/errors.hpp"
#include "fransim/rng.hpp"

namespace fransim {

namespace {

double gaussian_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Average of cos(phase) over one bin equals cos(center) * sinc(rate*width/2).
double bin_sinc(double phase_rate, double bin_width) {
    const double x = 0.5 * phase_rate * bin_width;
    if (std::fabs(x) < 1e-8) return 1.0;
    return std::sin(x) / x;
}

}  // namespace

double smoothed_visibility_factor(double path_diff_ps, double window_ps,
                                  double spread_sigma_ps) {
    if (spread_sigma_ps < 0.0) throw Error("spread sigma must be >= 0");
    if (window_ps <= 0.0) return 1.0;
    if (spread_sigma_ps == 0.0) {
        const double a = std::fabs(path_diff_ps);
        if (a == window_ps) return 0.5;
        return a > window_ps ? 1.0 : 0.0;
    }
    const double below = gaussian_cdf((-window_ps - path_diff_ps) / spread_sigma_ps);
    const double above = 1.0 - gaussian_cdf((window_ps - path_diff_ps) / spread_sigma_ps);
    return below + above;
}

namespace {

// Model visibility for the bin's representative pair.  Smoothing applies
// only where the model suppresses a frame-ordering window; the sharp
// classification path is kept for zero spread so exact ties still surface
// as AmbiguousOrdering.
double bin_visibility(const ExperimentConfig& cfg, const CollapseModelSpec& model,
                      double bin_center_s, double spread_sigma_ps) {
    if (model.max_visibility < 0.0 || model.max_visibility > 1.0)
        throw ConfigInvalid("model visibility must lie in [0, 1]");
    if (model.variant == CollapseVariant::STANDARD_QM) return model.max_visibility;

    SpacetimeEvent emission{0.0, {0.0, 0.0, 0.0}, "emission"};
    const auto [ea, eb] = choice_events(cfg, emission, bin_center_s);

    if (model.variant == CollapseVariant::FINITE_SPEED) {
        const PairClass cls = classify_pair(ea, eb);
        return effective_visibility(model, cls, ea, eb);
    }

    // SUAREZ_SCARANI
    const Vec3 dx = eb.event.pos - ea.event.pos;
    const OrderingFlipInterval flip = ordering_flip_interval(ea.frame, eb.frame, dx);
    if (flip.empty()) return model.max_visibility;
    const bool suppressed =
        flip.kind == PairClass::BEFORE_BEFORE ||
        model.after_after_rule == AfterAfterRule::UNCORRELATED;
    if (!suppressed) return model.max_visibility;
    if (spread_sigma_ps > 0.0) {
        const double pd_ps = (eb.event.t - ea.event.t) * 1e12;
        const double center_ps = 0.5 * (flip.lo + flip.hi) * 1e12;
        const double half_ps = 0.5 * (flip.hi - flip.lo) * 1e12;
        return model.max_visibility *
               smoothed_visibility_factor(pd_ps - center_ps, half_ps, spread_sigma_ps);
    }
    const PairClass cls = classify_pair(ea, eb);
    return effective_visibility(model, cls, ea, eb);
}

}  // namespace

Interferogram simulate_scan(const ExperimentConfig& cfg, const CollapseModelSpec& model,
                            const ScanPlan& plan, int threads) {
    if (plan.duration_s <= 0.0 || plan.bin_width_s <= 0.0)
        throw ConfigInvalid("scan duration and bin width must be positive");
    const double ratio = plan.duration_s / plan.bin_width_s;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::fabs(ratio - rounded) > 1e-9 * ratio)
        throw ConfigInvalid("scan duration must be an integer number of bins");
    const auto n_bins = static_cast<std::uint64_t>(rounded);
    if (threads < 1) throw ConfigInvalid("thread count must be >= 1");

    if (cfg.source.pair_rate_hz < 0.0) throw ConfigInvalid("pair rate must be >= 0");
    if (cfg.source.post_selection_factor <= 0.0 || cfg.source.post_selection_factor > 1.0)
        throw ConfigInvalid("post-selection factor must lie in (0, 1]");
    for (const auto* det : {&cfg.det_a, &cfg.det_b}) {
        if (det->efficiency <= 0.0 || det->efficiency > 1.0)
            throw ConfigInvalid("detector efficiency must lie in (0, 1]");
        if (det->dark_count_rate_hz < 0.0)
            throw ConfigInvalid("dark count rate must be >= 0");
        if (det->coincidence_window_s <= 0.0)
            throw ConfigInvalid("coincidence window must be positive");
    }
    if (cfg.det_a.coincidence_window_s != cfg.det_b.coincidence_window_s)
        throw ConfigInvalid("coincidence windows must match between sides");
    const double tau_w = cfg.det_a.coincidence_window_s;

    const double trans_a = link_transmission(cfg.link_a);
    const double trans_b = link_transmission(cfg.link_b);
    const double rate_singles_a =
        cfg.source.pair_rate_hz * trans_a * cfg.det_a.efficiency + cfg.det_a.dark_count_rate_hz;
    const double rate_singles_b =
        cfg.source.pair_rate_hz * trans_b * cfg.det_b.efficiency + cfg.det_b.dark_count_rate_hz;
    // Pairs that survive both links, both detectors, and post-selection;
    // the joint outcome law then picks the coincident fraction per bin.
    const double rate_pairs = cfg.source.pair_rate_hz * trans_a * trans_b *
                              cfg.det_a.efficiency * cfg.det_b.efficiency *
                              cfg.source.post_selection_factor;

    const double spread_ps = two_photon_spread_ps(cfg.source, cfg.link_a, cfg.link_b);
    const double sinc = bin_sinc(plan.phase_rate_rad_per_s, plan.bin_width_s);
    const double width = plan.bin_width_s;

    Interferogram gram;
    gram.bins.resize(n_bins);

    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto run_bin = [&](std::uint64_t i) {
        const double elapsed = static_cast<double>(i) * width;
        const double center = elapsed + 0.5 * width;
        const double phase = plan.phase_start_rad + plan.phase_rate_rad_per_s * center;
        const double pd_ps = (propagation_delay(cfg.link_b, center) -
                              propagation_delay(cfg.link_a, center)) * 1e12;

        const double vis = bin_visibility(cfg, model, center, spread_ps);
        const double p_cc = (1.0 + vis * sinc * std::cos(phase)) / 4.0;

        BinStream rng = derive_bin_stream(plan.seed, i);
        const std::uint64_t singles_a = rng.next_poisson(rate_singles_a * width);
        const std::uint64_t singles_b = rng.next_poisson(rate_singles_b * width);
        const std::uint64_t true_cc = rng.next_poisson(rate_pairs * p_cc * width);
        const std::uint64_t acc_cc =
            rng.next_poisson(rate_singles_a * rate_singles_b * tau_w * width);

        InterferogramBin& bin = gram.bins[i];
        bin.bin_index = i;
        bin.elapsed_s = elapsed;
        bin.phase_rad = phase;
        bin.path_diff_ps = pd_ps;
        bin.coincidences = true_cc + acc_cc;
        bin.accidental_est =
            static_cast<double>(singles_a) * static_cast<double>(singles_b) * tau_w / width;
        bin.singles_a = singles_a;
        bin.singles_b = singles_b;
    };

    const auto worker_count =
        static_cast<std::uint64_t>(threads) < n_bins ? static_cast<std::uint64_t>(threads)
                                                     : n_bins;
    if (worker_count <= 1) {
        for (std::uint64_t i = 0; i < n_bins; ++i) run_bin(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(worker_count);
        for (std::uint64_t w = 0; w < worker_count; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::uint64_t i = w; i < n_bins; i += worker_count) run_bin(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }
    return gram;
}

}  // namespace fransim
