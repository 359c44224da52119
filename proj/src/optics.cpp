#include "fransim/optics.hpp"

#include <cmath>

#include "fransim/errors.hpp"

namespace fransim {

double propagation_delay(const FiberLink& link, double elapsed_s) {
    const double length = link.optical_length_m + link.drift_rate_m_per_s * elapsed_s;
    return length * link.group_index / kSpeedOfLight;
}

double link_transmission(const FiberLink& link) {
    return std::pow(10.0, -link.loss_db / 10.0);
}

double wheel_rim_speed(double radius_m, double rpm) {
    if (radius_m < 0.0 || rpm < 0.0) throw Error("wheel_rim_speed: radius and rpm must be >= 0");
    return 2.0 * M_PI * radius_m * rpm / 60.0;
}

namespace {

// tau(lambda) relative to lambda0, in ps, for D(lambda) = S (lambda - lambda0).
double group_delay_ps(const FiberLink& link, double lambda_nm) {
    const double d = lambda_nm - link.zero_dispersion_wavelength_nm;
    return 0.5 * link.dispersion_slope_ps_nm2_km * (link.optical_length_m / 1000.0) * d * d;
}

}  // namespace

double two_photon_spread_ps(const PhotonPairSource& src, const FiberLink& link_a,
                            const FiberLink& link_b) {
    const double lambda0_mean = 0.5 * (link_a.zero_dispersion_wavelength_nm +
                                       link_b.zero_dispersion_wavelength_nm);
    const double lambda_c = lambda0_mean + src.zero_dispersion_offset_nm;
    const double delta_rms = 0.5 * src.filter_bandwidth_nm;

    // Differential delay of the pair at detuning +-delta, minus the static
    // delta = 0 offset (that offset is absorbed by the path alignment).
    const double base = group_delay_ps(link_a, lambda_c) - group_delay_ps(link_b, lambda_c);
    const double d_plus = group_delay_ps(link_a, lambda_c + delta_rms) -
                          group_delay_ps(link_b, lambda_c - delta_rms) - base;
    const double d_minus = group_delay_ps(link_a, lambda_c - delta_rms) -
                           group_delay_ps(link_b, lambda_c + delta_rms) - base;
    return std::sqrt(0.5 * (d_plus * d_plus + d_minus * d_minus));
}

Vec3 ExperimentConfig::baseline_unit() const {
    const double az = geometry.baseline_azimuth_rad;
    return {std::sin(az), std::cos(az), 0.0};
}

Vec3 ExperimentConfig::device_a_position() const {
    return -0.5 * geometry.baseline_length_m * baseline_unit();
}

Vec3 ExperimentConfig::device_b_position() const {
    return 0.5 * geometry.baseline_length_m * baseline_unit();
}

std::pair<ChoiceEvent, ChoiceEvent> choice_events(const ExperimentConfig& cfg,
                                                  const SpacetimeEvent& emission,
                                                  double elapsed_s) {
    if (!cfg.choice_a) throw ConfigInvalid("side A has no choice device");
    if (!cfg.choice_b) throw ConfigInvalid("side B has no choice device");

    ChoiceEvent a;
    a.event.t = emission.t + propagation_delay(cfg.link_a, elapsed_s);
    a.event.pos = cfg.device_a_position();
    a.event.label = "choice_a";
    a.frame = cfg.choice_a->frame;

    ChoiceEvent b;
    b.event.t = emission.t + propagation_delay(cfg.link_b, elapsed_s);
    b.event.pos = cfg.device_b_position();
    b.event.label = "choice_b";
    b.frame = cfg.choice_b->frame;

    return {a, b};
}

}  // namespace fransim
