#pragma once

#include <optional>
#include <utility>

#include "fransim/kinematics.hpp"

namespace fransim {

/// Energy-time entangled pair source.  The downconversion centre is placed
/// zero_dispersion_offset_nm away from the links' average zero-dispersion
/// wavelength; that offset, not the nominal centre wavelength, is what
/// drives the residual two-photon dispersion.
struct PhotonPairSource {
    double center_wavelength_nm = 1310.0;
    double zero_dispersion_offset_nm = 0.0;  // epsilon
    double filter_bandwidth_nm = 10.0;       // FWHM of the downconversion filter
    double pair_rate_hz = 0.0;               // pairs/s leaving the source
    double post_selection_factor = 0.5;      // short-short + long-long fraction kept
};

/// One fibre link from the source to an analyzer.  Chromatic dispersion is
/// the minimal linear-slope model D(lambda) = S (lambda - lambda0); the
/// optical length drifts linearly with elapsed run time (thermal expansion).
struct FiberLink {
    double optical_length_m = 0.0;
    double group_index = 1.468;
    double loss_db = 0.0;
    double zero_dispersion_wavelength_nm = 1310.0;
    double dispersion_slope_ps_nm2_km = 0.07;
    double drift_rate_m_per_s = 0.0;  // signed optical-length drift
};

struct InterferometerSpec {
    double phase_rad = 0.0;
    double arm_imbalance_s = 1.2e-9;  // long minus short; must exceed the single-photon coherence time
};

enum class ChoiceDeviceKind { ABSORBER, DETECTOR };

/// The first absorber or detector a photon meets on one side.  Its rest
/// frame is what defines the chronology for that side's choice.  For an
/// absorber, the detector that later reveals the choice sits
/// extra_path_before_detector_m further along the fibre.
struct ChoiceDeviceSpec {
    ChoiceDeviceKind kind = ChoiceDeviceKind::ABSORBER;
    InertialFrame frame;
    double extra_path_before_detector_m = 0.0;
};

struct DetectorSpec {
    double efficiency = 0.1;                 // in (0, 1]
    double dark_count_rate_hz = 0.0;
    double coincidence_window_s = 5.925e-7;  // tau_w
    double timing_jitter_sigma_s = 0.0;
};

struct GeometrySpec {
    double baseline_length_m = 10600.0;
    double baseline_azimuth_rad = 3.14159265358979323846;  // device A -> device B, from north
    double lab_latitude_rad = 0.8063421144213802;          // 46.2 deg
};

struct ExperimentConfig;  // defined below, after the free functions it uses

/// Group delay through the link at the given elapsed run time, with the
/// linear thermal drift applied to the optical length.
double propagation_delay(const FiberLink& link, double elapsed_s);

/// Fractional power transmission of the link, 10^(-loss/10).
double link_transmission(const FiberLink& link);

/// Tangential speed of a wheel rim: 2 pi r (rpm/60).
double wheel_rim_speed(double radius_m, double rpm);

/// RMS differential group delay between the two photons of a pair after
/// their links, in ps.  Signal and idler sit at lambda_c +- delta (energy
/// conservation near degeneracy); each link delays its photon by
/// tau(lambda) = S L (lambda - lambda0)^2 / 2.  For equal links this
/// reduces to 2 S L eps delta_rms, a pure first-order residual of the
/// two-photon dispersion cancellation.  delta_rms is the filter half width.
double two_photon_spread_ps(const PhotonPairSource& src, const FiberLink& link_a,
                            const FiberLink& link_b);

struct ExperimentConfig {
    PhotonPairSource source;
    FiberLink link_a, link_b;
    InterferometerSpec ifo_a, ifo_b;
    std::optional<ChoiceDeviceSpec> choice_a, choice_b;
    DetectorSpec det_a, det_b;
    GeometrySpec geometry;

    /// Unit vector from device A toward device B in local east-north-up axes.
    Vec3 baseline_unit() const;
    /// Device positions, placed symmetrically about the source at the origin.
    Vec3 device_a_position() const;
    Vec3 device_b_position() const;
};

/// The two choice events for one pair emitted at `emission`, with the link
/// lengths as of `elapsed_s` into the run.  Each side's event happens one
/// link delay after emission, at the device position, in the device frame.
/// Post-selection keeps only the equal-arm interferometer paths, so the
/// common arm delay drops out of the pair's time difference.
std::pair<ChoiceEvent, ChoiceEvent> choice_events(const ExperimentConfig& cfg,
                                                  const SpacetimeEvent& emission,
                                                  double elapsed_s);

}  // namespace fransim
