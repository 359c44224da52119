#pragma once

#include <string>

#include "fransim/vec3.hpp"

namespace fransim {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact
inline constexpr double kSpeedOfLightSq = kSpeedOfLight * kSpeedOfLight;

/// A measuring frame, given by its velocity relative to the lab frame.
/// The lab frame itself is the zero-velocity frame.
struct InertialFrame {
    Vec3 velocity;  // m/s
};

/// An event in the lab frame.  Times are offsets from the run start, never
/// absolute epochs: picosecond-scale intervals between events must survive
/// double arithmetic, which absolute epochs would destroy.
struct SpacetimeEvent {
    double t = 0.0;  // s
    Vec3 pos;        // m
    std::string label;
};

/// The separation of two events (B minus A).  Always construct this from
/// two events or from directly known delay differences; summing a large
/// epoch into both times first would quantize dt at the epoch's ulp.
struct IntervalSpec {
    double dt = 0.0;  // s
    Vec3 dx;          // m
};

inline IntervalSpec interval_between(const SpacetimeEvent& a, const SpacetimeEvent& b) {
    return {b.t - a.t, b.pos - a.pos};
}

/// 1/sqrt(1 - v^2/c^2); throws FrameSuperluminal when |v| >= c.
double lorentz_gamma(const Vec3& velocity);

/// Standard boost of an interval into the given frame:
///   dt' = gamma (dt - v.dx/c^2),  dx'_par = gamma (dx_par - v dt),  dx'_perp = dx_perp.
IntervalSpec boost_interval(const IntervalSpec& iv, const InertialFrame& frame);

enum class Ordering { A_FIRST, B_FIRST, SIMULTANEOUS };

/// Chronology of two events as seen from a measuring frame: the sign of the
/// boosted dt of (b - a).  SIMULTANEOUS iff |dt'| <= simultaneity_tol.
Ordering order_in_frame(const SpacetimeEvent& a, const SpacetimeEvent& b,
                        const InertialFrame& frame, double simultaneity_tol = 0.0);

/// The time difference below which two frames in relative motion v over a
/// baseline L can disagree about the event order: L v / c^2.  The gamma
/// correction is < 1e-12 relative at the speeds of interest and is neglected.
double before_before_window(double distance_m, double speed_m_s);

enum class PairClass { BEFORE_BEFORE, AFTER_AFTER, NORMAL_A_FIRST, NORMAL_B_FIRST };

const char* to_string(PairClass cls);
const char* to_string(Ordering ord);

/// A choice event together with the rest frame of the device that made it.
struct ChoiceEvent {
    SpacetimeEvent event;
    InertialFrame frame;
};

/// Joint chronology classification of two choice events, each judged in its
/// own device's frame.  BEFORE_BEFORE: both devices see the local choice
/// first.  AFTER_AFTER: both see the distant one first.  Otherwise the two
/// frames share one chronology (NORMAL_*).  A simultaneous verdict in either
/// frame raises AmbiguousOrdering rather than being broken arbitrarily.
PairClass classify_pair(const ChoiceEvent& a, const ChoiceEvent& b,
                        double simultaneity_tol = 0.0);

/// The interval of dt = t_b - t_a (at fixed spatial separation dx) on which
/// the two device frames disagree about the order, and the class that
/// disagreement produces.  Empty when both frames project equally onto dx.
struct OrderingFlipInterval {
    double lo = 0.0;  // s
    double hi = 0.0;  // s
    PairClass kind = PairClass::NORMAL_A_FIRST;
    bool empty() const { return !(lo < hi); }
};

OrderingFlipInterval ordering_flip_interval(const InertialFrame& frame_a,
                                            const InertialFrame& frame_b, const Vec3& dx);

}  // namespace fransim
