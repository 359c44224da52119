#include "fransim/kinematics.hpp"

#include <cmath>

#include "fransim/errors.hpp"

namespace fransim {

double lorentz_gamma(const Vec3& velocity) {
    const double beta_sq = dot(velocity, velocity) / kSpeedOfLightSq;
    if (beta_sq >= 1.0) {
        throw FrameSuperluminal("frame velocity |v| >= c: |v| = " +
                                std::to_string(norm(velocity)) + " m/s");
    }
    return 1.0 / std::sqrt(1.0 - beta_sq);
}

IntervalSpec boost_interval(const IntervalSpec& iv, const InertialFrame& frame) {
    const Vec3& v = frame.velocity;
    const double gamma = lorentz_gamma(v);
    const double v_sq = dot(v, v);
    const double v_dot_dx = dot(v, iv.dx);

    IntervalSpec out;
    out.dt = gamma * (iv.dt - v_dot_dx / kSpeedOfLightSq);
    if (v_sq > 0.0) {
        // Decompose dx along v: parallel part contracts with gamma, the
        // perpendicular part is untouched.
        const double par_scale = (gamma - 1.0) * v_dot_dx / v_sq - gamma * iv.dt;
        out.dx = iv.dx + par_scale * v;
    } else {
        out.dx = iv.dx;
    }
    return out;
}

Ordering order_in_frame(const SpacetimeEvent& a, const SpacetimeEvent& b,
                        const InertialFrame& frame, double simultaneity_tol) {
    const IntervalSpec boosted = boost_interval(interval_between(a, b), frame);
    if (std::fabs(boosted.dt) <= simultaneity_tol) return Ordering::SIMULTANEOUS;
    return boosted.dt > 0.0 ? Ordering::A_FIRST : Ordering::B_FIRST;
}

double before_before_window(double distance_m, double speed_m_s) {
    if (distance_m < 0.0) throw Error("before_before_window: distance must be >= 0");
    if (speed_m_s < 0.0 || speed_m_s >= kSpeedOfLight) {
        throw FrameSuperluminal("before_before_window: speed must satisfy 0 <= v < c");
    }
    return distance_m * speed_m_s / kSpeedOfLightSq;
}

const char* to_string(PairClass cls) {
    switch (cls) {
        case PairClass::BEFORE_BEFORE: return "BEFORE_BEFORE";
        case PairClass::AFTER_AFTER: return "AFTER_AFTER";
        case PairClass::NORMAL_A_FIRST: return "NORMAL_A_FIRST";
        case PairClass::NORMAL_B_FIRST: return "NORMAL_B_FIRST";
    }
    return "?";
}

const char* to_string(Ordering ord) {
    switch (ord) {
        case Ordering::A_FIRST: return "A_FIRST";
        case Ordering::B_FIRST: return "B_FIRST";
        case Ordering::SIMULTANEOUS: return "SIMULTANEOUS";
    }
    return "?";
}

PairClass classify_pair(const ChoiceEvent& a, const ChoiceEvent& b, double simultaneity_tol) {
    const Ordering in_a = order_in_frame(a.event, b.event, a.frame, simultaneity_tol);
    const Ordering in_b = order_in_frame(a.event, b.event, b.frame, simultaneity_tol);
    if (in_a == Ordering::SIMULTANEOUS || in_b == Ordering::SIMULTANEOUS) {
        throw AmbiguousOrdering(std::string("simultaneous choice events in the ") +
                                (in_a == Ordering::SIMULTANEOUS ? "A" : "B") + " device frame");
    }
    if (in_a == Ordering::A_FIRST && in_b == Ordering::B_FIRST) return PairClass::BEFORE_BEFORE;
    if (in_a == Ordering::B_FIRST && in_b == Ordering::A_FIRST) return PairClass::AFTER_AFTER;
    return in_a == Ordering::A_FIRST ? PairClass::NORMAL_A_FIRST : PairClass::NORMAL_B_FIRST;
}

OrderingFlipInterval ordering_flip_interval(const InertialFrame& frame_a,
                                            const InertialFrame& frame_b, const Vec3& dx) {
    // Frame f calls A first iff dt > v_f.dx/c^2, so the frames disagree on
    // the open interval between the two projections.
    lorentz_gamma(frame_a.velocity);  // validity checks only
    lorentz_gamma(frame_b.velocity);
    const double qa = dot(frame_a.velocity, dx) / kSpeedOfLightSq;
    const double qb = dot(frame_b.velocity, dx) / kSpeedOfLightSq;

    OrderingFlipInterval out;
    if (qa < qb) {
        // A's own frame still says A first while B's already says B first.
        out = {qa, qb, PairClass::BEFORE_BEFORE};
    } else {
        out = {qb, qa, PairClass::AFTER_AFTER};
    }
    return out;
}

}  // namespace fransim
