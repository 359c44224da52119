#pragma once

#include <optional>

#include "fransim/kinematics.hpp"

namespace fransim {

enum class CollapseVariant { STANDARD_QM, SUAREZ_SCARANI, FINITE_SPEED };

/// What the model predicts when each device sees the distant measurement
/// first.  CORRELATED keeps the quantum correlations there (the tested
/// variant); UNCORRELATED treats it like the before-before case.
enum class AfterAfterRule { CORRELATED, UNCORRELATED };

struct CollapseModelSpec {
    CollapseVariant variant = CollapseVariant::STANDARD_QM;
    double max_visibility = 1.0;  // V in [0, 1]
    AfterAfterRule after_after_rule = AfterAfterRule::CORRELATED;
    std::optional<InertialFrame> preferred_frame;        // FINITE_SPEED only
    std::optional<double> influence_speed_m_per_s;       // v_qi > c, FINITE_SPEED only
};

const char* to_string(CollapseVariant variant);

/// Post-selected joint outcome probabilities for the two analyzer ports.
struct JointDistribution {
    double p_pp = 0.25, p_pm = 0.25, p_mp = 0.25, p_mm = 0.25;

    double p(int i, int j) const {  // i, j in {+1, -1}
        if (i > 0) return j > 0 ? p_pp : p_pm;
        return j > 0 ? p_mp : p_mm;
    }
    double correlation() const { return p_pp + p_mm - p_pm - p_mp; }
};

/// Post-selected Franson coincidence law: p(i,j) = (1 + i j V cos(a+b)) / 4.
JointDistribution qm_joint(double alpha_rad, double beta_rad, double visibility);

/// Whether an influence launched at `from` and travelling at v_qi in the
/// preferred frame arrives no later than `to` happens: after boosting both
/// events into that frame, dt' >= |dx'| / v_qi.
bool reachable(const InertialFrame& preferred, const SpacetimeEvent& from,
               const SpacetimeEvent& to, double influence_speed_m_per_s);

/// The fringe visibility the model leaves for this pair: the configured V,
/// or zero when the model says the correlations must vanish.
///   STANDARD_QM    - always V.
///   SUAREZ_SCARANI - zero for BEFORE_BEFORE (no collapse has reached either
///                    side); V for the shared-chronology classes; the
///                    AFTER_AFTER case follows after_after_rule.
///   FINITE_SPEED   - zero only when neither choice event can reach the
///                    other inside the v_qi cone of the preferred frame.
double effective_visibility(const CollapseModelSpec& model, PairClass cls,
                            const ChoiceEvent& a, const ChoiceEvent& b);

/// Joint distribution the model predicts for a classified pair.
JointDistribution model_joint(const CollapseModelSpec& model, PairClass cls,
                              const ChoiceEvent& a, const ChoiceEvent& b,
                              double alpha_rad, double beta_rad);

}  // namespace fransim
