#include "fransim/collapse.hpp"

#include <cmath>

#include "fransim/errors.hpp"

namespace fransim {

const char* to_string(CollapseVariant variant) {
    switch (variant) {
        case CollapseVariant::STANDARD_QM: return "standard_qm";
        case CollapseVariant::SUAREZ_SCARANI: return "suarez_scarani";
        case CollapseVariant::FINITE_SPEED: return "finite_speed";
    }
    return "?";
}

JointDistribution qm_joint(double alpha_rad, double beta_rad, double visibility) {
    if (visibility < 0.0 || visibility > 1.0)
        throw Error("visibility must lie in [0, 1]");
    const double c = visibility * std::cos(alpha_rad + beta_rad);
    JointDistribution d;
    d.p_pp = d.p_mm = (1.0 + c) / 4.0;
    d.p_pm = d.p_mp = (1.0 - c) / 4.0;
    return d;
}

bool reachable(const InertialFrame& preferred, const SpacetimeEvent& from,
               const SpacetimeEvent& to, double influence_speed_m_per_s) {
    if (influence_speed_m_per_s <= 0.0)
        throw Error("influence speed must be positive");
    const IntervalSpec iv = boost_interval(interval_between(from, to), preferred);
    return iv.dt >= norm(iv.dx) / influence_speed_m_per_s;
}

double effective_visibility(const CollapseModelSpec& model, PairClass cls,
                            const ChoiceEvent& a, const ChoiceEvent& b) {
    const double v = model.max_visibility;
    if (v < 0.0 || v > 1.0) throw Error("visibility must lie in [0, 1]");
    switch (model.variant) {
        case CollapseVariant::STANDARD_QM:
            return v;
        case CollapseVariant::SUAREZ_SCARANI:
            switch (cls) {
                case PairClass::BEFORE_BEFORE: return 0.0;
                case PairClass::AFTER_AFTER:
                    return model.after_after_rule == AfterAfterRule::CORRELATED ? v : 0.0;
                default: return v;
            }
        case CollapseVariant::FINITE_SPEED: {
            if (!model.preferred_frame || !model.influence_speed_m_per_s)
                throw MissingModelParams(
                    "finite_speed model needs preferred_frame and influence_speed");
            const double vqi = *model.influence_speed_m_per_s;
            const bool a_reaches_b = reachable(*model.preferred_frame, a.event, b.event, vqi);
            const bool b_reaches_a = reachable(*model.preferred_frame, b.event, a.event, vqi);
            return (a_reaches_b || b_reaches_a) ? v : 0.0;
        }
    }
    throw Error("unknown collapse variant");
}

JointDistribution model_joint(const CollapseModelSpec& model, PairClass cls,
                              const ChoiceEvent& a, const ChoiceEvent& b,
                              double alpha_rad, double beta_rad) {
    return qm_joint(alpha_rad, beta_rad, effective_visibility(model, cls, a, b));
}

}  // namespace fransim
