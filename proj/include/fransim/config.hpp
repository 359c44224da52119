#pragma once

#include <string>

#include "fransim/analysis.hpp"
#include "fransim/collapse.hpp"
#include "fransim/mc_engine.hpp"
#include "fransim/optics.hpp"

namespace fransim {

struct LoadedConfig {
    ExperimentConfig experiment;
    CollapseModelSpec model;
    ScanPlan plan;
    CbrSpec cbr;
};

/// Parse and validate the nested-section key-value config text.  Scalars
/// carry SI unit suffixes ("10.6 km", "5 ps"); quotes around values are
/// optional.  Syntax and unknown-key errors raise ParseError with location;
/// semantic violations are collected and raised together as ValidationError;
/// a finite_speed model without influence_speed raises MissingModelParams.
LoadedConfig parse_config(const std::string& text, const std::string& origin = "<config>");

LoadedConfig load_config(const std::string& path);

}  // namespace fransim
