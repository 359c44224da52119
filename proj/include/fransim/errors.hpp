#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fransim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A measuring frame was given a velocity with |v| >= c.
struct FrameSuperluminal : Error {
    using Error::Error;
};

/// Two events came out simultaneous (within tolerance) in a frame where a
/// strict order was required.  Surfaced instead of breaking the tie.
struct AmbiguousOrdering : Error {
    using Error::Error;
};

/// A collapse model was asked to evaluate without its required parameters
/// (e.g. finite-speed model without v_qi or a preferred frame).
struct MissingModelParams : Error {
    using Error::Error;
};

/// Configuration file syntax error, with 1-based position.
struct ParseError : Error {
    ParseError(const std::string& origin, int line, int column, const std::string& what_arg)
        : Error(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what_arg),
          line(line),
          column(column) {}
    int line;
    int column;
};

/// Field-level configuration violations; collects every failure found so a
/// bad file is reported in one pass.
struct ValidationError : Error {
    explicit ValidationError(std::vector<std::string> violations_in)
        : Error(join(violations_in)), violations(std::move(violations_in)) {}
    std::vector<std::string> violations;

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s;
        for (const auto& m : v) {
            if (!s.empty()) s += "; ";
            s += m;
        }
        return s;
    }
};

/// A configuration that parsed and validated but cannot drive a run
/// (e.g. non-integer bin count, missing choice device).
struct ConfigInvalid : Error {
    using Error::Error;
};

/// Least-squares fit cannot be performed on the given data.
struct FitDegenerate : Error {
    using Error::Error;
};

}  // namespace fransim
