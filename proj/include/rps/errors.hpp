#pragma once

#include <stdexcept>
#include <string>

namespace rps {

// Numerical failure inside a sampler or kernel evaluation (as opposed to a
// caller mistake, which is reported via std::invalid_argument).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// log_map / grad_dist_sq requested at (or numerically indistinguishable from)
// the cut locus, where the geodesic is not unique.
class CutLocusError : public NumericError {
public:
    explicit CutLocusError(const std::string& what) : NumericError(what) {}
};

// A rejection sampler exhausted its proposal budget.  Carries the measured
// acceptance rate so the caller can report something actionable.
class RejectionCapError : public NumericError {
public:
    RejectionCapError(const std::string& what, long proposals, double acceptance_rate)
        : NumericError(what), proposals(proposals), acceptance_rate(acceptance_rate) {}

    long proposals;
    double acceptance_rate;
};

// choose_truncation could not find a series level meeting the tolerance
// within its search cap.
class TruncationError : public NumericError {
public:
    explicit TruncationError(const std::string& what) : NumericError(what) {}
};

// Config-file problem; names the offending field so the CLI can echo it.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error("config field '" + field + "': " + what), field(field) {}

    std::string field;
};

} // namespace rps
