#pragma once

#include <stdexcept>
#include <string>

namespace dbond {

// Machine-readable failure reasons; the message carries the human diagnostic.
enum class errc {
    bad_window,
    bad_recovery,
    negative_variance,
    bad_correlation,
    already_defaulted,
    unsupported_correlation,
    unsupported_case,
    bad_parameter,
    parse_error,
    schema_error,
    io_error,
    blow_up,
    not_converged,
    degenerate_horizon,
    inconsistent,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::bad_window: return "BadWindow";
        case errc::bad_recovery: return "BadRecovery";
        case errc::negative_variance: return "NegativeVariance";
        case errc::bad_correlation: return "BadCorrelation";
        case errc::already_defaulted: return "AlreadyDefaulted";
        case errc::unsupported_correlation: return "UnsupportedCorrelation";
        case errc::unsupported_case: return "UnsupportedCase";
        case errc::bad_parameter: return "BadParameter";
        case errc::parse_error: return "ParseError";
        case errc::schema_error: return "SchemaError";
        case errc::io_error: return "IoError";
        case errc::blow_up: return "BlowUp";
        case errc::not_converged: return "NotConverged";
        case errc::degenerate_horizon: return "DegenerateHorizon";
        case errc::inconsistent: return "Inconsistent";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

} // namespace dbond
