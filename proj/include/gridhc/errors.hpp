#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gridhc {

/// Stable machine-readable error codes; every thrown Error carries one.
enum class ErrorCode {
    parse,            // malformed feeder file (syntax or field type)
    validation,       // feeder violates a model invariant
    singular,         // singular impedance / admittance matrix
    no_convergence,   // load-flow iteration exceeded max_iter
    voltage_collapse, // load-flow solution hit the collapse floor
    infeasible_limit, // voltage limit at or below a base-case load voltage
    bad_bracket,      // bisection bracket does not enclose the target
    all_unbounded,    // no scenario in the study has a binding constraint
    usage,            // bad CLI arguments / study configuration
    io,               // file system failure
};

constexpr const char* code_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::parse: return "E_PARSE";
    case ErrorCode::validation: return "E_VALIDATE";
    case ErrorCode::singular: return "E_SINGULAR";
    case ErrorCode::no_convergence: return "E_NO_CONVERGENCE";
    case ErrorCode::voltage_collapse: return "E_COLLAPSE";
    case ErrorCode::infeasible_limit: return "E_LIMIT";
    case ErrorCode::bad_bracket: return "E_BRACKET";
    case ErrorCode::all_unbounded: return "E_UNBOUNDED";
    case ErrorCode::usage: return "E_USAGE";
    case ErrorCode::io: return "E_IO";
    }
    return "E_UNKNOWN";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool ok, ErrorCode code, const std::string& message) {
    if (!ok) fail(code, message);
}

} // namespace gridhc
