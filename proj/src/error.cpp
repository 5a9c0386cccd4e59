#include <distmorph/error.hpp>

namespace distmorph {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::InvalidIndex: return "invalid index";
    case ErrorCode::DegenerateSimplex: return "degenerate simplex";
    case ErrorCode::DegenerateImage: return "degenerate image";
    case ErrorCode::OrientationReversal: return "orientation reversal";
    case ErrorCode::IncompatibleMaps: return "incompatible maps";
    case ErrorCode::Precondition: return "precondition violated";
    case ErrorCode::Stagnation: return "stagnation";
    case ErrorCode::ConvergenceFailure: return "convergence failure";
    case ErrorCode::GenerationFailure: return "generation failure";
    case ErrorCode::ValidationFailure: return "validation failure";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Io: return "i/o error";
    }
    return "unknown error";
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> index)
    : std::runtime_error(std::string(to_string(code)) + ": " + message)
    , code_(code)
    , index_(index) {
}

} // namespace distmorph
