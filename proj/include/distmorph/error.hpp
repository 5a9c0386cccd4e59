#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace distmorph {

enum class ErrorCode {
    InvalidArgument,
    InvalidIndex,
    DegenerateSimplex,
    DegenerateImage,
    OrientationReversal,
    IncompatibleMaps,
    Precondition,
    Stagnation,
    ConvergenceFailure,
    GenerationFailure,
    ValidationFailure,
    Parse,
    Io,
};

const char* to_string(ErrorCode code);

/// Single exception type for the library. The code classifies the failure;
/// `index()` carries the offending simplex, vertex, frame or line when known.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message,
          std::optional<std::size_t> index = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> index_;
};

} // namespace distmorph
