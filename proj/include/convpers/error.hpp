#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace convpers {

/// Machine-readable error categories. The CLI prints the category name and
/// maps each category to an exit code (see README).
enum class ErrorKind {
    EmptyRegion,
    ChannelMismatch,
    ShapeMismatch,
    DimMismatch,
    LengthMismatch,
    InvalidArgument,
    EmptySimplex,
    MalformedComplex,
    NonMonotone,
    BadP,
    InfinitePoint,
    InfiniteMismatch,
    TooLarge,
    TooManyPoints,
    EmptyMatrix,
    DegenerateData,
    BadSpec,
    EmptyTrain,
    TooFewSamples,
    UnsupportedFormat,
    MalformedHeader,
    IOError,
    ExperimentFailed,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace convpers
