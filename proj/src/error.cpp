#include "convpers/error.hpp"

namespace convpers {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::EmptyRegion: return "EmptyRegion";
        case ErrorKind::ChannelMismatch: return "ChannelMismatch";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::DimMismatch: return "DimMismatch";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::EmptySimplex: return "EmptySimplex";
        case ErrorKind::MalformedComplex: return "MalformedComplex";
        case ErrorKind::NonMonotone: return "NonMonotone";
        case ErrorKind::BadP: return "BadP";
        case ErrorKind::InfinitePoint: return "InfinitePoint";
        case ErrorKind::InfiniteMismatch: return "InfiniteMismatch";
        case ErrorKind::TooLarge: return "TooLarge";
        case ErrorKind::TooManyPoints: return "TooManyPoints";
        case ErrorKind::EmptyMatrix: return "EmptyMatrix";
        case ErrorKind::DegenerateData: return "DegenerateData";
        case ErrorKind::BadSpec: return "BadSpec";
        case ErrorKind::EmptyTrain: return "EmptyTrain";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorKind::MalformedHeader: return "MalformedHeader";
        case ErrorKind::IOError: return "IOError";
        case ErrorKind::ExperimentFailed: return "ExperimentFailed";
    }
    return "Unknown";
}

}  // namespace convpers
