#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace simmark {

enum class Errc {
    EmptyText,
    TooShort,
    EmptyInput,
    DimensionMismatch,
    ZeroVector,
    InsufficientData,
    InvalidP0,
    InsufficientSamples,
    NoOverlap,
    TargetUnreachable,
    InvalidProbability,
    AllDropped,
    MissingClass,
    InvalidRequest,
    InvalidConfig,
    ProvenanceMismatch,
    ParseError,
    CandidateEmpty,
    EmptyParaphrase,
    // Remote failures. These map to exit code 2 in the CLI.
    RemoteUnavailable,
    GeneratorUnavailable,
    EmbedderUnavailable,
    ParaphraserUnavailable,
    IoError,
};

std::string_view to_string(Errc code) noexcept;

/// True for failures caused by the environment (network, filesystem) rather than bad input.
constexpr bool is_runtime_failure(Errc code) noexcept {
    switch (code) {
    case Errc::RemoteUnavailable:
    case Errc::GeneratorUnavailable:
    case Errc::EmbedderUnavailable:
    case Errc::ParaphraserUnavailable:
    case Errc::IoError:
        return true;
    default:
        return false;
    }
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace simmark
