#include "simmark/error.hpp"

namespace simmark {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::EmptyText: return "EmptyText";
    case Errc::TooShort: return "TooShort";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::InvalidP0: return "InvalidP0";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::NoOverlap: return "NoOverlap";
    case Errc::TargetUnreachable: return "TargetUnreachable";
    case Errc::InvalidProbability: return "InvalidProbability";
    case Errc::AllDropped: return "AllDropped";
    case Errc::MissingClass: return "MissingClass";
    case Errc::InvalidRequest: return "InvalidRequest";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::ProvenanceMismatch: return "ProvenanceMismatch";
    case Errc::ParseError: return "ParseError";
    case Errc::CandidateEmpty: return "CandidateEmpty";
    case Errc::EmptyParaphrase: return "EmptyParaphrase";
    case Errc::RemoteUnavailable: return "RemoteUnavailable";
    case Errc::GeneratorUnavailable: return "GeneratorUnavailable";
    case Errc::EmbedderUnavailable: return "EmbedderUnavailable";
    case Errc::ParaphraserUnavailable: return "ParaphraserUnavailable";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace simmark
