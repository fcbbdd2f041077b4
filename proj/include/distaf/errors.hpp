#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace distaf {

enum class ErrorCode {
    MalformedCode,
    ParseError,
    IoError,
    NoScorableChildren,
    OutOfRange,
    NoQuestionForPhase,
    BadAnswerIndex,
    UnknownStandard,
    UnknownCode,
    UnknownMechanism,
    UnknownPillar,
    UnknownTemplate,
    UnknownAssessment,
    UnknownPredecessor,
    TemplateMismatch,
    DuplicateAssessment,
    NotDraft,
    RevisionConflict,
    IncompleteAssessment,
    UnsupportedFormat,
    Forbidden,
    AuthenticationFailed,
    DuplicateUsername,
    UnknownUser,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::MalformedCode: return "MalformedCode";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NoScorableChildren: return "NoScorableChildren";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NoQuestionForPhase: return "NoQuestionForPhase";
    case ErrorCode::BadAnswerIndex: return "BadAnswerIndex";
    case ErrorCode::UnknownStandard: return "UnknownStandard";
    case ErrorCode::UnknownCode: return "UnknownCode";
    case ErrorCode::UnknownMechanism: return "UnknownMechanism";
    case ErrorCode::UnknownPillar: return "UnknownPillar";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::UnknownAssessment: return "UnknownAssessment";
    case ErrorCode::UnknownPredecessor: return "UnknownPredecessor";
    case ErrorCode::TemplateMismatch: return "TemplateMismatch";
    case ErrorCode::DuplicateAssessment: return "DuplicateAssessment";
    case ErrorCode::NotDraft: return "NotDraft";
    case ErrorCode::RevisionConflict: return "RevisionConflict";
    case ErrorCode::IncompleteAssessment: return "IncompleteAssessment";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::Forbidden: return "Forbidden";
    case ErrorCode::AuthenticationFailed: return "AuthenticationFailed";
    case ErrorCode::DuplicateUsername: return "DuplicateUsername";
    case ErrorCode::UnknownUser: return "UnknownUser";
    }
    return "Unknown";
}

/// Every domain failure in the library is reported as an Error carrying a
/// machine-readable code; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace distaf
