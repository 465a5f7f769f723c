#pragma once

#include <stdexcept>
#include <string>

namespace loadid {

/// Error taxonomy shared by the library and the CLI exit-code mapping.
enum class ErrorCode {
    MalformedFile,
    NonUniformSampling,
    EmptyFile,
    IoFailure,
    InvalidCutoff,
    SignalTooShort,
    InsufficientTaps,
    SingularDesign,
    StackMismatch,
    NoValidSamples,
    InvalidParams,
    InvalidConfig,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedFile:      return "MalformedFile";
        case ErrorCode::NonUniformSampling: return "NonUniformSampling";
        case ErrorCode::EmptyFile:          return "EmptyFile";
        case ErrorCode::IoFailure:          return "IoFailure";
        case ErrorCode::InvalidCutoff:      return "InvalidCutoff";
        case ErrorCode::SignalTooShort:     return "SignalTooShort";
        case ErrorCode::InsufficientTaps:   return "InsufficientTaps";
        case ErrorCode::SingularDesign:     return "SingularDesign";
        case ErrorCode::StackMismatch:      return "StackMismatch";
        case ErrorCode::NoValidSamples:     return "NoValidSamples";
        case ErrorCode::InvalidParams:      return "InvalidParams";
        case ErrorCode::InvalidConfig:      return "InvalidConfig";
    }
    return "UnknownError";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace loadid
