#include "moca/errors.h"

namespace moca {

Error::Error(ErrorCode code, const std::string & message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

const char * error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyInput:         return "EmptyInput";
        case ErrorCode::MalformedTags:      return "MalformedTags";
        case ErrorCode::NoPerceptionBlocks: return "NoPerceptionBlocks";
        case ErrorCode::OffsetsOutOfOrder:  return "OffsetsOutOfOrder";
        case ErrorCode::OffsetsBeyondRaw:   return "OffsetsBeyondRaw";
        case ErrorCode::EmptyField:         return "EmptyField";
        case ErrorCode::EmptyQuestion:      return "EmptyQuestion";
        case ErrorCode::OracleUnavailable:  return "OracleUnavailable";
        case ErrorCode::CassetteMiss:       return "CassetteMiss";
        case ErrorCode::AuthMissing:        return "AuthMissing";
        case ErrorCode::Exhausted:          return "Exhausted";
        case ErrorCode::GroupTooSmall:      return "GroupTooSmall";
        case ErrorCode::SpanMapMismatch:    return "SpanMapMismatch";
        case ErrorCode::AlignmentError:     return "AlignmentError";
        case ErrorCode::EmptyList:          return "EmptyList";
        case ErrorCode::LengthMismatch:     return "LengthMismatch";
        case ErrorCode::EmptyMatrix:        return "EmptyMatrix";
        case ErrorCode::InvalidProbability: return "InvalidProbability";
        case ErrorCode::FileNotFound:       return "FileNotFound";
        case ErrorCode::SchemaViolation:    return "SchemaViolation";
        case ErrorCode::IoError:            return "IoError";
    }
    return "UnknownError";
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::FileNotFound:
        case ErrorCode::SchemaViolation:
        case ErrorCode::IoError:
            return 2;
        case ErrorCode::OracleUnavailable:
        case ErrorCode::CassetteMiss:
        case ErrorCode::AuthMissing:
        case ErrorCode::Exhausted:
            return 3;
        default:
            return 4;
    }
}

}  // namespace moca
