#pragma once

#include <stdexcept>
#include <string>

namespace moca {

enum class ErrorCode {
    EmptyInput,
    MalformedTags,
    NoPerceptionBlocks,
    OffsetsOutOfOrder,
    OffsetsBeyondRaw,
    EmptyField,
    EmptyQuestion,
    OracleUnavailable,
    CassetteMiss,
    AuthMissing,
    Exhausted,
    GroupTooSmall,
    SpanMapMismatch,
    AlignmentError,
    EmptyList,
    LengthMismatch,
    EmptyMatrix,
    InvalidProbability,
    FileNotFound,
    SchemaViolation,
    IoError,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string & message);

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

const char * error_code_name(ErrorCode code);

// Process exit codes: 0 success, 2 schema/file error, 3 oracle failure,
// 4 precondition violation.
int exit_code_for(ErrorCode code);

}  // namespace moca
