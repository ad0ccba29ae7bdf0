#pragma once

#include <stdexcept>
#include <string>

namespace scensim {

enum class ErrorCode {
    WellFormedness,
    UnknownType,
    SchemaViolation,
    ValueTypeMismatch,
    MissingBehaviour,
    BehaviourFault,
    EmptyRoute,
    DialectViolation,
    InconsistentInput,
    UnknownClassPath,
    UnknownObject,
    UnknownAttributePath,
    UnknownAttributeUUID,
    DecodeError,
    ProtocolViolation,
    NotOwner,
    StaleTimestamp,
    DuplicateLabel,
    ConnectFailure,
    ProtocolFault,
    SinkFailure,
    StartupTimeout,
    LibraryMismatch,
    UsageError,
};

const char* error_code_name(ErrorCode code);

/// Exception carrying an error code and, where it helps, a document path
/// such as "simulationObjects[0].vesselName".
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string path = "");

    ErrorCode code() const { return code_; }
    const std::string& path() const { return path_; }

private:
    ErrorCode code_;
    std::string path_;
};

} // namespace scensim
