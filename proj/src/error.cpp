#include "scensim/error.hpp"

namespace scensim {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::WellFormedness: return "WellFormedness";
        case ErrorCode::UnknownType: return "UnknownType";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::ValueTypeMismatch: return "ValueTypeMismatch";
        case ErrorCode::MissingBehaviour: return "MissingBehaviour";
        case ErrorCode::BehaviourFault: return "BehaviourFault";
        case ErrorCode::EmptyRoute: return "EmptyRoute";
        case ErrorCode::DialectViolation: return "DialectViolation";
        case ErrorCode::InconsistentInput: return "InconsistentInput";
        case ErrorCode::UnknownClassPath: return "UnknownClassPath";
        case ErrorCode::UnknownObject: return "UnknownObject";
        case ErrorCode::UnknownAttributePath: return "UnknownAttributePath";
        case ErrorCode::UnknownAttributeUUID: return "UnknownAttributeUUID";
        case ErrorCode::DecodeError: return "DecodeError";
        case ErrorCode::ProtocolViolation: return "ProtocolViolation";
        case ErrorCode::NotOwner: return "NotOwner";
        case ErrorCode::StaleTimestamp: return "StaleTimestamp";
        case ErrorCode::DuplicateLabel: return "DuplicateLabel";
        case ErrorCode::ConnectFailure: return "ConnectFailure";
        case ErrorCode::ProtocolFault: return "ProtocolFault";
        case ErrorCode::SinkFailure: return "SinkFailure";
        case ErrorCode::StartupTimeout: return "StartupTimeout";
        case ErrorCode::LibraryMismatch: return "LibraryMismatch";
        case ErrorCode::UsageError: return "UsageError";
    }
    return "Unknown";
}

namespace {
std::string compose(ErrorCode code, const std::string& message, const std::string& path) {
    std::string out = error_code_name(code);
    out += ": ";
    out += message;
    if (!path.empty()) {
        out += " (at ";
        out += path;
        out += ")";
    }
    return out;
}
} // namespace

Error::Error(ErrorCode code, const std::string& message, std::string path)
    : std::runtime_error(compose(code, message, path)), code_(code), path_(std::move(path)) {}

} // namespace scensim
