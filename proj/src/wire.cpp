#include "scensim/wire.hpp"

#include <array>
#include <cmath>

#include "scensim/json_text.hpp"

namespace scensim {

namespace {
constexpr std::array<const char*, 18> kKindNames = {
    "CreateFederation",
    "JoinFederation",
    "FomModuleOffer",
    "RegisterSyncPoint",
    "AnnounceSyncPoint",
    "SyncPointAchieved",
    "FederationSynchronized",
    "PublishObjectClass",
    "SubscribeObjectClassAttributes",
    "RegisterObjectInstance",
    "DiscoverObjectInstance",
    "UpdateAttributeValues",
    "ReflectAttributeValues",
    "TimeAdvanceRequest",
    "TimeAdvanceGrant",
    "ResignFederation",
    "DestroyFederation",
    "Fault",
};
} // namespace

const char* message_kind_name(MessageKind kind) {
    return kKindNames[static_cast<size_t>(kind)];
}

std::optional<MessageKind> message_kind_from_name(const std::string& name) {
    for (size_t i = 0; i < kKindNames.size(); ++i)
        if (name == kKindNames[i]) return static_cast<MessageKind>(i);
    return std::nullopt;
}

int kind_rank(MessageKind kind) { return static_cast<int>(kind); }

std::string RtiMessage::to_frame() const {
    nlohmann::json j;
    j["kind"] = message_kind_name(kind);
    j["sender"] = sender;
    if (timestamp) {
        if (!std::isfinite(*timestamp) || *timestamp < 0.0)
            throw Error(ErrorCode::ProtocolViolation, "timestamp must be finite and >= 0");
        j["timestamp"] = *timestamp;
    }
    j["payload"] = payload;
    return canonical_dump(j);
}

RtiMessage RtiMessage::from_frame(const std::string& bytes) {
    nlohmann::json j = nlohmann::json::parse(bytes, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw Error(ErrorCode::ProtocolViolation, "frame is not a JSON object");
    RtiMessage msg;
    auto kind = message_kind_from_name(j.value("kind", ""));
    if (!kind) throw Error(ErrorCode::ProtocolViolation, "unknown message kind");
    msg.kind = *kind;
    msg.sender = j.value("sender", "");
    if (j.contains("timestamp")) {
        double t = j.at("timestamp").get<double>();
        if (!std::isfinite(t) || t < 0.0)
            throw Error(ErrorCode::ProtocolViolation, "timestamp must be finite and >= 0");
        msg.timestamp = t;
    }
    if (j.contains("payload")) msg.payload = j.at("payload");
    return msg;
}

std::string frame_with_length(const std::string& frame) {
    std::string out;
    out.reserve(frame.size() + 4);
    auto n = static_cast<std::uint32_t>(frame.size());
    out += static_cast<char>((n >> 24) & 0xFF);
    out += static_cast<char>((n >> 16) & 0xFF);
    out += static_cast<char>((n >> 8) & 0xFF);
    out += static_cast<char>(n & 0xFF);
    out += frame;
    return out;
}

} // namespace scensim
