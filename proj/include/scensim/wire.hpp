#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "scensim/error.hpp"

namespace scensim {

enum class MessageKind {
    CreateFederation,
    JoinFederation,
    FomModuleOffer,
    RegisterSyncPoint,
    AnnounceSyncPoint,
    SyncPointAchieved,
    FederationSynchronized,
    PublishObjectClass,
    SubscribeObjectClassAttributes,
    RegisterObjectInstance,
    DiscoverObjectInstance,
    UpdateAttributeValues,
    ReflectAttributeValues,
    TimeAdvanceRequest,
    TimeAdvanceGrant,
    ResignFederation,
    DestroyFederation,
    Fault,
};

const char* message_kind_name(MessageKind kind);
std::optional<MessageKind> message_kind_from_name(const std::string& name);

/// Processing rank: protocol phase order, used to sort a drained inbox
/// batch deterministically.
int kind_rank(MessageKind kind);

/// Envelope for all federation traffic. `timestamp` is logical seconds and
/// present on update/reflect/TAR/TAG messages.
struct RtiMessage {
    MessageKind kind = MessageKind::Fault;
    std::string sender;
    std::optional<double> timestamp;
    nlohmann::json payload = nlohmann::json::object();

    std::string to_frame() const;
    static RtiMessage from_frame(const std::string& bytes);
};

/// 4-byte big-endian length prefix in front of the frame bytes.
std::string frame_with_length(const std::string& frame);

} // namespace scensim
