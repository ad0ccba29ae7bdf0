#include "scensim/federate.hpp"

#include <algorithm>

#include "scensim/json_text.hpp"

namespace scensim {

void ObjectInstanceCache::add(const std::string&, SimulationObjectInstancePtr remote) {
    by_uuid_.emplace(remote->uuid(), std::move(remote));
}

SimulationObjectInstancePtr ObjectInstanceCache::find(const std::string& uuid) const {
    auto it = by_uuid_.find(uuid);
    return it == by_uuid_.end() ? nullptr : it->second;
}

ObservedView ObjectInstanceCache::view() const {
    std::vector<SimulationObjectInstancePtr> objects;
    objects.reserve(by_uuid_.size());
    for (const auto& [_, obj] : by_uuid_) objects.push_back(obj);
    return ObservedView(std::move(objects));
}

std::string class_path_for(const TypeRegistry& registry, const std::string& reference) {
    auto className = registry.resolve_class(reference);
    if (!className)
        throw Error(ErrorCode::UnknownType, "'" + reference + "' is not a library type");
    std::string path = kHlaObjectRoot;
    for (const auto& cls : registry.lineage(*className)) path += "." + cls;
    return path;
}

namespace {

nlohmann::json encode_binding(const AttributeBinding& binding, const AttributeValue& value) {
    if (binding.component.empty()) return encode_scalar(value);
    if (binding.component == "encoded") return render_route_json(value.as_route());
    const Position& p = value.as_position();
    if (binding.component == "latitude") return p.latitude;
    if (binding.component == "longitude") return p.longitude;
    return p.altitude;
}

void decode_into_binding(const AttributeBinding& binding, const nlohmann::json& value) {
    SimulationAttribute& attr = *binding.attribute;
    if (binding.component.empty()) {
        attr.set_value(decode_scalar(attr.data_type(), value));
        return;
    }
    if (binding.component == "encoded") {
        if (!value.is_string()) throw Error(ErrorCode::DecodeError, "route leaf must be a string");
        attr.set_value(AttributeValue(parse_route_json(value.get<std::string>())));
        return;
    }
    if (!value.is_number())
        throw Error(ErrorCode::DecodeError,
                    "position leaf '" + binding.component + "' must be a number");
    Position p = attr.value().as_position();
    double v = value.get<double>();
    if (binding.component == "latitude") p.latitude = v;
    else if (binding.component == "longitude") p.longitude = v;
    else p.altitude = v;
    attr.set_value(AttributeValue(p));
}

/// Encodes the publish-flagged attributes of `instance` for the wire.
std::map<std::string, nlohmann::json> encode_published_snapshot(const ReferenceStore& store) {
    std::map<std::string, nlohmann::json> out;
    for (const auto& path : store.published_attribute_paths()) {
        const AttributeBinding& binding = store.own_attribute_paths().at(path);
        out[path] = encode_binding(binding, binding.attribute->value());
    }
    return out;
}

} // namespace

void apply_reflection(ObjectInstanceCache& cache, ReferenceStore& store, const RtiMessage& msg) {
    const std::string uuid = msg.payload.value("objectUUID", "");
    if (!cache.find(uuid))
        throw Error(ErrorCode::UnknownObject,
                    "reflection for undiscovered object '" + uuid + "'");
    const auto& values = msg.payload.at("values");
    for (auto it = values.begin(); it != values.end(); ++it) {
        AttributeBinding binding = store.resolve_attribute(uuid, it.key());
        decode_into_binding(binding, it.value());
    }
}

std::map<std::string, nlohmann::json> commit_updates(SimulationObjectInstance& instance,
                                                     const ReferenceStore& store,
                                                     const AttributeUpdateMap& updates) {
    // Phase one only starts once every id resolves, so a bad map changes
    // nothing.
    std::vector<SimulationAttribute*> targets;
    targets.reserve(updates.size());
    for (const auto& [uuid, _] : updates) {
        SimulationAttribute* attr = instance.attribute_by_uuid(uuid);
        if (!attr)
            throw Error(ErrorCode::UnknownAttributeUUID,
                        "update for attribute '" + uuid + "' not owned by " + instance.uuid());
        targets.push_back(attr);
    }
    size_t i = 0;
    for (const auto& [_, value] : updates) targets[i++]->set_value(value);

    std::map<std::string, nlohmann::json> wire;
    for (const auto& [uuid, _] : updates) {
        const SimulationAttribute* attr = instance.attribute_by_uuid(uuid);
        if (!attr->publish()) continue;
        for (const auto& [path, binding] : store.own_attribute_paths())
            if (binding.attribute.get() == attr)
                wire[path] = encode_binding(binding, attr->value());
    }
    return wire;
}

namespace {

struct FederateSession {
    const FederateConfig& cfg;
    ObjectInstanceCache cache;
    FederateReport report;

    explicit FederateSession(const FederateConfig& c) : cfg(c) { report.federate_name = c.federate_name; }

    RtiMessage message(MessageKind kind, nlohmann::json payload = nlohmann::json::object(),
                       std::optional<double> timestamp = std::nullopt) {
        RtiMessage msg;
        msg.kind = kind;
        msg.sender = cfg.federate_name;
        msg.timestamp = timestamp;
        msg.payload = std::move(payload);
        return msg;
    }

    void handle_discover(const RtiMessage& msg) {
        const std::string uuid = msg.payload.value("objectUUID", "");
        const std::string classPath = msg.payload.value("classPath", "");
        if (!cache.find(uuid)) {
            auto mirror = make_remote_mirror(*cfg.registry, leaf_segment(classPath), uuid);
            cfg.reference_store->register_discovered(classPath, mirror);
            cache.add(classPath, mirror);
        }
        RtiMessage initial = msg;
        apply_reflection(cache, *cfg.reference_store, initial);
    }

    /// Waits for one of `kinds`, absorbing discovers on the way.
    RtiMessage await(std::initializer_list<MessageKind> kinds) {
        for (;;) {
            RecvResult r = cfg.channel->receive(cfg.recv_timeout);
            if (r.status == RecvStatus::Timeout)
                throw Error(ErrorCode::StartupTimeout, "no coordinator traffic within deadline");
            if (r.status == RecvStatus::Closed)
                throw Error(ErrorCode::ProtocolFault, "connection closed by coordinator");
            if (r.message.kind == MessageKind::Fault)
                throw Error(ErrorCode::ProtocolFault,
                            "coordinator fault: " + r.message.payload.value("detail", ""));
            if (r.message.kind == MessageKind::DiscoverObjectInstance) {
                handle_discover(r.message);
                continue;
            }
            for (MessageKind k : kinds)
                if (r.message.kind == k) return r.message;
            // Anything else at this point is out of protocol order; skip it.
        }
    }
};

} // namespace

FederateReport run_federate(const FederateConfig& cfg) {
    FederateSession session(cfg);
    FederateReport& report = session.report;
    ReferenceStore& store = *cfg.reference_store;

    auto snapshot_final = [&] {
        for (const auto& [name, attr] : cfg.instance->attributes())
            report.final_attributes[name] = attr->value();
    };

    try {
        cfg.channel->send(session.message(MessageKind::JoinFederation, {{"timeManaged", true}}));
        cfg.channel->send(session.message(MessageKind::FomModuleOffer,
                                          {{"module", render_fom_xml(cfg.fom_module)}}));

        const std::string ownPath = leaf_class_path(cfg.fom_module);
        cfg.channel->send(session.message(
            MessageKind::PublishObjectClass,
            {{"classPath", ownPath}, {"attributePaths", store.published_attribute_paths()}}));

        for (const auto& observed : cfg.instance->observed_classes()) {
            std::string classPath = class_path_for(*cfg.registry, observed.type);
            store.add_subscription(classPath);
            cfg.channel->send(session.message(
                MessageKind::SubscribeObjectClassAttributes,
                {{"classPath", classPath}, {"attributes", observed.attributes}}));
        }

        cfg.channel->send(session.message(
            MessageKind::RegisterObjectInstance,
            {{"objectUUID", cfg.instance->uuid()},
             {"classPath", ownPath},
             {"values", encode_published_snapshot(store)}}));

        RtiMessage announce = session.await({MessageKind::AnnounceSyncPoint});
        cfg.channel->send(session.message(MessageKind::SyncPointAchieved,
                                          {{"label", announce.payload.value("label", "")}}));
        session.await({MessageKind::FederationSynchronized});

        for (std::int64_t k = 1; k <= cfg.total_iterations; ++k) {
            if (cfg.drop_connection_at_step && *cfg.drop_connection_at_step == k) {
                cfg.channel->close();
                report.faulted = true;
                report.fault_detail = "connection dropped by fault injection";
                snapshot_final();
                return report;
            }
            double now = step_time(k, cfg.step_size);
            cfg.channel->send(session.message(MessageKind::TimeAdvanceRequest,
                                              nlohmann::json::object(), now));

            std::vector<RtiMessage> reflects;
            for (;;) {
                RecvResult r = cfg.channel->receive(cfg.recv_timeout);
                if (r.status == RecvStatus::Timeout)
                    throw Error(ErrorCode::ProtocolFault, "grant did not arrive within deadline");
                if (r.status == RecvStatus::Closed)
                    throw Error(ErrorCode::ProtocolFault, "connection closed mid-run");
                if (r.message.kind == MessageKind::Fault)
                    throw Error(ErrorCode::ProtocolFault,
                                "run aborted: " + r.message.payload.value("detail", ""));
                if (r.message.kind == MessageKind::DiscoverObjectInstance) {
                    session.handle_discover(r.message);
                    continue;
                }
                if (r.message.kind == MessageKind::ReflectAttributeValues) {
                    if (r.message.timestamp.value_or(0.0) > now)
                        throw Error(ErrorCode::ProtocolFault,
                                    "reflection ahead of requested time");
                    reflects.push_back(std::move(r.message));
                    continue;
                }
                if (r.message.kind == MessageKind::TimeAdvanceGrant) break;
            }

            for (const RtiMessage& reflect : reflects)
                apply_reflection(session.cache, store, reflect);

            AttributeUpdateMap updates;
            if (cfg.instance->behaviour()) {
                try {
                    updates = cfg.instance->behaviour()->next_step(cfg.step_size, *cfg.instance,
                                                                   session.cache.view());
                } catch (const std::exception& e) {
                    report.faulted = true;
                    report.fault_detail = std::string("behaviour fault: ") + e.what();
                    cfg.channel->send(session.message(MessageKind::ResignFederation));
                    snapshot_final();
                    return report;
                }
            }

            std::map<std::string, nlohmann::json> wire;
            try {
                wire = commit_updates(*cfg.instance, store, updates);
            } catch (const Error& e) {
                report.faulted = true;
                report.fault_detail = std::string("behaviour fault: ") + e.what();
                cfg.channel->send(session.message(MessageKind::ResignFederation));
                snapshot_final();
                return report;
            }
            if (!wire.empty()) {
                nlohmann::json values = nlohmann::json::object();
                for (const auto& [path, v] : wire) values[path] = v;
                cfg.channel->send(session.message(
                    MessageKind::UpdateAttributeValues,
                    {{"objectUUID", cfg.instance->uuid()}, {"values", values}}, now));
            }
            report.steps_executed = k;
        }

        cfg.channel->send(session.message(MessageKind::ResignFederation));
        snapshot_final();
        return report;
    } catch (const std::exception& e) {
        report.faulted = true;
        if (report.fault_detail.empty()) report.fault_detail = e.what();
        snapshot_final();
        return report;
    }
}

} // namespace scensim
