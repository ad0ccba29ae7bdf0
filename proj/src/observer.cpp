#include "scensim/observer.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>

#include "scensim/federate.hpp"
#include "scensim/json_text.hpp"
#include "scensim/reference_store.hpp"
#include "scensim/websocket.hpp"

namespace scensim {

namespace {

void append_value(std::string& out, const AttributeValue& v) {
    switch (v.kind()) {
        case DataType::Boolean: out += v.as_bool() ? "true" : "false"; break;
        case DataType::Integer: out += format_int(v.as_int()); break;
        case DataType::Double: out += format_double(v.as_double()); break;
        case DataType::String:
            out += '"';
            append_json_escaped(out, v.as_string());
            out += '"';
            break;
        case DataType::Position: out += render_position_json(v.as_position()); break;
        case DataType::Route: out += render_route_json(v.as_route()); break;
    }
}

} // namespace

std::string encode_record(const ObserverRecord& record) {
    std::string out = "{\"step\":";
    out += format_int(record.step);
    out += ",\"time\":";
    out += format_double(record.time);
    out += ",\"objectUUID\":\"";
    append_json_escaped(out, record.object_uuid);
    out += "\",\"classPath\":\"";
    append_json_escaped(out, record.class_path);
    out += "\",\"attributes\":{";
    bool first = true;
    for (const auto& [name, value] : record.attributes) {
        if (!first) out += ',';
        first = false;
        out += '"';
        append_json_escaped(out, name);
        out += "\":";
        append_value(out, value);
    }
    out += "}}";
    return out;
}

namespace {

class StdoutSink : public ObserverSink {
public:
    void write_line(const std::string& line) override {
        std::fwrite(line.data(), 1, line.size(), stdout);
        std::fputc('\n', stdout);
    }
};

class FileSink : public ObserverSink {
public:
    explicit FileSink(const std::string& path) : file_(std::fopen(path.c_str(), "wb")) {
        if (!file_) throw Error(ErrorCode::SinkFailure, "cannot open '" + path + "' for writing");
    }
    ~FileSink() override { close(); }

    void write_line(const std::string& line) override {
        if (!file_) throw Error(ErrorCode::SinkFailure, "sink already closed");
        if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() ||
            std::fputc('\n', file_) == EOF)
            throw Error(ErrorCode::SinkFailure, "short write to stream file");
    }

    void close() override {
        if (file_) {
            std::fclose(file_);
            file_ = nullptr;
        }
    }

private:
    std::FILE* file_;
};

class WebSocketSink : public ObserverSink {
public:
    WebSocketSink(const std::string& host, std::uint16_t port) : server_(host, port) {}

    void write_line(const std::string& line) override { server_.broadcast_text(line); }
    void close() override { server_.stop(); }

private:
    WebSocketBroadcastServer server_;
};

} // namespace

ObserverSinkPtr make_stdout_sink() { return std::make_shared<StdoutSink>(); }
ObserverSinkPtr make_file_sink(const std::string& path) { return std::make_shared<FileSink>(path); }
ObserverSinkPtr make_websocket_sink(const std::string& host, std::uint16_t port) {
    return std::make_shared<WebSocketSink>(host, port);
}

ObserverStream::ObserverStream(std::vector<ObserverSinkPtr> sinks) : sinks_(std::move(sinks)) {}

void ObserverStream::track(const std::string& objectUUID, const std::string& classPath) {
    objects_.emplace(objectUUID, Tracked{classPath, {}, {}, false});
}

bool ObserverStream::tracked(const std::string& objectUUID) const {
    return objects_.count(objectUUID) > 0;
}

void ObserverStream::set_value(const std::string& objectUUID, const std::string& attributeName,
                               AttributeValue value) {
    auto it = objects_.find(objectUUID);
    if (it == objects_.end())
        throw Error(ErrorCode::UnknownObject, "value for untracked object '" + objectUUID + "'");
    it->second.visible[attributeName] = std::move(value);
}

std::int64_t ObserverStream::emit_step(std::int64_t step, double time) {
    std::int64_t emitted = 0;
    for (auto& [uuid, tracked] : objects_) { // map order = sorted by object id
        bool changed = !tracked.emitted_once || tracked.visible != tracked.last_emitted;
        if (!changed) continue;
        ObserverRecord record{step, time, uuid, tracked.class_path, tracked.visible};
        std::string line = encode_record(record);
        for (const auto& sink : sinks_) sink->write_line(line);
        tracked.last_emitted = tracked.visible;
        tracked.emitted_once = true;
        ++emitted;
    }
    return emitted;
}

namespace {

/// Maps flattened wire paths to (attribute name, component, scalar type)
/// for one discovered class, via the library lineage.
struct PathDecoder {
    struct Entry {
        std::string attribute;
        std::string component; // "", latitude/longitude/altitude, encoded
        DataType attribute_type = DataType::Double;
    };
    std::map<std::string, Entry> by_path;
};

PathDecoder build_path_decoder(const TypeRegistry& registry, const std::string& classPath) {
    PathDecoder decoder;
    std::string leaf = leaf_segment(classPath);
    auto className = registry.resolve_class(leaf);
    if (!className)
        throw Error(ErrorCode::UnknownType, "discovered class '" + leaf + "' is not in the library");
    std::string prefix = kHlaObjectRoot;
    for (const auto& cls : registry.lineage(*className)) {
        prefix += "." + cls;
        for (const auto& def : registry.descriptor(cls).own_attributes) {
            for (const auto& [leafName, _] : flatten_attribute(def.name, def.type)) {
                PathDecoder::Entry entry;
                entry.attribute = def.name;
                entry.attribute_type = def.type;
                if (def.type == DataType::Position)
                    entry.component = leafName.substr(leafName.rfind('.') + 1);
                else if (def.type == DataType::Route)
                    entry.component = "encoded";
                decoder.by_path[prefix + "." + leafName] = std::move(entry);
            }
        }
    }
    return decoder;
}

} // namespace

ObserverReport run_observer(const ObserverRunConfig& cfg) {
    ObserverReport report;
    report.federate_name = cfg.federate_name;

    ObserverStream stream(cfg.sinks);
    std::map<std::string, PathDecoder> decoders;           // by classPath
    std::map<std::string, std::string> objectClassPath;    // objectUUID -> classPath
    std::map<std::string, std::map<std::string, AttributeValue>> composites;

    auto message = [&cfg](MessageKind kind, nlohmann::json payload = nlohmann::json::object(),
                          std::optional<double> timestamp = std::nullopt) {
        RtiMessage msg;
        msg.kind = kind;
        msg.sender = cfg.federate_name;
        msg.timestamp = timestamp;
        msg.payload = std::move(payload);
        return msg;
    };

    auto apply_values = [&](const std::string& uuid, const nlohmann::json& values) {
        const PathDecoder& decoder = decoders.at(objectClassPath.at(uuid));
        for (auto it = values.begin(); it != values.end(); ++it) {
            auto entry = decoder.by_path.find(it.key());
            if (entry == decoder.by_path.end())
                throw Error(ErrorCode::UnknownAttributePath,
                            "reflected path '" + it.key() + "' is not decodable");
            const auto& e = entry->second;
            if (e.component.empty()) {
                stream.set_value(uuid, e.attribute,
                                 decode_scalar(e.attribute_type, it.value()));
            } else if (e.component == "encoded") {
                if (!it.value().is_string())
                    throw Error(ErrorCode::DecodeError, "route leaf must be a string");
                stream.set_value(uuid,
                                 e.attribute,
                                 AttributeValue(parse_route_json(it.value().get<std::string>())));
            } else {
                if (!it.value().is_number())
                    throw Error(ErrorCode::DecodeError, "position leaf must be a number");
                auto& slot = composites[uuid];
                auto found = slot.find(e.attribute);
                Position p = found == slot.end() ? Position{} : found->second.as_position();
                double v = it.value().get<double>();
                if (e.component == "latitude") p.latitude = v;
                else if (e.component == "longitude") p.longitude = v;
                else p.altitude = v;
                slot[e.attribute] = AttributeValue(p);
                stream.set_value(uuid, e.attribute, AttributeValue(p));
            }
        }
    };

    auto handle_discover = [&](const RtiMessage& msg) {
        std::string uuid = msg.payload.value("objectUUID", "");
        std::string classPath = msg.payload.value("classPath", "");
        if (!stream.tracked(uuid)) {
            if (!decoders.count(classPath))
                decoders.emplace(classPath, build_path_decoder(*cfg.registry, classPath));
            objectClassPath[uuid] = classPath;
            stream.track(uuid, classPath);
        }
        apply_values(uuid, msg.payload.at("values"));
    };

    try {
        cfg.channel->send(message(MessageKind::JoinFederation, {{"timeManaged", true}}));
        for (const auto& observed : cfg.config.observed_classes) {
            std::string classPath = class_path_for(*cfg.registry, observed.type);
            cfg.channel->send(message(MessageKind::SubscribeObjectClassAttributes,
                                      {{"classPath", classPath},
                                       {"attributes", observed.attributes}}));
        }

        // Announce, discovers, achieve, synchronized.
        bool achieved = false, synchronized = false;
        while (!synchronized) {
            RecvResult r = cfg.channel->receive(cfg.recv_timeout);
            if (r.status == RecvStatus::Timeout)
                throw Error(ErrorCode::StartupTimeout, "no coordinator traffic within deadline");
            if (r.status == RecvStatus::Closed)
                throw Error(ErrorCode::ProtocolFault, "connection closed by coordinator");
            switch (r.message.kind) {
                case MessageKind::DiscoverObjectInstance: handle_discover(r.message); break;
                case MessageKind::AnnounceSyncPoint:
                    if (!achieved) {
                        cfg.channel->send(message(
                            MessageKind::SyncPointAchieved,
                            {{"label", r.message.payload.value("label", "")}}));
                        achieved = true;
                    }
                    break;
                case MessageKind::FederationSynchronized: synchronized = true; break;
                case MessageKind::Fault:
                    throw Error(ErrorCode::ProtocolFault,
                                "run aborted: " + r.message.payload.value("detail", ""));
                default: break;
            }
        }

        report.records_emitted += stream.emit_step(0, 0.0);

        // One extra request/grant round drains the final step's reflections.
        for (std::int64_t k = 1; k <= cfg.total_iterations + 1; ++k) {
            cfg.channel->send(message(MessageKind::TimeAdvanceRequest, nlohmann::json::object(),
                                      step_time(k, cfg.step_size)));
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
                    handle_discover(r.message);
                    continue;
                }
                if (r.message.kind == MessageKind::ReflectAttributeValues) {
                    reflects.push_back(std::move(r.message));
                    continue;
                }
                if (r.message.kind == MessageKind::TimeAdvanceGrant) break;
            }
            // Reflections arrive grouped by publish time; records carry the
            // publishers' step, not the drain round that delivered them.
            size_t i = 0;
            while (i < reflects.size()) {
                double ts = reflects[i].timestamp.value_or(0.0);
                while (i < reflects.size() &&
                       bits_equal(reflects[i].timestamp.value_or(0.0), ts)) {
                    apply_values(reflects[i].payload.value("objectUUID", ""),
                                 reflects[i].payload.at("values"));
                    ++i;
                }
                auto step = static_cast<std::int64_t>(std::llround(ts / cfg.step_size));
                report.records_emitted += stream.emit_step(step, ts);
            }
        }

        cfg.channel->send(message(MessageKind::ResignFederation));
        for (const auto& sink : cfg.sinks) sink->close();
        return report;
    } catch (const std::exception& e) {
        report.faulted = true;
        report.fault_detail = e.what();
        for (const auto& sink : cfg.sinks) sink->close();
        return report;
    }
}

} // namespace scensim
