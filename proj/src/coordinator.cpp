#include "scensim/coordinator.hpp"

#include <algorithm>

#include "scensim/reference_store.hpp"

namespace scensim {

namespace {

RtiMessage make_rti_message(MessageKind kind, nlohmann::json payload = nlohmann::json::object(),
                            std::optional<double> timestamp = std::nullopt) {
    RtiMessage msg;
    msg.kind = kind;
    msg.sender = "rti";
    msg.timestamp = timestamp;
    msg.payload = std::move(payload);
    return msg;
}

} // namespace

Coordinator::Coordinator(ServerEndpoint& endpoint, CoordinatorOptions options)
    : endpoint_(endpoint), options_(std::move(options)) {
    for (const auto& module : options_.preloaded_modules) merge_module(module);
}

void Coordinator::merge_module(const FOMModule& module) {
    const FOMObjectClass* cls = &module.root;
    std::string path;
    for (;;) {
        path = path.empty() ? cls->name : path + "." + cls->name;
        auto& leaves = class_tree_[path];
        for (const auto& attr : cls->attributes) leaves[attr.name] = attr.data_type;
        if (cls->children.empty()) break;
        cls = &cls->children.front();
    }
}

void Coordinator::run() {
    using namespace std::chrono_literals;
    while (!done_) {
        if (stop_requested_.load()) {
            abort_run("stop requested");
            break;
        }
        auto first = endpoint_.next_event(100ms);
        if (!first) continue;

        std::vector<Item> batch;
        batch.push_back(Item{{}, first->conn, first->closed, arrival_counter_++});
        if (!first->closed) {
            try {
                batch.back().message = RtiMessage::from_frame(first->frame);
                if (options_.audit) options_.audit("in", batch.back().message.sender, first->frame);
            } catch (const Error&) {
                fault_and_eject(first->conn, ErrorCode::ProtocolViolation, "unparseable frame");
                continue;
            }
        }
        while (auto more = endpoint_.poll_event()) {
            Item item{{}, more->conn, more->closed, arrival_counter_++};
            if (!more->closed) {
                try {
                    item.message = RtiMessage::from_frame(more->frame);
                    if (options_.audit) options_.audit("in", item.message.sender, more->frame);
                } catch (const Error&) {
                    fault_and_eject(more->conn, ErrorCode::ProtocolViolation, "unparseable frame");
                    continue;
                }
            }
            batch.push_back(std::move(item));
        }

        // Deterministic batch order: (monotonized timestamp, sender, arrival).
        // A sender's untimestamped messages inherit its latest timestamp so
        // the sort can never invert per-connection FIFO. CreateFederation
        // bootstraps everything and goes first; connection closures are the
        // final event of their connection and go last.
        for (auto& item : batch) {
            if (item.closed) {
                item.sort_ts = 1e300;
                continue;
            }
            if (item.message.kind == MessageKind::CreateFederation) {
                item.sort_ts = -2.0;
                continue;
            }
            auto [slot, inserted] = last_sender_ts_.try_emplace(item.message.sender, -1.0);
            if (item.message.timestamp)
                slot->second = std::max(slot->second, *item.message.timestamp);
            item.sort_ts = slot->second;
        }
        std::stable_sort(batch.begin(), batch.end(), [](const Item& a, const Item& b) {
            if (a.sort_ts != b.sort_ts) return a.sort_ts < b.sort_ts;
            if (a.message.sender != b.message.sender) return a.message.sender < b.message.sender;
            return a.arrival < b.arrival;
        });

        for (auto& item : batch) {
            if (done_) break;
            process(item);
        }
    }
}

void Coordinator::process(Item& item) {
    if (item.closed) {
        handle_closed(item.conn);
        return;
    }
    if (options_.keep_event_log)
        event_log_.push_back({CoordinatorEvent::Dir::In, item.message.sender, item.message.kind,
                              item.message.timestamp, item.message.payload});
    try {
        handle_message(item.conn, item.message);
    } catch (const Error& e) {
        fault_and_eject(item.conn, e.code(), e.what());
    } catch (const std::exception& e) {
        fault_and_eject(item.conn, ErrorCode::ProtocolViolation, e.what());
    }
}

Coordinator::Member* Coordinator::member_by_conn(std::uint64_t conn) {
    auto it = conn_to_name_.find(conn);
    if (it == conn_to_name_.end()) return nullptr;
    return member_by_name(it->second);
}

Coordinator::Member* Coordinator::member_by_name(const std::string& name) {
    auto it = members_.find(name);
    return it == members_.end() ? nullptr : &it->second;
}

void Coordinator::send_to(Member& member, const RtiMessage& msg) {
    std::string frame = msg.to_frame();
    if (options_.audit) options_.audit("out", member.name, frame);
    if (options_.keep_event_log)
        event_log_.push_back(
            {CoordinatorEvent::Dir::Out, member.name, msg.kind, msg.timestamp, msg.payload});
    endpoint_.send(member.conn, frame);
}

void Coordinator::record_fault(const std::string& text) {
    std::lock_guard<std::mutex> lock(status_mutex_);
    faults_.push_back(text);
}

void Coordinator::fault_and_eject(std::uint64_t conn, ErrorCode code, const std::string& detail) {
    record_fault(std::string(error_code_name(code)) + ": " + detail);
    RtiMessage fault = make_rti_message(
        MessageKind::Fault, {{"code", error_code_name(code)}, {"detail", detail}});
    Member* member = member_by_conn(conn);
    if (member) {
        send_to(*member, fault);
        std::string name = member->name;
        endpoint_.close_connection(conn);
        remove_member(name);
        evaluate_grants();
        check_sync_points();
    } else {
        std::string frame = fault.to_frame();
        if (options_.audit) options_.audit("out", "?", frame);
        endpoint_.send(conn, frame);
        endpoint_.close_connection(conn);
    }
}

void Coordinator::abort_run(const std::string& reason) {
    record_fault("abort: " + reason);
    RtiMessage fault =
        make_rti_message(MessageKind::Fault, {{"code", "Abort"}, {"detail", reason}});
    for (auto& [_, member] : members_) send_to(member, fault);
    {
        std::lock_guard<std::mutex> lock(status_mutex_);
        aborted_ = true;
    }
    done_ = true;
}

void Coordinator::remove_member(const std::string& name) {
    auto it = members_.find(name);
    if (it == members_.end()) return;
    conn_to_name_.erase(it->second.conn);
    members_.erase(it);
    for (auto& [_, sp] : sync_points_) sp.achieved.erase(name);
    std::lock_guard<std::mutex> lock(status_mutex_);
    joined_count_ = static_cast<int>(members_.size());
}

void Coordinator::handle_closed(std::uint64_t conn) {
    Member* member = member_by_conn(conn);
    if (!member) return; // never joined or already resigned
    std::string name = member->name;
    remove_member(name);
    abort_run("federate '" + name + "' disconnected without resigning");
}

void Coordinator::handle_message(std::uint64_t conn, RtiMessage& msg) {
    Member* sender = member_by_conn(conn);

    switch (msg.kind) {
        case MessageKind::CreateFederation: {
            if (federation_name_)
                throw Error(ErrorCode::ProtocolViolation, "federation already exists");
            federation_name_ = msg.payload.value("federation", "federation");
            creator_conn_ = conn;
            {
                std::lock_guard<std::mutex> lock(status_mutex_);
                federation_exists_ = true;
            }
            return;
        }
        case MessageKind::JoinFederation: {
            if (!federation_name_)
                throw Error(ErrorCode::ProtocolViolation, "no federation to join");
            if (started_)
                throw Error(ErrorCode::ProtocolViolation,
                            "federation already started; late joins are rejected");
            if (msg.sender.empty())
                throw Error(ErrorCode::ProtocolViolation, "join without a federate name");
            if (members_.count(msg.sender))
                throw Error(ErrorCode::ProtocolViolation,
                            "federate name '" + msg.sender + "' already joined");
            Member member;
            member.conn = conn;
            member.name = msg.sender;
            member.time_managed = msg.payload.value("timeManaged", true);
            members_[msg.sender] = std::move(member);
            conn_to_name_[conn] = msg.sender;
            {
                std::lock_guard<std::mutex> lock(status_mutex_);
                joined_count_ = static_cast<int>(members_.size());
            }
            // Pending sync points reach late joiners at join time.
            for (const auto& [label, sp] : sync_points_)
                if (!sp.completed)
                    send_to(members_[msg.sender],
                            make_rti_message(MessageKind::AnnounceSyncPoint, {{"label", label}}));
            check_sync_points();
            return;
        }
        case MessageKind::DestroyFederation: {
            // The creator may destroy after resigning; membership is not
            // required, the connection identity is.
            if (conn != creator_conn_)
                throw Error(ErrorCode::ProtocolViolation,
                            "only the federation creator may destroy it");
            done_ = true;
            return;
        }
        default: break;
    }

    if (!sender)
        throw Error(ErrorCode::ProtocolViolation,
                    std::string(message_kind_name(msg.kind)) + " before joining");

    switch (msg.kind) {
        case MessageKind::FomModuleOffer: {
            FOMModule module = parse_fom_xml(msg.payload.value("module", ""));
            merge_module(module);
            return;
        }
        case MessageKind::RegisterSyncPoint: {
            std::string label = msg.payload.value("label", "");
            if (sync_points_.count(label))
                throw Error(ErrorCode::DuplicateLabel, "sync point '" + label + "' exists");
            sync_points_[label] = SyncPoint{};
            RtiMessage announce =
                make_rti_message(MessageKind::AnnounceSyncPoint, {{"label", label}});
            for (auto& [_, member] : members_) send_to(member, announce);
            return;
        }
        case MessageKind::SyncPointAchieved: {
            std::string label = msg.payload.value("label", "");
            auto it = sync_points_.find(label);
            if (it == sync_points_.end())
                throw Error(ErrorCode::ProtocolViolation,
                            "achieve for unknown sync point '" + label + "'");
            if (it->second.completed) return;
            it->second.achieved.insert(sender->name);
            check_sync_points();
            return;
        }
        case MessageKind::PublishObjectClass: {
            std::string classPath = msg.payload.value("classPath", "");
            if (!class_tree_.count(classPath))
                throw Error(ErrorCode::UnknownClassPath,
                            "publish for unknown class path '" + classPath + "'");
            for (const auto& p : msg.payload.value("attributePaths", std::vector<std::string>{}))
                sender->published_paths.insert(p);
            return;
        }
        case MessageKind::SubscribeObjectClassAttributes: {
            std::string classPath = msg.payload.value("classPath", "");
            if (!class_tree_.count(classPath))
                throw Error(ErrorCode::UnknownClassPath,
                            "subscription to unknown class path '" + classPath + "'");
            auto names = msg.payload.value("attributes", std::vector<std::string>{});
            auto resolved = resolve_subscription(classPath, names);
            sender->subscriptions[classPath].insert(resolved.begin(), resolved.end());
            // Discovers for objects that already exist, ordered by object id.
            const auto& attrSet = sender->subscriptions[classPath];
            for (const auto& [uuid, object] : objects_) {
                if (object.owner == sender->name) continue;
                bool match = object.class_path == classPath ||
                             (object.class_path.size() > classPath.size() &&
                              object.class_path.compare(0, classPath.size(), classPath) == 0 &&
                              object.class_path[classPath.size()] == '.');
                if (match) emit_discover(*sender, object.owner, object, uuid, attrSet);
            }
            return;
        }
        case MessageKind::RegisterObjectInstance: {
            std::string uuid = msg.payload.value("objectUUID", "");
            std::string classPath = msg.payload.value("classPath", "");
            if (!class_tree_.count(classPath))
                throw Error(ErrorCode::UnknownClassPath,
                            "registration under unknown class path '" + classPath + "'");
            if (objects_.count(uuid))
                throw Error(ErrorCode::ProtocolViolation, "object '" + uuid + "' already exists");
            ObjectRecord record;
            record.owner = sender->name;
            record.class_path = classPath;
            for (auto it = msg.payload.at("values").begin(); it != msg.payload.at("values").end();
                 ++it) {
                if (!sender->published_paths.count(it.key()))
                    throw Error(ErrorCode::ProtocolViolation,
                                "initial value for undeclared path '" + it.key() + "'");
                record.values[it.key()] = it.value();
            }
            objects_[uuid] = std::move(record);
            const ObjectRecord& object = objects_[uuid];
            for (auto& [name, member] : members_) {
                if (name == sender->name) continue;
                if (auto attrSet = subscription_attrs(member, classPath))
                    emit_discover(member, sender->name, object, uuid, *attrSet);
            }
            return;
        }
        case MessageKind::UpdateAttributeValues: {
            if (!msg.timestamp)
                throw Error(ErrorCode::ProtocolViolation, "update without timestamp");
            std::string uuid = msg.payload.value("objectUUID", "");
            auto it = objects_.find(uuid);
            if (it == objects_.end())
                throw Error(ErrorCode::UnknownObject, "update for unknown object '" + uuid + "'");
            if (it->second.owner != sender->name)
                throw Error(ErrorCode::NotOwner,
                            "'" + sender->name + "' does not own object '" + uuid + "'");
            if (*msg.timestamp < sender->granted_time)
                throw Error(ErrorCode::StaleTimestamp, "update timestamp behind granted time");
            for (auto v = msg.payload.at("values").begin(); v != msg.payload.at("values").end();
                 ++v) {
                if (!sender->published_paths.count(v.key()))
                    throw Error(ErrorCode::ProtocolViolation,
                                "update for undeclared path '" + v.key() + "'");
                it->second.values[v.key()] = v.value();
            }
            for (auto& [name, member] : members_) {
                if (name == sender->name) continue;
                auto attrSet = subscription_attrs(member, it->second.class_path);
                if (!attrSet) continue;
                nlohmann::json values = nlohmann::json::object();
                for (auto v = msg.payload.at("values").begin();
                     v != msg.payload.at("values").end(); ++v)
                    if (attrSet->count(v.key())) values[v.key()] = v.value();
                if (values.empty()) continue;
                RtiMessage reflect = make_rti_message(
                    MessageKind::ReflectAttributeValues,
                    {{"objectUUID", uuid}, {"values", values}}, msg.timestamp);
                reflect.sender = sender->name;
                member.pending_reflects.push_back(std::move(reflect));
            }
            return;
        }
        case MessageKind::TimeAdvanceRequest: {
            if (!sender->time_managed)
                throw Error(ErrorCode::ProtocolViolation,
                            "time advance request from a non-time-managed federate");
            if (!msg.timestamp)
                throw Error(ErrorCode::ProtocolViolation, "time advance request without time");
            if (sender->pending_tar)
                throw Error(ErrorCode::ProtocolViolation, "time advance request already pending");
            if (*msg.timestamp <= sender->granted_time)
                throw Error(ErrorCode::ProtocolViolation,
                            "requested time must exceed granted time");
            sender->pending_tar = *msg.timestamp;
            evaluate_grants();
            return;
        }
        case MessageKind::ResignFederation: {
            std::string name = sender->name;
            remove_member(name);
            evaluate_grants();
            check_sync_points();
            return;
        }
        case MessageKind::Fault: {
            abort_run("federate '" + sender->name + "' reported: " +
                      msg.payload.value("detail", "unspecified"));
            return;
        }
        default:
            throw Error(ErrorCode::ProtocolViolation,
                        std::string("unexpected message kind ") + message_kind_name(msg.kind));
    }
}

void Coordinator::check_sync_points() {
    if (options_.expected_members > 0 &&
        static_cast<int>(members_.size()) < options_.expected_members)
        return;
    for (auto& [label, sp] : sync_points_) {
        if (sp.completed || members_.empty()) continue;
        bool all = true;
        for (const auto& [name, _] : members_) all &= sp.achieved.count(name) > 0;
        if (!all) continue;
        sp.completed = true;
        started_ = true;
        {
            std::lock_guard<std::mutex> lock(status_mutex_);
            synchronized_ = true;
        }
        RtiMessage synced =
            make_rti_message(MessageKind::FederationSynchronized, {{"label", label}});
        for (auto& [_, member] : members_) send_to(member, synced);
    }
}

void Coordinator::evaluate_grants() {
    std::vector<Member*> managed;
    for (auto& [_, member] : members_)
        if (member.time_managed) managed.push_back(&member);
    if (managed.empty()) return;
    double grant = 0.0;
    bool first = true;
    for (Member* m : managed) {
        if (!m->pending_tar) return; // grants only when every managed member asked
        grant = first ? *m->pending_tar : std::min(grant, *m->pending_tar);
        first = false;
    }
    for (Member* m : managed) { // map order = sorted by name
        if (!bits_equal(*m->pending_tar, grant)) continue;
        // Everything at or before the grant reaches the grantee first.
        auto& queue = m->pending_reflects;
        std::stable_sort(queue.begin(), queue.end(), [](const RtiMessage& a, const RtiMessage& b) {
            double ta = a.timestamp.value_or(0.0), tb = b.timestamp.value_or(0.0);
            if (ta != tb) return ta < tb;
            if (a.sender != b.sender) return a.sender < b.sender;
            return a.payload.value("objectUUID", "") < b.payload.value("objectUUID", "");
        });
        std::vector<RtiMessage> keep;
        for (auto& reflect : queue) {
            if (reflect.timestamp.value_or(0.0) <= grant) {
                send_to(*m, reflect);
            } else {
                keep.push_back(std::move(reflect));
            }
        }
        queue = std::move(keep);
        m->granted_time = grant;
        m->pending_tar.reset();
        send_to(*m, make_rti_message(MessageKind::TimeAdvanceGrant, nlohmann::json::object(),
                                     grant));
    }
}

std::set<std::string> Coordinator::resolve_subscription(
    const std::string& classPath, const std::vector<std::string>& names) const {
    std::set<std::string> out;
    for (const auto& ancestor : ancestor_paths(classPath)) {
        auto cls = class_tree_.find(ancestor);
        if (cls == class_tree_.end()) continue;
        for (const auto& [leaf, _] : cls->second) {
            for (const auto& name : names) {
                bool match = leaf == name || (leaf.size() > name.size() &&
                                              leaf.compare(0, name.size(), name) == 0 &&
                                              leaf[name.size()] == '.');
                if (match) out.insert(ancestor + "." + leaf);
            }
        }
    }
    return out;
}

std::optional<std::set<std::string>> Coordinator::subscription_attrs(
    const Member& member, const std::string& classPath) const {
    std::optional<std::set<std::string>> out;
    for (const auto& [subscribed, attrs] : member.subscriptions) {
        bool match = classPath == subscribed ||
                     (classPath.size() > subscribed.size() &&
                      classPath.compare(0, subscribed.size(), subscribed) == 0 &&
                      classPath[subscribed.size()] == '.');
        if (match) {
            if (!out) out.emplace();
            out->insert(attrs.begin(), attrs.end());
        }
    }
    return out;
}

void Coordinator::emit_discover(Member& to, const std::string& fromOwner,
                                const ObjectRecord& object, const std::string& objectUUID,
                                const std::set<std::string>& attrSet) {
    nlohmann::json values = nlohmann::json::object();
    for (const auto& [path, value] : object.values)
        if (attrSet.count(path)) values[path] = value;
    RtiMessage discover = make_rti_message(
        MessageKind::DiscoverObjectInstance,
        {{"objectUUID", objectUUID}, {"classPath", object.class_path}, {"values", values}});
    discover.sender = fromOwner;
    send_to(to, discover);
}

void Coordinator::request_stop() { stop_requested_.store(true); }

bool Coordinator::aborted() const {
    std::lock_guard<std::mutex> lock(status_mutex_);
    return aborted_;
}

std::vector<std::string> Coordinator::faults() const {
    std::lock_guard<std::mutex> lock(status_mutex_);
    return faults_;
}

int Coordinator::joined_count() const {
    std::lock_guard<std::mutex> lock(status_mutex_);
    return joined_count_;
}

bool Coordinator::synchronized_reached() const {
    std::lock_guard<std::mutex> lock(status_mutex_);
    return synchronized_;
}

bool Coordinator::federation_exists() const {
    std::lock_guard<std::mutex> lock(status_mutex_);
    return federation_exists_;
}

} // namespace scensim
