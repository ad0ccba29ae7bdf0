#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scensim/fom.hpp"
#include "scensim/transport.hpp"
#include "scensim/wire.hpp"

namespace scensim {

/// Typed record of one message the coordinator processed or emitted, kept
/// for tests and audits.
struct CoordinatorEvent {
    enum class Dir { In, Out };
    Dir dir = Dir::In;
    std::string federate; // sender for In, recipient for Out
    MessageKind kind = MessageKind::Fault;
    std::optional<double> timestamp;
    nlohmann::json payload;
};

struct CoordinatorOptions {
    /// Members the federation must reach before a sync point can complete;
    /// 0 means "whoever has joined".
    int expected_members = 0;

    /// Modules merged into the class tree before any traffic arrives.
    std::vector<FOMModule> preloaded_modules;

    /// Wire tap: called with ("in"/"out", federate, frame bytes).
    std::function<void(const char*, const std::string&, const std::string&)> audit;

    bool keep_event_log = false;
};

/// Central event loop: federation lifecycle, declarations, object
/// registration and discovery, timestamped reflections, sync points, and
/// conservative lockstep grants. All state is confined to the loop thread;
/// the few cross-thread queries go through a mutex-guarded status block.
class Coordinator {
public:
    Coordinator(ServerEndpoint& endpoint, CoordinatorOptions options = {});

    /// Processes messages until the federation is destroyed, the run is
    /// aborted, or request_stop() is called.
    void run();

    void request_stop();

    bool aborted() const;
    std::vector<std::string> faults() const;
    int joined_count() const;
    bool synchronized_reached() const;
    bool federation_exists() const;

    /// Only meaningful after run() returned; the loop thread owns it before.
    const std::vector<CoordinatorEvent>& event_log() const { return event_log_; }

private:
    struct Member {
        std::uint64_t conn = 0;
        std::string name;
        bool time_managed = false;
        std::set<std::string> published_paths;
        std::map<std::string, std::set<std::string>> subscriptions; // classPath -> attr paths
        std::optional<double> pending_tar;
        double granted_time = 0.0;
        std::vector<RtiMessage> pending_reflects;
    };

    struct ObjectRecord {
        std::string owner;
        std::string class_path;
        std::map<std::string, nlohmann::json> values; // latest published values
    };

    struct SyncPoint {
        std::set<std::string> achieved;
        bool completed = false;
    };

    struct Item {
        RtiMessage message;
        std::uint64_t conn = 0;
        bool closed = false;
        size_t arrival = 0;
        double sort_ts = -1.0;
    };

    void merge_module(const FOMModule& module);
    void process(Item& item);
    void handle_message(std::uint64_t conn, RtiMessage& msg);
    void handle_closed(std::uint64_t conn);

    Member* member_by_conn(std::uint64_t conn);
    Member* member_by_name(const std::string& name);

    void send_to(Member& member, const RtiMessage& msg);
    void fault_and_eject(std::uint64_t conn, ErrorCode code, const std::string& detail);
    void record_fault(const std::string& text);
    void abort_run(const std::string& reason);
    void remove_member(const std::string& name);

    void check_sync_points();
    void evaluate_grants();
    std::set<std::string> resolve_subscription(const std::string& classPath,
                                               const std::vector<std::string>& names) const;
    std::optional<std::set<std::string>> subscription_attrs(const Member& member,
                                                            const std::string& classPath) const;
    void emit_discover(Member& to, const std::string& fromOwner, const ObjectRecord& object,
                       const std::string& objectUUID, const std::set<std::string>& attrSet);

    ServerEndpoint& endpoint_;
    CoordinatorOptions options_;

    // Loop-confined state.
    std::optional<std::string> federation_name_;
    std::uint64_t creator_conn_ = 0;
    std::map<std::string, Member> members_;       // by federate name
    std::map<std::uint64_t, std::string> conn_to_name_;
    std::map<std::string, std::map<std::string, DataType>> class_tree_; // classPath -> leaf -> type
    std::map<std::string, ObjectRecord> objects_; // by objectUUID
    std::map<std::string, SyncPoint> sync_points_;
    bool started_ = false;
    bool done_ = false;
    size_t arrival_counter_ = 0;
    std::map<std::string, double> last_sender_ts_;
    std::vector<CoordinatorEvent> event_log_;

    // Shared with other threads.
    mutable std::mutex status_mutex_;
    std::vector<std::string> faults_;
    int joined_count_ = 0;
    bool synchronized_ = false;
    bool federation_exists_ = false;
    bool aborted_ = false;
    std::atomic<bool> stop_requested_{false};
};

} // namespace scensim
