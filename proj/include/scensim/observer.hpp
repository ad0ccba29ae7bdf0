#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "scensim/registry.hpp"
#include "scensim/scenario.hpp"
#include "scensim/transport.hpp"
#include "scensim/value.hpp"

namespace scensim {

/// One observed state emission: which object, at which granted step, with
/// the currently known subscribed values (composites recomposed).
struct ObserverRecord {
    std::int64_t step = 0;
    double time = 0.0;
    std::string object_uuid;
    std::string class_path;
    std::map<std::string, AttributeValue> attributes;
};

/// Single NDJSON line, byte-stable: fixed key order, attribute names
/// sorted, doubles as shortest round-trip decimals, positions as
/// {"Lat","Lon","Alt"} objects.
std::string encode_record(const ObserverRecord& record);

class ObserverSink {
public:
    virtual ~ObserverSink() = default;
    virtual void write_line(const std::string& line) = 0;
    virtual void close() {}
};

using ObserverSinkPtr = std::shared_ptr<ObserverSink>;

ObserverSinkPtr make_stdout_sink();
ObserverSinkPtr make_file_sink(const std::string& path);
ObserverSinkPtr make_websocket_sink(const std::string& host, std::uint16_t port);

/// Collects every line in memory; the run uses it to assemble stream files
/// and reports.
class CapturingSink : public ObserverSink {
public:
    void write_line(const std::string& line) override { lines_.push_back(line); }
    const std::vector<std::string>& lines() const { return lines_; }

private:
    std::vector<std::string> lines_;
};

struct ObserverRunConfig {
    std::string federate_name;
    ObserverConfig config;
    const TypeRegistry* registry = nullptr;
    double step_size = 1.0;
    std::int64_t total_iterations = 1;
    ClientChannelPtr channel;
    std::vector<ObserverSinkPtr> sinks;
    std::chrono::milliseconds recv_timeout{30000};
};

struct ObserverReport {
    std::string federate_name;
    std::int64_t records_emitted = 0;
    bool faulted = false;
    std::string fault_detail;
};

/// Content-less time-managed federate: subscribes per configuration, emits
/// a full snapshot at step 0 and afterwards one record per object whose
/// subscribed values changed, ordered by object id within a step.
ObserverReport run_observer(const ObserverRunConfig& config);

/// Shared engine for the record stream so the sequential executor and the
/// live observer produce identical bytes. Feed it value changes per step;
/// it applies change detection and ordering.
class ObserverStream {
public:
    ObserverStream(std::vector<ObserverSinkPtr> sinks);

    void track(const std::string& objectUUID, const std::string& classPath);
    bool tracked(const std::string& objectUUID) const;
    void set_value(const std::string& objectUUID, const std::string& attributeName,
                   AttributeValue value);

    /// Emits records for objects whose visible values differ from the last
    /// emission (every tracked object at step 0).
    std::int64_t emit_step(std::int64_t step, double time);

private:
    struct Tracked {
        std::string class_path;
        std::map<std::string, AttributeValue> visible;
        std::map<std::string, AttributeValue> last_emitted;
        bool emitted_once = false;
    };

    std::vector<ObserverSinkPtr> sinks_;
    std::map<std::string, Tracked> objects_;
};

} // namespace scensim
