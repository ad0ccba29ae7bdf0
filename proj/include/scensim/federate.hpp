#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "scensim/behaviour.hpp"
#include "scensim/reference_store.hpp"
#include "scensim/transport.hpp"

namespace scensim {

/// Read-side mirror of everything this federate subscribed to. Values carry
/// the latest committed reflections as of the current granted time.
class ObjectInstanceCache {
public:
    void add(const std::string& classPath, SimulationObjectInstancePtr remote);
    SimulationObjectInstancePtr find(const std::string& uuid) const;
    ObservedView view() const;
    bool empty() const { return by_uuid_.empty(); }

private:
    std::map<std::string, SimulationObjectInstancePtr> by_uuid_;
};

struct FederateConfig {
    std::string federate_name; // "fed-" + object id
    SimulationObjectInstancePtr instance;
    FOMModule fom_module;
    std::shared_ptr<ReferenceStore> reference_store;
    const TypeRegistry* registry = nullptr;
    double step_size = 1.0;
    std::int64_t total_iterations = 1;
    ClientChannelPtr channel;
    std::chrono::milliseconds recv_timeout{30000};

    /// Test hook: drop the connection cold at this step (no resign).
    std::optional<std::int64_t> drop_connection_at_step;
};

struct FederateReport {
    std::string federate_name;
    std::int64_t steps_executed = 0;
    std::map<std::string, AttributeValue> final_attributes;
    bool faulted = false;
    std::string fault_detail;
};

/// Decodes one reflection into the cached remote object, recomposing
/// flattened composite leaves.
void apply_reflection(ObjectInstanceCache& cache, ReferenceStore& store, const RtiMessage& msg);

/// Two-phase commit: writes the behaviour's updates to the own object, then
/// returns the publish-flagged subset flattened and encoded for the wire.
std::map<std::string, nlohmann::json> commit_updates(SimulationObjectInstance& instance,
                                                     const ReferenceStore& store,
                                                     const AttributeUpdateMap& updates);

/// Full federate lifecycle: join, declare, register, synchronize, then one
/// request/grant/behaviour/commit round per iteration, and resign.
FederateReport run_federate(const FederateConfig& config);

/// Logical time of step k with step size dt (one shared expression keeps
/// members and the sequential executor bit-identical).
inline double step_time(std::int64_t k, double dt) { return static_cast<double>(k) * dt; }

/// "HLAObjectRoot." + lineage of the class the reference names.
std::string class_path_for(const TypeRegistry& registry, const std::string& reference);

} // namespace scensim
