#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scensim/registry.hpp"
#include "scensim/value.hpp"

namespace scensim {

struct LibraryRef {
    std::string name;
    std::string version;

    friend bool operator==(const LibraryRef&, const LibraryRef&) = default;
};

struct ObservedClass {
    std::string type; // scenario-side reference, e.g. "vessel"
    std::vector<std::string> attributes;

    friend bool operator==(const ObservedClass&, const ObservedClass&) = default;
};

struct AttributeSpec {
    std::string name;
    DataType data_type = DataType::Double;
    bool publish = false;
    AttributeValue value;

    friend bool operator==(const AttributeSpec&, const AttributeSpec&) = default;
};

struct BehaviourSpec {
    std::string concrete_type;
    std::map<std::string, AttributeValue> parameters;

    friend bool operator==(const BehaviourSpec&, const BehaviourSpec&) = default;
};

struct SimulationObjectSpec {
    std::string concrete_type; // scenario-side reference, e.g. "containerShip"
    std::optional<BehaviourSpec> behaviour;
    double time_step_size = 1.0;
    std::map<std::string, AttributeSpec> attribute_specs;
    std::vector<ObservedClass> observed_classes;

    friend bool operator==(const SimulationObjectSpec&, const SimulationObjectSpec&) = default;
};

enum class SinkKind { Stdout, NdjsonFile, WebSocket };

struct SinkConfig {
    SinkKind kind = SinkKind::Stdout;
    std::string path;           // NdjsonFile
    std::string host;           // WebSocket
    std::uint16_t port = 0;     // WebSocket

    friend bool operator==(const SinkConfig&, const SinkConfig&) = default;
};

struct ObserverConfig {
    std::vector<ObservedClass> observed_classes;
    SinkConfig sink;
    double time_step_size = 1.0;

    friend bool operator==(const ObserverConfig&, const ObserverConfig&) = default;
};

struct Scenario {
    LibraryRef library;
    std::int64_t simulation_iterations = 1;
    std::vector<SimulationObjectSpec> simulation_objects; // document order
    std::vector<ObserverConfig> observers;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct Finding {
    std::string path;
    ErrorCode code;
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> findings;
    bool ok() const { return findings.empty(); }
};

inline constexpr const char* kScenarioNamespace = "http://uol.de/mdts/schema/base";

/// Parses and fully validates a scenario document. Anything the validator
/// would flag is rejected here as well.
Scenario parse_scenario(const std::string& document, const TypeRegistry& registry);

/// Canonical rendering; re-parsing the output reproduces the input scenario.
std::string serialize_scenario(const Scenario& scenario);

/// Re-checks every scenario invariant against the registry. Problems are
/// findings with a document path, never exceptions.
ValidationReport validate_scenario(const Scenario& scenario, const TypeRegistry& registry);

} // namespace scensim
