#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scensim/instance.hpp"
#include "scensim/registry.hpp"

namespace scensim {

enum class Sharing { Publish, Subscribe, PublishSubscribe, Neither };

const char* sharing_name(Sharing s);
Sharing sharing_from_name(const std::string& name);

struct FOMAttribute {
    std::string name; // dotted leaf name, e.g. "position.latitude"
    DataType data_type = DataType::Double; // scalar kinds only
    std::string update_type = "Unconditional";
    std::string ownership = "NoTransfer";
    Sharing sharing = Sharing::Neither;

    friend bool operator==(const FOMAttribute&, const FOMAttribute&) = default;
};

struct FOMObjectClass {
    std::string name;
    Sharing sharing = Sharing::Neither;
    std::vector<FOMAttribute> attributes;
    std::vector<FOMObjectClass> children; // at most one

    friend bool operator==(const FOMObjectClass&, const FOMObjectClass&) = default;
};

/// A single-chain object-class tree rooted at HLAObjectRoot, describing what
/// one top-level object may exchange with the federation.
struct FOMModule {
    std::string model_name;
    std::string model_type = "FOM";
    std::string source_object_uuid;
    FOMObjectClass root; // always named HLAObjectRoot

    friend bool operator==(const FOMModule&, const FOMModule&) = default;
};

inline constexpr const char* kHlaObjectRoot = "HLAObjectRoot";

std::uint32_t fnv1a_32(const std::string& text);

/// Scalars map to themselves; positions flatten to latitude/longitude/
/// altitude doubles; routes flatten to one "<name>.encoded" string carrying
/// the canonical JSON waypoint text.
std::vector<std::pair<std::string, DataType>> flatten_attribute(const std::string& name,
                                                                DataType type);

/// Builds the module for one instance: the full class lineage under
/// HLAObjectRoot, each class carrying its flattened attributes, publish
/// flags turned into Publish/Neither sharing.
FOMModule generate_fom_module(const SimulationObjectInstance& instance,
                              const TypeRegistry& registry);

/// Module offered by the run master: the shared base chain down to
/// TrafficParticipant with every sharing set to Neither.
FOMModule generate_base_fom_module(const TypeRegistry& registry);

/// Neutral chain module for a class that is only subscribed to, so the
/// federation knows the path even when nothing instantiates the class.
FOMModule generate_subscription_fom_module(const TypeRegistry& registry,
                                           const std::string& className);

std::string render_fom_xml(const FOMModule& module);

FOMModule parse_fom_xml(const std::string& document);

/// Dotted class paths from the root to the leaf, root path first.
std::vector<std::string> class_paths(const FOMModule& module);

/// The leaf class path ("HLAObjectRoot....Vessel.ContainerShip").
std::string leaf_class_path(const FOMModule& module);

} // namespace scensim
