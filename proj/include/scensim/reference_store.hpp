#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "scensim/fom.hpp"
#include "scensim/instance.hpp"

namespace scensim {

/// Where a flattened wire path lands on a live attribute: the attribute
/// instance plus, for composite kinds, which component the path names.
struct AttributeBinding {
    SimulationAttributePtr attribute;
    std::string component; // "" for scalars; latitude/longitude/altitude; "encoded"
};

/// Per-federate registry binding class paths, attribute paths, ids, and
/// live instances in both directions, so that wire data can be encoded and
/// decoded without any type-specific code.
class ReferenceStore {
public:
    ReferenceStore(SimulationObjectInstancePtr instance, FOMModule fom,
                   const TypeRegistry* registry);

    const SimulationObjectInstance& simulation_object() const { return *instance_; }
    SimulationObjectInstancePtr simulation_object_ptr() const { return instance_; }
    const std::string& simulation_object_type() const { return instance_->concrete_type(); }
    const FOMModule& fom() const { return fom_; }

    const std::map<std::string, const FOMObjectClass*>& fom_path_to_object_class() const {
        return path_to_class_;
    }
    const std::map<std::string, const FOMAttribute*>& fom_path_to_fom_attribute() const {
        return path_to_fom_attribute_;
    }
    const std::multimap<std::string, SimulationObjectInstancePtr>&
    fom_path_to_simulation_objects() const {
        return path_to_objects_;
    }
    const std::multimap<std::string, SimulationAttributePtr>&
    fom_path_to_simulation_attributes() const {
        return path_to_attributes_;
    }

    std::string fom_path_for_object_class(const FOMObjectClass& cls) const;
    std::string fom_path_for_fom_attribute(const FOMAttribute& attribute) const;

    /// Leaf class path of a registered object.
    const std::string& fom_path_for_simulation_object(const std::string& objectUUID) const;

    SimulationObjectInstancePtr simulation_object_by_uuid(const std::string& uuid) const;
    SimulationAttributePtr simulation_attribute_by_uuid(const std::string& uuid) const;

    void add_subscription(const std::string& classPath);
    const std::set<std::string>& subscribed_class_paths() const { return subscriptions_; }
    bool covers_subscription(const std::string& classPath) const;

    /// Indexes a discovered remote object (idempotent per uuid). The class
    /// path must fall under a subscribed path.
    void register_discovered(const std::string& classPath, SimulationObjectInstancePtr remote);

    /// Wire path -> live attribute of one registered object.
    AttributeBinding resolve_attribute(const std::string& objectUUID,
                                       const std::string& attributePath) const;

    /// Flattened wire paths of the own object's attributes, with bindings.
    const std::map<std::string, AttributeBinding>& own_attribute_paths() const {
        return own_paths_;
    }

    /// Flattened wire paths whose source attribute is publish-flagged.
    const std::vector<std::string>& published_attribute_paths() const { return published_paths_; }

private:
    void index_object(const std::string& leafClassPath, const SimulationObjectInstancePtr& object,
                      std::map<std::string, AttributeBinding>& pathTable);

    SimulationObjectInstancePtr instance_;
    FOMModule fom_;
    const TypeRegistry* registry_;

    std::map<std::string, const FOMObjectClass*> path_to_class_;
    std::map<const FOMObjectClass*, std::string> class_to_path_;
    std::map<std::string, const FOMAttribute*> path_to_fom_attribute_;
    std::map<const FOMAttribute*, std::string> fom_attribute_to_path_;
    std::multimap<std::string, SimulationObjectInstancePtr> path_to_objects_;
    std::multimap<std::string, SimulationAttributePtr> path_to_attributes_;
    std::map<std::string, SimulationObjectInstancePtr> uuid_to_object_;
    std::map<std::string, SimulationAttributePtr> uuid_to_attribute_;

    std::map<std::string, std::string> object_leaf_path_;
    std::map<std::string, std::map<std::string, AttributeBinding>> object_attribute_paths_;
    std::map<std::string, AttributeBinding> own_paths_;
    std::vector<std::string> published_paths_;
    std::set<std::string> subscriptions_;
};

/// Splits "A.B.C" into its cumulative ancestor paths ["A", "A.B", "A.B.C"].
std::vector<std::string> ancestor_paths(const std::string& classPath);

std::string leaf_segment(const std::string& classPath);

ReferenceStore build_reference_store(SimulationObjectInstancePtr instance, FOMModule fom,
                                     const TypeRegistry& registry);

} // namespace scensim
