#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "scensim/registry.hpp"
#include "scensim/scenario.hpp"
#include "scensim/sim_attribute.hpp"

namespace scensim {

class Behaviour;

/// A live simulation object: the full lineage-declared attribute set plus
/// an optional behaviour. Owned by exactly one federate (or the sequential
/// executor); never shared across threads.
class SimulationObjectInstance {
public:
    SimulationObjectInstance(std::string uuid, std::string concreteType, double timeStepSize,
                             std::vector<ObservedClass> observedClasses)
        : uuid_(std::move(uuid)), concrete_type_(std::move(concreteType)),
          time_step_size_(timeStepSize), observed_classes_(std::move(observedClasses)) {}

    const std::string& uuid() const { return uuid_; }
    const std::string& concrete_type() const { return concrete_type_; }
    double time_step_size() const { return time_step_size_; }
    const std::vector<ObservedClass>& observed_classes() const { return observed_classes_; }

    void add_attribute(SimulationAttributePtr attribute);
    const std::map<std::string, SimulationAttributePtr>& attributes() const { return attributes_; }

    const SimulationAttribute& attribute(const std::string& name) const;
    SimulationAttribute& attribute(const std::string& name);
    const SimulationAttribute* attribute_by_uuid(const std::string& uuid) const;
    SimulationAttribute* attribute_by_uuid(const std::string& uuid);

    void set_behaviour(std::unique_ptr<Behaviour> behaviour);
    Behaviour* behaviour() const { return behaviour_.get(); }

private:
    std::string uuid_;
    std::string concrete_type_;
    double time_step_size_ = 1.0;
    std::vector<ObservedClass> observed_classes_;
    std::map<std::string, SimulationAttributePtr> attributes_;
    std::shared_ptr<Behaviour> behaviour_;
};

using SimulationObjectInstancePtr = std::shared_ptr<SimulationObjectInstance>;

std::string object_uuid_for_seed(int idSeed);

/// Builds a live instance from a validated spec. Attribute ids derive from
/// the ordinal seed ("obj-0001", "obj-0001:speed"), values come from the
/// spec or fall back to library defaults, so equal inputs give equal
/// instances.
SimulationObjectInstancePtr instantiate(const TypeRegistry& registry,
                                        const SimulationObjectSpec& spec, int idSeed);

/// Mirror of a remote object discovered over the federation: same attribute
/// layout, default values, no behaviour.
SimulationObjectInstancePtr make_remote_mirror(const TypeRegistry& registry,
                                               const std::string& concreteType,
                                               const std::string& uuid);

} // namespace scensim
