#include "scensim/instance.hpp"

#include <algorithm>
#include <cstdio>

#include "scensim/behaviour.hpp"

namespace scensim {

void SimulationObjectInstance::add_attribute(SimulationAttributePtr attribute) {
    attributes_[attribute->name()] = std::move(attribute);
}

const SimulationAttribute& SimulationObjectInstance::attribute(const std::string& name) const {
    auto it = attributes_.find(name);
    if (it == attributes_.end())
        throw Error(ErrorCode::UnknownAttributePath,
                    "object " + uuid_ + " has no attribute '" + name + "'");
    return *it->second;
}

SimulationAttribute& SimulationObjectInstance::attribute(const std::string& name) {
    auto it = attributes_.find(name);
    if (it == attributes_.end())
        throw Error(ErrorCode::UnknownAttributePath,
                    "object " + uuid_ + " has no attribute '" + name + "'");
    return *it->second;
}

const SimulationAttribute* SimulationObjectInstance::attribute_by_uuid(
    const std::string& uuid) const {
    for (const auto& [_, attr] : attributes_)
        if (attr->uuid() == uuid) return attr.get();
    return nullptr;
}

SimulationAttribute* SimulationObjectInstance::attribute_by_uuid(const std::string& uuid) {
    for (auto& [_, attr] : attributes_)
        if (attr->uuid() == uuid) return attr.get();
    return nullptr;
}

void SimulationObjectInstance::set_behaviour(std::unique_ptr<Behaviour> behaviour) {
    behaviour_ = std::move(behaviour);
}

std::string object_uuid_for_seed(int idSeed) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "obj-%04d", idSeed);
    return buf;
}

namespace {

SimulationObjectInstancePtr build_with_attributes(const TypeRegistry& registry,
                                                  const std::string& className,
                                                  const std::string& uuid, double timeStepSize,
                                                  std::vector<ObservedClass> observedClasses,
                                                  const std::map<std::string, AttributeSpec>* specs) {
    auto instance = std::make_shared<SimulationObjectInstance>(uuid, className, timeStepSize,
                                                               std::move(observedClasses));
    for (const auto& def : registry.lineage_attributes(className)) {
        bool publish = def.default_publish;
        AttributeValue value = default_value(def.type);
        if (specs) {
            auto it = specs->find(def.name);
            if (it != specs->end()) {
                publish = it->second.publish;
                value = it->second.value;
            }
        }
        instance->add_attribute(std::make_shared<SimulationAttribute>(
            uuid + ":" + def.name, def.name, def.type, publish, std::move(value)));
    }
    return instance;
}

} // namespace

SimulationObjectInstancePtr instantiate(const TypeRegistry& registry,
                                        const SimulationObjectSpec& spec, int idSeed) {
    auto className = registry.resolve_class(spec.concrete_type);
    if (!className || registry.descriptor(*className).abstract_class)
        throw Error(ErrorCode::UnknownType,
                    "'" + spec.concrete_type + "' is not a concrete library type");
    auto chain = registry.lineage(*className);
    bool active =
        std::find(chain.begin(), chain.end(), "ActiveSimulationObject") != chain.end();
    if (active && !spec.behaviour)
        throw Error(ErrorCode::MissingBehaviour,
                    "active object '" + spec.concrete_type + "' needs a behaviour");

    auto instance = build_with_attributes(registry, *className, object_uuid_for_seed(idSeed),
                                          spec.time_step_size, spec.observed_classes,
                                          &spec.attribute_specs);
    if (spec.behaviour) {
        const BehaviourFactory& factory = registry.behaviour(spec.behaviour->concrete_type);
        instance->set_behaviour(factory.make(spec.behaviour->parameters));
    }
    return instance;
}

SimulationObjectInstancePtr make_remote_mirror(const TypeRegistry& registry,
                                               const std::string& concreteType,
                                               const std::string& uuid) {
    auto className = registry.resolve_class(concreteType);
    if (!className)
        throw Error(ErrorCode::UnknownType, "'" + concreteType + "' is not a library type");
    return build_with_attributes(registry, *className, uuid, 1.0, {}, nullptr);
}

} // namespace scensim
