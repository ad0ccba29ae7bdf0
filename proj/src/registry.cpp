#include "scensim/registry.hpp"

#include <cctype>
#include <set>

#include "scensim/behaviour.hpp"

namespace scensim {

TypeRegistry::TypeRegistry(std::string libraryName, std::string libraryVersion)
    : library_name_(std::move(libraryName)), library_version_(std::move(libraryVersion)) {}

void TypeRegistry::add_class(ClassDescriptor descriptor) {
    classes_[descriptor.name] = std::move(descriptor);
}

void TypeRegistry::add_behaviour(const std::string& name, BehaviourFactory factory) {
    behaviours_[name] = std::move(factory);
}

void TypeRegistry::validate() const {
    int roots = 0;
    for (const auto& [name, desc] : classes_) {
        if (!desc.parent) {
            ++roots;
            if (name != kRootClassName)
                throw Error(ErrorCode::InconsistentInput, "root class must be SimulationObject");
        } else if (!classes_.count(*desc.parent)) {
            throw Error(ErrorCode::UnknownType,
                        "class '" + name + "' names unregistered parent '" + *desc.parent + "'");
        }
    }
    if (roots != 1)
        throw Error(ErrorCode::InconsistentInput, "registry must have exactly one root class");
    for (const auto& [name, desc] : classes_) {
        auto chain = lineage(name); // throws on cycles
        std::set<std::string> seen;
        for (const auto& cls : chain)
            for (const auto& attr : classes_.at(cls).own_attributes)
                if (!seen.insert(attr.name).second)
                    throw Error(ErrorCode::InconsistentInput,
                                "attribute '" + attr.name + "' repeats in lineage of " + name);
    }
}

bool TypeRegistry::has_class(const std::string& className) const {
    return classes_.count(className) > 0;
}

const ClassDescriptor& TypeRegistry::descriptor(const std::string& className) const {
    auto it = classes_.find(className);
    if (it == classes_.end())
        throw Error(ErrorCode::UnknownType, "class '" + className + "' is not registered");
    return it->second;
}

std::string TypeRegistry::capitalize(const std::string& reference) {
    if (reference.empty()) return reference;
    std::string out = reference;
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

std::optional<std::string> TypeRegistry::resolve_class(const std::string& reference) const {
    std::string name = capitalize(reference);
    if (classes_.count(name)) return name;
    return std::nullopt;
}

std::vector<std::string> TypeRegistry::lineage(const std::string& className) const {
    std::vector<std::string> reversed;
    std::set<std::string> seen;
    std::string cur = className;
    for (;;) {
        auto it = classes_.find(cur);
        if (it == classes_.end())
            throw Error(ErrorCode::UnknownType, "class '" + cur + "' is not registered");
        if (!seen.insert(cur).second)
            throw Error(ErrorCode::InconsistentInput, "cycle in class hierarchy at '" + cur + "'");
        reversed.push_back(cur);
        if (!it->second.parent) break;
        cur = *it->second.parent;
    }
    return {reversed.rbegin(), reversed.rend()};
}

std::vector<AttributeDef> TypeRegistry::lineage_attributes(const std::string& className) const {
    std::vector<AttributeDef> out;
    for (const auto& cls : lineage(className)) {
        const auto& own = classes_.at(cls).own_attributes;
        out.insert(out.end(), own.begin(), own.end());
    }
    return out;
}

std::optional<AttributeDef> TypeRegistry::find_attribute(const std::string& className,
                                                         const std::string& attributeName) const {
    for (const auto& attr : lineage_attributes(className))
        if (attr.name == attributeName) return attr;
    return std::nullopt;
}

std::optional<std::string> TypeRegistry::declaring_class(const std::string& className,
                                                         const std::string& attributeName) const {
    for (const auto& cls : lineage(className))
        for (const auto& attr : classes_.at(cls).own_attributes)
            if (attr.name == attributeName) return cls;
    return std::nullopt;
}

bool TypeRegistry::has_behaviour(const std::string& name) const {
    return behaviours_.count(name) > 0;
}

const BehaviourFactory& TypeRegistry::behaviour(const std::string& name) const {
    auto it = behaviours_.find(name);
    if (it == behaviours_.end())
        throw Error(ErrorCode::UnknownType, "behaviour '" + name + "' is not registered");
    return it->second;
}

std::vector<std::string> TypeRegistry::class_names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : classes_) out.push_back(name);
    return out;
}

std::vector<std::string> TypeRegistry::behaviour_names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : behaviours_) out.push_back(name);
    return out;
}

TypeRegistry builtin_registry() {
    TypeRegistry reg("maritime_library", "1.0-SNAPSHOT");

    reg.add_class({"SimulationObject",
                   std::nullopt,
                   true,
                   {{"position", DataType::Position, false},
                    {"rotation", DataType::Double, false},
                    {"formString", DataType::String, false},
                    {"physical", DataType::Boolean, false}}});
    reg.add_class({"DynamicSimulationObject", "SimulationObject", true, {}});
    reg.add_class({"ActiveSimulationObject", "DynamicSimulationObject", true, {}});
    reg.add_class({"TrafficParticipant",
                   "ActiveSimulationObject",
                   true,
                   {{"speed", DataType::Double, false},
                    {"acceleration", DataType::Double, false}}});
    reg.add_class({"Vessel",
                   "TrafficParticipant",
                   true,
                   {{"vesselName", DataType::String, false},
                    {"mmsi", DataType::String, false},
                    {"course", DataType::Double, false},
                    {"draught", DataType::Double, false}}});
    reg.add_class({"ContainerShip", "Vessel", false, {}});
    reg.add_class({"GeneralCargo", "Vessel", false, {}});

    BehaviourFactory followRoute;
    followRoute.parameters = {{"route", DataType::Route, true}};
    followRoute.make = [](const std::map<std::string, AttributeValue>& params) {
        return std::make_unique<SimpleFollowRouteBehaviour>(params.at("route").as_route());
    };
    reg.add_behaviour("simpleFollowRouteBehaviour", std::move(followRoute));

    BehaviourFactory copyPosition;
    copyPosition.make = [](const std::map<std::string, AttributeValue>&) {
        return std::make_unique<CopyObservedPositionBehaviour>();
    };
    reg.add_behaviour("copyObservedPositionBehaviour", std::move(copyPosition));

    reg.validate();
    return reg;
}

} // namespace scensim
