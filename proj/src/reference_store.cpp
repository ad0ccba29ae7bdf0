#include "scensim/reference_store.hpp"

#include <algorithm>

namespace scensim {

std::vector<std::string> ancestor_paths(const std::string& classPath) {
    std::vector<std::string> out;
    size_t pos = 0;
    for (;;) {
        size_t dot = classPath.find('.', pos);
        out.push_back(classPath.substr(0, dot));
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    return out;
}

std::string leaf_segment(const std::string& classPath) {
    size_t dot = classPath.rfind('.');
    return dot == std::string::npos ? classPath : classPath.substr(dot + 1);
}

namespace {

std::string component_of(DataType type, const std::string& leafName) {
    if (type == DataType::Position) {
        size_t dot = leafName.rfind('.');
        return leafName.substr(dot + 1);
    }
    if (type == DataType::Route) return "encoded";
    return "";
}

} // namespace

ReferenceStore::ReferenceStore(SimulationObjectInstancePtr instance, FOMModule fom,
                               const TypeRegistry* registry)
    : instance_(std::move(instance)), fom_(std::move(fom)), registry_(registry) {
    if (leaf_segment(leaf_class_path(fom_)) != instance_->concrete_type())
        throw Error(ErrorCode::InconsistentInput,
                    "module leaf '" + leaf_segment(leaf_class_path(fom_)) +
                        "' does not match instance type '" + instance_->concrete_type() + "'");

    const FOMObjectClass* cls = &fom_.root;
    std::string path;
    for (;;) {
        path = path.empty() ? cls->name : path + "." + cls->name;
        path_to_class_[path] = cls;
        class_to_path_[cls] = path;
        for (const auto& attr : cls->attributes) {
            std::string attrPath = path + "." + attr.name;
            path_to_fom_attribute_[attrPath] = &attr;
            fom_attribute_to_path_[&attr] = attrPath;
        }
        if (cls->children.empty()) break;
        cls = &cls->children.front();
    }

    index_object(leaf_class_path(fom_), instance_, own_paths_);
    for (const auto& [pathKey, binding] : own_paths_)
        if (binding.attribute->publish()) published_paths_.push_back(pathKey);
}

void ReferenceStore::index_object(const std::string& leafClassPath,
                                  const SimulationObjectInstancePtr& object,
                                  std::map<std::string, AttributeBinding>& pathTable) {
    for (const auto& ancestor : ancestor_paths(leafClassPath))
        path_to_objects_.emplace(ancestor, object);
    uuid_to_object_[object->uuid()] = object;
    object_leaf_path_[object->uuid()] = leafClassPath;

    // Attribute paths anchor at the class that declares the attribute; the
    // segments of the leaf path line up with the registry lineage.
    const std::string& concrete = object->concrete_type();
    for (const auto& [name, attr] : object->attributes()) {
        auto declaring = registry_->declaring_class(concrete, name);
        if (!declaring)
            throw Error(ErrorCode::InconsistentInput,
                        "attribute '" + name + "' missing from lineage of " + concrete);
        size_t cut = leafClassPath.find("." + *declaring);
        std::string classPath;
        if (*declaring == leafClassPath) {
            classPath = leafClassPath;
        } else if (cut != std::string::npos) {
            classPath = leafClassPath.substr(0, cut + 1 + declaring->size());
        } else {
            throw Error(ErrorCode::InconsistentInput,
                        "declaring class '" + *declaring + "' not on path " + leafClassPath);
        }
        for (const auto& [leafName, leafType] : flatten_attribute(name, attr->data_type())) {
            std::string attrPath = classPath + "." + leafName;
            path_to_attributes_.emplace(attrPath, attr);
            pathTable[attrPath] = AttributeBinding{attr, component_of(attr->data_type(), leafName)};
        }
        uuid_to_attribute_[attr->uuid()] = attr;
    }
}

std::string ReferenceStore::fom_path_for_object_class(const FOMObjectClass& cls) const {
    auto it = class_to_path_.find(&cls);
    if (it == class_to_path_.end())
        throw Error(ErrorCode::UnknownClassPath, "class is not part of this module");
    return it->second;
}

std::string ReferenceStore::fom_path_for_fom_attribute(const FOMAttribute& attribute) const {
    auto it = fom_attribute_to_path_.find(&attribute);
    if (it == fom_attribute_to_path_.end())
        throw Error(ErrorCode::UnknownAttributePath, "attribute is not part of this module");
    return it->second;
}

const std::string& ReferenceStore::fom_path_for_simulation_object(
    const std::string& objectUUID) const {
    auto it = object_leaf_path_.find(objectUUID);
    if (it == object_leaf_path_.end())
        throw Error(ErrorCode::UnknownObject, "object '" + objectUUID + "' is not registered");
    return it->second;
}

SimulationObjectInstancePtr ReferenceStore::simulation_object_by_uuid(
    const std::string& uuid) const {
    auto it = uuid_to_object_.find(uuid);
    if (it == uuid_to_object_.end())
        throw Error(ErrorCode::UnknownObject, "object '" + uuid + "' is not registered");
    return it->second;
}

SimulationAttributePtr ReferenceStore::simulation_attribute_by_uuid(
    const std::string& uuid) const {
    auto it = uuid_to_attribute_.find(uuid);
    if (it == uuid_to_attribute_.end())
        throw Error(ErrorCode::UnknownAttributeUUID,
                    "attribute '" + uuid + "' is not registered");
    return it->second;
}

void ReferenceStore::add_subscription(const std::string& classPath) {
    subscriptions_.insert(classPath);
}

bool ReferenceStore::covers_subscription(const std::string& classPath) const {
    for (const auto& sub : subscriptions_) {
        if (classPath == sub) return true;
        if (classPath.size() > sub.size() && classPath.compare(0, sub.size(), sub) == 0 &&
            classPath[sub.size()] == '.')
            return true;
    }
    return false;
}

void ReferenceStore::register_discovered(const std::string& classPath,
                                         SimulationObjectInstancePtr remote) {
    if (!covers_subscription(classPath))
        throw Error(ErrorCode::UnknownClassPath,
                    "class path '" + classPath + "' was never subscribed");
    if (uuid_to_object_.count(remote->uuid())) return; // idempotent
    index_object(classPath, remote, object_attribute_paths_[remote->uuid()]);
}

AttributeBinding ReferenceStore::resolve_attribute(const std::string& objectUUID,
                                                   const std::string& attributePath) const {
    auto obj = uuid_to_object_.find(objectUUID);
    if (obj == uuid_to_object_.end())
        throw Error(ErrorCode::UnknownObject, "object '" + objectUUID + "' is not registered");
    const std::map<std::string, AttributeBinding>* table = nullptr;
    if (obj->second == instance_) {
        table = &own_paths_;
    } else {
        auto it = object_attribute_paths_.find(objectUUID);
        if (it != object_attribute_paths_.end()) table = &it->second;
    }
    if (table) {
        auto it = table->find(attributePath);
        if (it != table->end()) return it->second;
    }
    throw Error(ErrorCode::UnknownAttributePath,
                "object '" + objectUUID + "' has no attribute path '" + attributePath + "'");
}

ReferenceStore build_reference_store(SimulationObjectInstancePtr instance, FOMModule fom,
                                     const TypeRegistry& registry) {
    return ReferenceStore(std::move(instance), std::move(fom), &registry);
}

} // namespace scensim
