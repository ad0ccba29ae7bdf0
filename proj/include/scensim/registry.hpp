#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scensim/value.hpp"

namespace scensim {

class Behaviour;

struct AttributeDef {
    std::string name;
    DataType type = DataType::Double;
    bool default_publish = false;
};

struct ClassDescriptor {
    std::string name;
    std::optional<std::string> parent;
    bool abstract_class = false;
    std::vector<AttributeDef> own_attributes;
};

struct BehaviourParamDef {
    std::string name;
    DataType type;
    bool required = true;
};

struct BehaviourFactory {
    std::vector<BehaviourParamDef> parameters;
    std::function<std::unique_ptr<Behaviour>(const std::map<std::string, AttributeValue>&)> make;
};

/// The construction-kit catalogue: a single-rooted class hierarchy plus the
/// behaviour factories scenarios may reference. Immutable once built and
/// shareable across threads.
class TypeRegistry {
public:
    TypeRegistry(std::string libraryName, std::string libraryVersion);

    const std::string& library_name() const { return library_name_; }
    const std::string& library_version() const { return library_version_; }

    void add_class(ClassDescriptor descriptor);
    void add_behaviour(const std::string& name, BehaviourFactory factory);

    /// Checks hierarchy shape: single root, acyclic parent links, unique
    /// attribute names along every lineage. Call once after registration.
    void validate() const;

    bool has_class(const std::string& className) const;
    const ClassDescriptor& descriptor(const std::string& className) const;

    /// Resolves a scenario-side reference ("containerShip", "vessel") to a
    /// registered class name by capitalizing the first letter.
    std::optional<std::string> resolve_class(const std::string& reference) const;

    /// Root-first chain of class names ending at `className`.
    std::vector<std::string> lineage(const std::string& className) const;

    /// Attribute definitions over the full lineage, root classes first.
    std::vector<AttributeDef> lineage_attributes(const std::string& className) const;

    std::optional<AttributeDef> find_attribute(const std::string& className,
                                               const std::string& attributeName) const;

    /// Class that declares `attributeName` within the lineage of `className`.
    std::optional<std::string> declaring_class(const std::string& className,
                                               const std::string& attributeName) const;

    bool has_behaviour(const std::string& name) const;
    const BehaviourFactory& behaviour(const std::string& name) const;

    std::vector<std::string> class_names() const;
    std::vector<std::string> behaviour_names() const;

    static std::string capitalize(const std::string& reference);

private:
    std::string library_name_;
    std::string library_version_;
    std::map<std::string, ClassDescriptor> classes_;
    std::map<std::string, BehaviourFactory> behaviours_;
};

/// The built-in maritime catalogue (containers ships and general cargo
/// vessels over the generic traffic layers).
TypeRegistry builtin_registry();

inline constexpr const char* kRootClassName = "SimulationObject";

} // namespace scensim
