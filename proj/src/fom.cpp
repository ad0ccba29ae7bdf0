#include "scensim/fom.hpp"

#include "scensim/json_text.hpp"
#include "scensim/xml.hpp"

namespace scensim {

const char* sharing_name(Sharing s) {
    switch (s) {
        case Sharing::Publish: return "Publish";
        case Sharing::Subscribe: return "Subscribe";
        case Sharing::PublishSubscribe: return "PublishSubscribe";
        case Sharing::Neither: return "Neither";
    }
    return "Neither";
}

Sharing sharing_from_name(const std::string& name) {
    if (name == "Publish") return Sharing::Publish;
    if (name == "Subscribe") return Sharing::Subscribe;
    if (name == "PublishSubscribe") return Sharing::PublishSubscribe;
    if (name == "Neither") return Sharing::Neither;
    throw Error(ErrorCode::DialectViolation, "unknown sharing '" + name + "'");
}

std::uint32_t fnv1a_32(const std::string& text) {
    std::uint32_t hash = 2166136261u;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 16777619u;
    }
    return hash;
}

std::vector<std::pair<std::string, DataType>> flatten_attribute(const std::string& name,
                                                                DataType type) {
    switch (type) {
        case DataType::Position:
            return {{name + ".latitude", DataType::Double},
                    {name + ".longitude", DataType::Double},
                    {name + ".altitude", DataType::Double}};
        case DataType::Route:
            return {{name + ".encoded", DataType::String}};
        default:
            return {{name, type}};
    }
}

namespace {

FOMModule build_chain(const TypeRegistry& registry, const std::string& leafClass,
                      const SimulationObjectInstance* instance) {
    auto chain = registry.lineage(leafClass);

    // Build leaf-up so each level can own its child by value.
    FOMObjectClass current;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        FOMObjectClass cls;
        cls.name = *it;
        bool anyPublish = false;
        for (const auto& def : registry.descriptor(*it).own_attributes) {
            bool publish = false;
            if (instance) {
                const auto& attr = instance->attribute(def.name);
                publish = attr.publish();
            }
            for (const auto& [leafName, leafType] : flatten_attribute(def.name, def.type)) {
                FOMAttribute fa;
                fa.name = leafName;
                fa.data_type = leafType;
                fa.sharing = publish ? Sharing::Publish : Sharing::Neither;
                anyPublish |= publish;
                cls.attributes.push_back(std::move(fa));
            }
        }
        cls.sharing = anyPublish ? Sharing::Publish : Sharing::Neither;
        if (!current.name.empty()) cls.children.push_back(std::move(current));
        current = std::move(cls);
    }

    FOMModule module;
    module.root.name = kHlaObjectRoot;
    module.root.sharing = Sharing::Neither;
    module.root.children.push_back(std::move(current));
    return module;
}

} // namespace

FOMModule generate_fom_module(const SimulationObjectInstance& instance,
                              const TypeRegistry& registry) {
    FOMModule module = build_chain(registry, instance.concrete_type(), &instance);
    module.source_object_uuid = instance.uuid();
    module.model_name = instance.concrete_type() + "--" +
                        std::to_string(fnv1a_32(instance.uuid()));
    return module;
}

FOMModule generate_base_fom_module(const TypeRegistry& registry) {
    FOMModule module = build_chain(registry, "TrafficParticipant", nullptr);
    module.source_object_uuid = "master";
    module.model_name = std::string("TrafficParticipant--") + std::to_string(fnv1a_32("master"));
    return module;
}

FOMModule generate_subscription_fom_module(const TypeRegistry& registry,
                                           const std::string& className) {
    FOMModule module = build_chain(registry, className, nullptr);
    module.source_object_uuid = "subscription";
    module.model_name = className + "--" + std::to_string(fnv1a_32("subscription:" + className));
    return module;
}

namespace {

constexpr const char* kOmtNamespace = "https://www.sisostds.org/schemas/IEEE1516-2010";
constexpr const char* kOmtSchemaLocation =
    "https://www.sisostds.org/schemas/IEEE1516-2010 "
    "https://www.sisostds.org/schemas/IEEE1516-DIF-2010.xsd";

xml::Node render_class(const FOMObjectClass& cls) {
    xml::Node n{"objectClass", {}, {}, {}};
    n.children.push_back({"name", {}, {}, cls.name});
    n.children.push_back({"sharing", {}, {}, sharing_name(cls.sharing)});
    for (const auto& attr : cls.attributes) {
        xml::Node a{"attribute", {}, {}, {}};
        a.children.push_back({"name", {}, {}, attr.name});
        a.children.push_back({"dataType", {}, {}, data_type_name(attr.data_type)});
        a.children.push_back({"updateType", {}, {}, attr.update_type});
        a.children.push_back({"ownership", {}, {}, attr.ownership});
        a.children.push_back({"sharing", {}, {}, sharing_name(attr.sharing)});
        n.children.push_back(std::move(a));
    }
    for (const auto& child : cls.children) n.children.push_back(render_class(child));
    return n;
}

FOMObjectClass parse_class(const xml::Node& node, const std::string& path) {
    if (node.name != "objectClass")
        throw Error(ErrorCode::DialectViolation, "expected <objectClass>", path);
    FOMObjectClass cls;
    bool haveName = false, haveSharing = false;
    for (const auto& c : node.children) {
        if (c.name == "name") {
            if (haveName) throw Error(ErrorCode::DialectViolation, "repeated <name>", path);
            cls.name = c.text;
            haveName = true;
        } else if (c.name == "sharing") {
            if (haveSharing) throw Error(ErrorCode::DialectViolation, "repeated <sharing>", path);
            cls.sharing = sharing_from_name(c.text);
            haveSharing = true;
        } else if (c.name == "attribute") {
            FOMAttribute fa;
            const xml::Node* name = c.child("name");
            const xml::Node* type = c.child("dataType");
            const xml::Node* update = c.child("updateType");
            const xml::Node* ownership = c.child("ownership");
            const xml::Node* sharing = c.child("sharing");
            if (!name || !type || !update || !ownership || !sharing)
                throw Error(ErrorCode::DialectViolation, "incomplete <attribute>", path);
            fa.name = name->text;
            auto dt = data_type_from_name(type->text);
            if (!dt || !is_scalar(*dt))
                throw Error(ErrorCode::DialectViolation,
                            "attribute dataType must be scalar, got '" + type->text + "'", path);
            fa.data_type = *dt;
            fa.update_type = update->text;
            fa.ownership = ownership->text;
            fa.sharing = sharing_from_name(sharing->text);
            cls.attributes.push_back(std::move(fa));
        } else if (c.name == "objectClass") {
            cls.children.push_back(parse_class(c, path + "." + cls.name));
        } else {
            throw Error(ErrorCode::DialectViolation, "unexpected element <" + c.name + ">", path);
        }
    }
    if (!haveName || cls.name.empty())
        throw Error(ErrorCode::DialectViolation, "objectClass without a name", path);
    if (cls.children.size() > 1)
        throw Error(ErrorCode::DialectViolation,
                    "objectClass '" + cls.name + "' has more than one child class", path);
    return cls;
}

} // namespace

std::string render_fom_xml(const FOMModule& module) {
    xml::Node root{"objectModel",
                   {{"xmlns", kOmtNamespace},
                    {"xmlns:xsi", "https://www.w3.org/2001/XMLSchema-instance"},
                    {"xsi:schemaLocation", kOmtSchemaLocation}},
                   {},
                   {}};
    xml::Node ident{"modelIdentification", {}, {}, {}};
    ident.children.push_back({"name", {}, {}, module.model_name});
    ident.children.push_back({"type", {}, {}, module.model_type});
    ident.children.push_back({"other", {}, {}, module.source_object_uuid});
    root.children.push_back(std::move(ident));

    xml::Node objects{"objects", {}, {}, {}};
    objects.children.push_back(render_class(module.root));
    root.children.push_back(std::move(objects));
    return xml::write_document(root);
}

FOMModule parse_fom_xml(const std::string& document) {
    xml::Node root = xml::parse(document);
    if (root.name != "objectModel")
        throw Error(ErrorCode::DialectViolation, "document element must be <objectModel>");
    const xml::Node* ident = root.child("modelIdentification");
    const xml::Node* objects = root.child("objects");
    if (!ident || !objects)
        throw Error(ErrorCode::DialectViolation,
                    "objectModel needs modelIdentification and objects");
    FOMModule module;
    const xml::Node* name = ident->child("name");
    const xml::Node* type = ident->child("type");
    if (!name || !type)
        throw Error(ErrorCode::DialectViolation, "modelIdentification needs name and type");
    module.model_name = name->text;
    module.model_type = type->text;
    if (const xml::Node* other = ident->child("other")) module.source_object_uuid = other->text;
    if (objects->children.size() != 1)
        throw Error(ErrorCode::DialectViolation, "objects must hold exactly one root class");
    module.root = parse_class(objects->children.front(), "objects");
    if (module.root.name != kHlaObjectRoot)
        throw Error(ErrorCode::DialectViolation, "root class must be HLAObjectRoot");
    return module;
}

std::vector<std::string> class_paths(const FOMModule& module) {
    std::vector<std::string> out;
    const FOMObjectClass* cls = &module.root;
    std::string path;
    for (;;) {
        path = path.empty() ? cls->name : path + "." + cls->name;
        out.push_back(path);
        if (cls->children.empty()) break;
        cls = &cls->children.front();
    }
    return out;
}

std::string leaf_class_path(const FOMModule& module) {
    return class_paths(module).back();
}

} // namespace scensim
