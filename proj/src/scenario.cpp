#include "scensim/scenario.hpp"

#include <algorithm>
#include <set>

#include "scensim/json_text.hpp"
#include "scensim/xml.hpp"

namespace scensim {

namespace {

std::string idx(const std::string& base, size_t i) {
    return base + "[" + std::to_string(i) + "]";
}

const xml::Node& require_child(const xml::Node& node, const std::string& name,
                               const std::string& path) {
    const xml::Node* c = node.child(name);
    if (!c)
        throw Error(ErrorCode::SchemaViolation, "missing required element <" + name + ">",
                    path);
    return *c;
}

void reject_unknown_children(const xml::Node& node, const std::set<std::string>& known,
                             const std::string& path) {
    for (const auto& c : node.children)
        if (!known.count(c.name))
            throw Error(ErrorCode::SchemaViolation, "unexpected element <" + c.name + ">", path);
}

void reject_repeats(const xml::Node& node, const std::set<std::string>& onceOnly,
                    const std::string& path) {
    std::set<std::string> seen;
    for (const auto& c : node.children)
        if (onceOnly.count(c.name) && !seen.insert(c.name).second)
            throw Error(ErrorCode::SchemaViolation, "element <" + c.name + "> repeats", path);
}

double parse_double_text(const xml::Node& node, const std::string& path) {
    return parse_scalar_text(DataType::Double, node.text, path).as_double();
}

Position parse_position_node(const xml::Node& node, const std::string& path) {
    reject_unknown_children(node, {"latitude", "longitude", "altitude"}, path);
    reject_repeats(node, {"latitude", "longitude", "altitude"}, path);
    Position p;
    p.latitude = parse_double_text(require_child(node, "latitude", path), path + ".latitude");
    p.longitude = parse_double_text(require_child(node, "longitude", path), path + ".longitude");
    if (const xml::Node* alt = node.child("altitude"))
        p.altitude = parse_double_text(*alt, path + ".altitude");
    return p;
}

AttributeValue parse_value_node(DataType type, const xml::Node& node, const std::string& path) {
    switch (type) {
        case DataType::Position:
            if (!node.has_child_elements())
                throw Error(ErrorCode::ValueTypeMismatch, "Position value needs child elements",
                            path);
            return AttributeValue(parse_position_node(node, path));
        case DataType::Route: {
            reject_unknown_children(node, {"position"}, path);
            Route route;
            size_t i = 0;
            for (const auto& c : node.children)
                route.waypoints.push_back(parse_position_node(c, idx(path + ".position", i++)));
            return AttributeValue(std::move(route));
        }
        default:
            if (node.has_child_elements())
                throw Error(ErrorCode::ValueTypeMismatch,
                            "scalar value must not contain child elements", path);
            return parse_scalar_text(type, node.text, path);
    }
}

xml::Node render_position_node(const std::string& name, const Position& p) {
    xml::Node n;
    n.name = name;
    n.children.push_back({"latitude", {}, {}, format_double(p.latitude)});
    n.children.push_back({"longitude", {}, {}, format_double(p.longitude)});
    n.children.push_back({"altitude", {}, {}, format_double(p.altitude)});
    return n;
}

xml::Node render_value_node(const std::string& name, const AttributeValue& v) {
    switch (v.kind()) {
        case DataType::Position:
            return render_position_node(name, v.as_position());
        case DataType::Route: {
            xml::Node n;
            n.name = name;
            for (const auto& wp : v.as_route().waypoints)
                n.children.push_back(render_position_node("position", wp));
            return n;
        }
        default:
            return {name, {}, {}, render_scalar_text(v)};
    }
}

std::string require_xsi_type(const xml::Node& node, const std::string& path) {
    const std::string* t = node.attribute("xsi:type");
    if (!t || t->empty())
        throw Error(ErrorCode::SchemaViolation, "missing xsi:type attribute", path);
    return *t;
}

AttributeSpec parse_attribute_spec(const xml::Node& node, const AttributeDef& def,
                                   const std::string& path) {
    reject_unknown_children(node, {"dataType", "name", "publish", "value"}, path);
    reject_repeats(node, {"dataType", "name", "publish", "value"}, path);
    AttributeSpec spec;
    spec.name = require_child(node, "name", path).text;
    if (spec.name != node.name)
        throw Error(ErrorCode::SchemaViolation,
                    "inner name '" + spec.name + "' differs from element <" + node.name + ">",
                    path);
    const std::string& typeName = require_child(node, "dataType", path).text;
    auto type = data_type_from_name(typeName);
    if (!type)
        throw Error(ErrorCode::SchemaViolation, "unknown dataType '" + typeName + "'",
                    path + ".dataType");
    if (*type != def.type)
        throw Error(ErrorCode::ValueTypeMismatch,
                    "attribute '" + spec.name + "' is declared " + data_type_name(def.type) +
                        " in the library, document says " + data_type_name(*type),
                    path + ".dataType");
    spec.data_type = *type;
    spec.publish = parse_scalar_text(DataType::Boolean, require_child(node, "publish", path).text,
                                     path + ".publish")
                       .as_bool();
    spec.value = parse_value_node(*type, require_child(node, "value", path), path + ".value");
    return spec;
}

std::vector<ObservedClass> parse_observed_classes(const xml::Node& wrapper,
                                                  const std::string& path) {
    reject_unknown_children(wrapper, {"observedClass"}, path);
    std::vector<ObservedClass> out;
    size_t i = 0;
    for (const auto& c : wrapper.children) {
        std::string p = idx(path, i++);
        reject_unknown_children(c, {"type", "attributes"}, p);
        reject_repeats(c, {"type", "attributes"}, p);
        ObservedClass oc;
        oc.type = require_child(c, "type", p).text;
        if (const xml::Node* attrs = c.child("attributes")) {
            reject_unknown_children(*attrs, {"attribute"}, p + ".attributes");
            for (const auto& a : attrs->children) oc.attributes.push_back(a.text);
        }
        out.push_back(std::move(oc));
    }
    return out;
}

xml::Node render_observed_classes(const std::vector<ObservedClass>& classes) {
    xml::Node wrapper{"observedClasses", {}, {}, {}};
    for (const auto& oc : classes) {
        xml::Node c{"observedClass", {}, {}, {}};
        c.children.push_back({"type", {}, {}, oc.type});
        xml::Node attrs{"attributes", {}, {}, {}};
        for (const auto& a : oc.attributes) attrs.children.push_back({"attribute", {}, {}, a});
        c.children.push_back(std::move(attrs));
        wrapper.children.push_back(std::move(c));
    }
    return wrapper;
}

BehaviourSpec parse_behaviour(const xml::Node& node, const TypeRegistry& registry,
                              const std::string& path) {
    BehaviourSpec spec;
    spec.concrete_type = require_xsi_type(node, path);
    if (!registry.has_behaviour(spec.concrete_type))
        throw Error(ErrorCode::UnknownType,
                    "behaviour '" + spec.concrete_type + "' is not registered", path);
    const BehaviourFactory& factory = registry.behaviour(spec.concrete_type);
    std::set<std::string> known;
    for (const auto& p : factory.parameters) known.insert(p.name);
    reject_unknown_children(node, known, path);
    for (const auto& p : factory.parameters) {
        const xml::Node* c = node.child(p.name);
        if (!c) {
            if (p.required)
                throw Error(ErrorCode::SchemaViolation,
                            "behaviour parameter <" + p.name + "> missing", path);
            continue;
        }
        spec.parameters[p.name] = parse_value_node(p.type, *c, path + "." + p.name);
    }
    return spec;
}

SimulationObjectSpec parse_simulation_object(const xml::Node& node, const TypeRegistry& registry,
                                             const std::string& path) {
    SimulationObjectSpec spec;
    spec.concrete_type = require_xsi_type(node, path);
    auto className = registry.resolve_class(spec.concrete_type);
    if (!className || registry.descriptor(*className).abstract_class)
        throw Error(ErrorCode::UnknownType,
                    "'" + spec.concrete_type + "' is not a concrete library type", path);

    std::set<std::string> known = {"behaviour", "timeStepSize", "observedClasses"};
    std::map<std::string, AttributeDef> lineageAttrs;
    for (const auto& def : registry.lineage_attributes(*className)) {
        known.insert(def.name);
        lineageAttrs[def.name] = def;
    }
    reject_unknown_children(node, known, path);
    reject_repeats(node, known, path);

    if (const xml::Node* b = node.child("behaviour"))
        spec.behaviour = parse_behaviour(*b, registry, path + ".behaviour");
    spec.time_step_size =
        parse_double_text(require_child(node, "timeStepSize", path), path + ".timeStepSize");
    if (const xml::Node* oc = node.child("observedClasses"))
        spec.observed_classes = parse_observed_classes(*oc, path + ".observedClasses");

    for (const auto& c : node.children) {
        auto it = lineageAttrs.find(c.name);
        if (it == lineageAttrs.end()) continue;
        spec.attribute_specs[c.name] = parse_attribute_spec(c, it->second, path + "." + c.name);
    }
    return spec;
}

SinkConfig parse_sink(const xml::Node& observer, const std::string& path) {
    const xml::Node* file = observer.child("observerFileConfig");
    const xml::Node* ws = observer.child("observerWebSocketConfig");
    if (file && ws)
        throw Error(ErrorCode::SchemaViolation, "observer declares more than one sink", path);
    SinkConfig sink;
    if (file) {
        sink.kind = SinkKind::NdjsonFile;
        reject_unknown_children(*file, {"path"}, path + ".observerFileConfig");
        sink.path = require_child(*file, "path", path + ".observerFileConfig").text;
    } else if (ws) {
        sink.kind = SinkKind::WebSocket;
        reject_unknown_children(*ws, {"host", "port"}, path + ".observerWebSocketConfig");
        sink.host = require_child(*ws, "host", path + ".observerWebSocketConfig").text;
        std::int64_t port = parse_scalar_text(DataType::Integer,
                                              require_child(*ws, "port", path).text,
                                              path + ".observerWebSocketConfig.port")
                                .as_int();
        if (port < 1 || port > 65535)
            throw Error(ErrorCode::SchemaViolation, "port out of range",
                        path + ".observerWebSocketConfig.port");
        sink.port = static_cast<std::uint16_t>(port);
    }
    return sink;
}

ObserverConfig parse_observer(const xml::Node& node, const std::string& path) {
    reject_unknown_children(
        node, {"observedClasses", "observerFileConfig", "observerWebSocketConfig", "timeStepSize"},
        path);
    reject_repeats(
        node, {"observedClasses", "observerFileConfig", "observerWebSocketConfig", "timeStepSize"},
        path);
    ObserverConfig cfg;
    cfg.observed_classes = parse_observed_classes(require_child(node, "observedClasses", path),
                                                  path + ".observedClasses");
    cfg.sink = parse_sink(node, path);
    cfg.time_step_size =
        parse_double_text(require_child(node, "timeStepSize", path), path + ".timeStepSize");
    return cfg;
}

void check_observed_classes(const std::vector<ObservedClass>& classes, const TypeRegistry& registry,
                            const std::string& path, ValidationReport& report) {
    for (size_t i = 0; i < classes.size(); ++i) {
        const auto& oc = classes[i];
        std::string p = idx(path, i);
        auto className = registry.resolve_class(oc.type);
        if (!className) {
            report.findings.push_back(
                {p + ".type", ErrorCode::UnknownType, "unknown observed type '" + oc.type + "'"});
            continue;
        }
        for (size_t a = 0; a < oc.attributes.size(); ++a)
            if (!registry.find_attribute(*className, oc.attributes[a]))
                report.findings.push_back({idx(p + ".attributes", a), ErrorCode::SchemaViolation,
                                           "attribute '" + oc.attributes[a] +
                                               "' does not exist on lineage of " + *className});
    }
}

} // namespace

Scenario parse_scenario(const std::string& document, const TypeRegistry& registry) {
    xml::Node root = xml::parse(document);
    if (root.name != "scenario")
        throw Error(ErrorCode::SchemaViolation, "document element must be <scenario>, got <" +
                                                    root.name + ">");
    for (const auto& [k, v] : root.attributes) {
        if (k == "xmlns") {
            if (v != kScenarioNamespace)
                throw Error(ErrorCode::SchemaViolation, "unexpected namespace '" + v + "'");
        } else if (k.rfind("xmlns:", 0) != 0) {
            throw Error(ErrorCode::SchemaViolation, "unexpected attribute '" + k + "'");
        }
    }
    reject_unknown_children(root, {"library", "simulationIterations", "simulationObjects",
                                   "observers"},
                            "scenario");
    reject_repeats(root, {"library", "simulationIterations", "simulationObjects", "observers"},
                   "scenario");

    Scenario scenario;
    const xml::Node& lib = require_child(root, "library", "scenario");
    reject_unknown_children(lib, {"name", "version"}, "library");
    scenario.library.name = require_child(lib, "name", "library").text;
    scenario.library.version = require_child(lib, "version", "library").text;

    scenario.simulation_iterations =
        parse_scalar_text(DataType::Integer,
                          require_child(root, "simulationIterations", "scenario").text,
                          "simulationIterations")
            .as_int();

    const xml::Node& objects = require_child(root, "simulationObjects", "scenario");
    reject_unknown_children(objects, {"simulationObject"}, "simulationObjects");
    if (objects.children.empty())
        throw Error(ErrorCode::SchemaViolation, "at least one simulationObject is required",
                    "simulationObjects");
    size_t i = 0;
    for (const auto& obj : objects.children)
        scenario.simulation_objects.push_back(
            parse_simulation_object(obj, registry, idx("simulationObjects", i++)));

    if (const xml::Node* observers = root.child("observers")) {
        reject_unknown_children(*observers, {"observer"}, "observers");
        size_t o = 0;
        for (const auto& obs : observers->children)
            scenario.observers.push_back(parse_observer(obs, idx("observers", o++)));
    }

    ValidationReport report = validate_scenario(scenario, registry);
    if (!report.ok()) {
        const Finding& first = report.findings.front();
        throw Error(first.code, first.message, first.path);
    }
    return scenario;
}

std::string serialize_scenario(const Scenario& scenario) {
    xml::Node root{"scenario",
                   {{"xmlns", kScenarioNamespace},
                    {"xmlns:xsi", "http://www.w3.org/2001/XMLSchema-instance"}},
                   {},
                   {}};
    xml::Node lib{"library", {}, {}, {}};
    lib.children.push_back({"name", {}, {}, scenario.library.name});
    lib.children.push_back({"version", {}, {}, scenario.library.version});
    root.children.push_back(std::move(lib));

    root.children.push_back(
        {"simulationIterations", {}, {}, format_int(scenario.simulation_iterations)});

    xml::Node objects{"simulationObjects", {}, {}, {}};
    for (const auto& spec : scenario.simulation_objects) {
        xml::Node obj{"simulationObject", {{"xsi:type", spec.concrete_type}}, {}, {}};
        if (spec.behaviour) {
            xml::Node b{"behaviour", {{"xsi:type", spec.behaviour->concrete_type}}, {}, {}};
            for (const auto& [name, value] : spec.behaviour->parameters)
                b.children.push_back(render_value_node(name, value));
            obj.children.push_back(std::move(b));
        }
        obj.children.push_back({"timeStepSize", {}, {}, format_double(spec.time_step_size)});
        for (const auto& [name, attr] : spec.attribute_specs) {
            xml::Node a{name, {}, {}, {}};
            a.children.push_back({"dataType", {}, {}, data_type_name(attr.data_type)});
            a.children.push_back({"name", {}, {}, attr.name});
            a.children.push_back({"publish", {}, {}, attr.publish ? "true" : "false"});
            a.children.push_back(render_value_node("value", attr.value));
            obj.children.push_back(std::move(a));
        }
        if (!spec.observed_classes.empty())
            obj.children.push_back(render_observed_classes(spec.observed_classes));
        objects.children.push_back(std::move(obj));
    }
    root.children.push_back(std::move(objects));

    if (!scenario.observers.empty()) {
        xml::Node observers{"observers", {}, {}, {}};
        for (const auto& cfg : scenario.observers) {
            xml::Node obs{"observer", {}, {}, {}};
            obs.children.push_back(render_observed_classes(cfg.observed_classes));
            if (cfg.sink.kind == SinkKind::NdjsonFile) {
                xml::Node f{"observerFileConfig", {}, {}, {}};
                f.children.push_back({"path", {}, {}, cfg.sink.path});
                obs.children.push_back(std::move(f));
            } else if (cfg.sink.kind == SinkKind::WebSocket) {
                xml::Node w{"observerWebSocketConfig", {}, {}, {}};
                w.children.push_back({"host", {}, {}, cfg.sink.host});
                w.children.push_back({"port", {}, {}, format_int(cfg.sink.port)});
                obs.children.push_back(std::move(w));
            }
            obs.children.push_back({"timeStepSize", {}, {}, format_double(cfg.time_step_size)});
            observers.children.push_back(std::move(obs));
        }
        root.children.push_back(std::move(observers));
    }
    return xml::write_document(root);
}

ValidationReport validate_scenario(const Scenario& scenario, const TypeRegistry& registry) {
    ValidationReport report;
    auto add = [&report](const std::string& path, ErrorCode code, const std::string& message) {
        report.findings.push_back({path, code, message});
    };

    if (scenario.library.name.empty())
        add("library.name", ErrorCode::SchemaViolation, "library name is empty");
    if (scenario.library.version.empty())
        add("library.version", ErrorCode::SchemaViolation, "library version is empty");
    if (!scenario.library.name.empty() &&
        (scenario.library.name != registry.library_name() ||
         scenario.library.version != registry.library_version()))
        add("library", ErrorCode::LibraryMismatch,
            "scenario references " + scenario.library.name + " " + scenario.library.version +
                ", loaded library is " + registry.library_name() + " " +
                registry.library_version());

    if (scenario.simulation_iterations < 1)
        add("simulationIterations", ErrorCode::SchemaViolation,
            "simulationIterations must be at least 1");
    if (scenario.simulation_objects.empty())
        add("simulationObjects", ErrorCode::SchemaViolation,
            "at least one simulationObject is required");

    std::optional<double> sharedStep;
    auto check_step = [&](double step, const std::string& path) {
        if (!(step > 0)) {
            add(path, ErrorCode::SchemaViolation, "timeStepSize must be > 0");
            return;
        }
        if (!sharedStep) {
            sharedStep = step;
        } else if (!bits_equal(*sharedStep, step)) {
            add(path, ErrorCode::SchemaViolation,
                "every timeStepSize in a scenario must be identical");
        }
    };

    for (size_t i = 0; i < scenario.simulation_objects.size(); ++i) {
        const auto& spec = scenario.simulation_objects[i];
        std::string path = idx("simulationObjects", i);
        auto className = registry.resolve_class(spec.concrete_type);
        if (!className) {
            add(path, ErrorCode::UnknownType,
                "type '" + spec.concrete_type + "' is not in the library");
            continue;
        }
        if (registry.descriptor(*className).abstract_class) {
            add(path, ErrorCode::UnknownType,
                "type '" + spec.concrete_type + "' is abstract and cannot be instantiated");
            continue;
        }
        check_step(spec.time_step_size, path + ".timeStepSize");

        auto chain = registry.lineage(*className);
        bool active = std::find(chain.begin(), chain.end(), "ActiveSimulationObject") !=
                      chain.end();
        if (active && !spec.behaviour) {
            add(path + ".behaviour", ErrorCode::MissingBehaviour,
                "active object needs a behaviour");
        }
        if (spec.behaviour) {
            if (!registry.has_behaviour(spec.behaviour->concrete_type)) {
                add(path + ".behaviour", ErrorCode::UnknownType,
                    "behaviour '" + spec.behaviour->concrete_type + "' is not registered");
            } else {
                const auto& factory = registry.behaviour(spec.behaviour->concrete_type);
                for (const auto& p : factory.parameters) {
                    auto it = spec.behaviour->parameters.find(p.name);
                    if (it == spec.behaviour->parameters.end()) {
                        if (p.required)
                            add(path + ".behaviour." + p.name, ErrorCode::SchemaViolation,
                                "required behaviour parameter missing");
                    } else if (it->second.kind() != p.type) {
                        add(path + ".behaviour." + p.name, ErrorCode::ValueTypeMismatch,
                            "behaviour parameter has wrong value kind");
                    }
                }
                for (const auto& [name, _] : spec.behaviour->parameters) {
                    bool declared = false;
                    for (const auto& p : factory.parameters) declared |= (p.name == name);
                    if (!declared)
                        add(path + ".behaviour." + name, ErrorCode::SchemaViolation,
                            "behaviour parameter is not declared by the factory");
                }
            }
        }

        for (const auto& [name, attr] : spec.attribute_specs) {
            std::string apath = path + "." + name;
            auto def = registry.find_attribute(*className, name);
            if (!def) {
                add(apath, ErrorCode::SchemaViolation,
                    "attribute '" + name + "' does not exist on lineage of " + *className);
                continue;
            }
            if (attr.data_type != def->type)
                add(apath + ".dataType", ErrorCode::ValueTypeMismatch,
                    "library declares " + std::string(data_type_name(def->type)));
            if (attr.value.kind() != attr.data_type) {
                add(apath + ".value", ErrorCode::ValueTypeMismatch,
                    std::string("value kind ") + data_type_name(attr.value.kind()) +
                        " does not match declared " + data_type_name(attr.data_type));
                continue;
            }
            if (attr.value.kind() == DataType::Position) {
                const Position& p = attr.value.as_position();
                if (p.latitude < -90.0 || p.latitude > 90.0 || p.longitude < -180.0 ||
                    p.longitude > 180.0)
                    add(apath + ".value", ErrorCode::ValueTypeMismatch,
                        "position out of range");
            }
            if (attr.value.kind() == DataType::Route &&
                attr.value.as_route().waypoints.size() < 2)
                add(apath + ".value", ErrorCode::ValueTypeMismatch,
                    "route needs at least 2 waypoints");
        }
        if (spec.behaviour) {
            for (const auto& [name, value] : spec.behaviour->parameters)
                if (value.kind() == DataType::Route && value.as_route().waypoints.size() < 2)
                    add(path + ".behaviour." + name, ErrorCode::ValueTypeMismatch,
                        "route needs at least 2 waypoints");
        }
        check_observed_classes(spec.observed_classes, registry, path + ".observedClasses",
                               report);
    }

    for (size_t i = 0; i < scenario.observers.size(); ++i) {
        const auto& cfg = scenario.observers[i];
        std::string path = idx("observers", i);
        if (cfg.observed_classes.empty())
            add(path + ".observedClasses", ErrorCode::SchemaViolation,
                "observer needs at least one observedClass");
        check_step(cfg.time_step_size, path + ".timeStepSize");
        check_observed_classes(cfg.observed_classes, registry, path + ".observedClasses", report);
        if (cfg.sink.kind == SinkKind::NdjsonFile && cfg.sink.path.empty())
            add(path + ".observerFileConfig.path", ErrorCode::SchemaViolation,
                "sink path is empty");
        if (cfg.sink.kind == SinkKind::WebSocket &&
            (cfg.sink.host.empty() || cfg.sink.port == 0))
            add(path + ".observerWebSocketConfig", ErrorCode::SchemaViolation,
                "websocket sink needs host and port");
    }
    return report;
}

} // namespace scensim
