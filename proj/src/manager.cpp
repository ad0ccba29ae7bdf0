#include "scensim/manager.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <thread>

#include "scensim/coordinator.hpp"
#include "scensim/json_text.hpp"

namespace scensim {

namespace fs = std::filesystem;

std::vector<FOMModule> RunPlan::all_modules() const {
    std::vector<FOMModule> modules;
    modules.push_back(master.base_fom_module);
    for (const auto& f : federates) modules.push_back(f.fom_module);
    modules.insert(modules.end(), subscription_modules.begin(), subscription_modules.end());
    return modules;
}

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::UsageError, "cannot read '" + path.string() + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::SinkFailure, "cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

} // namespace

RunPlan plan_run_from_text(const std::string& document, const TypeRegistry& registry,
                           const PlanOptions& options) {
    Scenario scenario = parse_scenario(document, registry);

    RunPlan plan;
    plan.registry = &registry;
    plan.output_dir = options.output_dir;
    plan.observer_configs = scenario.observers;
    plan.master.base_fom_module = generate_base_fom_module(registry);
    plan.shared_step = scenario.simulation_objects.front().time_step_size;

    for (size_t i = 0; i < scenario.simulation_objects.size(); ++i) {
        const auto& spec = scenario.simulation_objects[i];
        PlannedFederate planned;
        planned.instance = instantiate(registry, spec, static_cast<int>(i + 1));
        planned.federate_name = "fed-" + planned.instance->uuid();
        planned.fom_module = generate_fom_module(*planned.instance, registry);
        planned.reference_store = std::make_shared<ReferenceStore>(
            build_reference_store(planned.instance, planned.fom_module, registry));
        plan.federates.push_back(std::move(planned));
    }
    plan.scenario = std::move(scenario);

    // Subscribed-only classes still need their paths in the class tree.
    std::set<std::string> covered, subscribed;
    for (const auto& f : plan.federates)
        covered.insert(leaf_segment(leaf_class_path(f.fom_module)));
    auto note = [&](const std::vector<ObservedClass>& classes) {
        for (const auto& oc : classes)
            if (auto className = registry.resolve_class(oc.type)) subscribed.insert(*className);
    };
    for (const auto& spec : plan.scenario.simulation_objects) note(spec.observed_classes);
    for (const auto& cfg : plan.scenario.observers) note(cfg.observed_classes);
    for (const auto& className : subscribed)
        if (!covered.count(className))
            plan.subscription_modules.push_back(
                generate_subscription_fom_module(registry, className));

    if (options.write_fom_files) {
        fs::create_directories(plan.output_dir / "fom");
        write_file(plan.output_dir / "fom" / "base.xml",
                   render_fom_xml(plan.master.base_fom_module));
        for (const auto& f : plan.federates)
            write_file(plan.output_dir / "fom" / (f.instance->uuid() + ".xml"),
                       render_fom_xml(f.fom_module));
    }
    return plan;
}

RunPlan plan_run(const fs::path& scenarioPath, const TypeRegistry& registry,
                 const PlanOptions& options) {
    return plan_run_from_text(read_file(scenarioPath), registry, options);
}

namespace {

struct MasterSession {
    ClientChannelPtr channel;
    std::string label;
    std::chrono::milliseconds timeout;

    RtiMessage message(MessageKind kind, nlohmann::json payload = nlohmann::json::object()) {
        RtiMessage msg;
        msg.kind = kind;
        msg.sender = "master";
        msg.payload = std::move(payload);
        return msg;
    }

    RtiMessage await(MessageKind kind) {
        for (;;) {
            RecvResult r = channel->receive(timeout);
            if (r.status == RecvStatus::Timeout)
                throw Error(ErrorCode::StartupTimeout,
                            "federation did not synchronize within the deadline");
            if (r.status == RecvStatus::Closed)
                throw Error(ErrorCode::ProtocolFault, "master connection closed");
            if (r.message.kind == MessageKind::Fault)
                throw Error(ErrorCode::ProtocolFault,
                            "run aborted: " + r.message.payload.value("detail", ""));
            if (r.message.kind == kind) return r.message;
        }
    }
};

ObserverSinkPtr scenario_sink(const SinkConfig& sink) {
    switch (sink.kind) {
        case SinkKind::Stdout: return make_stdout_sink();
        case SinkKind::NdjsonFile: return make_file_sink(sink.path);
        case SinkKind::WebSocket: return make_websocket_sink(sink.host, sink.port);
    }
    return make_stdout_sink();
}

} // namespace

RunReport run_distributed(const RunPlan& plan, const RunOptions& options) {
    auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    fs::create_directories(plan.output_dir);

    // Transport endpoint and a channel factory over it.
    std::unique_ptr<InProcHub> hub;
    std::unique_ptr<TcpServerEndpoint> tcp;
    std::function<ClientChannelPtr()> make_channel;
    if (options.transport == RunOptions::Transport::InProc) {
        hub = std::make_unique<InProcHub>();
        make_channel = [&hub] { return hub->connect(); };
    } else {
        std::string host = "127.0.0.1";
        std::uint16_t port = options.port;
        if (const char* addr = std::getenv("SCENSIM_RTI_ADDR")) {
            std::string spec(addr);
            auto colon = spec.rfind(':');
            if (colon != std::string::npos) {
                host = spec.substr(0, colon);
                port = static_cast<std::uint16_t>(std::stoi(spec.substr(colon + 1)));
            }
        }
        tcp = std::make_unique<TcpServerEndpoint>(port);
        std::uint16_t boundPort = tcp->bound_port();
        make_channel = [host, boundPort] { return connect_tcp(host, boundPort); };
    }
    ServerEndpoint& endpoint = hub ? static_cast<ServerEndpoint&>(*hub)
                                   : static_cast<ServerEndpoint&>(*tcp);

    CoordinatorOptions coordOptions;
    coordOptions.expected_members = plan.member_count();
    coordOptions.preloaded_modules = plan.all_modules();
    coordOptions.audit = options.audit;
    Coordinator coordinator(endpoint, std::move(coordOptions));
    std::thread coordinatorThread([&coordinator] { coordinator.run(); });

    report.federates.resize(plan.federates.size());
    report.observers.resize(plan.observer_configs.size());
    report.observer_lines.resize(plan.observer_configs.size());

    std::vector<std::thread> workers;
    auto join_workers = [&workers] {
        for (auto& w : workers)
            if (w.joinable()) w.join();
    };

    MasterSession master{nullptr, plan.master.sync_point_label, options.startup_timeout};
    bool masterResigned = false;
    try {
        master.channel = make_channel();
        master.channel->send(master.message(MessageKind::CreateFederation,
                                            {{"federation", "scensim"}}));
        master.channel->send(
            master.message(MessageKind::JoinFederation, {{"timeManaged", false}}));
        master.channel->send(master.message(
            MessageKind::FomModuleOffer,
            {{"module", render_fom_xml(plan.master.base_fom_module)}}));

        // The federation has to exist before anyone else may join.
        auto deadline = std::chrono::steady_clock::now() + options.startup_timeout;
        while (!coordinator.federation_exists() || coordinator.joined_count() < 1) {
            if (std::chrono::steady_clock::now() > deadline)
                throw Error(ErrorCode::StartupTimeout, "coordinator did not come up");
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
        }

        master.channel->send(
            master.message(MessageKind::RegisterSyncPoint, {{"label", master.label}}));

        for (size_t i = 0; i < plan.federates.size(); ++i) {
            const auto& planned = plan.federates[i];
            FederateConfig cfg;
            cfg.federate_name = planned.federate_name;
            cfg.instance = planned.instance;
            cfg.fom_module = planned.fom_module;
            cfg.reference_store = planned.reference_store;
            cfg.registry = plan.registry;
            cfg.step_size = plan.shared_step;
            cfg.total_iterations = plan.scenario.simulation_iterations;
            cfg.channel = make_channel();
            cfg.recv_timeout = options.recv_timeout;
            if (options.drop_connection_at_step && options.drop_connection_federate == i)
                cfg.drop_connection_at_step = options.drop_connection_at_step;
            workers.emplace_back([&report, i, cfg = std::move(cfg)]() mutable {
                report.federates[i] = run_federate(cfg);
            });
        }

        for (size_t i = 0; i < plan.observer_configs.size(); ++i) {
            ObserverRunConfig cfg;
            cfg.federate_name = "obs-" + std::to_string(i);
            cfg.config = plan.observer_configs[i];
            cfg.registry = plan.registry;
            cfg.step_size = plan.shared_step;
            cfg.total_iterations = plan.scenario.simulation_iterations;
            cfg.channel = make_channel();
            cfg.recv_timeout = options.recv_timeout;
            auto capture = std::make_shared<CapturingSink>();
            fs::path streamPath = plan.output_dir / ("observer-" + std::to_string(i) + ".ndjson");
            cfg.sinks.push_back(capture);
            cfg.sinks.push_back(make_file_sink(streamPath.string()));
            if (options.attach_scenario_sinks)
                cfg.sinks.push_back(scenario_sink(plan.observer_configs[i].sink));
            report.observer_stream_paths.push_back(streamPath);
            workers.emplace_back([&report, i, cfg = std::move(cfg), capture]() mutable {
                report.observers[i] = run_observer(cfg);
                report.observer_lines[i] = capture->lines();
            });
        }

        master.await(MessageKind::AnnounceSyncPoint);
        master.channel->send(
            master.message(MessageKind::SyncPointAchieved, {{"label", master.label}}));
        master.await(MessageKind::FederationSynchronized);

        join_workers();

        // The master leaves last and takes the federation down with it.
        master.channel->send(master.message(MessageKind::ResignFederation));
        master.channel->send(master.message(MessageKind::DestroyFederation));
        masterResigned = true;
    } catch (const std::exception& e) {
        report.faults.push_back(e.what());
        coordinator.request_stop();
        join_workers();
    }
    if (!masterResigned) coordinator.request_stop();

    if (coordinatorThread.joinable()) coordinatorThread.join();
    endpoint.shutdown();
    if (master.channel) master.channel->close();

    report.aborted = coordinator.aborted();
    for (const auto& fault : coordinator.faults()) report.faults.push_back(fault);
    for (const auto& f : report.federates)
        if (f.faulted) report.aborted = true;
    for (const auto& o : report.observers)
        if (o.faulted) report.aborted = true;
    report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (options.write_report) write_run_report(plan, report);
    return report;
}

// ---------------------------------------------------------------------------
// Sequential reference executor

namespace {

struct ReferenceObject {
    SimulationObjectInstancePtr instance;
    std::string class_path;
    std::vector<std::string> lineage;
    std::set<std::string> published; // attribute names with publish=true
};

/// Attribute names an observed-class declaration exposes for one object:
/// names listed in the declaration that exist on the object's lineage,
/// intersected with what the object publishes.
std::set<std::string> visible_names(const TypeRegistry& registry, const ReferenceObject& object,
                                    const std::vector<ObservedClass>& observedClasses) {
    std::set<std::string> out;
    for (const auto& oc : observedClasses) {
        auto className = registry.resolve_class(oc.type);
        if (!className) continue;
        if (std::find(object.lineage.begin(), object.lineage.end(), *className) ==
            object.lineage.end())
            continue;
        for (const auto& name : oc.attributes) {
            if (!registry.find_attribute(*className, name)) continue;
            if (object.published.count(name)) out.insert(name);
        }
    }
    return out;
}

bool lineage_matches(const TypeRegistry& registry, const ReferenceObject& object,
                     const std::vector<ObservedClass>& observedClasses) {
    for (const auto& oc : observedClasses) {
        auto className = registry.resolve_class(oc.type);
        if (!className) continue;
        if (std::find(object.lineage.begin(), object.lineage.end(), *className) !=
            object.lineage.end())
            return true;
    }
    return false;
}

} // namespace

ReferenceResult run_reference(const Scenario& scenario, const TypeRegistry& registry) {
    ValidationReport validation = validate_scenario(scenario, registry);
    if (!validation.ok()) {
        const Finding& first = validation.findings.front();
        throw Error(first.code, first.message, first.path);
    }

    std::vector<ReferenceObject> objects;
    for (size_t i = 0; i < scenario.simulation_objects.size(); ++i) {
        ReferenceObject object;
        object.instance = instantiate(registry, scenario.simulation_objects[i],
                                      static_cast<int>(i + 1));
        object.lineage = registry.lineage(
            *registry.resolve_class(scenario.simulation_objects[i].concrete_type));
        object.class_path = kHlaObjectRoot;
        for (const auto& cls : object.lineage) object.class_path += "." + cls;
        for (const auto& [name, attr] : object.instance->attributes())
            if (attr->publish()) object.published.insert(name);
        objects.push_back(std::move(object));
    }

    // Peer mirrors seen by each object's behaviour, tracking publish-and-
    // subscribe-visible values committed a step earlier.
    struct MirrorSlot {
        SimulationObjectInstancePtr mirror;
        const ReferenceObject* source;
        std::set<std::string> names;
    };
    std::vector<std::vector<MirrorSlot>> mirrors(objects.size());
    for (size_t i = 0; i < objects.size(); ++i) {
        const auto& observedClasses = objects[i].instance->observed_classes();
        for (size_t j = 0; j < objects.size(); ++j) {
            if (i == j) continue;
            if (!lineage_matches(registry, objects[j], observedClasses)) continue;
            MirrorSlot slot;
            slot.mirror = make_remote_mirror(registry, objects[j].instance->concrete_type(),
                                             objects[j].instance->uuid());
            slot.source = &objects[j];
            slot.names = visible_names(registry, objects[j], observedClasses);
            mirrors[i].push_back(std::move(slot));
        }
    }
    auto refresh_mirrors = [&mirrors](size_t i) {
        for (auto& slot : mirrors[i])
            for (const auto& name : slot.names)
                slot.mirror->attribute(name).set_value(
                    slot.source->instance->attribute(name).value());
    };

    // Observer streams with the live pipeline's change-detection engine.
    ReferenceResult result;
    std::vector<std::shared_ptr<CapturingSink>> captures;
    std::vector<ObserverStream> streams;
    std::vector<std::vector<std::pair<size_t, std::set<std::string>>>> watched; // per observer
    for (const auto& cfg : scenario.observers) {
        auto capture = std::make_shared<CapturingSink>();
        captures.push_back(capture);
        streams.emplace_back(std::vector<ObserverSinkPtr>{capture});
        std::vector<std::pair<size_t, std::set<std::string>>> entries;
        for (size_t j = 0; j < objects.size(); ++j) {
            if (!lineage_matches(registry, objects[j], cfg.observed_classes)) continue;
            streams.back().track(objects[j].instance->uuid(), objects[j].class_path);
            entries.emplace_back(j, visible_names(registry, objects[j], cfg.observed_classes));
        }
        watched.push_back(std::move(entries));
    }
    auto feed_streams = [&](std::int64_t step, double time) {
        for (size_t o = 0; o < streams.size(); ++o) {
            for (const auto& [j, names] : watched[o])
                for (const auto& name : names)
                    streams[o].set_value(objects[j].instance->uuid(), name,
                                         objects[j].instance->attribute(name).value());
            streams[o].emit_step(step, time);
        }
    };

    const double dt = scenario.simulation_objects.front().time_step_size;
    feed_streams(0, 0.0);

    for (std::int64_t k = 1; k <= scenario.simulation_iterations; ++k) {
        for (size_t i = 0; i < objects.size(); ++i) refresh_mirrors(i);

        // Every behaviour sees pre-step state; updates land afterwards.
        std::vector<AttributeUpdateMap> updates(objects.size());
        for (size_t i = 0; i < objects.size(); ++i) {
            Behaviour* behaviour = objects[i].instance->behaviour();
            if (!behaviour) continue;
            std::vector<SimulationObjectInstancePtr> view;
            view.reserve(mirrors[i].size());
            for (const auto& slot : mirrors[i]) view.push_back(slot.mirror);
            try {
                updates[i] = behaviour->next_step(dt, *objects[i].instance,
                                                  ObservedView(std::move(view)));
            } catch (const std::exception& e) {
                throw Error(ErrorCode::BehaviourFault,
                            "behaviour of " + objects[i].instance->uuid() + " failed at step " +
                                std::to_string(k) + ": " + e.what());
            }
        }
        for (size_t i = 0; i < objects.size(); ++i) {
            for (const auto& [uuid, value] : updates[i]) {
                SimulationAttribute* attr = objects[i].instance->attribute_by_uuid(uuid);
                if (!attr)
                    throw Error(ErrorCode::BehaviourFault,
                                "behaviour of " + objects[i].instance->uuid() +
                                    " returned unknown attribute id '" + uuid + "'");
                attr->set_value(value);
            }
        }
        feed_streams(k, step_time(k, dt));
    }

    for (const auto& capture : captures) result.observer_lines.push_back(capture->lines());
    for (const auto& object : objects) {
        auto& snapshot = result.final_attributes[object.instance->uuid()];
        for (const auto& [name, attr] : object.instance->attributes())
            snapshot[name] = attr->value();
    }
    return result;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

nlohmann::json value_to_json(const AttributeValue& v) {
    switch (v.kind()) {
        case DataType::Boolean: return v.as_bool();
        case DataType::Integer: return v.as_int();
        case DataType::Double: return v.as_double();
        case DataType::String: return v.as_string();
        case DataType::Position: {
            nlohmann::json j;
            j["Lat"] = v.as_position().latitude;
            j["Lon"] = v.as_position().longitude;
            j["Alt"] = v.as_position().altitude;
            return j;
        }
        case DataType::Route: {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& wp : v.as_route().waypoints)
                arr.push_back(value_to_json(AttributeValue(wp)));
            return arr;
        }
    }
    return nullptr;
}

nlohmann::json federate_report_json(const FederateReport& f) {
    nlohmann::json j;
    j["federateName"] = f.federate_name;
    j["stepsExecuted"] = f.steps_executed;
    j["faulted"] = f.faulted;
    if (!f.fault_detail.empty()) j["faultDetail"] = f.fault_detail;
    nlohmann::json snapshot;
    for (const auto& [name, value] : f.final_attributes) snapshot[name] = value_to_json(value);
    j["finalAttributeSnapshot"] = snapshot;
    return j;
}

} // namespace

void write_run_report(const RunPlan& plan, const RunReport& report) {
    fs::create_directories(plan.output_dir / "federates");
    nlohmann::json j;
    j["aborted"] = report.aborted;
    j["wallClockSeconds"] = report.wall_clock_seconds;
    j["faults"] = report.faults;
    nlohmann::json federates = nlohmann::json::array();
    for (const auto& f : report.federates) {
        federates.push_back(federate_report_json(f));
        write_file(plan.output_dir / "federates" / (f.federate_name + ".json"),
                   canonical_dump(federate_report_json(f)) + "\n");
    }
    j["federates"] = federates;
    nlohmann::json observers = nlohmann::json::array();
    for (const auto& o : report.observers) {
        nlohmann::json oj;
        oj["federateName"] = o.federate_name;
        oj["recordsEmitted"] = o.records_emitted;
        oj["faulted"] = o.faulted;
        if (!o.fault_detail.empty()) oj["faultDetail"] = o.fault_detail;
        observers.push_back(oj);
    }
    j["observers"] = observers;
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& p : report.observer_stream_paths) paths.push_back(p.string());
    j["observerStreams"] = paths;
    write_file(plan.output_dir / "report.json", canonical_dump(j) + "\n");
}

} // namespace scensim
