#pragma once

#include <sstream>
#include <thread>

#include "scensim/coordinator.hpp"
#include "scensim/fom.hpp"
#include "scensim/transport.hpp"

namespace scensim::testsupport {

/// One randomized-delivery schedule: N scripted time-stepped members that
/// publish a counter each step and subscribe to each other, run over an
/// interleaving transport. Returns an empty string on success, otherwise a
/// description of the first violated property.
struct TimePropertyConfig {
    std::uint64_t schedule_seed = 1;
    int federates = 3;
    int steps = 50;
    std::vector<double> step_sizes; // per federate; defaults to all 1.0
};

namespace detail {

inline const char* kSpeedPath =
    "HLAObjectRoot.SimulationObject.DynamicSimulationObject.ActiveSimulationObject."
    "TrafficParticipant.speed";
inline const char* kVesselPath =
    "HLAObjectRoot.SimulationObject.DynamicSimulationObject.ActiveSimulationObject."
    "TrafficParticipant.Vessel";

struct MemberLog {
    std::string name;
    int tars_sent = 0;
    int grants_seen = 0;
    bool faulted = false;
    std::string detail;
    std::vector<std::string> violations;
};

inline void run_scripted_member(ClientChannelPtr channel, const std::string& name,
                                const std::string& objectUUID, double stepSize, int steps,
                                MemberLog& log) {
    using namespace std::chrono_literals;
    auto send = [&](MessageKind kind, nlohmann::json payload = nlohmann::json::object(),
                    std::optional<double> ts = std::nullopt) {
        RtiMessage msg;
        msg.kind = kind;
        msg.sender = name;
        msg.timestamp = ts;
        msg.payload = std::move(payload);
        channel->send(msg);
    };
    try {
        send(MessageKind::JoinFederation, {{"timeManaged", true}});
        send(MessageKind::PublishObjectClass,
             {{"classPath", std::string(kVesselPath) + ".ContainerShip"},
              {"attributePaths", std::vector<std::string>{kSpeedPath}}});
        send(MessageKind::SubscribeObjectClassAttributes,
             {{"classPath", kVesselPath}, {"attributes", std::vector<std::string>{"speed"}}});
        send(MessageKind::RegisterObjectInstance,
             {{"objectUUID", objectUUID},
              {"classPath", std::string(kVesselPath) + ".ContainerShip"},
              {"values", {{kSpeedPath, 0.0}}}});

        bool achieved = false, synchronized = false;
        while (!synchronized) {
            RecvResult r = channel->receive(10000ms);
            if (r.status != RecvStatus::Message)
                throw Error(ErrorCode::ProtocolFault, "startup stalled");
            if (r.message.kind == MessageKind::AnnounceSyncPoint && !achieved) {
                send(MessageKind::SyncPointAchieved,
                     {{"label", r.message.payload.value("label", "")}});
                achieved = true;
            }
            if (r.message.kind == MessageKind::FederationSynchronized) synchronized = true;
            if (r.message.kind == MessageKind::Fault)
                throw Error(ErrorCode::ProtocolFault, r.message.payload.value("detail", ""));
        }

        double lastGrant = 0.0;
        for (int k = 1; k <= steps; ++k) {
            double now = static_cast<double>(k) * stepSize;
            send(MessageKind::TimeAdvanceRequest, nlohmann::json::object(), now);
            ++log.tars_sent;
            std::vector<double> pendingTs;
            for (;;) {
                RecvResult r = channel->receive(10000ms);
                if (r.status != RecvStatus::Message)
                    throw Error(ErrorCode::ProtocolFault, "grant stalled");
                if (r.message.kind == MessageKind::Fault)
                    throw Error(ErrorCode::ProtocolFault, r.message.payload.value("detail", ""));
                if (r.message.kind == MessageKind::DiscoverObjectInstance) continue;
                if (r.message.kind == MessageKind::ReflectAttributeValues) {
                    double ts = r.message.timestamp.value_or(-1.0);
                    // Anything older than the last grant should have been
                    // flushed before that grant already.
                    if (ts < lastGrant)
                        log.violations.push_back(
                            name + ": reflect ts " + std::to_string(ts) +
                            " arrived after grant " + std::to_string(lastGrant));
                    pendingTs.push_back(ts);
                    if (r.message.payload.value("objectUUID", "") == objectUUID)
                        log.violations.push_back(name + ": reflected its own update");
                    for (auto it = r.message.payload.at("values").begin();
                         it != r.message.payload.at("values").end(); ++it)
                        if (it.key() != kSpeedPath)
                            log.violations.push_back(name + ": reflect outside subscription: " +
                                                     it.key());
                    continue;
                }
                if (r.message.kind == MessageKind::TimeAdvanceGrant) {
                    double g = r.message.timestamp.value_or(-1.0);
                    if (g <= lastGrant)
                        log.violations.push_back(name + ": grant not strictly increasing");
                    // Every reflection delivered since the previous grant is
                    // covered by this one: it arrived before TAG(g) >= ts.
                    for (double ts : pendingTs)
                        if (ts > g)
                            log.violations.push_back(name + ": reflect ts " +
                                                     std::to_string(ts) +
                                                     " outran its covering grant " +
                                                     std::to_string(g));
                    lastGrant = g;
                    ++log.grants_seen;
                    break;
                }
            }
            send(MessageKind::UpdateAttributeValues,
                 {{"objectUUID", objectUUID}, {"values", {{kSpeedPath, double(k)}}}}, now);
        }
        send(MessageKind::ResignFederation);
    } catch (const std::exception& e) {
        log.faulted = true;
        log.detail = e.what();
    }
}

} // namespace detail

/// Runs one schedule and checks grant monotonicity, causal delivery,
/// lockstep safety, and step-count exactness.
inline std::string run_time_property_schedule(const TimePropertyConfig& cfg) {
    using namespace std::chrono_literals;
    std::vector<double> steps = cfg.step_sizes;
    if (steps.empty()) steps.assign(cfg.federates, 1.0);

    InProcHub hub(cfg.schedule_seed);
    CoordinatorOptions options;
    options.expected_members = cfg.federates + 1;
    options.keep_event_log = true;
    {
        TypeRegistry reg = builtin_registry();
        SimulationObjectSpec spec;
        spec.concrete_type = "containerShip";
        spec.behaviour = BehaviourSpec{
            "simpleFollowRouteBehaviour",
            {{"route", AttributeValue(Route{{{53.55, 8.55, 0.0}, {53.6, 8.5, 0.0}}})}}};
        options.preloaded_modules.push_back(generate_fom_module(*instantiate(reg, spec, 1), reg));
    }
    Coordinator coordinator(hub, std::move(options));
    std::thread loop([&coordinator] { coordinator.run(); });

    auto master = hub.connect();
    auto masterSend = [&](MessageKind kind, nlohmann::json payload = nlohmann::json::object()) {
        RtiMessage msg;
        msg.kind = kind;
        msg.sender = "master";
        msg.payload = std::move(payload);
        master->send(msg);
    };
    masterSend(MessageKind::CreateFederation, {{"federation", "p"}});
    masterSend(MessageKind::JoinFederation, {{"timeManaged", false}});
    masterSend(MessageKind::RegisterSyncPoint, {{"label", "go"}});

    std::vector<detail::MemberLog> logs(cfg.federates);
    std::vector<std::thread> threads;
    for (int i = 0; i < cfg.federates; ++i) {
        logs[i].name = "fed-" + std::to_string(i);
        threads.emplace_back([&, i] {
            detail::run_scripted_member(hub.connect(), logs[i].name,
                                        "obj-000" + std::to_string(i + 1), steps[i], cfg.steps,
                                        logs[i]);
        });
    }

    std::string failure;
    try {
        for (;;) {
            RecvResult r = master->receive(10000ms);
            if (r.status != RecvStatus::Message)
                throw Error(ErrorCode::ProtocolFault, "master stalled during startup");
            if (r.message.kind == MessageKind::AnnounceSyncPoint)
                masterSend(MessageKind::SyncPointAchieved, {{"label", "go"}});
            if (r.message.kind == MessageKind::FederationSynchronized) break;
            if (r.message.kind == MessageKind::Fault)
                throw Error(ErrorCode::ProtocolFault, r.message.payload.value("detail", ""));
        }
    } catch (const std::exception& e) {
        failure = e.what();
    }
    for (auto& t : threads) t.join();
    masterSend(MessageKind::ResignFederation);
    masterSend(MessageKind::DestroyFederation);
    loop.join();
    hub.shutdown();

    if (!failure.empty()) return failure;
    for (const auto& log : logs) {
        if (log.faulted) return log.name + " faulted: " + log.detail;
        if (!log.violations.empty()) return log.violations.front();
        if (log.tars_sent != cfg.steps || log.grants_seen != cfg.steps)
            return log.name + ": expected " + std::to_string(cfg.steps) + " requests/grants, saw " +
                   std::to_string(log.tars_sent) + "/" + std::to_string(log.grants_seen);
    }

    // Lockstep safety over the coordinator's emission order.
    double maxStep = *std::max_element(steps.begin(), steps.end());
    std::map<std::string, double> granted;
    std::set<std::string> active;
    for (const auto& log : logs) {
        granted[log.name] = 0.0;
        active.insert(log.name);
    }
    for (const auto& event : coordinator.event_log()) {
        if (event.dir == CoordinatorEvent::Dir::In && event.kind == MessageKind::ResignFederation)
            active.erase(event.federate);
        if (event.dir == CoordinatorEvent::Dir::Out &&
            event.kind == MessageKind::TimeAdvanceGrant && granted.count(event.federate))
            granted[event.federate] = event.timestamp.value_or(0.0);
        double lo = 1e300, hi = -1e300;
        for (const auto& name : active) {
            lo = std::min(lo, granted[name]);
            hi = std::max(hi, granted[name]);
        }
        if (!active.empty() && hi - lo > maxStep + 1e-9) {
            std::ostringstream out;
            out << "lockstep window " << (hi - lo) << " exceeds max step " << maxStep;
            return out.str();
        }
    }
    return "";
}

} // namespace scensim::testsupport
