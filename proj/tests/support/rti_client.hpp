#pragma once

#include <initializer_list>
#include <thread>

#include "scensim/coordinator.hpp"
#include "scensim/transport.hpp"

namespace scensim::testsupport {

/// Hand-driven federation member for protocol-level tests.
struct TestClient {
    std::string name;
    ClientChannelPtr channel;

    void send(MessageKind kind, nlohmann::json payload = nlohmann::json::object(),
              std::optional<double> timestamp = std::nullopt) {
        RtiMessage msg;
        msg.kind = kind;
        msg.sender = name;
        msg.timestamp = timestamp;
        msg.payload = std::move(payload);
        channel->send(msg);
    }

    std::optional<RtiMessage> try_recv(int ms = 300) {
        RecvResult r = channel->receive(std::chrono::milliseconds(ms));
        if (r.status != RecvStatus::Message) return std::nullopt;
        return r.message;
    }

    /// Next message of the wanted kind; anything else on the way is dropped.
    RtiMessage await(MessageKind kind, int ms = 3000) {
        auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(ms);
        while (std::chrono::steady_clock::now() < deadline) {
            RecvResult r = channel->receive(std::chrono::milliseconds(50));
            if (r.status == RecvStatus::Message && r.message.kind == kind) return r.message;
            if (r.status == RecvStatus::Closed) break;
        }
        throw Error(ErrorCode::ProtocolFault,
                    name + " never received " + message_kind_name(kind));
    }

    /// Collects every message of `kind` until `stop` arrives.
    std::vector<RtiMessage> collect_until(MessageKind kind, MessageKind stop, int ms = 3000) {
        std::vector<RtiMessage> out;
        auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(ms);
        while (std::chrono::steady_clock::now() < deadline) {
            RecvResult r = channel->receive(std::chrono::milliseconds(50));
            if (r.status == RecvStatus::Closed) break;
            if (r.status != RecvStatus::Message) continue;
            if (r.message.kind == kind) out.push_back(r.message);
            if (r.message.kind == stop) return out;
        }
        throw Error(ErrorCode::ProtocolFault, name + " never saw the stop message");
    }
};

struct CoordinatorHarness {
    InProcHub hub;
    Coordinator coordinator;
    std::thread thread;

    explicit CoordinatorHarness(CoordinatorOptions options = {})
        : coordinator(hub, std::move(options)) {
        thread = std::thread([this] { coordinator.run(); });
    }

    ~CoordinatorHarness() { stop(); }

    TestClient client(const std::string& name) { return {name, hub.connect()}; }

    void stop() {
        coordinator.request_stop();
        if (thread.joinable()) thread.join();
        hub.shutdown();
    }
};

} // namespace scensim::testsupport
