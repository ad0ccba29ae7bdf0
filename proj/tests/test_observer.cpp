#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <fstream>
#include <thread>

#include "scensim/observer.hpp"
#include "scensim/websocket.hpp"
#include "support/rti_client.hpp"

using namespace scensim;
using namespace scensim::testsupport;

TEST_CASE("record encoding has fixed key order and sorted attributes") {
    ObserverRecord r;
    r.step = 3;
    r.time = 3.0;
    r.object_uuid = "obj-0001";
    r.class_path = "HLAObjectRoot.SimulationObject";
    r.attributes["vesselName"] = AttributeValue("Hamburg Express");
    r.attributes["position"] = AttributeValue(Position{53.84, 8.115, 0.0});
    r.attributes["speed"] = AttributeValue(10.0);
    std::string line = encode_record(r);
    CHECK(line ==
          "{\"step\":3,\"time\":3,\"objectUUID\":\"obj-0001\","
          "\"classPath\":\"HLAObjectRoot.SimulationObject\","
          "\"attributes\":{\"position\":{\"Lat\":53.84,\"Lon\":8.115,\"Alt\":0},"
          "\"speed\":10,\"vesselName\":\"Hamburg Express\"}}");
    CHECK(encode_record(r) == line);
}

TEST_CASE("empty attribute maps still encode") {
    ObserverRecord r;
    r.object_uuid = "obj-0002";
    r.class_path = "X";
    CHECK(encode_record(r) == "{\"step\":0,\"time\":0,\"objectUUID\":\"obj-0002\","
                              "\"classPath\":\"X\",\"attributes\":{}}");
}

TEST_CASE("stream emits a baseline, then only changes, ordered by object id") {
    auto capture = std::make_shared<CapturingSink>();
    ObserverStream stream({capture});
    stream.track("obj-0002", "P");
    stream.track("obj-0001", "P");
    stream.set_value("obj-0001", "speed", AttributeValue(1.0));
    CHECK(stream.emit_step(0, 0.0) == 2);
    REQUIRE(capture->lines().size() == 2);
    CHECK(capture->lines()[0].find("obj-0001") != std::string::npos); // sorted
    CHECK(capture->lines()[1].find("obj-0002") != std::string::npos);

    CHECK(stream.emit_step(1, 1.0) == 0); // nothing changed

    stream.set_value("obj-0001", "speed", AttributeValue(1.0)); // same value
    CHECK(stream.emit_step(2, 2.0) == 0);

    stream.set_value("obj-0002", "speed", AttributeValue(2.0));
    CHECK(stream.emit_step(3, 3.0) == 1);
    CHECK(capture->lines().back().find("obj-0002") != std::string::npos);
}

TEST_CASE("file sink writes LF-terminated lines") {
    std::string path = "/tmp/scensim-sink-test.ndjson";
    {
        auto sink = make_file_sink(path);
        sink->write_line("{\"a\":1}");
        sink->write_line("{\"b\":2}");
        sink->close();
    }
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "{\"a\":1}\n{\"b\":2}\n");
}

TEST_CASE("websocket sink completes the handshake and frames lines") {
    WebSocketBroadcastServer server("127.0.0.1", 0);
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(server.bound_port());
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    std::string request = "GET / HTTP/1.1\r\nHost: x\r\nUpgrade: websocket\r\n"
                          "Connection: Upgrade\r\nSec-WebSocket-Key: dGhlIHNhbXBsZSBub25jZQ==\r\n"
                          "Sec-WebSocket-Version: 13\r\n\r\n";
    REQUIRE(::send(fd, request.data(), request.size(), 0) > 0);
    std::string response;
    char buf[1024];
    while (response.find("\r\n\r\n") == std::string::npos) {
        ssize_t r = ::recv(fd, buf, sizeof(buf), 0);
        REQUIRE(r > 0);
        response.append(buf, static_cast<size_t>(r));
    }
    // Known accept value for the sample key from the protocol definition.
    CHECK(response.find("s3pPLMBiTxaQ9kYGzzhZRbK+xOo=") != std::string::npos);

    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    server.broadcast_text("hello");
    unsigned char frame[16];
    ssize_t r = ::recv(fd, frame, sizeof(frame), 0);
    REQUIRE(r >= 7);
    CHECK(frame[0] == 0x81);
    CHECK(frame[1] == 5);
    CHECK(std::string(reinterpret_cast<char*>(frame + 2), 5) == "hello");
    ::close(fd);
    server.stop();
}

TEST_CASE("no connected client just drops frames") {
    WebSocketBroadcastServer server("127.0.0.1", 0);
    server.broadcast_text("nobody listens");
    server.stop();
}

namespace {
constexpr const char* kVesselPath =
    "HLAObjectRoot.SimulationObject.DynamicSimulationObject.ActiveSimulationObject."
    "TrafficParticipant.Vessel";
constexpr const char* kLatPath = "HLAObjectRoot.SimulationObject.position.latitude";
constexpr const char* kLonPath = "HLAObjectRoot.SimulationObject.position.longitude";
constexpr const char* kAltPath = "HLAObjectRoot.SimulationObject.position.altitude";
} // namespace

TEST_CASE("observer joins, snapshots at step zero, and labels records by publish step") {
    TypeRegistry reg = builtin_registry();
    CoordinatorOptions options;
    options.expected_members = 3;
    options.preloaded_modules.push_back(generate_base_fom_module(reg));
    {
        SimulationObjectSpec spec;
        spec.concrete_type = "containerShip";
        spec.behaviour = BehaviourSpec{
            "simpleFollowRouteBehaviour",
            {{"route", AttributeValue(Route{{{53.56, 8.55, 0.0}, {53.57, 8.55, 0.0}}})}}};
        options.preloaded_modules.push_back(
            generate_fom_module(*instantiate(reg, spec, 1), reg));
    }
    CoordinatorHarness harness(std::move(options));
    auto master = harness.client("master");
    master.send(MessageKind::CreateFederation, {{"federation", "f"}});
    master.send(MessageKind::JoinFederation, {{"timeManaged", false}});
    master.send(MessageKind::RegisterSyncPoint, {{"label", "readyToRun"}});

    auto owner = harness.client("fed-obj-0001");
    owner.send(MessageKind::JoinFederation, {{"timeManaged", true}});
    owner.send(MessageKind::PublishObjectClass,
               {{"classPath", std::string(kVesselPath) + ".ContainerShip"},
                {"attributePaths", std::vector<std::string>{kLatPath, kLonPath, kAltPath}}});
    owner.send(MessageKind::RegisterObjectInstance,
               {{"objectUUID", "obj-0001"},
                {"classPath", std::string(kVesselPath) + ".ContainerShip"},
                {"values", {{kLatPath, 53.55}, {kLonPath, 8.55}, {kAltPath, 0.0}}}});

    ObserverRunConfig cfg;
    cfg.federate_name = "obs-0";
    cfg.config.observed_classes.push_back({"vessel", {"position"}});
    cfg.config.time_step_size = 1.0;
    cfg.registry = &reg;
    cfg.step_size = 1.0;
    cfg.total_iterations = 2;
    cfg.channel = harness.hub.connect();
    auto capture = std::make_shared<CapturingSink>();
    cfg.sinks.push_back(capture);
    cfg.recv_timeout = std::chrono::milliseconds(8000);

    ObserverReport report;
    std::thread obs([&] { report = run_observer(cfg); });

    master.await(MessageKind::AnnounceSyncPoint);
    master.send(MessageKind::SyncPointAchieved, {{"label", "readyToRun"}});
    owner.await(MessageKind::AnnounceSyncPoint);
    owner.send(MessageKind::SyncPointAchieved, {{"label", "readyToRun"}});
    owner.await(MessageKind::FederationSynchronized);

    // Two time-managed members now: the owner script and the observer.
    owner.send(MessageKind::TimeAdvanceRequest, nlohmann::json::object(), 1.0);
    owner.await(MessageKind::TimeAdvanceGrant);
    owner.send(MessageKind::UpdateAttributeValues,
               {{"objectUUID", "obj-0001"},
                {"values", {{kLatPath, 53.551}, {kLonPath, 8.55}, {kAltPath, 0.0}}}},
               1.0);
    owner.send(MessageKind::TimeAdvanceRequest, nlohmann::json::object(), 2.0);
    owner.await(MessageKind::TimeAdvanceGrant);
    owner.send(MessageKind::UpdateAttributeValues,
               {{"objectUUID", "obj-0001"},
                {"values", {{kLatPath, 53.552}, {kLonPath, 8.55}, {kAltPath, 0.0}}}},
               2.0);
    owner.send(MessageKind::ResignFederation);

    obs.join();
    CHECK_FALSE(report.faulted);
    REQUIRE(capture->lines().size() == 3);
    CHECK(capture->lines()[0].find("\"step\":0,\"time\":0") != std::string::npos);
    CHECK(capture->lines()[0].find("\"Lat\":53.55,") != std::string::npos);
    CHECK(capture->lines()[1].find("\"step\":1,\"time\":1") != std::string::npos);
    CHECK(capture->lines()[1].find("53.551") != std::string::npos);
    CHECK(capture->lines()[2].find("\"step\":2,\"time\":2") != std::string::npos);
    CHECK(capture->lines()[2].find("53.552") != std::string::npos);
    CHECK(report.records_emitted == 3);
}
