#include <doctest.h>

#include "scensim/transport.hpp"
#include "scensim/wire.hpp"

using namespace scensim;

TEST_CASE("messages round-trip through frames") {
    RtiMessage msg;
    msg.kind = MessageKind::UpdateAttributeValues;
    msg.sender = "fed-obj-0001";
    msg.timestamp = 2.5;
    msg.payload = {{"objectUUID", "obj-0001"},
                   {"values", {{"HLAObjectRoot.SimulationObject.position.latitude", 53.55}}}};
    RtiMessage back = RtiMessage::from_frame(msg.to_frame());
    CHECK(back.kind == msg.kind);
    CHECK(back.sender == msg.sender);
    CHECK(back.timestamp == msg.timestamp);
    CHECK(back.payload == msg.payload);
}

TEST_CASE("frames are byte stable") {
    RtiMessage msg;
    msg.kind = MessageKind::TimeAdvanceRequest;
    msg.sender = "obs-0";
    msg.timestamp = 1.0;
    CHECK(msg.to_frame() == msg.to_frame());
    CHECK(msg.to_frame().find("\"timestamp\":1") != std::string::npos);
}

TEST_CASE("negative or non-finite timestamps are rejected") {
    RtiMessage msg;
    msg.kind = MessageKind::TimeAdvanceRequest;
    msg.sender = "x";
    msg.timestamp = -1.0;
    CHECK_THROWS_AS(msg.to_frame(), Error);
    CHECK_THROWS_AS(RtiMessage::from_frame("{\"kind\":\"TimeAdvanceGrant\",\"timestamp\":-2}"),
                    Error);
    CHECK_THROWS_AS(RtiMessage::from_frame("not json"), Error);
    CHECK_THROWS_AS(RtiMessage::from_frame("{\"kind\":\"NoSuchKind\"}"), Error);
}

TEST_CASE("length prefix is 4-byte big-endian") {
    std::string framed = frame_with_length("abc");
    REQUIRE(framed.size() == 7);
    CHECK(framed[0] == 0);
    CHECK(framed[1] == 0);
    CHECK(framed[2] == 0);
    CHECK(framed[3] == 3);
    CHECK(framed.substr(4) == "abc");
}

TEST_CASE("kind rank follows the protocol phases") {
    CHECK(kind_rank(MessageKind::DiscoverObjectInstance) <
          kind_rank(MessageKind::ReflectAttributeValues));
    CHECK(kind_rank(MessageKind::UpdateAttributeValues) <
          kind_rank(MessageKind::TimeAdvanceRequest));
    CHECK(kind_rank(MessageKind::JoinFederation) < kind_rank(MessageKind::RegisterObjectInstance));
}

TEST_CASE("in-process channels deliver in order and signal closure") {
    InProcHub hub;
    auto channel = hub.connect();
    RtiMessage a;
    a.kind = MessageKind::JoinFederation;
    a.sender = "f1";
    channel->send(a);
    RtiMessage b;
    b.kind = MessageKind::SyncPointAchieved;
    b.sender = "f1";
    channel->send(b);

    auto e1 = hub.next_event(std::chrono::milliseconds(500));
    REQUIRE(e1.has_value());
    CHECK(RtiMessage::from_frame(e1->frame).kind == MessageKind::JoinFederation);
    auto e2 = hub.next_event(std::chrono::milliseconds(500));
    REQUIRE(e2.has_value());
    CHECK(RtiMessage::from_frame(e2->frame).kind == MessageKind::SyncPointAchieved);

    hub.send(e1->conn, a.to_frame());
    auto got = channel->receive(std::chrono::milliseconds(500));
    CHECK(got.status == RecvStatus::Message);

    channel->close();
    auto closed = hub.next_event(std::chrono::milliseconds(500));
    REQUIRE(closed.has_value());
    CHECK(closed->closed);
}

TEST_CASE("tcp endpoint carries frames both ways") {
    TcpServerEndpoint server(0);
    auto client = connect_tcp("127.0.0.1", server.bound_port());
    RtiMessage msg;
    msg.kind = MessageKind::JoinFederation;
    msg.sender = "fed";
    msg.payload = {{"timeManaged", true}};
    client->send(msg);
    auto event = server.next_event(std::chrono::milliseconds(2000));
    REQUIRE(event.has_value());
    RtiMessage got = RtiMessage::from_frame(event->frame);
    CHECK(got.sender == "fed");

    RtiMessage reply;
    reply.kind = MessageKind::TimeAdvanceGrant;
    reply.sender = "rti";
    reply.timestamp = 1.0;
    server.send(event->conn, reply.to_frame());
    auto received = client->receive(std::chrono::milliseconds(2000));
    REQUIRE(received.status == RecvStatus::Message);
    CHECK(received.message.kind == MessageKind::TimeAdvanceGrant);

    client->close();
    auto closed = server.next_event(std::chrono::milliseconds(2000));
    REQUIRE(closed.has_value());
    CHECK(closed->closed);
    server.shutdown();
}
