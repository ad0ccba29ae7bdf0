#include <doctest.h>

#include "scensim/reference_store.hpp"

using namespace scensim;

namespace {
SimulationObjectInstancePtr example_ship(const TypeRegistry& reg, int seed) {
    SimulationObjectSpec spec;
    spec.concrete_type = "containerShip";
    spec.behaviour = BehaviourSpec{
        "simpleFollowRouteBehaviour",
        {{"route", AttributeValue(Route{{{53.55, 8.55, 0.0}, {53.6, 8.5, 0.0}}})}}};
    spec.attribute_specs["vesselName"] =
        AttributeSpec{"vesselName", DataType::String, true, AttributeValue("Hamburg Express")};
    spec.attribute_specs["position"] = AttributeSpec{"position", DataType::Position, true,
                                                     AttributeValue(Position{53.55, 8.55, 0})};
    spec.observed_classes.push_back({"vessel", {"position", "vesselName"}});
    return instantiate(reg, spec, seed);
}

constexpr const char* kShipPath =
    "HLAObjectRoot.SimulationObject.DynamicSimulationObject.ActiveSimulationObject."
    "TrafficParticipant.Vessel.ContainerShip";
constexpr const char* kCargoPath =
    "HLAObjectRoot.SimulationObject.DynamicSimulationObject.ActiveSimulationObject."
    "TrafficParticipant.Vessel.GeneralCargo";
} // namespace

TEST_CASE("ancestor path expansion") {
    auto paths = ancestor_paths("A.B.C");
    REQUIRE(paths.size() == 3);
    CHECK(paths[0] == "A");
    CHECK(paths[1] == "A.B");
    CHECK(paths[2] == "A.B.C");
    CHECK(leaf_segment("A.B.C") == "C");
    CHECK(leaf_segment("A") == "A");
}

TEST_CASE("store binds the own object under every lineage path") {
    TypeRegistry reg = builtin_registry();
    auto instance = example_ship(reg, 1);
    ReferenceStore store =
        build_reference_store(instance, generate_fom_module(*instance, reg), reg);
    CHECK(store.fom_path_for_simulation_object("obj-0001") == kShipPath);
    for (const auto& ancestor : ancestor_paths(kShipPath)) {
        auto range = store.fom_path_to_simulation_objects().equal_range(ancestor);
        CHECK(std::distance(range.first, range.second) == 1);
    }
    CHECK(store.simulation_attribute_by_uuid("obj-0001:vesselName")->value().as_string() ==
          "Hamburg Express");
}

TEST_CASE("bidirectional class and attribute maps are bijections") {
    TypeRegistry reg = builtin_registry();
    auto instance = example_ship(reg, 1);
    ReferenceStore store =
        build_reference_store(instance, generate_fom_module(*instance, reg), reg);
    for (const auto& [path, cls] : store.fom_path_to_object_class())
        CHECK(store.fom_path_for_object_class(*cls) == path);
    for (const auto& [path, attr] : store.fom_path_to_fom_attribute())
        CHECK(store.fom_path_for_fom_attribute(*attr) == path);
}

TEST_CASE("mismatched module and instance are inconsistent input") {
    TypeRegistry reg = builtin_registry();
    auto ship = example_ship(reg, 1);
    SimulationObjectSpec cargoSpec;
    cargoSpec.concrete_type = "generalCargo";
    cargoSpec.behaviour = BehaviourSpec{
        "simpleFollowRouteBehaviour",
        {{"route", AttributeValue(Route{{{53.55, 8.55, 0.0}, {53.6, 8.5, 0.0}}})}}};
    auto cargo = instantiate(reg, cargoSpec, 2);
    FOMModule cargoModule = generate_fom_module(*cargo, reg);
    CHECK_THROWS_AS(build_reference_store(ship, cargoModule, reg), Error);
}

TEST_CASE("discovered remotes resolve by path, idempotently") {
    TypeRegistry reg = builtin_registry();
    auto instance = example_ship(reg, 1);
    ReferenceStore store =
        build_reference_store(instance, generate_fom_module(*instance, reg), reg);
    store.add_subscription(
        "HLAObjectRoot.SimulationObject.DynamicSimulationObject.ActiveSimulationObject."
        "TrafficParticipant.Vessel");

    auto remote = make_remote_mirror(reg, "generalCargo", "obj-0002");
    remote->attribute("speed").set_value(AttributeValue(7.0));
    store.register_discovered(kCargoPath, remote);
    store.register_discovered(kCargoPath, remote); // second call is a no-op

    auto binding = store.resolve_attribute(
        "obj-0002",
        "HLAObjectRoot.SimulationObject.DynamicSimulationObject.ActiveSimulationObject."
        "TrafficParticipant.speed");
    CHECK(binding.attribute->value().as_double() == 7.0);
    CHECK(binding.component.empty());

    auto vesselName = store.resolve_attribute(
        "obj-0002",
        "HLAObjectRoot.SimulationObject.DynamicSimulationObject.ActiveSimulationObject."
        "TrafficParticipant.Vessel.vesselName");
    CHECK(vesselName.attribute->name() == "vesselName");

    auto range = store.fom_path_to_simulation_objects().equal_range(
        "HLAObjectRoot.SimulationObject");
    CHECK(std::distance(range.first, range.second) == 2); // own + discovered
}

TEST_CASE("unsubscribed class paths are rejected") {
    TypeRegistry reg = builtin_registry();
    auto instance = example_ship(reg, 1);
    ReferenceStore store =
        build_reference_store(instance, generate_fom_module(*instance, reg), reg);
    auto remote = make_remote_mirror(reg, "generalCargo", "obj-0002");
    CHECK_THROWS_AS(store.register_discovered(kCargoPath, remote), Error);
}

TEST_CASE("lookups reject unknown objects and paths") {
    TypeRegistry reg = builtin_registry();
    auto instance = example_ship(reg, 1);
    ReferenceStore store =
        build_reference_store(instance, generate_fom_module(*instance, reg), reg);
    CHECK_THROWS_AS(store.resolve_attribute("obj-9999", "whatever"), Error);
    CHECK_THROWS_AS(store.resolve_attribute("obj-0001", "no.such.path"), Error);
    CHECK_THROWS_AS(store.simulation_attribute_by_uuid("obj-0001:bogus"), Error);
}

TEST_CASE("every reachable attribute resolves through the store") {
    TypeRegistry reg = builtin_registry();
    auto instance = example_ship(reg, 1);
    ReferenceStore store =
        build_reference_store(instance, generate_fom_module(*instance, reg), reg);
    store.add_subscription("HLAObjectRoot");
    auto remote = make_remote_mirror(reg, "generalCargo", "obj-0002");
    store.register_discovered(kCargoPath, remote);
    for (const auto& [path, binding] : store.own_attribute_paths()) {
        auto resolved = store.resolve_attribute("obj-0001", path);
        CHECK(resolved.attribute == binding.attribute);
    }
    CHECK(store.simulation_object_by_uuid("obj-0002") == remote);
}

TEST_CASE("published path list covers exactly the publish flags") {
    TypeRegistry reg = builtin_registry();
    auto instance = example_ship(reg, 1);
    ReferenceStore store =
        build_reference_store(instance, generate_fom_module(*instance, reg), reg);
    std::set<std::string> published(store.published_attribute_paths().begin(),
                                    store.published_attribute_paths().end());
    std::set<std::string> expected = {
        "HLAObjectRoot.SimulationObject.position.latitude",
        "HLAObjectRoot.SimulationObject.position.longitude",
        "HLAObjectRoot.SimulationObject.position.altitude",
        "HLAObjectRoot.SimulationObject.DynamicSimulationObject.ActiveSimulationObject."
        "TrafficParticipant.Vessel.vesselName",
    };
    CHECK(published == expected);
}
