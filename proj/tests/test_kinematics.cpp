#include <doctest.h>

#include <cmath>

#include "scensim/behaviour.hpp"
#include "scensim/instance.hpp"

using namespace scensim;

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

// Independent segment-distance measure under the same local metric: meters
// between two nearby points, evaluated at the segment start latitude.
double segment_meters(const Position& a, const Position& b) {
    double north = (b.latitude - a.latitude) * kMetersPerDegreeLatitude;
    double east = (b.longitude - a.longitude) * kMetersPerDegreeLatitude *
                  std::cos(a.latitude * kDegToRad);
    return std::hypot(east, north);
}
} // namespace

TEST_CASE("zero speed leaves everything unchanged") {
    Route route{{{53.55, 8.55, 0.0}, {53.60, 8.55, 0.0}}};
    Position p{53.55, 8.55, 0.0};
    auto out = advance_along_route(p, route, 0, 0.0, 1.0, 123.0);
    CHECK(out.position == p);
    CHECK(out.cursor == 0);
    CHECK(out.heading_deg == 123.0);
}

TEST_CASE("at the last waypoint the position clamps and the course holds") {
    Route route{{{53.55, 8.55, 0.0}, {53.60, 8.55, 0.0}}};
    Position atEnd{53.60, 8.55, 0.0};
    auto out = advance_along_route(atEnd, route, 2, 10.0, 1.0, 77.0);
    CHECK(out.position == atEnd);
    CHECK(out.cursor == 2);
    CHECK(out.heading_deg == 77.0);
}

TEST_CASE("due-north step matches the flat-earth displacement") {
    // 10 m/s for 1 s moves 10/111320 degrees of latitude.
    Route route{{{53.5600, 8.5500, 0.0}, {53.5700, 8.5500, 0.0}}};
    Position p{53.5500, 8.5500, 0.0};
    auto out = advance_along_route(p, route, 0, 10.0, 1.0, 0.0);
    CHECK(out.position.latitude == doctest::Approx(53.550089831117).epsilon(1e-12));
    CHECK(out.position.longitude == 8.5500);
    CHECK(out.heading_deg == doctest::Approx(0.0));
}

TEST_CASE("due-east closed form advances longitude exactly") {
    double speed = kMetersPerDegreeLatitude * std::cos(53.55 * kDegToRad);
    Route route{{{53.55, 8.60, 0.0}}};
    Position p{53.55, 8.55, 0.0};
    auto out = advance_along_route(p, route, 0, speed, 0.001, 0.0);
    CHECK(std::abs(out.position.longitude - 8.551) < 1e-12);
    CHECK(out.position.latitude == 53.55);
    CHECK(out.heading_deg == doctest::Approx(90.0));
}

TEST_CASE("surplus distance carries across a waypoint") {
    // Legs of 10 m north each; a 15 m step must end 5 m into the second leg.
    double dlat = 10.0 / kMetersPerDegreeLatitude;
    Position start{53.55, 8.55, 0.0};
    Route route{{{53.55 + dlat, 8.55, 0.0}, {53.55 + 2 * dlat, 8.55, 0.0}}};
    auto out = advance_along_route(start, route, 0, 15.0, 1.0, 0.0);
    CHECK(out.cursor == 1);
    CHECK(out.position.latitude == doctest::Approx(53.55 + 1.5 * dlat).epsilon(1e-12));
}

TEST_CASE("empty route is an error") {
    CHECK_THROWS_AS(advance_along_route({}, Route{}, 0, 1.0, 1.0, 0.0), Error);
}

TEST_CASE("cumulative distance equals speed times elapsed time") {
    // A bent route; walk it in steps and re-measure each hop independently.
    Route route{{{53.56, 8.55, 0.0}, {53.56, 8.60, 0.0}, {53.50, 8.62, 0.0}}};
    Position p{53.55, 8.55, 0.0};
    std::size_t cursor = 0;
    double course = 0.0;
    const double speed = 12.0, dt = 2.0;
    double traveled = 0.0;
    int steps = 0;
    for (int k = 1; k <= 400; ++k) {
        auto out = advance_along_route(p, route, cursor, speed, dt, course);
        if (out.cursor != cursor && out.cursor >= route.waypoints.size() &&
            out.position == route.waypoints.back()) {
            break; // saturated; the last partial step is shorter by design
        }
        // Distance accumulated across the possible waypoint crossing.
        double hop = 0.0;
        if (out.cursor == cursor) {
            hop = segment_meters(p, out.position);
        } else {
            Position mid = p;
            for (std::size_t c = cursor; c < out.cursor; ++c) {
                hop += segment_meters(mid, route.waypoints[c]);
                mid = route.waypoints[c];
            }
            hop += segment_meters(mid, out.position);
        }
        traveled += hop;
        ++steps;
        p = out.position;
        cursor = out.cursor;
        course = out.heading_deg;
        CHECK(traveled == doctest::Approx(steps * speed * dt).epsilon(1e-9));
    }
    CHECK(steps > 100);
}

TEST_CASE("follow-route behaviour proposes position and rotation without mutating") {
    TypeRegistry reg = builtin_registry();
    SimulationObjectSpec spec;
    spec.concrete_type = "containerShip";
    spec.behaviour = BehaviourSpec{
        "simpleFollowRouteBehaviour",
        {{"route", AttributeValue(Route{{{53.56, 8.55, 0.0}, {53.57, 8.55, 0.0}}})}}};
    spec.attribute_specs["speed"] =
        AttributeSpec{"speed", DataType::Double, false, AttributeValue(10.0)};
    spec.attribute_specs["position"] = AttributeSpec{
        "position", DataType::Position, true, AttributeValue(Position{53.55, 8.55, 0.0})};
    auto instance = instantiate(reg, spec, 1);

    Position before = instance->attribute("position").value().as_position();
    auto updates = instance->behaviour()->next_step(1.0, *instance, ObservedView{});
    CHECK(instance->attribute("position").value().as_position() == before);
    REQUIRE(updates.count("obj-0001:position"));
    REQUIRE(updates.count("obj-0001:rotation"));
    CHECK(updates.at("obj-0001:position").as_position().latitude ==
          doctest::Approx(53.550089831117).epsilon(1e-12));
}

TEST_CASE("zero speed behaviour returns the unchanged position") {
    TypeRegistry reg = builtin_registry();
    SimulationObjectSpec spec;
    spec.concrete_type = "generalCargo";
    spec.behaviour = BehaviourSpec{
        "simpleFollowRouteBehaviour",
        {{"route", AttributeValue(Route{{{53.56, 8.55, 0.0}, {53.57, 8.55, 0.0}}})}}};
    spec.attribute_specs["position"] = AttributeSpec{
        "position", DataType::Position, true, AttributeValue(Position{53.55, 8.55, 0.0})};
    auto instance = instantiate(reg, spec, 3);
    auto updates = instance->behaviour()->next_step(1.0, *instance, ObservedView{});
    CHECK(updates.at("obj-0003:position").as_position() == Position{53.55, 8.55, 0.0});
}
