#include "scensim/behaviour.hpp"

#include <algorithm>
#include <cmath>

namespace scensim {

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}

ObservedView::ObservedView(std::vector<SimulationObjectInstancePtr> objects)
    : objects_(std::move(objects)) {
    std::sort(objects_.begin(), objects_.end(),
              [](const auto& a, const auto& b) { return a->uuid() < b->uuid(); });
}

std::vector<SimulationObjectInstancePtr> ObservedView::objects_of_type(
    const std::string& className) const {
    std::vector<SimulationObjectInstancePtr> out;
    for (const auto& obj : objects_)
        if (obj->concrete_type() == className) out.push_back(obj);
    return out;
}

const SimulationObjectInstance* ObservedView::find(const std::string& uuid) const {
    for (const auto& obj : objects_)
        if (obj->uuid() == uuid) return obj.get();
    return nullptr;
}

RouteAdvance advance_along_route(const Position& position, const Route& route, std::size_t cursor,
                                 double speedMps, double dt, double currentCourseDeg) {
    if (route.waypoints.empty()) throw Error(ErrorCode::EmptyRoute, "route has no waypoints");

    RouteAdvance out;
    out.position = position;
    out.cursor = std::min(cursor, route.waypoints.size());
    out.heading_deg = currentCourseDeg;

    double remaining = speedMps * dt;
    if (remaining <= 0.0) return out;

    while (remaining > 0.0 && out.cursor < route.waypoints.size()) {
        const Position& target = route.waypoints[out.cursor];
        double metersPerDegLon = kMetersPerDegreeLatitude *
                                 std::cos(out.position.latitude * kDegToRad);
        double north = (target.latitude - out.position.latitude) * kMetersPerDegreeLatitude;
        double east = (target.longitude - out.position.longitude) * metersPerDegLon;
        double dist = std::hypot(east, north);
        if (dist <= 0.0) {
            ++out.cursor;
            continue;
        }
        double heading = std::atan2(east, north) / kDegToRad;
        if (heading < 0.0) heading += 360.0;
        out.heading_deg = heading;
        if (remaining < dist) {
            double f = remaining / dist;
            out.position.latitude += f * (target.latitude - out.position.latitude);
            out.position.longitude += f * (target.longitude - out.position.longitude);
            remaining = 0.0;
        } else {
            out.position.latitude = target.latitude;
            out.position.longitude = target.longitude;
            remaining -= dist;
            ++out.cursor;
        }
    }
    return out;
}

SimpleFollowRouteBehaviour::SimpleFollowRouteBehaviour(Route route) : route_(std::move(route)) {
    if (route_.waypoints.empty())
        throw Error(ErrorCode::EmptyRoute, "follow-route behaviour needs waypoints");
}

AttributeUpdateMap SimpleFollowRouteBehaviour::next_step(double timePassed,
                                                         const SimulationObjectInstance& own,
                                                         const ObservedView&) {
    const Position& position = own.attribute("position").value().as_position();
    double speed = own.attribute("speed").value().as_double();
    double course = own.attribute("rotation").value().as_double();

    RouteAdvance next = advance_along_route(position, route_, cursor_, speed, timePassed, course);
    cursor_ = next.cursor;

    Position moved = next.position;
    moved.altitude = position.altitude; // never altered by this behaviour

    AttributeUpdateMap updates;
    updates[own.attribute("position").uuid()] = AttributeValue(moved);
    updates[own.attribute("rotation").uuid()] = AttributeValue(next.heading_deg);
    return updates;
}

AttributeUpdateMap CopyObservedPositionBehaviour::next_step(double,
                                                            const SimulationObjectInstance& own,
                                                            const ObservedView& observed) {
    AttributeUpdateMap updates;
    if (observed.empty()) return updates;
    const auto& first = observed.objects().front();
    const Position& p = first->attribute("position").value().as_position();
    updates[own.attribute("formString").uuid()] = AttributeValue(render_position_json(p));
    return updates;
}

} // namespace scensim
