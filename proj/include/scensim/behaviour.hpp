#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "scensim/instance.hpp"
#include "scensim/value.hpp"

namespace scensim {

/// Read-only view over the objects another federate published and this one
/// subscribed to. Injected into behaviours each step.
class ObservedView {
public:
    ObservedView() = default;
    explicit ObservedView(std::vector<SimulationObjectInstancePtr> objects);

    /// All visible objects, ordered by object id.
    const std::vector<SimulationObjectInstancePtr>& objects() const { return objects_; }

    /// Objects whose lineage path contains the given class name.
    std::vector<SimulationObjectInstancePtr> objects_of_type(const std::string& className) const;

    const SimulationObjectInstance* find(const std::string& uuid) const;

    bool empty() const { return objects_.empty(); }

private:
    std::vector<SimulationObjectInstancePtr> objects_;
};

/// Proposed attribute updates keyed by attribute id. Values are applied to
/// the owning object only after the step completes.
using AttributeUpdateMap = std::map<std::string, AttributeValue>;

class Behaviour {
public:
    virtual ~Behaviour() = default;

    /// Computes this step's updates. Must not mutate `own` or anything in
    /// `observed`; all effects go through the returned map.
    virtual AttributeUpdateMap next_step(double timePassed, const SimulationObjectInstance& own,
                                         const ObservedView& observed) = 0;
};

struct RouteAdvance {
    Position position;
    std::size_t cursor = 0;
    double heading_deg = 0.0;
};

inline constexpr double kMetersPerDegreeLatitude = 111320.0;

/// Moves distance speed*dt toward route[cursor] under a local flat-earth
/// metric (meters per degree of longitude shrink with cos(latitude)).
/// Surplus distance inside a step carries into the next leg; at the final
/// waypoint the position clamps and the cursor saturates. Heading is
/// atan2(east, north) in [0, 360), or `currentCourseDeg` when nothing moved.
RouteAdvance advance_along_route(const Position& position, const Route& route, std::size_t cursor,
                                 double speedMps, double dt, double currentCourseDeg);

/// Follows a route at the object's own speed, updating position and
/// rotation every step.
class SimpleFollowRouteBehaviour : public Behaviour {
public:
    explicit SimpleFollowRouteBehaviour(Route route);

    AttributeUpdateMap next_step(double timePassed, const SimulationObjectInstance& own,
                                 const ObservedView& observed) override;

    std::size_t cursor() const { return cursor_; }

private:
    Route route_;
    std::size_t cursor_ = 0;
};

/// Writes the first observed object's position (rendered as JSON text) into
/// the own formString attribute each step.
class CopyObservedPositionBehaviour : public Behaviour {
public:
    AttributeUpdateMap next_step(double timePassed, const SimulationObjectInstance& own,
                                 const ObservedView& observed) override;
};

} // namespace scensim
