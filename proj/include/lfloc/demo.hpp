#ifndef LFLOC_DEMO_HPP
#define LFLOC_DEMO_HPP

#include <vector>

#include "lfloc/map.hpp"
#include "lfloc/simulator.hpp"

namespace lfloc::demo {

/// Two crossing two-lane roads (solid boundaries, dashed centre lines, stop
/// lines) joined to a roundabout, plus the drivable area.
VectorMap vector_map();

Pose route_start();

/// Straight, S-curve into the roundabout, one and a half laps, S-curve out,
/// left turn at the crossing, straight, then reversing.
std::vector<RouteSegment> route();

}  // namespace lfloc::demo

#endif  // LFLOC_DEMO_HPP
