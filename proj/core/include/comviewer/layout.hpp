#pragma once

#include <span>
#include <vector>

namespace comviewer::layout {

struct Circle {
  double x = 0.0;
  double y = 0.0;
  double r = 0.0;
};

/// Places circles (radii given, positions overwritten) tangent to one
/// another along a moving front chain, in input order. The first circle
/// lands at the origin. Siblings do not overlap beyond 1e-6 relative to the
/// largest radius.
void pack_siblings(std::span<Circle> circles);

/// Smallest circle enclosing all `circles` (Welzl-style incremental basis
/// search). Returns {0,0,0} for an empty span.
Circle enclose(std::span<const Circle> circles);

/// Radius around (cx, cy) that contains every circle exactly, i.e.
/// max(dist(center, c) + c.r).
double containing_radius(std::span<const Circle> circles, double cx, double cy);

}  // namespace comviewer::layout
