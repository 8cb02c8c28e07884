#pragma once

// Exact extraction of the piecewise-flat zero sets of second-layer units on
// a 2D box. The first-layer lines cut the box into convex cells; on each
// cell every unit's pre-activation is affine, so its zero set is a clipped
// segment computed in closed form.

#include <cstddef>
#include <vector>

#include "stepnet/geometry.hpp"
#include "stepnet/network.hpp"

namespace stepnet {

// One cell of the line arrangement clipped to the box: a convex CCW polygon
// plus an interior point (used to freeze the active set).
struct ArrangementCell {
  std::vector<Vec2> polygon;
  Vec2 interior;
};

// Cells of the arrangement of `lines` restricted to `box`. Deterministic
// order (incremental splitting in input-line order). Cell count is at most
// 1 + n + n(n-1)/2.
std::vector<ArrangementCell> arrangement_cells_2d(const std::vector<Hyperplane>& lines,
                                                  const Box& box);

struct BreakSegment {
  Vec2 a, b;
  std::size_t cell;  // index into the arrangement cells
};

struct SecondLayerBreaklines {
  std::vector<ArrangementCell> cells;
  // per_neuron[i] holds the zero set of second-layer unit i, one clipped
  // segment per crossed cell.
  std::vector<std::vector<BreakSegment>> per_neuron;
  // (neuron, cell) pairs whose pre-activation vanishes identically on the
  // cell: reported rather than treated as an error.
  std::vector<std::pair<std::size_t, std::size_t>> degenerate;
};

// Requires a planar network (input dimension 2).
SecondLayerBreaklines second_layer_breaklines_2d(const ReluNetwork& net, const Box& box);

}  // namespace stepnet
