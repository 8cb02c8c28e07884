#pragma once

// Closed-form weight constructions. Every network built here realises, in
// exact arithmetic on its weights,
//
//   N(x) = 1 - relu(1 - (1/eps) * sum_i relu(a_i.x - b_i))        (indicator)
//   B(x) =     relu(1 - (1/eps) * sum_i relu(a_i.x - b_i))        (bump)
//
// for a list of oriented hyperplanes a_i.x - b_i = 0, plus sums of such
// pieces for non-convex regions. The indicator form is 0 wherever every
// a_i.x - b_i <= 0 and exactly 1 wherever the positive parts sum to at
// least eps; the bump form is its reflection.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "stepnet/geometry.hpp"
#include "stepnet/network.hpp"

namespace stepnet {

// One convex ingredient of a composite construction: the hyperplane chain it
// was built from (after any shrinking) and its coefficient in the final sum.
struct ConstructionPart {
  std::string role;  // "indicator", "hull-complement", "pocket", "piece"
  std::vector<Hyperplane> faces;
  ChainTopology topology = ChainTopology::Closed;
  double coeff = 1.0;
};

// An eps-wide slab bounded by two parallel construction faces on which the
// network provably equals the target step function exactly. `face` is
// oriented so the slab is {x : 0 < face.signed_eval(x) < eps}; `a`,`b` bound
// its lateral extent (the shared facet in 2D).
struct GapSlab {
  Hyperplane face;
  Vec2 a, b;
  std::string between;  // "<earlier>|<later>" labels
};

struct ConstructionReport {
  ReluNetwork network;
  double epsilon;
  std::string method;  // "halfspace-ramp", "convex-indicator", "hull-composite", ...
  std::string shape;   // == network.shape_string()
  std::vector<ConstructionPart> parts;
  std::vector<GapSlab> slabs;
};

// d-1-1-1 ramp: 0 on {a.x <= b}, 1 on {a.x - b >= eps}, linear in between.
ReluNetwork halfspace_ramp(const Hyperplane& h, double eps);

// d-n-1-1 indicator of the outside: 0 on {all a_i.x - b_i < 0}, 1 wherever
// the positive parts sum to >= eps. Normals must point outward.
ReluNetwork convex_indicator(const std::vector<Hyperplane>& hs, double eps);

// Reflected form: 1 inside, 0 wherever the positive parts sum to >= eps.
ReluNetwork convex_bump(const std::vector<Hyperplane>& hs, double eps);

// Fast path for axis-aligned faces {x_i = offset_i} with +e_i normals,
// stored sparsely; equivalent to convex_indicator on those planes but never
// materialises d x d dense weights.
ReluNetwork convex_indicator_axes(std::size_t dim, const std::vector<double>& offsets,
                                  double eps);

// Hull-complement indicator plus one bump per pocket; non-convex pockets
// recurse (each level flips inside and outside), up to max_recursion levels.
ConstructionReport hull_composite(const SimplePolygon& region, double eps,
                                  std::size_t max_recursion = 4);

// A face shared between two convex pieces: the later piece is shrunk by eps
// along it. Indices refer to the pieces list handed to
// decomposition_composite; `seg_*` bound the shared facet in 2D.
struct SharedFace {
  std::size_t earlier = 0, later = 0;
  std::size_t face_earlier = 0, face_later = 0;
  Vec2 seg_p, seg_q;
};

// Detects shared faces between interior-disjoint 2D pieces (requires
// vertices2d on every piece). Pairs are reported with earlier < later.
std::vector<SharedFace> detect_shared_faces_2d(const std::vector<ConvexPolytope>& pieces);

// N = 1 - sum_j bump(piece_j') where piece_j' is piece j shrunk by eps along
// every face shared with an earlier piece. On each resulting gap slab the
// two adjacent bumps sum to one, so N equals the step function there.
ConstructionReport decomposition_composite(std::vector<ConvexPolytope> pieces,
                                           const std::vector<SharedFace>& shared,
                                           double eps);

// Convenience: detect shared faces, then build.
ConstructionReport decomposition_composite(std::vector<ConvexPolytope> pieces, double eps);

struct PiecewiseConstantSpec {
  std::vector<std::pair<double, RegionSpec>> terms;  // (alpha_i, region_i)
  Box ambient_box;
};

// c(x) = sum_i alpha_i * N_i(x) for per-region indicator approximants.
ReluNetwork piecewise_composite(const PiecewiseConstantSpec& spec,
                                const std::vector<ReluNetwork>& per_region_nets);

}  // namespace stepnet
