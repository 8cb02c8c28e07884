#pragma once

// Worked examples used by the CLI and the test suite: a polygonalized circle,
// a tangent-plane sphere patch, the axis-plane hypercube corner, and a
// non-convex H-shaped region built either from its convex hull and pockets or
// from a rectangle decomposition. Each example builds the network, estimates
// L^p errors against the target step function, checks the strip bound where
// one is available (2D), and optionally writes a fixed artifact set.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stepnet/analysis.hpp"
#include "stepnet/construct.hpp"
#include "stepnet/geometry.hpp"
#include "stepnet/rng.hpp"

namespace stepnet {

struct ScenarioOptions {
  bool with_errors = true;
  bool with_artifacts = true;
  std::filesystem::path out_root = "out";
  std::uint64_t mc_samples = 1'000'000;
  std::uint64_t strip_samples = 2'000'000;  // per construction part
  std::size_t grid_resolution = 1024;
  std::size_t field_resolution = 512;
  unsigned threads = 1;
  std::uint64_t seed = kDefaultSeed;
};

struct ScenarioErrorRow {
  ErrorReport report;
  std::optional<double> bound_norm;  // strip^(1/p), when a strip bound exists
  std::optional<BoundCheck> check;
};

struct ScenarioReport {
  std::string name;      // "circle/n6"
  std::string scenario;  // "circle"
  std::string preset;    // "n6"
  double eps = 0.0;
  ConstructionReport construction;
  std::optional<MeasureEstimate> strip;  // summed over parts (2D only)
  std::vector<ScenarioErrorRow> errors;
  std::vector<std::string> artifacts;  // file names, relative to out_dir
  std::filesystem::path out_dir;       // empty when nothing was written
};

// ---------------------------------------------------------------------------
// Fixtures

// H-shaped region in (-2,2)^2: two vertical legs [±0.5,±1.5] x [-1.5,1.5]
// joined by the crossbar [-0.5,0.5] x [-0.5,0.5]. Area 7, hull area 9.
SimplePolygon hshape_fixture();

// The three rectangles (left leg, right leg, crossbar) that tile the H.
std::vector<ConvexPolytope> hshape_pieces();

// Two planes x = 0.6 and y = 0.6 with +e1/+e2 normals: the corner wedge used
// by the transition-classification examples (open chain).
std::vector<Hyperplane> wedge_fixture();

// Spiral points on the first-octant patch of the radius-0.7 sphere at the
// origin: cos(theta_k) = (k+0.5)/n, phi_k = (pi/2) * frac(k * golden ratio).
std::vector<std::vector<double>> sphere_patch_samples(std::size_t n);

ImplicitSurface sphere_surface(std::vector<double> center, double radius);

// ---------------------------------------------------------------------------
// Examples

ScenarioReport circle_example(std::size_t n, double eps,
                              const ScenarioOptions& opts = {});
ScenarioReport sphere_example(std::size_t n, double eps,
                              const ScenarioOptions& opts = {});
ScenarioReport hypercube_example(std::size_t dim, double eps,
                                 const ScenarioOptions& opts = {});

enum class HMethod { Hull, Decomposition };

ScenarioReport hshape_example(HMethod method, double eps,
                              const ScenarioOptions& opts = {});

// ---------------------------------------------------------------------------
// Presets

struct PresetSpec {
  std::string scenario;
  std::string preset;
};

// The eight canonical runs: circle/n6, circle/n50, sphere/n9, sphere/n100,
// hypercube/e20, hypercube/e200, hshape/hull-e12, hshape/decomp-e200.
std::vector<PresetSpec> preset_list();

ScenarioReport run_preset(const std::string& scenario, const std::string& preset,
                          const ScenarioOptions& opts = {});

}  // namespace stepnet
