#pragma once

// Transition-strip classification, the closed-form residual it implies, and
// Lp error estimation (Monte Carlo, grid quadrature, and the half-space
// closed form) with the |strip|^(1/p) bound check.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "stepnet/geometry.hpp"
#include "stepnet/rng.hpp"

namespace stepnet {

enum class TransitionKind { OmegaHat1, Upsilon1, Upsilon2, OmegaHat3, Unknown };

// Where a point sits relative to a hyperplane chain and its eps-strip.
// `index` is 1-based: the positive plane for Upsilon1, the first plane of
// the adjacent positive pair for Upsilon2 (a closed chain allows the pair
// (n, 1), reported as index n).
struct TransitionLabel {
  TransitionKind kind = TransitionKind::Unknown;
  std::size_t index = 0;

  bool in_strip() const {
    return kind == TransitionKind::Upsilon1 || kind == TransitionKind::Upsilon2;
  }
};

TransitionLabel classify_transition(Vec2 x, const std::vector<Hyperplane>& hs, double eps,
                                    ChainTopology topology = ChainTopology::Open);

// Exact residual of the chain construction at x: 0 outside the strip,
// chi_hat(x) - s_i/eps on the single-positive cells, and
// chi_hat(x) - (s_i + s_{i+1})/eps on the corner cells. `chi_hat` must be
// the step function the network approximates (1 where some plane is
// positive). Throws on Unknown labels.
double predicted_residual(Vec2 x, const std::vector<Hyperplane>& hs, double eps,
                          const RegionSpec& chi_hat,
                          ChainTopology topology = ChainTopology::Open);

enum class ErrorMethod { Mc, Grid, Exact2d };

const char* to_string(ErrorMethod m);

struct ErrorReport {
  double p = 1.0;
  double estimate = 0.0;
  double half_width_95 = 0.0;  // zero for deterministic methods
  ErrorMethod method = ErrorMethod::Mc;
  std::uint64_t samples_or_resolution = 0;
};

using ScalarField = std::function<double(std::span<const double>)>;

// (vol * mean |f-g|^p)^(1/p) over uniform box samples, with a delta-method
// 95% half-width transferred to the norm scale.
ErrorReport lp_error_mc(const ScalarField& f, const ScalarField& g, double p,
                        const Box& box, std::uint64_t samples,
                        std::uint64_t seed = kDefaultSeed);

// Midpoint-rule tensor quadrature; d <= 3 only.
ErrorReport lp_error_grid(const ScalarField& f, const ScalarField& g, double p,
                          const Box& box, std::size_t resolution_per_axis);

// ||chi_hat - ramp||_{L^p} over a box for a half-space ramp whose strip lies
// inside the box with cross-section `section` (the (d-1)-measure of the
// box's slice along the plane): (section * eps/(p+1))^(1/p).
ErrorReport halfspace_lp_error_exact(double eps, double p, double section = 1.0);

// MC area of the eps-strip {x : classify is Upsilon1 or Upsilon2}.
MeasureEstimate strip_measure_2d(const std::vector<Hyperplane>& hs, double eps,
                                 const Box& box,
                                 ChainTopology topology = ChainTopology::Open,
                                 std::uint64_t samples = 10'000'000,
                                 std::uint64_t seed = kDefaultSeed);

// The constant-free bound chain: estimate^p <= strip + 3 * (combined CI).
struct BoundCheck {
  double lhs = 0.0;    // estimate^p
  double rhs = 0.0;    // strip + 3 * CI widths
  bool pass = false;
  double margin = 0.0;  // rhs - lhs
};

BoundCheck verify_bound(const ErrorReport& report, const MeasureEstimate& strip);

// Least-squares slope of log(error) against log(eps).
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> eps;
  std::vector<double> errors;
};

SlopeFit scaling_study(const std::function<double(double)>& error_of_eps,
                       std::span<const double> eps_list);

}  // namespace stepnet
