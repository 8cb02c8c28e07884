#include "stepnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stepnet {

TransitionLabel classify_transition(Vec2 x, const std::vector<Hyperplane>& hs, double eps,
                                    ChainTopology topology) {
  if (hs.empty()) throw std::invalid_argument("classify_transition: empty chain");
  if (!(eps > 0.0)) throw std::invalid_argument("classify_transition: eps must be positive");

  const std::size_t n = hs.size();
  std::vector<double> s(n);
  std::vector<std::size_t> pos;
  double pos_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = hs[i].signed_eval(x);
    if (s[i] > 0.0) {
      pos.push_back(i);
      pos_sum += s[i];
    }
  }

  if (pos.empty()) return {TransitionKind::OmegaHat1, 0};
  if (pos_sum >= eps) return {TransitionKind::OmegaHat3, 0};

  if (pos.size() == 1) return {TransitionKind::Upsilon1, pos[0] + 1};
  if (pos.size() == 2) {
    const std::size_t i = pos[0], j = pos[1];
    if (j == i + 1) return {TransitionKind::Upsilon2, i + 1};
    if (topology == ChainTopology::Closed && i == 0 && j == n - 1 && n > 2)
      return {TransitionKind::Upsilon2, n};  // cyclic pair (n, 1)
  }
  // Positive planes that are not chain-adjacent, below the saturation sum:
  // no closed-form residual applies, so the point stays unclassified.
  return {TransitionKind::Unknown, 0};
}

double predicted_residual(Vec2 x, const std::vector<Hyperplane>& hs, double eps,
                          const RegionSpec& chi_hat, ChainTopology topology) {
  const TransitionLabel label = classify_transition(x, hs, eps, topology);
  switch (label.kind) {
    case TransitionKind::OmegaHat1:
    case TransitionKind::OmegaHat3:
      return 0.0;
    case TransitionKind::Upsilon1: {
      const double chi = chi_hat.inside(std::vector<double>{x.x, x.y}) ? 1.0 : 0.0;
      return chi - hs[label.index - 1].signed_eval(x) / eps;
    }
    case TransitionKind::Upsilon2: {
      const double chi = chi_hat.inside(std::vector<double>{x.x, x.y}) ? 1.0 : 0.0;
      const std::size_t i = label.index - 1;
      const std::size_t j = (i + 1) % hs.size();
      return chi - (hs[i].signed_eval(x) + hs[j].signed_eval(x)) / eps;
    }
    case TransitionKind::Unknown:
    default:
      throw std::runtime_error("predicted_residual: point not covered by the chain cells");
  }
}

const char* to_string(ErrorMethod m) {
  switch (m) {
    case ErrorMethod::Mc: return "mc";
    case ErrorMethod::Grid: return "grid";
    case ErrorMethod::Exact2d: return "exact2d";
  }
  return "unknown";
}

ErrorReport lp_error_mc(const ScalarField& f, const ScalarField& g, double p,
                        const Box& box, std::uint64_t samples, std::uint64_t seed) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_error_mc: p must be >= 1");
  if (samples == 0) throw std::invalid_argument("lp_error_mc: samples must be positive");
  if (!f || !g) throw std::invalid_argument("lp_error_mc: missing field");

  const std::size_t d = box.dim();
  CounterRng rng(seed);
  std::vector<double> x(d);
  long double sum = 0.0L, sumsq = 0.0L;
  for (std::uint64_t i = 0; i < samples; ++i) {
    for (std::size_t k = 0; k < d; ++k)
      x[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * rng.uniform01(i * d + k);
    const double diff = f(x) - g(x);
    if (!std::isfinite(diff))
      throw std::runtime_error("lp_error_mc: non-finite sample");
    const double v = std::pow(std::abs(diff), p);
    sum += v;
    sumsq += static_cast<long double>(v) * v;
  }
  const double n = static_cast<double>(samples);
  const double vol = box.volume();
  const double mean = static_cast<double>(sum / samples);
  const double var = std::max(0.0, static_cast<double>(sumsq / samples) - mean * mean);
  const double power_estimate = vol * mean;
  const double power_hw = 1.96 * vol * std::sqrt(var / n);

  ErrorReport rep;
  rep.p = p;
  rep.method = ErrorMethod::Mc;
  rep.samples_or_resolution = samples;
  rep.estimate = std::pow(power_estimate, 1.0 / p);
  // Delta method: d/dt t^(1/p) evaluated at the power-scale estimate.
  rep.half_width_95 =
      power_estimate > 0.0
          ? (1.0 / p) * std::pow(power_estimate, 1.0 / p - 1.0) * power_hw
          : std::pow(power_hw, 1.0 / p);
  return rep;
}

ErrorReport lp_error_grid(const ScalarField& f, const ScalarField& g, double p,
                          const Box& box, std::size_t resolution_per_axis) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_error_grid: p must be >= 1");
  if (resolution_per_axis < 2)
    throw std::invalid_argument("lp_error_grid: resolution must be at least 2");
  const std::size_t d = box.dim();
  if (d > 3) throw std::invalid_argument("lp_error_grid: supported only for d <= 3");

  const std::size_t res = resolution_per_axis;
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= res;

  std::vector<double> x(d);
  long double sum = 0.0L;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t cell = rem % res;
      rem /= res;
      x[k] = box.lo[k] + (box.hi[k] - box.lo[k]) *
                             ((static_cast<double>(cell) + 0.5) / static_cast<double>(res));
    }
    const double diff = f(x) - g(x);
    if (!std::isfinite(diff))
      throw std::runtime_error("lp_error_grid: non-finite sample");
    sum += std::pow(std::abs(diff), p);
  }
  const double mean = static_cast<double>(sum / total);

  ErrorReport rep;
  rep.p = p;
  rep.method = ErrorMethod::Grid;
  rep.samples_or_resolution = res;
  rep.estimate = std::pow(box.volume() * mean, 1.0 / p);
  rep.half_width_95 = 0.0;
  return rep;
}

ErrorReport halfspace_lp_error_exact(double eps, double p, double section) {
  if (!(eps > 0.0) || !(p >= 1.0) || !(section > 0.0))
    throw std::invalid_argument("halfspace_lp_error_exact: bad parameters");
  ErrorReport rep;
  rep.p = p;
  rep.method = ErrorMethod::Exact2d;
  rep.samples_or_resolution = 0;
  // integral over the strip of (1 - t/eps)^p dt = eps/(p+1), per unit section.
  rep.estimate = std::pow(section * eps / (p + 1.0), 1.0 / p);
  rep.half_width_95 = 0.0;
  return rep;
}

MeasureEstimate strip_measure_2d(const std::vector<Hyperplane>& hs, double eps,
                                 const Box& box, ChainTopology topology,
                                 std::uint64_t samples, std::uint64_t seed) {
  if (box.dim() != 2)
    throw std::invalid_argument("strip_measure_2d: box must be two-dimensional");
  if (samples == 0) throw std::invalid_argument("strip_measure_2d: samples must be positive");

  CounterRng rng(seed);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const Vec2 x{box.lo[0] + (box.hi[0] - box.lo[0]) * rng.uniform01(2 * i),
                 box.lo[1] + (box.hi[1] - box.lo[1]) * rng.uniform01(2 * i + 1)};
    if (classify_transition(x, hs, eps, topology).in_strip()) ++hits;
  }
  const double vol = box.volume();
  const double frac = static_cast<double>(hits) / static_cast<double>(samples);
  MeasureEstimate m;
  m.estimate = vol * frac;
  m.half_width_95 =
      1.96 * vol * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples));
  return m;
}

BoundCheck verify_bound(const ErrorReport& report, const MeasureEstimate& strip) {
  BoundCheck chk;
  chk.lhs = std::pow(report.estimate, report.p);
  // Transfer the norm-scale half-width back to the power scale.
  const double power_hw =
      report.estimate > 0.0
          ? report.p * std::pow(report.estimate, report.p - 1.0) * report.half_width_95
          : std::pow(report.half_width_95, report.p);
  chk.rhs = strip.estimate + 3.0 * (strip.half_width_95 + power_hw);
  chk.pass = chk.lhs <= chk.rhs;
  chk.margin = chk.rhs - chk.lhs;
  return chk;
}

SlopeFit scaling_study(const std::function<double(double)>& error_of_eps,
                       std::span<const double> eps_list) {
  if (eps_list.size() < 3)
    throw std::invalid_argument("scaling_study: need at least three eps values");
  const double span = *std::max_element(eps_list.begin(), eps_list.end()) /
                      *std::min_element(eps_list.begin(), eps_list.end());
  if (span < 100.0)
    throw std::invalid_argument("scaling_study: eps values must span two decades");

  SlopeFit fit;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (double eps : eps_list) {
    const double err = error_of_eps(eps);
    if (!(err > 0.0) || !std::isfinite(err))
      throw std::runtime_error("scaling_study: estimator returned a non-positive error");
    fit.eps.push_back(eps);
    fit.errors.push_back(err);
    const double lx = std::log(eps), ly = std::log(err);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(fit.eps.size());
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12)
    throw std::runtime_error("scaling_study: degenerate fit");
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace stepnet
