#include "stepnet/scenarios.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

#include "stepnet/breaklines.hpp"
#include "stepnet/io.hpp"
#include "stepnet/network.hpp"

namespace stepnet {

namespace {

using nlohmann::ordered_json;

constexpr double kGolden = 0.6180339887498949;

ScalarField indicator_field(RegionSpec region) {
  return [region = std::move(region)](std::span<const double> x) {
    return region.inside(x) ? 1.0 : 0.0;
  };
}

ScalarField network_field(const ReluNetwork& net) {
  return [&net](std::span<const double> x) { return net.eval(x); };
}

std::string eps_tag(double eps) {
  const double inv = 1.0 / eps;
  const long long r = std::llround(inv);
  if (r > 0 && std::abs(inv - static_cast<double>(r)) < 1e-9 * inv)
    return "e" + std::to_string(r);
  char buf[40];
  std::snprintf(buf, sizeof buf, "e%.9g", eps);
  return buf;
}

ScenarioReport make_report(std::string scenario, std::string preset, double eps,
                           ConstructionReport con) {
  return ScenarioReport{scenario + "/" + preset,
                        std::move(scenario),
                        std::move(preset),
                        eps,
                        std::move(con),
                        std::nullopt,
                        {},
                        {},
                        {}};
}

// Everything after construction: error rows, the strip bound when the ambient
// box is planar, and the artifact directory. `view` is the 2D network used
// for the field and break-line figures (the network itself in 2D, an exact
// slice otherwise; slice_coords/slice_values record which restriction).
void run_scenario_tail(ScenarioReport& rep, const RegionSpec& chi,
                       const ScenarioOptions& opts, std::uint64_t mc_samples,
                       const ReluNetwork& view, const Box& box2d,
                       std::vector<std::size_t> slice_coords,
                       std::vector<double> slice_values,
                       const std::function<void(const std::filesystem::path&,
                                                std::vector<std::string>&)>& write_geometry) {
  const ReluNetwork& net = rep.construction.network;
  const Box& box = chi.box;
  const bool planar = box.dim() == 2;

  if (opts.with_errors) {
    if (planar && !rep.construction.parts.empty()) {
      MeasureEstimate total{0.0, 0.0};
      for (std::size_t i = 0; i < rep.construction.parts.size(); ++i) {
        const auto& part = rep.construction.parts[i];
        const MeasureEstimate m =
            strip_measure_2d(part.faces, rep.eps, box, part.topology,
                             opts.strip_samples, opts.seed + 101 * (i + 1));
        total.estimate += m.estimate;
        total.half_width_95 += m.half_width_95;
      }
      rep.strip = total;
    }
    const ScalarField f = indicator_field(chi);
    const ScalarField g = network_field(net);
    for (const double p : {1.0, 2.0}) {
      std::vector<ErrorReport> reports;
      if (planar)
        reports.push_back(lp_error_grid(f, g, p, box, opts.grid_resolution));
      reports.push_back(lp_error_mc(f, g, p, box, mc_samples, opts.seed));
      for (const auto& er : reports) {
        ScenarioErrorRow row;
        row.report = er;
        if (rep.strip) {
          row.bound_norm = std::pow(rep.strip->estimate, 1.0 / p);
          row.check = verify_bound(er, *rep.strip);
        }
        rep.errors.push_back(std::move(row));
      }
    }
  }

  if (!opts.with_artifacts) return;

  const std::filesystem::path dir = opts.out_root / rep.scenario / rep.preset;
  std::filesystem::create_directories(dir);
  rep.out_dir = dir;

  io::save_network(net, dir / "network.json");
  rep.artifacts.push_back("network.json");
  write_geometry(dir, rep.artifacts);

  io::GridField field = io::sample_field(
      view, box2d, {opts.field_resolution, opts.field_resolution}, {}, {},
      opts.threads);
  field.box = box;  // record the full ambient box and the restriction
  field.slice_coords = std::move(slice_coords);
  field.slice_values = std::move(slice_values);
  io::save_field(field, dir / "field.txt");
  rep.artifacts.push_back("field.txt");
  io::write_text(dir / "field.svg", io::render_field_svg(field));
  rep.artifacts.push_back("field.svg");

  const SecondLayerBreaklines second = second_layer_breaklines_2d(view, box2d);
  io::BreaklinesFile lines{box2d, first_layer_breaklines(view), second.per_neuron,
                           second.degenerate};
  io::save_breaklines(lines, dir / "breaklines.json");
  rep.artifacts.push_back("breaklines.json");
  io::write_text(dir / "breaklines.svg", io::render_breaklines_svg(lines));
  rep.artifacts.push_back("breaklines.svg");

  std::vector<io::ErrorCsvRow> csv;
  for (const auto& row : rep.errors) {
    io::ErrorCsvRow r;
    r.scenario = rep.name;
    r.p = row.report.p;
    r.eps = rep.eps;
    r.method = to_string(row.report.method);
    r.estimate = row.report.estimate;
    r.ci = row.report.half_width_95;
    r.bound = row.bound_norm;
    if (row.check) r.pass = row.check->pass;
    csv.push_back(std::move(r));
  }
  io::save_error_csv(csv, dir / "errors.csv");
  rep.artifacts.push_back("errors.csv");

  ordered_json j;
  j["type"] = "scenario-report";
  j["name"] = rep.name;
  j["scenario"] = rep.scenario;
  j["preset"] = rep.preset;
  j["eps"] = rep.eps;
  j["construction"] = io::construction_json(rep.construction);
  if (rep.strip)
    j["strip"] = ordered_json{{"estimate", rep.strip->estimate},
                              {"half_width_95", rep.strip->half_width_95}};
  else
    j["strip"] = nullptr;
  ordered_json errors = ordered_json::array();
  for (const auto& row : rep.errors) {
    ordered_json e{{"p", row.report.p},
                   {"method", to_string(row.report.method)},
                   {"estimate", row.report.estimate},
                   {"half_width_95", row.report.half_width_95},
                   {"samples_or_resolution", row.report.samples_or_resolution}};
    e["bound"] = row.bound_norm ? ordered_json(*row.bound_norm) : ordered_json(nullptr);
    e["pass"] = row.check ? ordered_json(row.check->pass) : ordered_json(nullptr);
    errors.push_back(std::move(e));
  }
  j["errors"] = std::move(errors);
  rep.artifacts.push_back("report.json");
  j["artifacts"] = rep.artifacts;
  io::write_text(dir / "report.json", io::dump_json17(j));
}

}  // namespace

SimplePolygon hshape_fixture() {
  return SimplePolygon::from_vertices({{-1.5, -1.5},
                                       {-0.5, -1.5},
                                       {-0.5, -0.5},
                                       {0.5, -0.5},
                                       {0.5, -1.5},
                                       {1.5, -1.5},
                                       {1.5, 1.5},
                                       {0.5, 1.5},
                                       {0.5, 0.5},
                                       {-0.5, 0.5},
                                       {-0.5, 1.5},
                                       {-1.5, 1.5}});
}

std::vector<ConvexPolytope> hshape_pieces() {
  auto rect = [](double x0, double y0, double x1, double y1, std::string label) {
    return ConvexPolytope::from_polygon(
        SimplePolygon::from_vertices({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}),
        std::move(label));
  };
  return {rect(-1.5, -1.5, -0.5, 1.5, "piece-0"),
          rect(0.5, -1.5, 1.5, 1.5, "piece-1"),
          rect(-0.5, -0.5, 0.5, 0.5, "piece-2")};
}

std::vector<Hyperplane> wedge_fixture() {
  return {Hyperplane({1.0, 0.0}, 0.6), Hyperplane({0.0, 1.0}, 0.6)};
}

std::vector<std::vector<double>> sphere_patch_samples(std::size_t n) {
  std::vector<std::vector<double>> pts;
  pts.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double ct = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    const double frac = static_cast<double>(k) * kGolden;
    const double phi = (std::acos(-1.0) / 2.0) * (frac - std::floor(frac));
    pts.push_back({0.7 * st * std::cos(phi), 0.7 * st * std::sin(phi), 0.7 * ct});
  }
  return pts;
}

ImplicitSurface sphere_surface(std::vector<double> center, double radius) {
  ImplicitSurface s;
  s.value = [center, radius](std::span<const double> x) {
    double q = 0.0;
    for (std::size_t i = 0; i < center.size(); ++i)
      q += (x[i] - center[i]) * (x[i] - center[i]);
    return q - radius * radius;
  };
  s.gradient = [center](std::span<const double> x) {
    std::vector<double> g(center.size());
    for (std::size_t i = 0; i < center.size(); ++i) g[i] = 2.0 * (x[i] - center[i]);
    return g;
  };
  return s;
}

ScenarioReport circle_example(std::size_t n, double eps, const ScenarioOptions& opts) {
  const Box box = Box::unit(2);
  const std::vector<Hyperplane> hs =
      polygonalize_circle_inscribed({0.5, 0.5}, 0.25, n);
  ConstructionReport con{convex_indicator(hs, eps),
                         eps,
                         "convex-indicator",
                         "",
                         {ConstructionPart{"indicator", hs, ChainTopology::Closed, 1.0}},
                         {}};
  con.shape = con.network.shape_string();

  ScenarioReport rep =
      make_report("circle", "n" + std::to_string(n), eps, std::move(con));

  const RegionSpec chi = RegionSpec::outside_hyperplanes(hs, box);
  run_scenario_tail(rep, chi, opts, opts.mc_samples, rep.construction.network, box,
                    {}, {},
                    [&hs, &box](const std::filesystem::path& dir,
                                std::vector<std::string>& artifacts) {
                      io::save_hyperplanes(hs, box, dir / "geometry.json");
                      artifacts.push_back("geometry.json");
                    });
  return rep;
}

ScenarioReport sphere_example(std::size_t n, double eps, const ScenarioOptions& opts) {
  const Box box = Box::unit(3);
  const ImplicitSurface surface = sphere_surface({0.0, 0.0, 0.0}, 0.7);
  const std::vector<Hyperplane> hs =
      polygonalize_convex_tangent(surface, sphere_patch_samples(n));
  ConstructionReport con{convex_indicator(hs, eps),
                         eps,
                         "convex-indicator",
                         "",
                         {ConstructionPart{"indicator", hs, ChainTopology::Closed, 1.0}},
                         {}};
  con.shape = con.network.shape_string();

  ScenarioReport rep =
      make_report("sphere", "n" + std::to_string(n), eps, std::move(con));

  const RegionSpec chi = RegionSpec::outside_hyperplanes(hs, box);
  const ReluNetwork view =
      slice_network(rep.construction.network, {2}, {0.205});
  run_scenario_tail(rep, chi, opts, opts.mc_samples, view, Box::unit(2), {2},
                    {0.205},
                    [&hs, &box](const std::filesystem::path& dir,
                                std::vector<std::string>& artifacts) {
                      io::save_hyperplanes(hs, box, dir / "geometry.json");
                      artifacts.push_back("geometry.json");
                    });
  return rep;
}

ScenarioReport hypercube_example(std::size_t dim, double eps,
                                 const ScenarioOptions& opts) {
  if (dim < 3)
    throw std::invalid_argument("hypercube_example: dimension must be at least 3");
  const Box box = Box::unit(dim);
  // Parts deliberately stay empty: materialising `dim` dense normals of
  // length `dim` defeats the sparse representation.
  ConstructionReport con{convex_indicator_axes(dim, std::vector<double>(dim, 0.5), eps),
                         eps,
                         "convex-indicator-axes",
                         "",
                         {},
                         {}};
  con.shape = con.network.shape_string();

  ScenarioReport rep = make_report("hypercube", eps_tag(eps), eps, std::move(con));

  RegionSpec chi;
  chi.box = box;
  chi.inside = [](std::span<const double> x) {
    for (const double v : x)
      if (v > 0.5) return true;
    return false;
  };

  std::vector<std::size_t> slice_coords(dim - 2);
  for (std::size_t i = 0; i + 2 < dim; ++i) slice_coords[i] = i + 2;
  const std::vector<double> slice_values(dim - 2, 0.255);
  const ReluNetwork view =
      slice_network(rep.construction.network, slice_coords, slice_values);

  const std::uint64_t mc = std::min<std::uint64_t>(opts.mc_samples, 100'000);
  run_scenario_tail(rep, chi, opts, mc, view, Box::unit(2),
                    std::move(slice_coords), slice_values,
                    [&view](const std::filesystem::path& dir,
                            std::vector<std::string>& artifacts) {
                      io::save_hyperplanes(first_layer_breaklines(view),
                                           Box::unit(2), dir / "geometry.json");
                      artifacts.push_back("geometry.json");
                    });
  return rep;
}

ScenarioReport hshape_example(HMethod method, double eps, const ScenarioOptions& opts) {
  const Box box = Box::cube(2, -2.0, 2.0);
  const SimplePolygon region = hshape_fixture();

  const bool hull = method == HMethod::Hull;
  ScenarioReport rep =
      make_report("hshape", (hull ? "hull-" : "decomp-") + eps_tag(eps), eps,
                  hull ? hull_composite(region, eps)
                       : decomposition_composite(hshape_pieces(), eps));

  const RegionSpec chi =
      RegionSpec::complement(RegionSpec::from_polygon(region, box));
  run_scenario_tail(rep, chi, opts, opts.mc_samples, rep.construction.network, box,
                    {}, {},
                    [&region, &box](const std::filesystem::path& dir,
                                    std::vector<std::string>& artifacts) {
                      io::save_polygon(region, box, dir / "geometry.json");
                      artifacts.push_back("geometry.json");
                    });
  return rep;
}

std::vector<PresetSpec> preset_list() {
  return {{"circle", "n6"},        {"circle", "n50"},
          {"sphere", "n9"},        {"sphere", "n100"},
          {"hypercube", "e20"},    {"hypercube", "e200"},
          {"hshape", "hull-e12"},  {"hshape", "decomp-e200"}};
}

ScenarioReport run_preset(const std::string& scenario, const std::string& preset,
                          const ScenarioOptions& opts) {
  if (scenario == "circle") {
    if (preset == "n6") return circle_example(6, 1.0 / 25.0, opts);
    if (preset == "n50") return circle_example(50, 1.0 / 2000.0, opts);
  } else if (scenario == "sphere") {
    if (preset == "n9") return sphere_example(9, 1.0 / 15.0, opts);
    if (preset == "n100") return sphere_example(100, 1.0 / 100.0, opts);
  } else if (scenario == "hypercube") {
    if (preset == "e20") return hypercube_example(10000, 1.0 / 20.0, opts);
    if (preset == "e200") return hypercube_example(10000, 1.0 / 200.0, opts);
  } else if (scenario == "hshape") {
    if (preset == "hull-e12") return hshape_example(HMethod::Hull, 1.0 / 12.0, opts);
    if (preset == "decomp-e200")
      return hshape_example(HMethod::Decomposition, 1.0 / 200.0, opts);
  }
  throw std::invalid_argument("unknown preset " + scenario + "/" + preset);
}

}  // namespace stepnet
