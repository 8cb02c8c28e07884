// Command-line front end: build networks from geometry files, evaluate them,
// estimate errors, extract break lines, run the worked examples, and render
// SVG figures. Exit codes: 0 success, 2 bad usage or invalid input, 1 runtime
// failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stepnet/analysis.hpp"
#include "stepnet/breaklines.hpp"
#include "stepnet/construct.hpp"
#include "stepnet/geometry.hpp"
#include "stepnet/io.hpp"
#include "stepnet/network.hpp"
#include "stepnet/rng.hpp"
#include "stepnet/scenarios.hpp"

namespace fs = std::filesystem;
using namespace stepnet;

namespace {

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  const char* s = text.c_str();
  char* end = nullptr;
  while (true) {
    const double v = std::strtod(s, &end);
    if (end == s) break;
    out.push_back(v);
    s = end;
  }
  return out;
}

// The step function a geometry file encodes: 1 outside the region (beyond
// some face for hyperplane files, off the polygon for polygon files).
RegionSpec chi_from_geometry(const io::GeometryFile& g, const std::string& path) {
  if (!g.box)
    throw std::invalid_argument("geometry file has no box: " + path);
  if (g.polygon)
    return RegionSpec::complement(RegionSpec::from_polygon(*g.polygon, *g.box));
  if (!g.hyperplanes.empty())
    return RegionSpec::outside_hyperplanes(g.hyperplanes, *g.box);
  throw std::invalid_argument("geometry file holds no faces: " + path);
}

ScalarField indicator_field(const RegionSpec& region) {
  return [&region](std::span<const double> x) { return region.inside(x) ? 1.0 : 0.0; };
}

int run_build(const std::string& construction, const std::string& geometry,
              double eps, const std::string& out, std::string report_path) {
  const io::GeometryFile g = io::load_geometry(geometry);
  ConstructionReport report = [&]() -> ConstructionReport {
    if (construction == "hull") {
      if (!g.polygon)
        throw std::invalid_argument("--construction hull needs a polygon geometry file");
      return hull_composite(*g.polygon, eps);
    }
    if (construction == "decomposition") {
      if (!g.polygon)
        throw std::invalid_argument(
            "--construction decomposition needs a polygon geometry file");
      return decomposition_composite(convex_decomposition_2d(*g.polygon), eps);
    }
    const std::vector<Hyperplane> hs =
        g.polygon ? g.polygon->edge_hyperplanes() : g.hyperplanes;
    if (hs.empty())
      throw std::invalid_argument("geometry file holds no faces: " + geometry);
    const ChainTopology topo =
        g.polygon ? ChainTopology::Closed : ChainTopology::Open;
    if (construction == "halfspace")
      return ConstructionReport{
          halfspace_ramp(hs.front(), eps), eps, "halfspace-ramp", "",
          {ConstructionPart{"ramp", {hs.front()}, ChainTopology::Open, 1.0}}, {}};
    if (construction == "indicator")
      return ConstructionReport{convex_indicator(hs, eps), eps, "convex-indicator",
                                "", {ConstructionPart{"indicator", hs, topo, 1.0}}, {}};
    return ConstructionReport{convex_bump(hs, eps), eps, "convex-bump", "",
                              {ConstructionPart{"bump", hs, topo, 1.0}}, {}};
  }();
  report.shape = report.network.shape_string();

  io::save_network(report.network, out);
  if (report_path.empty()) {
    fs::path p(out);
    p.replace_extension();
    report_path = p.string() + ".report.json";
  }
  nlohmann::ordered_json j;
  j["type"] = "construction-report";
  j.update(io::construction_json(report));
  io::write_text(report_path, io::dump_json17(j));
  std::cout << "wrote " << out << " (shape " << report.shape << ", method "
            << report.method << ")\nwrote " << report_path << "\n";
  return 0;
}

int run_eval(const std::string& network, const std::string& points,
             const std::string& out, unsigned threads) {
  const ReluNetwork net = io::load_network(network);
  const std::vector<double> nums = parse_numbers(io::read_text(points));
  const std::size_t d = net.input_dim();
  if (nums.size() % d != 0)
    throw std::invalid_argument("points file holds " + std::to_string(nums.size()) +
                                " numbers, not a multiple of the input dimension " +
                                std::to_string(d));
  const std::size_t count = nums.size() / d;
  const std::vector<double> vals = net.eval_batch(nums, count, threads);
  std::string text;
  for (const double v : vals) {
    text += io::format17(v);
    text += '\n';
  }
  if (out.empty())
    std::fputs(text.c_str(), stdout);
  else
    io::write_text(out, text);
  return 0;
}

int run_error(const std::string& network, const std::string& geometry, double p,
              const std::string& method, std::uint64_t samples,
              std::size_t resolution, std::uint64_t seed, const std::string& out) {
  const ReluNetwork net = io::load_network(network);
  const io::GeometryFile g = io::load_geometry(geometry);
  const RegionSpec chi = chi_from_geometry(g, geometry);
  if (net.input_dim() != chi.box.dim())
    throw std::invalid_argument("network input dimension does not match the geometry box");
  const ScalarField f = indicator_field(chi);
  const ScalarField gfield = [&net](std::span<const double> x) { return net.eval(x); };
  const ErrorReport er = method == "mc"
                             ? lp_error_mc(f, gfield, p, chi.box, samples, seed)
                             : lp_error_grid(f, gfield, p, chi.box, resolution);
  io::ErrorCsvRow row;
  row.scenario = fs::path(geometry).stem().string();
  row.p = er.p;
  row.eps = 0.0;  // not part of this invocation; column kept for uniformity
  row.method = to_string(er.method);
  row.estimate = er.estimate;
  row.ci = er.half_width_95;
  const std::string csv = io::error_csv({row});
  if (out.empty())
    std::fputs(csv.c_str(), stdout);
  else
    io::write_text(out, csv);
  return 0;
}

int run_breaklines(const std::string& network, const std::vector<double>& box_vals,
                   const std::string& geometry, const std::string& out) {
  const ReluNetwork net = io::load_network(network);
  if (net.input_dim() != 2)
    throw std::invalid_argument("breaklines needs a planar network (input dimension 2)");
  Box box;
  if (!box_vals.empty()) {
    box = Box({box_vals[0], box_vals[1]}, {box_vals[2], box_vals[3]});
  } else if (!geometry.empty()) {
    const io::GeometryFile g = io::load_geometry(geometry);
    if (!g.box) throw std::invalid_argument("geometry file has no box: " + geometry);
    box = *g.box;
  } else {
    throw std::invalid_argument("give either --box x0,y0,x1,y1 or --geometry");
  }
  const SecondLayerBreaklines second = second_layer_breaklines_2d(net, box);
  const io::BreaklinesFile doc{box, first_layer_breaklines(net), second.per_neuron,
                               second.degenerate};
  io::save_breaklines(doc, out);
  std::cout << "wrote " << out << " (" << doc.first_layer.size() << " lines, "
            << doc.second_layer.size() << " units)\n";
  return 0;
}

int run_render(const std::string& input, const std::string& out) {
  const std::string text = io::read_text(input);
  const std::size_t nl = text.find('\n');
  const std::string head = text.substr(0, nl == std::string::npos ? text.size() : nl);
  std::string type;
  try {
    type = nlohmann::ordered_json::parse(head).value("type", "");
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("unrecognized input file: " + input);
  }
  std::string svg;
  if (type == "field")
    svg = io::render_field_svg(io::load_field(input));
  else if (type == "breaklines")
    svg = io::render_breaklines_svg(io::load_breaklines(input));
  else
    throw std::invalid_argument("cannot render files of type '" + type + "'");
  io::write_text(out, svg);
  std::cout << "wrote " << out << "\n";
  return 0;
}

void print_summary(const ScenarioReport& rep) {
  std::cout << rep.name << ": shape " << rep.construction.shape << ", eps "
            << io::format17(rep.eps) << "\n";
  for (const auto& row : rep.errors) {
    std::cout << "  " << to_string(row.report.method) << " p=" << row.report.p
              << ": estimate " << io::format17(row.report.estimate) << " (ci "
              << io::format17(row.report.half_width_95) << ")";
    if (row.bound_norm)
      std::cout << " bound " << io::format17(*row.bound_norm) << " "
                << (row.check && row.check->pass ? "pass" : "fail");
    std::cout << "\n";
  }
  if (!rep.out_dir.empty())
    std::cout << "  artifacts: " << rep.out_dir.string() << " (" << rep.artifacts.size()
              << " files)\n";
}

int run_example(const std::string& scenario, const std::string& preset,
                std::size_t n, std::size_t dim, double eps, const std::string& method,
                const ScenarioOptions& opts) {
  std::vector<PresetSpec> todo;
  std::vector<ScenarioReport> reports;
  const bool custom = eps > 0.0;
  if (scenario == "all") {
    todo = preset_list();
  } else if (!preset.empty()) {
    todo.push_back({scenario, preset});
  } else if (!custom) {
    for (const auto& ps : preset_list())
      if (ps.scenario == scenario) todo.push_back(ps);
  }
  auto timed = [](auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioReport rep = fn();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    std::fprintf(stderr, "%s: %.2fs\n", rep.name.c_str(), dt.count());
    return rep;
  };
  if (!todo.empty()) {
    for (const auto& ps : todo)
      reports.push_back(timed([&] { return run_preset(ps.scenario, ps.preset, opts); }));
  } else {
    if (scenario == "circle") {
      if (n == 0) throw std::invalid_argument("circle needs --n");
      reports.push_back(timed([&] { return circle_example(n, eps, opts); }));
    } else if (scenario == "sphere") {
      if (n == 0) throw std::invalid_argument("sphere needs --n");
      reports.push_back(timed([&] { return sphere_example(n, eps, opts); }));
    } else if (scenario == "hypercube") {
      reports.push_back(timed([&] { return hypercube_example(dim, eps, opts); }));
    } else {
      const HMethod m =
          method == "decomposition" ? HMethod::Decomposition : HMethod::Hull;
      reports.push_back(timed([&] { return hshape_example(m, eps, opts); }));
    }
  }
  for (const auto& rep : reports) print_summary(rep);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"step-function networks: construction, error estimates, break lines"};
  app.require_subcommand(1);

  auto* build = app.add_subcommand("build", "Construct a network from a geometry file");
  std::string b_construction, b_geometry, b_out, b_report;
  double b_eps = 0.0;
  build->add_option("--construction", b_construction, "construction kind")
      ->required()
      ->check(CLI::IsMember({"halfspace", "indicator", "bump", "hull", "decomposition"}));
  build->add_option("--geometry", b_geometry, "hyperplanes or polygon JSON")
      ->required()
      ->check(CLI::ExistingFile);
  build->add_option("--eps", b_eps, "transition width")->required()->check(CLI::PositiveNumber);
  build->add_option("--out", b_out, "network JSON to write")->required();
  build->add_option("--report", b_report,
                    "provenance JSON (default: <out>.report.json)");

  auto* eval = app.add_subcommand("eval", "Evaluate a network on points");
  std::string e_network, e_points, e_out;
  unsigned e_threads = 1;
  eval->add_option("--network", e_network)->required()->check(CLI::ExistingFile);
  eval->add_option("--points", e_points, "whitespace-separated coordinates")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--out", e_out, "output file (default: stdout)");
  eval->add_option("--threads", e_threads)->check(CLI::PositiveNumber);

  auto* error = app.add_subcommand("error", "L^p error against a geometry's step function");
  std::string r_network, r_geometry, r_method = "mc", r_out;
  double r_p = 1.0;
  std::uint64_t r_samples = 1'000'000, r_seed = kDefaultSeed;
  std::size_t r_resolution = 1024;
  error->add_option("--network", r_network)->required()->check(CLI::ExistingFile);
  error->add_option("--geometry", r_geometry)->required()->check(CLI::ExistingFile);
  error->add_option("--p", r_p, "exponent")->check(CLI::PositiveNumber);
  error->add_option("--method", r_method)->check(CLI::IsMember({"mc", "grid"}));
  error->add_option("--samples", r_samples, "Monte Carlo samples");
  error->add_option("--resolution", r_resolution, "grid points per axis");
  error->add_option("--seed", r_seed);
  error->add_option("--out", r_out, "CSV file (default: stdout)");

  auto* breaklines = app.add_subcommand("breaklines", "Extract first/second layer break lines");
  std::string l_network, l_geometry, l_out;
  std::vector<double> l_box;
  breaklines->add_option("--network", l_network)->required()->check(CLI::ExistingFile);
  breaklines->add_option("--box", l_box, "x0,y0,x1,y1")->delimiter(',')->expected(4);
  breaklines->add_option("--geometry", l_geometry, "geometry file supplying the box")
      ->check(CLI::ExistingFile);
  breaklines->add_option("--out", l_out)->required();

  auto* example = app.add_subcommand("example", "Run a worked example or preset");
  std::string x_scenario, x_preset, x_method = "hull", x_out_root = "out";
  std::size_t x_n = 0, x_dim = 10000;
  double x_eps = 0.0;
  bool x_no_errors = false, x_no_artifacts = false;
  std::uint64_t x_samples = 1'000'000, x_strip_samples = 2'000'000,
                x_seed = kDefaultSeed;
  std::size_t x_grid = 1024, x_field = 512;
  unsigned x_threads = 1;
  example->add_option("--scenario", x_scenario)
      ->required()
      ->check(CLI::IsMember({"circle", "sphere", "hypercube", "hshape", "all"}));
  example->add_option("--preset", x_preset, "named preset (e.g. n6, hull-e12)");
  example->add_option("--n", x_n, "number of faces (circle/sphere)");
  example->add_option("--d", x_dim, "dimension (hypercube)");
  example->add_option("--eps", x_eps, "transition width (custom runs)");
  example->add_option("--method", x_method)->check(CLI::IsMember({"hull", "decomposition"}));
  example->add_option("--out", x_out_root, "artifact root directory");
  example->add_flag("--no-errors", x_no_errors);
  example->add_flag("--no-artifacts", x_no_artifacts);
  example->add_option("--samples", x_samples, "Monte Carlo samples");
  example->add_option("--strip-samples", x_strip_samples);
  example->add_option("--grid-res", x_grid);
  example->add_option("--field-res", x_field);
  example->add_option("--threads", x_threads)->check(CLI::PositiveNumber);
  example->add_option("--seed", x_seed);

  auto* render = app.add_subcommand("render", "Render a field or breaklines file to SVG");
  std::string v_input, v_out;
  render->add_option("--input", v_input)->required()->check(CLI::ExistingFile);
  render->add_option("--out", v_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*build) return run_build(b_construction, b_geometry, b_eps, b_out, b_report);
    if (*eval) return run_eval(e_network, e_points, e_out, e_threads);
    if (*error)
      return run_error(r_network, r_geometry, r_p, r_method, r_samples, r_resolution,
                       r_seed, r_out);
    if (*breaklines) return run_breaklines(l_network, l_box, l_geometry, l_out);
    if (*example) {
      ScenarioOptions opts;
      opts.with_errors = !x_no_errors;
      opts.with_artifacts = !x_no_artifacts;
      opts.out_root = x_out_root;
      opts.mc_samples = x_samples;
      opts.strip_samples = x_strip_samples;
      opts.grid_resolution = x_grid;
      opts.field_resolution = x_field;
      opts.threads = x_threads;
      opts.seed = x_seed;
      return run_example(x_scenario, x_preset, x_n, x_dim, x_eps, x_method, opts);
    }
    if (*render) return run_render(v_input, v_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
