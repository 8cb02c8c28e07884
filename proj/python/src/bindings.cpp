// Python bindings for the main operations: geometry handles, the weight
// constructions, network evaluation, slicing, and file round-trips.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <utility>
#include <vector>

#include "stepnet/construct.hpp"
#include "stepnet/geometry.hpp"
#include "stepnet/io.hpp"
#include "stepnet/network.hpp"
#include "stepnet/scenarios.hpp"

namespace py = pybind11;
using namespace stepnet;

namespace {

std::vector<Vec2> to_vec2(const std::vector<std::pair<double, double>>& pts) {
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const auto& [x, y] : pts) out.push_back({x, y});
  return out;
}

std::vector<std::pair<double, double>> from_vec2(const std::vector<Vec2>& pts) {
  std::vector<std::pair<double, double>> out;
  out.reserve(pts.size());
  for (const auto& v : pts) out.emplace_back(v.x, v.y);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Step-function ReLU network constructions";

  py::class_<Hyperplane>(m, "Hyperplane")
      .def(py::init<std::vector<double>, double>(), py::arg("normal"),
           py::arg("offset"))
      .def_property_readonly("normal", &Hyperplane::normal)
      .def_property_readonly("offset", &Hyperplane::offset)
      .def_property_readonly("dim", &Hyperplane::dim)
      .def("signed_eval",
           [](const Hyperplane& h, const std::vector<double>& x) {
             return h.signed_eval(std::span<const double>(x));
           },
           py::arg("x"))
      .def("translated", &Hyperplane::translated, py::arg("delta"))
      .def("flipped", &Hyperplane::flipped)
      .def("__repr__", [](const Hyperplane& h) {
        return "<Hyperplane dim=" + std::to_string(h.dim()) + ">";
      });

  py::class_<SimplePolygon>(m, "SimplePolygon")
      .def_static(
          "from_vertices",
          [](const std::vector<std::pair<double, double>>& vs) {
            return SimplePolygon::from_vertices(to_vec2(vs));
          },
          py::arg("vertices"))
      .def("area", &SimplePolygon::area)
      .def("is_convex", &SimplePolygon::is_convex)
      .def("contains",
           [](const SimplePolygon& p, double x, double y) {
             return p.contains({x, y});
           },
           py::arg("x"), py::arg("y"))
      .def("vertices",
           [](const SimplePolygon& p) { return from_vec2(p.vertices()); })
      .def("edge_hyperplanes", &SimplePolygon::edge_hyperplanes);

  py::class_<ReluNetwork>(m, "ReluNetwork")
      .def_property_readonly("input_dim", &ReluNetwork::input_dim)
      .def_property_readonly("width1", &ReluNetwork::width1)
      .def_property_readonly("width2", &ReluNetwork::width2)
      .def("shape_string", &ReluNetwork::shape_string)
      .def("eval",
           [](const ReluNetwork& n, const std::vector<double>& x) {
             return n.eval(std::span<const double>(x));
           },
           py::arg("x"))
      .def("eval_batch",
           [](const ReluNetwork& n, const std::vector<double>& flat,
              std::size_t count, unsigned threads) {
             return n.eval_batch(flat, count, threads);
           },
           py::arg("flat_points"), py::arg("count"), py::arg("threads") = 1);

  py::class_<ConstructionReport>(m, "ConstructionReport")
      .def_readonly("network", &ConstructionReport::network)
      .def_readonly("epsilon", &ConstructionReport::epsilon)
      .def_readonly("method", &ConstructionReport::method)
      .def_readonly("shape", &ConstructionReport::shape)
      .def_property_readonly(
          "num_parts",
          [](const ConstructionReport& r) { return r.parts.size(); })
      .def_property_readonly("num_slabs", [](const ConstructionReport& r) {
        return r.slabs.size();
      });

  m.def("halfspace_ramp", &halfspace_ramp, py::arg("hyperplane"), py::arg("eps"));
  m.def("convex_indicator", &convex_indicator, py::arg("hyperplanes"),
        py::arg("eps"));
  m.def("convex_bump", &convex_bump, py::arg("hyperplanes"), py::arg("eps"));
  m.def("convex_indicator_axes", &convex_indicator_axes, py::arg("dim"),
        py::arg("offsets"), py::arg("eps"));
  m.def("hull_composite", &hull_composite, py::arg("region"), py::arg("eps"),
        py::arg("max_recursion") = 4);
  m.def(
      "decomposition_composite",
      [](const SimplePolygon& region, double eps) {
        return decomposition_composite(convex_decomposition_2d(region), eps);
      },
      py::arg("region"), py::arg("eps"));

  m.def(
      "polygonalize_circle_inscribed",
      [](std::pair<double, double> center, double radius, std::size_t n) {
        return polygonalize_circle_inscribed({center.first, center.second},
                                             radius, n);
      },
      py::arg("center"), py::arg("radius"), py::arg("n"));
  m.def("hshape_fixture", &hshape_fixture);

  m.def("slice_network", &slice_network, py::arg("network"),
        py::arg("fixed_coords"), py::arg("fixed_values"));
  m.def("normalize_first_layer", &normalize_first_layer, py::arg("network"));
  m.def("first_layer_breaklines", &first_layer_breaklines, py::arg("network"));

  m.def(
      "save_network",
      [](const ReluNetwork& net, const std::string& path) {
        io::save_network(net, path);
      },
      py::arg("network"), py::arg("path"));
  m.def(
      "load_network",
      [](const std::string& path) { return io::load_network(path); },
      py::arg("path"));
}
