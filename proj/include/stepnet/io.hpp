#pragma once

// File formats: network/geometry/break-line documents (JSON with numbers at
// 17 significant digits, so doubles round-trip exactly), grid-field dumps
// (one-line JSON header + value rows), error CSV rows, and SVG rendering.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stepnet/breaklines.hpp"
#include "stepnet/construct.hpp"
#include "stepnet/geometry.hpp"
#include "stepnet/network.hpp"

namespace stepnet::io {

// printf("%.17g"): enough digits to reproduce the exact double on load.
std::string format17(double v);

// Serializes with every floating-point number in %.17g notation (nlohmann's
// own dump() is shortest-round-trip, which is exact too, but all files here
// share the one fixed convention). Appends a trailing newline.
std::string dump_json17(const nlohmann::ordered_json& j);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Networks

void save_network(const ReluNetwork& net, const std::filesystem::path& path);
ReluNetwork load_network(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Geometry documents (hyperplane sets and polygons)

struct GeometryFile {
  std::optional<Box> box;
  std::vector<Hyperplane> hyperplanes;
  std::optional<SimplePolygon> polygon;
};

void save_hyperplanes(const std::vector<Hyperplane>& hs, const Box& box,
                      const std::filesystem::path& path);
void save_polygon(const SimplePolygon& poly, const Box& box,
                  const std::filesystem::path& path);
GeometryFile load_geometry(const std::filesystem::path& path);

// FNV-1a of the 17-digit serialization; used in provenance blocks.
std::uint64_t geometry_digest(const std::vector<Hyperplane>& hs);

// Provenance block for a built network: method, eps, shape, a digest of all
// part faces, and the part/slab summaries.
nlohmann::ordered_json construction_json(const ConstructionReport& report);

// ---------------------------------------------------------------------------
// Grid fields

struct GridField {
  Box box;                                 // full ambient box of the network
  std::vector<std::size_t> resolution;     // per free axis
  std::vector<std::size_t> slice_coords;   // fixed coordinates (empty in 2D)
  std::vector<double> slice_values;
  std::vector<double> values;              // row-major over free axes
};

// Samples `net` at cell midpoints of the tensor grid over the free axes
// (all axes not fixed by slice_coords). Chunked so high-dimensional inputs
// never materialise the full point set.
GridField sample_field(const ReluNetwork& net, const Box& box,
                       const std::vector<std::size_t>& resolution,
                       const std::vector<std::size_t>& slice_coords = {},
                       const std::vector<double>& slice_values = {},
                       unsigned threads = 1);

void save_field(const GridField& field, const std::filesystem::path& path);
GridField load_field(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Break-line documents

struct BreaklinesFile {
  Box box;
  std::vector<Hyperplane> first_layer;
  std::vector<std::vector<BreakSegment>> second_layer;
  std::vector<std::pair<std::size_t, std::size_t>> degenerate;
};

void save_breaklines(const BreaklinesFile& doc, const std::filesystem::path& path);
BreaklinesFile load_breaklines(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Error CSV

struct ErrorCsvRow {
  std::string scenario;
  double p = 1.0;
  double eps = 0.0;
  std::string method;
  double estimate = 0.0;
  double ci = 0.0;
  std::optional<double> bound;  // norm-scale strip comparator, when known
  std::optional<bool> pass;
};

std::string error_csv(const std::vector<ErrorCsvRow>& rows);
void save_error_csv(const std::vector<ErrorCsvRow>& rows,
                    const std::filesystem::path& path);
std::vector<ErrorCsvRow> load_error_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Rendering (deterministic SVG text)

std::string render_field_svg(const GridField& field);
std::string render_breaklines_svg(const BreaklinesFile& doc);

}  // namespace stepnet::io
