#include "stepnet/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace stepnet::io {

namespace {

using nlohmann::ordered_json;

void dump17(const ordered_json& j, std::string& out) {
  switch (j.type()) {
    case ordered_json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += ordered_json(it.key()).dump();
        out += ':';
        dump17(it.value(), out);
      }
      out += '}';
      break;
    }
    case ordered_json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        dump17(j[i], out);
      }
      out += ']';
      break;
    }
    case ordered_json::value_t::number_float:
      out += format17(j.get<double>());
      break;
    default:
      out += j.dump();
      break;
  }
}

ordered_json parse_file(const std::filesystem::path& path) {
  return ordered_json::parse(read_text(path));
}

ordered_json box_json(const Box& box) {
  return ordered_json{{"lo", box.lo}, {"hi", box.hi}};
}

Box box_from_json(const ordered_json& j) {
  return Box(j.at("lo").get<std::vector<double>>(),
             j.at("hi").get<std::vector<double>>());
}

ordered_json hyperplanes_json(const std::vector<Hyperplane>& hs) {
  ordered_json normals = ordered_json::array();
  ordered_json offsets = ordered_json::array();
  for (const auto& h : hs) {
    normals.push_back(h.normal());
    offsets.push_back(h.offset());
  }
  return ordered_json{{"normals", std::move(normals)}, {"offsets", std::move(offsets)}};
}

std::vector<Hyperplane> hyperplanes_from_json(const ordered_json& j) {
  const auto& normals = j.at("normals");
  const auto& offsets = j.at("offsets");
  if (normals.size() != offsets.size())
    throw std::runtime_error("geometry file: normals/offsets length mismatch");
  std::vector<Hyperplane> hs;
  hs.reserve(normals.size());
  for (std::size_t i = 0; i < normals.size(); ++i)
    hs.emplace_back(normals[i].get<std::vector<double>>(), offsets[i].get<double>());
  return hs;
}

ordered_json layer_json(const AffineLayer& layer) {
  ordered_json j;
  j["rows"] = layer.rows();
  j["cols"] = layer.cols();
  if (layer.storage() == Storage::Dense) {
    j["storage"] = "dense";
    j["weights"] = layer.dense_weights();
  } else {
    j["storage"] = "sparse";
    ordered_json entries = ordered_json::array();
    const auto& offs = layer.row_offsets();
    const auto& cols = layer.col_indices();
    const auto& vals = layer.values();
    for (std::size_t r = 0; r + 1 < offs.size(); ++r)
      for (std::size_t k = offs[r]; k < offs[r + 1]; ++k)
        entries.push_back(ordered_json::array({r, cols[k], vals[k]}));
    j["entries"] = std::move(entries);
  }
  j["biases"] = layer.bias();
  return j;
}

AffineLayer layer_from_json(const ordered_json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  auto bias = j.at("biases").get<std::vector<double>>();
  const std::string storage = j.at("storage").get<std::string>();
  if (storage == "dense")
    return AffineLayer::dense(rows, cols, j.at("weights").get<std::vector<double>>(),
                              std::move(bias));
  if (storage != "sparse")
    throw std::runtime_error("network file: unknown storage '" + storage + "'");
  const auto& entries = j.at("entries");
  // Counting pass tolerates any row order; within a row, file order is kept.
  std::vector<std::size_t> offs(rows + 1, 0);
  for (const auto& e : entries) offs.at(e.at(0).get<std::size_t>() + 1)++;
  for (std::size_t r = 0; r < rows; ++r) offs[r + 1] += offs[r];
  std::vector<std::size_t> cursor(offs.begin(), offs.end() - 1);
  std::vector<std::size_t> cidx(entries.size());
  std::vector<double> vals(entries.size());
  for (const auto& e : entries) {
    const auto r = e.at(0).get<std::size_t>();
    const auto k = cursor[r]++;
    cidx[k] = e.at(1).get<std::size_t>();
    vals[k] = e.at(2).get<double>();
  }
  return AffineLayer::sparse(rows, cols, std::move(offs), std::move(cidx),
                             std::move(vals), std::move(bias));
}

std::string format9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// The two points where a line meets the box boundary (2D), or empty when it
// misses. Corner touches are deduplicated; the farthest pair wins.
std::vector<Vec2> clip_line_to_box(const Hyperplane& h, const Box& box) {
  const Vec2 c0{box.lo[0], box.lo[1]}, c1{box.hi[0], box.lo[1]};
  const Vec2 c2{box.hi[0], box.hi[1]}, c3{box.lo[0], box.hi[1]};
  const Vec2 corners[4] = {c0, c1, c2, c3};
  const double scale = std::max(box.hi[0] - box.lo[0], box.hi[1] - box.lo[1]);
  const double tol = 1e-12 * scale;
  std::vector<Vec2> hits;
  auto push = [&](Vec2 p) {
    for (const auto& q : hits)
      if (norm(p - q) <= tol) return;
    hits.push_back(p);
  };
  for (int i = 0; i < 4; ++i) {
    const Vec2 a = corners[i], b = corners[(i + 1) % 4];
    const double sa = h.signed_eval(a), sb = h.signed_eval(b);
    if (std::abs(sa) <= tol) push(a);
    if (std::abs(sb) <= tol) push(b);
    if ((sa < -tol && sb > tol) || (sa > tol && sb < -tol)) {
      const double t = sa / (sa - sb);
      push(a + t * (b - a));
    }
  }
  if (hits.size() < 2) return {};
  std::size_t bi = 0, bj = 1;
  double best = -1.0;
  for (std::size_t i = 0; i < hits.size(); ++i)
    for (std::size_t j = i + 1; j < hits.size(); ++j)
      if (norm(hits[i] - hits[j]) > best) {
        best = norm(hits[i] - hits[j]);
        bi = i;
        bj = j;
      }
  if (best <= tol) return {};
  return {hits[bi], hits[bj]};
}

}  // namespace

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string dump_json17(const nlohmann::ordered_json& j) {
  std::string out;
  dump17(j, out);
  out += '\n';
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void save_network(const ReluNetwork& net, const std::filesystem::path& path) {
  ordered_json j;
  j["type"] = "relu-network";
  j["shape"] = ordered_json::array(
      {net.input_dim(), net.width1(), net.width2(), std::size_t{1}});
  j["layers"] = ordered_json::array(
      {layer_json(net.layer1()), layer_json(net.layer2()), layer_json(net.layer3())});
  write_text(path, dump_json17(j));
}

ReluNetwork load_network(const std::filesystem::path& path) {
  const ordered_json j = parse_file(path);
  if (j.value("type", "") != "relu-network")
    throw std::runtime_error("not a network file: " + path.string());
  const auto& layers = j.at("layers");
  if (layers.size() != 3)
    throw std::runtime_error("network file must hold exactly three layers");
  return ReluNetwork(layer_from_json(layers[0]), layer_from_json(layers[1]),
                     layer_from_json(layers[2]));
}

void save_hyperplanes(const std::vector<Hyperplane>& hs, const Box& box,
                      const std::filesystem::path& path) {
  ordered_json j;
  j["type"] = "hyperplanes";
  j["dim"] = box.dim();
  j.update(hyperplanes_json(hs));
  j["box"] = box_json(box);
  write_text(path, dump_json17(j));
}

void save_polygon(const SimplePolygon& poly, const Box& box,
                  const std::filesystem::path& path) {
  ordered_json verts = ordered_json::array();
  for (const auto& v : poly.vertices())
    verts.push_back(ordered_json::array({v.x, v.y}));
  ordered_json j;
  j["type"] = "polygon";
  j["vertices"] = std::move(verts);
  j["box"] = box_json(box);
  write_text(path, dump_json17(j));
}

GeometryFile load_geometry(const std::filesystem::path& path) {
  const ordered_json j = parse_file(path);
  const std::string type = j.value("type", "");
  GeometryFile out;
  if (j.contains("box")) out.box = box_from_json(j.at("box"));
  if (type == "hyperplanes") {
    out.hyperplanes = hyperplanes_from_json(j);
  } else if (type == "polygon") {
    std::vector<Vec2> verts;
    for (const auto& v : j.at("vertices"))
      verts.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    out.polygon = SimplePolygon::from_vertices(std::move(verts));
  } else {
    throw std::runtime_error("unknown geometry type '" + type + "' in " + path.string());
  }
  return out;
}

std::uint64_t geometry_digest(const std::vector<Hyperplane>& hs) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  auto feed = [&h](const std::string& s) {
    for (const unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (const auto& plane : hs) {
    for (const double w : plane.normal()) {
      feed(format17(w));
      feed(",");
    }
    feed("|");
    feed(format17(plane.offset()));
    feed(";");
  }
  return h;
}

nlohmann::ordered_json construction_json(const ConstructionReport& report) {
  ordered_json j;
  j["method"] = report.method;
  j["eps"] = report.epsilon;
  j["shape"] = report.shape;
  {
    std::vector<Hyperplane> all_faces;
    for (const auto& part : report.parts)
      all_faces.insert(all_faces.end(), part.faces.begin(), part.faces.end());
    char digest[24];
    std::snprintf(digest, sizeof digest, "0x%016llx",
                  static_cast<unsigned long long>(geometry_digest(all_faces)));
    j["geometry_digest"] = digest;
  }
  ordered_json parts = ordered_json::array();
  for (const auto& part : report.parts)
    parts.push_back(ordered_json{
        {"role", part.role},
        {"faces", part.faces.size()},
        {"topology", part.topology == ChainTopology::Open ? "open" : "closed"},
        {"coeff", part.coeff}});
  j["parts"] = std::move(parts);
  ordered_json slabs = ordered_json::array();
  for (const auto& slab : report.slabs)
    slabs.push_back(ordered_json{{"between", slab.between},
                                 {"normal", slab.face.normal()},
                                 {"offset", slab.face.offset()},
                                 {"a", ordered_json::array({slab.a.x, slab.a.y})},
                                 {"b", ordered_json::array({slab.b.x, slab.b.y})}});
  j["slabs"] = std::move(slabs);
  return j;
}

GridField sample_field(const ReluNetwork& net, const Box& box,
                       const std::vector<std::size_t>& resolution,
                       const std::vector<std::size_t>& slice_coords,
                       const std::vector<double>& slice_values, unsigned threads) {
  const std::size_t d = box.dim();
  if (net.input_dim() != d)
    throw std::invalid_argument("sample_field: network/box dimension mismatch");
  if (slice_coords.size() != slice_values.size())
    throw std::invalid_argument("sample_field: slice coords/values length mismatch");
  if (!std::is_sorted(slice_coords.begin(), slice_coords.end()) ||
      std::adjacent_find(slice_coords.begin(), slice_coords.end()) != slice_coords.end())
    throw std::invalid_argument("sample_field: slice coordinates must be sorted and unique");
  std::vector<std::size_t> free_axes;
  for (std::size_t i = 0; i < d; ++i)
    if (!std::binary_search(slice_coords.begin(), slice_coords.end(), i))
      free_axes.push_back(i);
  if (resolution.size() != free_axes.size())
    throw std::invalid_argument("sample_field: one resolution entry per free axis");
  std::size_t total = 1;
  for (const std::size_t r : resolution) {
    if (r == 0) throw std::invalid_argument("sample_field: zero resolution");
    total *= r;
  }

  std::vector<double> base(d, 0.0);
  for (std::size_t k = 0; k < slice_coords.size(); ++k) {
    const std::size_t c = slice_coords[k];
    base[c] = slice_values[k];
    if (slice_values[k] < box.lo[c] || slice_values[k] > box.hi[c])
      throw std::invalid_argument("sample_field: slice value outside the box");
  }

  GridField field;
  field.box = box;
  field.resolution = resolution;
  field.slice_coords = slice_coords;
  field.slice_values = slice_values;
  field.values.resize(total);

  const std::size_t chunk = std::max<std::size_t>(1, (std::size_t(1) << 22) / std::max<std::size_t>(1, d));
  std::vector<double> pts;
  for (std::size_t begin = 0; begin < total; begin += chunk) {
    const std::size_t count = std::min(chunk, total - begin);
    pts.assign(count * d, 0.0);
    for (std::size_t i = 0; i < count; ++i) {
      double* row = pts.data() + i * d;
      std::copy(base.begin(), base.end(), row);
      std::size_t rem = begin + i;  // first free axis varies fastest
      for (std::size_t k = 0; k < free_axes.size(); ++k) {
        const std::size_t idx = rem % resolution[k];
        rem /= resolution[k];
        const std::size_t ax = free_axes[k];
        const double step = (box.hi[ax] - box.lo[ax]) / static_cast<double>(resolution[k]);
        row[ax] = box.lo[ax] + (static_cast<double>(idx) + 0.5) * step;
      }
    }
    const std::vector<double> vals = net.eval_batch(pts, count, threads);
    std::copy(vals.begin(), vals.end(), field.values.begin() + static_cast<std::ptrdiff_t>(begin));
  }
  return field;
}

void save_field(const GridField& field, const std::filesystem::path& path) {
  ordered_json header;
  header["type"] = "field";
  header["box"] = box_json(field.box);
  header["resolution"] = field.resolution;
  header["slice_coords"] = field.slice_coords;
  header["slice_values"] = field.slice_values;
  std::string out = dump_json17(header);  // one line, trailing newline
  const std::size_t per_line = field.resolution.empty() ? 1 : field.resolution[0];
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    out += format17(field.values[i]);
    out += ((i + 1) % per_line == 0) ? '\n' : ' ';
  }
  write_text(path, out);
}

GridField load_field(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const std::size_t nl = text.find('\n');
  if (nl == std::string::npos) throw std::runtime_error("field file: missing header line");
  const ordered_json header = ordered_json::parse(text.substr(0, nl));
  if (header.value("type", "") != "field")
    throw std::runtime_error("not a field file: " + path.string());
  GridField field;
  field.box = box_from_json(header.at("box"));
  field.resolution = header.at("resolution").get<std::vector<std::size_t>>();
  field.slice_coords = header.at("slice_coords").get<std::vector<std::size_t>>();
  field.slice_values = header.at("slice_values").get<std::vector<double>>();
  std::size_t total = 1;
  for (const std::size_t r : field.resolution) total *= r;
  field.values.reserve(total);
  const char* s = text.c_str() + nl + 1;
  char* end = nullptr;
  while (true) {
    const double v = std::strtod(s, &end);
    if (end == s) break;
    field.values.push_back(v);
    s = end;
  }
  if (field.values.size() != total)
    throw std::runtime_error("field file: value count does not match resolution");
  return field;
}

void save_breaklines(const BreaklinesFile& doc, const std::filesystem::path& path) {
  ordered_json j;
  j["type"] = "breaklines";
  j["box"] = box_json(doc.box);
  j["first_layer"] = hyperplanes_json(doc.first_layer);
  ordered_json second = ordered_json::array();
  for (const auto& segs : doc.second_layer) {
    ordered_json unit = ordered_json::array();
    for (const auto& s : segs)
      unit.push_back(ordered_json{{"a", ordered_json::array({s.a.x, s.a.y})},
                                  {"b", ordered_json::array({s.b.x, s.b.y})},
                                  {"cell", s.cell}});
    second.push_back(std::move(unit));
  }
  j["second_layer"] = std::move(second);
  ordered_json degen = ordered_json::array();
  for (const auto& [neuron, cell] : doc.degenerate)
    degen.push_back(ordered_json::array({neuron, cell}));
  j["degenerate"] = std::move(degen);
  write_text(path, dump_json17(j));
}

BreaklinesFile load_breaklines(const std::filesystem::path& path) {
  const ordered_json j = parse_file(path);
  if (j.value("type", "") != "breaklines")
    throw std::runtime_error("not a breaklines file: " + path.string());
  BreaklinesFile doc;
  doc.box = box_from_json(j.at("box"));
  doc.first_layer = hyperplanes_from_json(j.at("first_layer"));
  for (const auto& unit : j.at("second_layer")) {
    std::vector<BreakSegment> segs;
    for (const auto& s : unit)
      segs.push_back({{s.at("a").at(0).get<double>(), s.at("a").at(1).get<double>()},
                      {s.at("b").at(0).get<double>(), s.at("b").at(1).get<double>()},
                      s.at("cell").get<std::size_t>()});
    doc.second_layer.push_back(std::move(segs));
  }
  for (const auto& e : j.at("degenerate"))
    doc.degenerate.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
  return doc;
}

std::string error_csv(const std::vector<ErrorCsvRow>& rows) {
  std::string out = "scenario,p,eps,method,estimate,ci,bound,pass\n";
  for (const auto& r : rows) {
    out += r.scenario;
    out += ',';
    out += format17(r.p);
    out += ',';
    out += format17(r.eps);
    out += ',';
    out += r.method;
    out += ',';
    out += format17(r.estimate);
    out += ',';
    out += format17(r.ci);
    out += ',';
    if (r.bound) out += format17(*r.bound);
    out += ',';
    if (r.pass) out += (*r.pass ? "pass" : "fail");
    out += '\n';
  }
  return out;
}

void save_error_csv(const std::vector<ErrorCsvRow>& rows,
                    const std::filesystem::path& path) {
  write_text(path, error_csv(rows));
}

std::vector<ErrorCsvRow> load_error_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || line != "scenario,p,eps,method,estimate,ci,bound,pass")
    throw std::runtime_error("error csv: bad header in " + path.string());
  std::vector<ErrorCsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i)
      if (i == line.size() || line[i] == ',') {
        cells.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    if (cells.size() != 8)
      throw std::runtime_error("error csv: expected 8 columns, got line '" + line + "'");
    ErrorCsvRow r;
    r.scenario = cells[0];
    r.p = std::stod(cells[1]);
    r.eps = std::stod(cells[2]);
    r.method = cells[3];
    r.estimate = std::stod(cells[4]);
    r.ci = std::stod(cells[5]);
    if (!cells[6].empty()) r.bound = std::stod(cells[6]);
    if (!cells[7].empty()) r.pass = (cells[7] == "pass");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string render_field_svg(const GridField& field) {
  if (field.resolution.size() != 2)
    throw std::invalid_argument("render_field_svg: need a 2D field (or slice)");
  const std::size_t w = field.resolution[0], h = field.resolution[1];
  double vmin = field.values[0], vmax = field.values[0];
  for (const double v : field.values) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  const double span = (vmax - vmin) > 0 ? (vmax - vmin) : 1.0;
  std::vector<int> level(field.values.size());
  for (std::size_t i = 0; i < field.values.size(); ++i)
    level[i] = static_cast<int>(std::lround(255.0 * (field.values[i] - vmin) / span));

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
         std::to_string(w) + " " + std::to_string(h) +
         "\" shape-rendering=\"crispEdges\">\n";
  auto row_equal = [&](std::size_t r1, std::size_t r2) {
    return std::equal(level.begin() + static_cast<std::ptrdiff_t>(r1 * w),
                      level.begin() + static_cast<std::ptrdiff_t>((r1 + 1) * w),
                      level.begin() + static_cast<std::ptrdiff_t>(r2 * w));
  };
  static const char* hex = "0123456789abcdef";
  for (std::size_t iy = 0; iy < h;) {
    std::size_t run_rows = 1;
    while (iy + run_rows < h && row_equal(iy, iy + run_rows)) ++run_rows;
    const std::size_t y_top = h - iy - run_rows;  // value rows grow upward
    for (std::size_t ix = 0; ix < w;) {
      const int lv = level[iy * w + ix];
      std::size_t run = 1;
      while (ix + run < w && level[iy * w + ix + run] == lv) ++run;
      char color[8] = {'#', hex[(lv >> 4) & 15], hex[lv & 15],
                       hex[(lv >> 4) & 15], hex[lv & 15],
                       hex[(lv >> 4) & 15], hex[lv & 15], '\0'};
      out += "<rect x=\"" + std::to_string(ix) + "\" y=\"" + std::to_string(y_top) +
             "\" width=\"" + std::to_string(run) + "\" height=\"" +
             std::to_string(run_rows) + "\" fill=\"" + color + "\"/>\n";
      ix += run;
    }
    iy += run_rows;
  }
  out += "</svg>\n";
  return out;
}

std::string render_breaklines_svg(const BreaklinesFile& doc) {
  if (doc.box.dim() != 2)
    throw std::invalid_argument("render_breaklines_svg: need a 2D box");
  const Box& box = doc.box;
  const double sx = box.hi[0] - box.lo[0], sy = box.hi[1] - box.lo[1];
  const double margin = 0.04 * std::max(sx, sy);
  const double flip = box.lo[1] + box.hi[1];  // y -> flip - y (SVG y axis points down)
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" +
         format9(box.lo[0] - margin) + " " + format9(box.lo[1] - margin) + " " +
         format9(sx + 2 * margin) + " " + format9(sy + 2 * margin) + "\">\n";
  const std::string w_box = format9(0.004 * std::max(sx, sy));
  const std::string w_first = format9(0.006 * std::max(sx, sy));
  const std::string w_second = format9(0.009 * std::max(sx, sy));
  out += "<rect x=\"" + format9(box.lo[0]) + "\" y=\"" + format9(box.lo[1]) +
         "\" width=\"" + format9(sx) + "\" height=\"" + format9(sy) +
         "\" fill=\"#ffffff\" stroke=\"#000000\" stroke-width=\"" + w_box + "\"/>\n";
  auto line_elem = [&](Vec2 a, Vec2 b, const std::string& stroke, const std::string& width) {
    return "<line x1=\"" + format9(a.x) + "\" y1=\"" + format9(flip - a.y) +
           "\" x2=\"" + format9(b.x) + "\" y2=\"" + format9(flip - b.y) +
           "\" stroke=\"" + stroke + "\" stroke-width=\"" + width +
           "\" stroke-linecap=\"round\"/>\n";
  };
  for (const auto& hline : doc.first_layer) {
    const auto ends = clip_line_to_box(hline, box);
    if (ends.size() == 2) out += line_elem(ends[0], ends[1], "#3366cc", w_first);
  }
  for (const auto& segs : doc.second_layer)
    for (const auto& s : segs) out += line_elem(s.a, s.b, "#cc3333", w_second);
  out += "</svg>\n";
  return out;
}

}  // namespace stepnet::io
