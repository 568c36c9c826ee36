#include "covfam/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "covfam/errors.hpp"
#include "json.hpp"

namespace covfam {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFactorSchema = "covfam-factor/1";
constexpr const char* kGridSchema = "covfam-grid/1";

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, path.string() + ": " + e.what());
  }
}

template <class T>
T field(const json& j, const char* key, const fs::path& where) {
  if (!j.contains(key)) {
    throw Error(ErrorCode::kIo, where.string() + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, where.string() + ": field '" + key + "': " + e.what());
  }
}

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = __builtin_bswap64(v);
  }
  return v;
}

}  // namespace

fs::path factor_stem(const fs::path& path) {
  const auto ext = path.extension();
  if (ext == ".json" || ext == ".bin") {
    fs::path stem = path;
    return stem.replace_extension();
  }
  return path;
}

void write_factor_file(const fs::path& path, const FactorFile& file) {
  const fs::path stem = factor_stem(path);
  fs::path json_path = stem;
  json_path += ".json";
  fs::path bin_path = stem;
  bin_path += ".bin";

  json manifest = {{"schema", kFactorSchema},
                   {"n", file.factor.rows()},
                   {"r", file.factor.cols()},
                   {"dtype", "f64le"},
                   {"layout", "col-major"}};
  if (file.label) {
    manifest["label"] = {{"theta", file.label->theta}, {"w", file.label->w}};
  }
  write_text(json_path, manifest.dump(2) + "\n");

  std::string blob(static_cast<std::size_t>(file.factor.size()) * 8, '\0');
  const double* data = file.factor.data();  // Eigen default storage is column-major
  for (Index k = 0; k < file.factor.size(); ++k) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(data[k]));
    std::memcpy(blob.data() + 8 * k, &bits, 8);
  }
  write_text(bin_path, blob);
}

FactorFile read_factor_file(const fs::path& path) {
  const fs::path stem = factor_stem(path);
  fs::path json_path = stem;
  json_path += ".json";
  fs::path bin_path = stem;
  bin_path += ".bin";

  const json manifest = read_json(json_path);
  if (field<std::string>(manifest, "schema", json_path) != kFactorSchema) {
    throw Error(ErrorCode::kIo, json_path.string() + ": unsupported schema");
  }
  if (field<std::string>(manifest, "dtype", json_path) != "f64le" ||
      field<std::string>(manifest, "layout", json_path) != "col-major") {
    throw Error(ErrorCode::kIo, json_path.string() + ": unsupported dtype or layout");
  }
  const auto n = field<Index>(manifest, "n", json_path);
  const auto r = field<Index>(manifest, "r", json_path);
  if (n < 0 || r < 0) {
    throw Error(ErrorCode::kIo, json_path.string() + ": negative shape");
  }

  std::ifstream in(bin_path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open " + bin_path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string blob = buffer.str();
  if (blob.size() != static_cast<std::size_t>(8 * n * r)) {
    throw Error(ErrorCode::kIo, bin_path.string() + ": expected " + std::to_string(8 * n * r) +
                                    " bytes, found " + std::to_string(blob.size()));
  }

  FactorFile file;
  file.factor.resize(n, r);
  double* data = file.factor.data();
  for (Index k = 0; k < n * r; ++k) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, blob.data() + 8 * k, 8);
    data[k] = std::bit_cast<double>(to_little(bits));
  }
  if (manifest.contains("label") && !manifest["label"].is_null()) {
    const json& label = manifest["label"];
    file.label = FactorLabel{field<double>(label, "theta", json_path),
                             field<double>(label, "w", json_path)};
  }
  return file;
}

void write_grid_manifest(const fs::path& path, const GridManifest& manifest) {
  json anchors = json::array();
  for (const auto& e : manifest.anchors) {
    anchors.push_back({{"i", e.i}, {"j", e.j}, {"theta", e.theta}, {"w", e.w}, {"path", e.path}});
  }
  const LabelMap& m = manifest.label_map;
  const json doc = {{"schema", kGridSchema},
                    {"shape", {manifest.nodes1, manifest.nodes2}},
                    {"anchors", anchors},
                    {"label_map",
                     {{"theta_offset", m.theta_offset()},
                      {"theta_scale", m.theta_scale()},
                      {"w_offset", m.w_offset()},
                      {"w_scale", m.w_scale()}}}};
  write_text(path, doc.dump(2) + "\n");
}

GridManifest read_grid_manifest(const fs::path& path) {
  const json doc = read_json(path);
  if (field<std::string>(doc, "schema", path) != kGridSchema) {
    throw Error(ErrorCode::kIo, path.string() + ": unsupported schema");
  }
  GridManifest manifest;
  const auto shape = field<std::vector<Index>>(doc, "shape", path);
  if (shape.size() != 2 || shape[0] < 1 || shape[1] < 1) {
    throw Error(ErrorCode::kIo, path.string() + ": shape must be two positive counts");
  }
  manifest.nodes1 = shape[0];
  manifest.nodes2 = shape[1];

  const json anchors = field<json>(doc, "anchors", path);
  std::set<std::pair<Index, Index>> seen;
  for (const json& a : anchors) {
    GridManifest::Entry e;
    e.i = field<Index>(a, "i", path);
    e.j = field<Index>(a, "j", path);
    e.theta = field<double>(a, "theta", path);
    e.w = field<double>(a, "w", path);
    e.path = field<std::string>(a, "path", path);
    if (e.i < 0 || e.i >= manifest.nodes1 || e.j < 0 || e.j >= manifest.nodes2) {
      throw Error(ErrorCode::kIo, path.string() + ": anchor index out of range");
    }
    if (!seen.insert({e.i, e.j}).second) {
      throw Error(ErrorCode::kIo, path.string() + ": duplicate anchor index");
    }
    manifest.anchors.push_back(std::move(e));
  }
  if (static_cast<Index>(manifest.anchors.size()) != manifest.nodes1 * manifest.nodes2) {
    throw Error(ErrorCode::kIo, path.string() + ": anchor count does not match shape");
  }

  const json map = field<json>(doc, "label_map", path);
  manifest.label_map = LabelMap(field<double>(map, "theta_offset", path),
                                field<double>(map, "theta_scale", path),
                                field<double>(map, "w_offset", path), field<double>(map, "w_scale", path));
  return manifest;
}

void write_grid(const fs::path& dir, const AnchorGrid& grid) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  }
  GridManifest manifest;
  manifest.nodes1 = grid.nodes1();
  manifest.nodes2 = grid.nodes2();
  manifest.label_map = grid.label_map();
  for (Index i = 0; i < grid.nodes1(); ++i) {
    for (Index j = 0; j < grid.nodes2(); ++j) {
      const std::string stem = "anchor_" + std::to_string(i) + "_" + std::to_string(j);
      write_factor_file(dir / stem, {grid.at(i, j).y(), FactorLabel{grid.theta(i), grid.w(j)}});
      manifest.anchors.push_back({i, j, grid.theta(i), grid.w(j), stem});
    }
  }
  write_grid_manifest(dir / "grid.json", manifest);
}

AnchorGrid read_grid(const fs::path& manifest_path) {
  const GridManifest manifest = read_grid_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();

  std::vector<GridManifest::Entry> ordered(manifest.anchors.size());
  for (const auto& e : manifest.anchors) {
    ordered[static_cast<std::size_t>(e.i * manifest.nodes2 + e.j)] = e;
  }
  std::vector<double> theta(static_cast<std::size_t>(manifest.nodes1));
  std::vector<double> w(static_cast<std::size_t>(manifest.nodes2));
  std::vector<FactorPoint> anchors;
  anchors.reserve(ordered.size());
  for (const auto& e : ordered) {
    theta[static_cast<std::size_t>(e.i)] = e.theta;
    w[static_cast<std::size_t>(e.j)] = e.w;
    anchors.emplace_back(read_factor_file(base / e.path).factor);
  }
  return AnchorGrid(manifest.nodes1, manifest.nodes2, std::move(anchors), std::move(theta),
                    std::move(w));
}

}  // namespace covfam
