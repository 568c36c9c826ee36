#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "covfam/grid.hpp"

namespace covfam {

/// Physical labels attached to a stored factor.
struct FactorLabel {
  double theta = 0.0;
  double w = 0.0;
};

/// A factor on disk: `<stem>.json` manifest next to `<stem>.bin`, which holds
/// n * r little-endian doubles in column-major order.
struct FactorFile {
  DenseMatrix factor;
  std::optional<FactorLabel> label;
};

/// Strips a trailing ".json" or ".bin" so either file of the pair can be named.
std::filesystem::path factor_stem(const std::filesystem::path& path);

void write_factor_file(const std::filesystem::path& path, const FactorFile& file);
FactorFile read_factor_file(const std::filesystem::path& path);

/// Grid manifest (grid.json) whose anchors are factor files relative to it.
struct GridManifest {
  Index nodes1 = 0;
  Index nodes2 = 0;
  struct Entry {
    Index i = 0;
    Index j = 0;
    double theta = 0.0;
    double w = 0.0;
    std::string path;  // stem relative to the manifest directory
  };
  std::vector<Entry> anchors;
  LabelMap label_map;
};

void write_grid_manifest(const std::filesystem::path& path, const GridManifest& manifest);
GridManifest read_grid_manifest(const std::filesystem::path& path);

/// Writes every anchor of `grid` as `<dir>/anchor_i_j` plus `<dir>/grid.json`.
void write_grid(const std::filesystem::path& dir, const AnchorGrid& grid);

/// Loads the manifest and all anchors it names.
AnchorGrid read_grid(const std::filesystem::path& manifest_path);

}  // namespace covfam
