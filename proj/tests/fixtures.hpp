#pragma once

#include <memory>

#include "covfam/grid.hpp"
#include "oracles.hpp"

namespace covfam::testing {

/// Anchors Y_ij = base + spread * noise_ij on an evenly labelled grid.
inline std::shared_ptr<const AnchorGrid> random_grid(Index nodes1, Index nodes2, Index n, Index r,
                                                     std::uint64_t seed, double spread = 1.0) {
  const DenseMatrix base = oracle::gaussian(n, r, seed);
  std::vector<FactorPoint> anchors;
  for (Index k = 0; k < nodes1 * nodes2; ++k) {
    anchors.emplace_back(base + spread * oracle::gaussian(n, r, seed * 1000 + 17 + k));
  }
  std::vector<double> theta;
  std::vector<double> w;
  for (Index i = 0; i < nodes1; ++i) theta.push_back(2.0 * static_cast<double>(i));
  for (Index j = 0; j < nodes2; ++j) w.push_back(4.0 + 3.0 * static_cast<double>(j));
  return std::make_shared<const AnchorGrid>(nodes1, nodes2, std::move(anchors), theta, w);
}

/// Same grid with every anchor replaced by a rotated representative.
inline std::shared_ptr<const AnchorGrid> rotated(const AnchorGrid& grid, std::uint64_t seed) {
  std::vector<FactorPoint> anchors;
  for (std::size_t k = 0; k < grid.anchors().size(); ++k) {
    anchors.emplace_back(grid.anchors()[k].y() * oracle::random_orthogonal(grid.r(), seed + k));
  }
  std::vector<double> theta;
  std::vector<double> w;
  for (Index i = 0; i < grid.nodes1(); ++i) theta.push_back(grid.theta(i));
  for (Index j = 0; j < grid.nodes2(); ++j) w.push_back(grid.w(j));
  return std::make_shared<const AnchorGrid>(grid.nodes1(), grid.nodes2(), std::move(anchors), theta, w);
}

}  // namespace covfam::testing
