#include <cmath>

#include "covfam/errors.hpp"
#include "covfam/surfaces.hpp"

namespace covfam {

std::array<double, 4> bernstein3(double t) {
  const double s = 1.0 - t;
  return {s * s * s, 3.0 * t * s * s, 3.0 * t * t * s, t * t * t};
}

std::array<double, 4> bernstein3_derivative(double t) {
  const double s = 1.0 - t;
  return {-3.0 * s * s, 3.0 * s * s - 6.0 * t * s, 6.0 * t * s - 3.0 * t * t, 3.0 * t * t};
}

DenseMatrix natural_spline_slopes(Index nodes) {
  if (nodes < 1) {
    throw Error(ErrorCode::kInvalidArgument, "spline needs at least one node");
  }
  if (nodes == 1) {
    return DenseMatrix::Zero(1, 1);
  }
  // Unit-step cubic spline with vanishing second derivative at both ends:
  //   2 d_0 + d_1 = 3 (p_1 - p_0)
  //   d_{i-1} + 4 d_i + d_{i+1} = 3 (p_{i+1} - p_{i-1})
  //   d_{N-1} + 2 d_N = 3 (p_N - p_{N-1})
  const Index last = nodes - 1;
  DenseMatrix lhs = DenseMatrix::Zero(nodes, nodes);
  DenseMatrix rhs = DenseMatrix::Zero(nodes, nodes);
  lhs(0, 0) = 2.0;
  lhs(0, 1) = 1.0;
  rhs(0, 0) = -3.0;
  rhs(0, 1) = 3.0;
  for (Index i = 1; i < last; ++i) {
    lhs(i, i - 1) = 1.0;
    lhs(i, i) = 4.0;
    lhs(i, i + 1) = 1.0;
    rhs(i, i - 1) = -3.0;
    rhs(i, i + 1) = 3.0;
  }
  lhs(last, last - 1) = 1.0;
  lhs(last, last) = 2.0;
  rhs(last, last - 1) = -3.0;
  rhs(last, last) = 3.0;
  return lhs.partialPivLu().solve(rhs);
}

namespace {

/// Node value and its spline slopes, all expressed in one frame.
struct NodeJet {
  DenseMatrix value;
  DenseMatrix d1;
  DenseMatrix d2;
  DenseMatrix d12;
};

/// Fills the 2 x 2 block of control points next to one patch corner.
void place_corner(ControlNet& net, const NodeJet& node, int ci, int cj) {
  const double s1 = ci == 0 ? 1.0 : -1.0;
  const double s2 = cj == 0 ? 1.0 : -1.0;
  const int a0 = ci == 0 ? 0 : 3;
  const int a1 = ci == 0 ? 1 : 2;
  const int b0 = cj == 0 ? 0 : 3;
  const int b1 = cj == 0 ? 1 : 2;
  const DenseMatrix step1 = (s1 / 3.0) * node.d1;
  const DenseMatrix step2 = (s2 / 3.0) * node.d2;
  net[4 * a0 + b0] = node.value;
  net[4 * a1 + b0] = node.value + step1;
  net[4 * a0 + b1] = node.value + step2;
  net[4 * a1 + b1] = node.value + step1 + step2 + (s1 * s2 / 9.0) * node.d12;
}

/// Slopes at node (i, j) of the tensor natural spline through `values`
/// (indexed like the grid, j fastest).
NodeJet spline_jet(const std::vector<DenseMatrix>& values, const DenseMatrix& s1,
                   const DenseMatrix& s2, Index nodes2, Index i, Index j, DenseMatrix value) {
  const Index nodes1 = s1.rows();
  const Index rows = values.front().rows();
  const Index cols = values.front().cols();
  NodeJet jet{std::move(value), DenseMatrix::Zero(rows, cols), DenseMatrix::Zero(rows, cols),
              DenseMatrix::Zero(rows, cols)};
  for (Index k = 0; k < nodes1; ++k) {
    if (s1(i, k) != 0.0) {
      jet.d1 += s1(i, k) * values[k * nodes2 + j];
    }
  }
  for (Index l = 0; l < nodes2; ++l) {
    if (s2(j, l) != 0.0) {
      jet.d2 += s2(j, l) * values[i * nodes2 + l];
    }
  }
  for (Index k = 0; k < nodes1; ++k) {
    for (Index l = 0; l < nodes2; ++l) {
      const double w = s1(i, k) * s2(j, l);
      if (w != 0.0) {
        jet.d12 += w * values[k * nodes2 + l];
      }
    }
  }
  return jet;
}

std::vector<ControlNet> assemble_nets(const AnchorGrid& grid, const std::vector<NodeJet>& jets) {
  const Index nodes2 = grid.nodes2();
  std::vector<ControlNet> nets;
  nets.reserve(static_cast<std::size_t>(grid.patches1() * grid.patches2()));
  for (Index l = 0; l < grid.patches1(); ++l) {
    for (Index m = 0; m < grid.patches2(); ++m) {
      ControlNet net;
      for (int ci = 0; ci < 2; ++ci) {
        for (int cj = 0; cj < 2; ++cj) {
          place_corner(net, jets[(l + ci) * nodes2 + (m + cj)], ci, cj);
        }
      }
      nets.push_back(std::move(net));
    }
  }
  return nets;
}

FactorPoint global_section_base(const AnchorGrid& grid, SectionPolicy policy) {
  switch (policy) {
    case SectionPolicy::kOne:
      return grid.at(0, 0);
    case SectionPolicy::kArithm:
      return arithmetic_mean(grid.anchors(), grid.r());
    case SectionPolicy::kInductive: {
      const Index a = grid.nodes1() - 1;
      const Index b = grid.nodes2() - 1;
      const std::array<FactorPoint, 4> pts{grid.at(0, 0), grid.at(a, 0), grid.at(0, b),
                                           grid.at(a, b)};
      return inductive_mean(pts);
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown section policy");
}

void require_two_parameter(const AnchorGrid& grid) {
  if (grid.patches2() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "two-parameter surfaces need at least 2x2 nodes");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

BezierSectionSurface::BezierSectionSurface(std::shared_ptr<const AnchorGrid> grid,
                                           SectionPolicy policy)
    : grid_(std::move(grid)), policy_(policy), base_(global_section_base(*grid_, policy)) {
  require_two_parameter(*grid_);
  projected_.reserve(grid_->anchors().size());
  for (const auto& a : grid_->anchors()) {
    projected_.push_back(align_to(base_.y(), a.y()));
  }

  const DenseMatrix s1 = natural_spline_slopes(grid_->nodes1());
  const DenseMatrix s2 = natural_spline_slopes(grid_->nodes2());
  std::vector<NodeJet> jets;
  jets.reserve(projected_.size());
  for (Index i = 0; i < grid_->nodes1(); ++i) {
    for (Index j = 0; j < grid_->nodes2(); ++j) {
      jets.push_back(spline_jet(projected_, s1, s2, grid_->nodes2(), i, j,
                                projected_[i * grid_->nodes2() + j]));
    }
  }
  nets_ = assemble_nets(*grid_, jets);
}

std::size_t BezierSectionSurface::index(PatchIndex p) const {
  return static_cast<std::size_t>(p.l * grid_->patches2() + p.m);
}

DenseMatrix BezierSectionSurface::local_factor(PatchIndex p, double u, double v) const {
  const ControlNet& net = nets_[index(p)];
  const auto bu = bernstein3(u);
  const auto bv = bernstein3(v);
  DenseMatrix y = DenseMatrix::Zero(net[0].rows(), net[0].cols());
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      y += (bu[a] * bv[b]) * net[4 * a + b];
    }
  }
  return y;
}

FactorJet BezierSectionSurface::local_jet(PatchIndex p, double u, double v) const {
  const ControlNet& net = nets_[index(p)];
  const auto bu = bernstein3(u);
  const auto bv = bernstein3(v);
  const auto du = bernstein3_derivative(u);
  const auto dv = bernstein3_derivative(v);
  const Index rows = net[0].rows();
  const Index cols = net[0].cols();
  FactorJet jet{DenseMatrix::Zero(rows, cols), DenseMatrix::Zero(rows, cols),
                DenseMatrix::Zero(rows, cols)};
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const DenseMatrix& c = net[4 * a + b];
      jet.y += (bu[a] * bv[b]) * c;
      jet.d1 += (du[a] * bv[b]) * c;
      jet.d2 += (bu[a] * dv[b]) * c;
    }
  }
  return jet;
}

// ---------------------------------------------------------------------------

BezierGeodesicSurface::BezierGeodesicSurface(std::shared_ptr<const AnchorGrid> grid)
    : grid_(std::move(grid)) {
  require_two_parameter(*grid_);
  const Index nodes1 = grid_->nodes1();
  const Index nodes2 = grid_->nodes2();
  const DenseMatrix s1 = natural_spline_slopes(nodes1);
  const DenseMatrix s2 = natural_spline_slopes(nodes2);
  const auto& anchors = grid_->anchors();

  std::vector<NodeJet> jets;
  jets.reserve(anchors.size());
  for (Index i = 0; i < nodes1; ++i) {
    for (Index j = 0; j < nodes2; ++j) {
      // Every anchor seen from the tangent space at A_{i,j}.
      const FactorPoint& here = grid_->at(i, j);
      std::vector<DenseMatrix> tangent(anchors.size());
      for (std::size_t k = 0; k < anchors.size(); ++k) {
        tangent[k] = static_cast<Index>(k) == i * nodes2 + j
                         ? DenseMatrix::Zero(here.n(), here.r())
                         : log_map(here, anchors[k]);
      }
      NodeJet jet = spline_jet(tangent, s1, s2, nodes2, i, j, here.y());
      jets.push_back(std::move(jet));
    }
  }
  // exp_map at the anchor is translation of the factor, so the jets already
  // hold the control points' offsets from the anchor representative.
  nets_ = assemble_nets(*grid_, jets);
}

std::size_t BezierGeodesicSurface::index(PatchIndex p) const {
  return static_cast<std::size_t>(p.l * grid_->patches2() + p.m);
}

DenseMatrix geodesic_de_casteljau(const std::array<DenseMatrix, 4>& points, double t) {
  std::array<DenseMatrix, 4> level = points;
  for (int size = 3; size >= 1; --size) {
    for (int k = 0; k < size; ++k) {
      level[k] = level[k] + t * log_map(level[k], level[k + 1]);
    }
  }
  return level[0];
}

DenseMatrix BezierGeodesicSurface::local_factor(PatchIndex p, double u, double v) const {
  const ControlNet& net = nets_[index(p)];
  std::array<DenseMatrix, 4> along_t2;
  for (int b = 0; b < 4; ++b) {
    along_t2[b] = geodesic_de_casteljau({net[b], net[4 + b], net[8 + b], net[12 + b]}, u);
  }
  return geodesic_de_casteljau(along_t2, v);
}

// ---------------------------------------------------------------------------

CovarianceSurface build_bezier_section(std::shared_ptr<const AnchorGrid> grid,
                                       SectionPolicy policy) {
  BezierSectionSurface impl(grid, policy);
  return CovarianceSurface(std::move(grid), {SurfaceKind::kBezierSection, policy}, std::move(impl));
}

CovarianceSurface build_bezier_geodesic(std::shared_ptr<const AnchorGrid> grid) {
  BezierGeodesicSurface impl(grid);
  return CovarianceSurface(std::move(grid), {SurfaceKind::kBezierGeodesic, SectionPolicy::kOne},
                           std::move(impl));
}

}  // namespace covfam
