#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "covfam/grid.hpp"

namespace covfam {

enum class SurfaceKind { kLinearSection, kLinearGeodesic, kBezierSection, kBezierGeodesic };

/// Where a sectional surface places its section: at the lower-left anchor,
/// at the arithmetic mean, or at the inductive mean of the relevant anchors.
enum class SectionPolicy { kOne, kArithm, kInductive };

const char* to_string(SurfaceKind kind);
const char* to_string(SectionPolicy policy);
SectionPolicy parse_section_policy(std::string_view text);

/// `ls:one`, `lg`, `bs:arithm`, `bg`, ...
struct MethodSpec {
  SurfaceKind kind = SurfaceKind::kLinearSection;
  SectionPolicy section = SectionPolicy::kOne;

  bool sectional() const {
    return kind == SurfaceKind::kLinearSection || kind == SurfaceKind::kBezierSection;
  }
  std::string name() const;
  static MethodSpec parse(std::string_view text);

  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

/// The eight variants compared in the benchmark.
std::vector<MethodSpec> all_methods();

/// Corners of one patch, keyed by their local (t1, t2) coordinate.
struct PatchCorners {
  const FactorPoint& c00;
  const FactorPoint& c01;
  const FactorPoint& c10;
  const FactorPoint& c11;
};

PatchCorners corners_of(const AnchorGrid& grid, PatchIndex patch);

FactorSample eval_geodesic_1p(const FactorPoint& a, const FactorPoint& b, double t);

/// Base of the per-patch section for the first-order sectional surface.
/// Mean policies use the order c00, c10, c01, c11.
FactorPoint patch_section_base(const PatchCorners& corners, SectionPolicy policy);

/// Bilinear interpolation of the corners projected on the policy's section.
FactorSample eval_ls_patch(const PatchCorners& corners, SectionPolicy policy, double t1, double t2);

/// Geodesics c00 -> c10 and c01 -> c11 at t1, joined by a geodesic in t2.
FactorSample eval_lg_patch(const PatchCorners& corners, double t1, double t2);

/// Factor with its partial derivatives in the two local coordinates.
struct FactorJet {
  DenseMatrix y;
  DenseMatrix d1;
  DenseMatrix d2;
};

// Cubic Bernstein basis and its derivative.
std::array<double, 4> bernstein3(double t);
std::array<double, 4> bernstein3_derivative(double t);

/// Linear map from node values to node derivatives of the natural cubic
/// spline through `nodes` equally spaced (unit step) samples.
DenseMatrix natural_spline_slopes(Index nodes);

/// 4 x 4 Bezier control net, entry (a, b) at index 4 * a + b; a runs along t1.
using ControlNet = std::array<DenseMatrix, 16>;

class LinearSectionSurface {
 public:
  struct Patch {
    DenseMatrix y00, y01, y10, y11;  // representatives on the patch section
  };

  LinearSectionSurface(std::shared_ptr<const AnchorGrid> grid, SectionPolicy policy);

  SectionPolicy policy() const { return policy_; }
  const Patch& patch(PatchIndex p) const { return patches_[index(p)]; }
  DenseMatrix local_factor(PatchIndex p, double u, double v) const;
  FactorJet local_jet(PatchIndex p, double u, double v) const;

 private:
  std::size_t index(PatchIndex p) const;

  std::shared_ptr<const AnchorGrid> grid_;
  SectionPolicy policy_;
  std::vector<Patch> patches_;
};

class LinearGeodesicSurface {
 public:
  struct Patch {
    DenseMatrix y00, y10;  // y10 aligned to y00
    DenseMatrix y01, y11;  // y11 aligned to y01
  };

  /// The t2-geodesic of a patch at fixed t1.
  struct Slice {
    DenseMatrix lower;      // Y_{1-2}(t1)
    DenseMatrix upper;      // Y_{3-4}(t1)
    PolarFactors polar;     // of lower^T upper
    DenseMatrix direction;  // upper Q^T - lower
  };

  explicit LinearGeodesicSurface(std::shared_ptr<const AnchorGrid> grid);

  const Patch& patch(PatchIndex p) const { return patches_[index(p)]; }
  Slice slice(PatchIndex p, double u) const;
  DenseMatrix local_factor(PatchIndex p, double u, double v) const;

  /// dQ/dt1 of the slice polar factor, from h Omega + Omega h = dM Q^T - Q dM^T.
  DenseMatrix polar_rate(PatchIndex p, double u, const Slice& s) const;

  /// Partial derivative of the factor with respect to t1 at (u, v).
  DenseMatrix partial_t1(PatchIndex p, double u, double v) const;

 private:
  std::size_t index(PatchIndex p) const;

  std::shared_ptr<const AnchorGrid> grid_;
  std::vector<Patch> patches_;
};

class BezierSectionSurface {
 public:
  BezierSectionSurface(std::shared_ptr<const AnchorGrid> grid, SectionPolicy policy);

  SectionPolicy policy() const { return policy_; }
  const FactorPoint& section_base() const { return base_; }
  const ControlNet& net(PatchIndex p) const { return nets_[index(p)]; }
  /// Anchor representatives on the global section, same order as the grid.
  const std::vector<DenseMatrix>& projected() const { return projected_; }

  DenseMatrix local_factor(PatchIndex p, double u, double v) const;
  FactorJet local_jet(PatchIndex p, double u, double v) const;

 private:
  std::size_t index(PatchIndex p) const;

  std::shared_ptr<const AnchorGrid> grid_;
  SectionPolicy policy_;
  FactorPoint base_;
  std::vector<DenseMatrix> projected_;
  std::vector<ControlNet> nets_;
};

class BezierGeodesicSurface {
 public:
  explicit BezierGeodesicSurface(std::shared_ptr<const AnchorGrid> grid);

  const ControlNet& net(PatchIndex p) const { return nets_[index(p)]; }

  /// Type-II reconstruction: four manifold cubic curves in t1, then one in t2.
  DenseMatrix local_factor(PatchIndex p, double u, double v) const;

 private:
  std::size_t index(PatchIndex p) const;

  std::shared_ptr<const AnchorGrid> grid_;
  std::vector<ControlNet> nets_;
};

/// Manifold de Casteljau evaluation of a cubic curve, each step a geodesic.
DenseMatrix geodesic_de_casteljau(const std::array<DenseMatrix, 4>& points, double t);

/// Patchwise two-parameter covariance function over an anchor grid.
/// Immutable after construction; evaluation is safe from many threads.
class CovarianceSurface {
 public:
  using Impl = std::variant<LinearSectionSurface, LinearGeodesicSurface, BezierSectionSurface,
                            BezierGeodesicSurface>;

  CovarianceSurface(std::shared_ptr<const AnchorGrid> grid, MethodSpec method, Impl impl);

  const MethodSpec& method() const { return method_; }
  SurfaceKind kind() const { return method_.kind; }
  const AnchorGrid& grid() const { return *grid_; }
  const std::shared_ptr<const AnchorGrid>& grid_ptr() const { return grid_; }
  const Impl& impl() const { return impl_; }

  /// Global coordinates in [0, N1] x [0, N2]; points outside extrapolate the
  /// nearest boundary patch.
  FactorSample evaluate(double t1, double t2) const;
  FactorSample evaluate_local(PatchIndex p, double u, double v) const;
  DenseMatrix local_factor(PatchIndex p, double u, double v) const;

 private:
  std::shared_ptr<const AnchorGrid> grid_;
  MethodSpec method_;
  Impl impl_;
};

CovarianceSurface build_surface(std::shared_ptr<const AnchorGrid> grid, const MethodSpec& method);
CovarianceSurface build_surface(const AnchorGrid& grid, const MethodSpec& method);

CovarianceSurface build_bezier_section(std::shared_ptr<const AnchorGrid> grid, SectionPolicy policy);
CovarianceSurface build_bezier_geodesic(std::shared_ptr<const AnchorGrid> grid);

}  // namespace covfam
