#pragma once

#include <array>
#include <vector>

#include "covfam/manifold.hpp"

namespace covfam {

/// Affine map between physical labels (theta, w) and surface parameters
/// (t1, t2), one axis at a time: t = scale * (label - offset).
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(double theta_offset, double theta_scale, double w_offset, double w_scale);

  /// Maps [theta_min, theta_max] onto [0, patches1] and [w_min, w_max] onto
  /// [0, patches2]. A zero patch count collapses that axis to t = 0.
  static LabelMap from_ranges(double theta_min, double theta_max, Index patches1, double w_min,
                              double w_max, Index patches2);

  std::array<double, 2> to_params(double theta, double w) const;
  std::array<double, 2> to_labels(double t1, double t2) const;

  double theta_offset() const { return theta_offset_; }
  double theta_scale() const { return theta_scale_; }
  double w_offset() const { return w_offset_; }
  double w_scale() const { return w_scale_; }

 private:
  double theta_offset_ = 0.0;
  double theta_scale_ = 1.0;
  double w_offset_ = 0.0;
  double w_scale_ = 1.0;
};

struct PatchIndex {
  Index l = 0;
  Index m = 0;

  friend bool operator==(const PatchIndex&, const PatchIndex&) = default;
};

/// (N1 + 1) x (N2 + 1) anchors A_{i,j}; i runs along t1 (theta), j along t2 (w).
/// A single column of nodes (N2 = 0) describes a one-parameter family.
class AnchorGrid {
 public:
  /// `anchors` is stored with j fastest: anchors[i * nodes2 + j] = A_{i,j}.
  /// Labels must be strictly increasing and evenly spaced so that the affine
  /// label map hits grid nodes exactly.
  AnchorGrid(Index nodes1, Index nodes2, std::vector<FactorPoint> anchors,
             std::vector<double> theta, std::vector<double> w);

  Index nodes1() const { return nodes1_; }
  Index nodes2() const { return nodes2_; }
  Index patches1() const { return nodes1_ - 1; }
  Index patches2() const { return nodes2_ > 1 ? nodes2_ - 1 : 0; }
  bool one_parameter() const { return nodes2_ == 1; }
  Index n() const { return anchors_.front().n(); }
  Index r() const { return anchors_.front().r(); }

  const FactorPoint& at(Index i, Index j) const { return anchors_[i * nodes2_ + j]; }
  const std::vector<FactorPoint>& anchors() const { return anchors_; }
  double theta(Index i) const { return theta_[i]; }
  double w(Index j) const { return w_[j]; }
  const LabelMap& label_map() const { return label_map_; }

  /// Patch containing (t1, t2): (floor t1, floor t2) clamped to the valid range,
  /// so the upper boundary belongs to the last patch.
  PatchIndex locate(double t1, double t2) const;

  bool in_domain(double t1, double t2) const;

 private:
  Index nodes1_;
  Index nodes2_;
  std::vector<FactorPoint> anchors_;
  std::vector<double> theta_;
  std::vector<double> w_;
  LabelMap label_map_;
};

}  // namespace covfam
