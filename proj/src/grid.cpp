#include "covfam/grid.hpp"

#include <algorithm>
#include <cmath>

#include "covfam/errors.hpp"

namespace covfam {

LabelMap::LabelMap(double theta_offset, double theta_scale, double w_offset, double w_scale)
    : theta_offset_(theta_offset), theta_scale_(theta_scale), w_offset_(w_offset), w_scale_(w_scale) {}

LabelMap LabelMap::from_ranges(double theta_min, double theta_max, Index patches1, double w_min,
                               double w_max, Index patches2) {
  auto axis_scale = [](double lo, double hi, Index patches) {
    if (patches == 0) {
      return 0.0;
    }
    if (!(hi > lo)) {
      throw Error(ErrorCode::kInvalidArgument, "label range must be increasing");
    }
    return static_cast<double>(patches) / (hi - lo);
  };
  return LabelMap(theta_min, axis_scale(theta_min, theta_max, patches1), w_min,
                  axis_scale(w_min, w_max, patches2));
}

std::array<double, 2> LabelMap::to_params(double theta, double w) const {
  return {theta_scale_ * (theta - theta_offset_), w_scale_ * (w - w_offset_)};
}

std::array<double, 2> LabelMap::to_labels(double t1, double t2) const {
  const double theta = theta_scale_ != 0.0 ? theta_offset_ + t1 / theta_scale_ : theta_offset_;
  const double w = w_scale_ != 0.0 ? w_offset_ + t2 / w_scale_ : w_offset_;
  return {theta, w};
}

AnchorGrid::AnchorGrid(Index nodes1, Index nodes2, std::vector<FactorPoint> anchors,
                       std::vector<double> theta, std::vector<double> w)
    : nodes1_(nodes1), nodes2_(nodes2), anchors_(std::move(anchors)), theta_(std::move(theta)),
      w_(std::move(w)) {
  if (nodes1_ < 2 || nodes2_ < 1) {
    throw Error(ErrorCode::kInvalidArgument, "grid needs at least two nodes along t1");
  }
  if (static_cast<Index>(anchors_.size()) != nodes1_ * nodes2_ ||
      static_cast<Index>(theta_.size()) != nodes1_ || static_cast<Index>(w_.size()) != nodes2_) {
    throw Error(ErrorCode::kShapeMismatch, "anchor or label count does not match the grid shape");
  }
  for (const auto& a : anchors_) {
    if (a.n() != anchors_.front().n() || a.r() != anchors_.front().r()) {
      throw Error(ErrorCode::kShapeMismatch, "anchors differ in n or r");
    }
  }
  auto increasing = [](const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return !(b > a); }) ==
           v.end();
  };
  if (!increasing(theta_) || !increasing(w_)) {
    throw Error(ErrorCode::kInvalidArgument, "labels must be strictly increasing along each axis");
  }

  label_map_ = LabelMap::from_ranges(theta_.front(), theta_.back(), patches1(), w_.front(),
                                     w_.back(), patches2());
  for (Index i = 0; i < nodes1_; ++i) {
    const double t1 = label_map_.to_params(theta_[i], w_.front())[0];
    if (std::abs(t1 - static_cast<double>(i)) > 1e-9 * (1.0 + static_cast<double>(i))) {
      throw Error(ErrorCode::kInvalidArgument, "theta labels are not evenly spaced");
    }
  }
  for (Index j = 0; j < nodes2_; ++j) {
    const double t2 = label_map_.to_params(theta_.front(), w_[j])[1];
    if (std::abs(t2 - static_cast<double>(j)) > 1e-9 * (1.0 + static_cast<double>(j))) {
      throw Error(ErrorCode::kInvalidArgument, "w labels are not evenly spaced");
    }
  }
}

PatchIndex AnchorGrid::locate(double t1, double t2) const {
  auto axis = [](double t, Index patches) -> Index {
    if (patches <= 0) {
      return 0;
    }
    const double f = std::floor(t);
    if (!(f >= 0.0)) {
      return 0;
    }
    return std::min<Index>(static_cast<Index>(f), patches - 1);
  };
  return {axis(t1, patches1()), axis(t2, patches2())};
}

bool AnchorGrid::in_domain(double t1, double t2) const {
  const double eps = 1e-12;
  return t1 >= -eps && t1 <= static_cast<double>(patches1()) + eps && t2 >= -eps &&
         t2 <= static_cast<double>(patches2()) + eps;
}

}  // namespace covfam
