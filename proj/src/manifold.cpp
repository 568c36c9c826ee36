#include "covfam/manifold.hpp"

#include <cmath>
#include <random>

#include "covfam/errors.hpp"

namespace covfam {

FactorPoint::FactorPoint(DenseMatrix y) : y_(std::move(y)) {
  require_finite(y_, "factor");
  if (is_rank_deficient(y_)) {
    throw Error(ErrorCode::kRankDeficient, "factor does not have full column rank");
  }
}

FactorSample make_sample(DenseMatrix y) {
  FactorSample s;
  s.degenerate = is_rank_deficient(y);
  s.y = std::move(y);
  return s;
}

DenseMatrix align_to(const DenseMatrix& base, const DenseMatrix& y) {
  if (base.rows() != y.rows() || base.cols() != y.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "factors differ in shape");
  }
  try {
    const PolarFactors polar = polar_decompose(base.transpose() * y);
    return y * polar.q.transpose();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSingularInput) {
      throw Error(ErrorCode::kCutLocus, "Gram product of the two factors is singular");
    }
    throw;
  }
}

DenseMatrix log_map(const DenseMatrix& from, const DenseMatrix& to) {
  return align_to(from, to) - from;
}

DenseMatrix log_map(const FactorPoint& from, const FactorPoint& to) {
  return log_map(from.y(), to.y());
}

FactorSample exp_map(const FactorPoint& base, const DenseMatrix& velocity, double t) {
  if (velocity.rows() != base.n() || velocity.cols() != base.r()) {
    throw Error(ErrorCode::kShapeMismatch, "velocity shape differs from base");
  }
  if (t == 0.0) {
    return {base.y(), false};
  }
  return make_sample(base.y() + t * velocity);
}

GeodesicSegment::GeodesicSegment(FactorPoint base, DenseMatrix velocity)
    : base_(std::move(base)), velocity_(std::move(velocity)) {
  if (velocity_.rows() != base_.n() || velocity_.cols() != base_.r()) {
    throw Error(ErrorCode::kShapeMismatch, "velocity shape differs from base");
  }
  require_finite(velocity_, "velocity");
}

FactorSample GeodesicSegment::evaluate(double t) const { return exp_map(base_, velocity_, t); }

GeodesicSegment geodesic(const FactorPoint& a, const FactorPoint& b) {
  return GeodesicSegment(a, log_map(a, b));
}

DenseMatrix Section::complement(std::uint64_t seed) const {
  const Index n = base_.n();
  const Index r = base_.r();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  DenseMatrix stacked(n, n);
  stacked.leftCols(r) = base_.y();
  for (Index j = r; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      stacked(i, j) = normal(rng);
    }
  }
  Eigen::HouseholderQR<DenseMatrix> qr(stacked);
  const DenseMatrix q = qr.householderQ();
  return q.rightCols(n - r);
}

bool Section::contains(const DenseMatrix& y, double tol) const {
  if (y.rows() != base_.n() || y.cols() != base_.r()) {
    return false;
  }
  const DenseMatrix g = base_.y().transpose() * y;
  const double scale = std::max(g.norm(), 1e-300);
  if ((g - g.transpose()).norm() > tol * scale) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0) > 0.0;
}

FactorPoint project_to_section(const Section& section, const FactorPoint& p) {
  return FactorPoint(align_to(section.base().y(), p.y()));
}

FactorPoint arithmetic_mean(std::span<const FactorPoint> points, Index rank) {
  if (points.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "mean of an empty set");
  }
  const Index n = points.front().n();
  Index cols = 0;
  for (const auto& p : points) {
    if (p.n() != n) {
      throw Error(ErrorCode::kShapeMismatch, "points differ in dimension");
    }
    cols += p.r();
  }
  DenseMatrix stacked(n, cols);
  const double w = 1.0 / std::sqrt(static_cast<double>(points.size()));
  Index offset = 0;
  for (const auto& p : points) {
    stacked.middleCols(offset, p.r()) = w * p.y();
    offset += p.r();
  }
  return FactorPoint(truncated_svd(stacked, rank));
}

FactorPoint inductive_mean(std::span<const FactorPoint> points) {
  if (points.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "mean of an empty set");
  }
  DenseMatrix mean = points.front().y();
  for (std::size_t k = 1; k < points.size(); ++k) {
    const double step = 1.0 / static_cast<double>(k + 1);
    mean = mean + step * log_map(mean, points[k].y());
  }
  return FactorPoint(std::move(mean));
}

}  // namespace covfam
