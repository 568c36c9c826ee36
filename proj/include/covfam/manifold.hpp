#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "covfam/numerics.hpp"

namespace covfam {

/// An n x r factor Y of full column rank, standing for the PSD matrix Y Y^T.
/// Any Y Q with Q orthogonal represents the same point.
class FactorPoint {
 public:
  /// Throws kNonFinite or kRankDeficient if y is not a valid representative.
  explicit FactorPoint(DenseMatrix y);

  const DenseMatrix& y() const { return y_; }
  Index n() const { return y_.rows(); }
  Index r() const { return y_.cols(); }

  /// The represented n x n matrix. Only meant for small n (tests, diagnostics).
  DenseMatrix matrix() const { return y_ * y_.transpose(); }

 private:
  DenseMatrix y_;
};

/// Result of evaluating a covariance function: a factor that may have lost
/// rank at isolated parameter values.
struct FactorSample {
  DenseMatrix y;
  bool degenerate = false;
};

FactorSample make_sample(DenseMatrix y);

/// y Q^T, where Q is the orthogonal polar factor of base^T y. This is the
/// representative of [y] in the section through base. Throws kCutLocus when
/// base^T y is singular.
DenseMatrix align_to(const DenseMatrix& base, const DenseMatrix& y);

/// Velocity of the geodesic from `from` to `to` in the frame of `from`.
DenseMatrix log_map(const DenseMatrix& from, const DenseMatrix& to);
DenseMatrix log_map(const FactorPoint& from, const FactorPoint& to);

/// base + t velocity. Never throws on rank loss; the sample is flagged instead.
FactorSample exp_map(const FactorPoint& base, const DenseMatrix& velocity, double t);

class GeodesicSegment {
 public:
  GeodesicSegment(FactorPoint base, DenseMatrix velocity);

  const FactorPoint& base() const { return base_; }
  const DenseMatrix& velocity() const { return velocity_; }

  FactorSample evaluate(double t) const;
  /// Factor only, without the rank check.
  DenseMatrix factor(double t) const { return base_.y() + t * velocity_; }

 private:
  FactorPoint base_;
  DenseMatrix velocity_;
};

/// Minimizing geodesic t -> (Y_a + t V)(Y_a + t V)^T with V = log_map(a, b).
GeodesicSegment geodesic(const FactorPoint& a, const FactorPoint& b);

/// Affine section of the quotient through a base factor. The orthonormal
/// complement is only built on request.
class Section {
 public:
  explicit Section(FactorPoint base) : base_(std::move(base)) {}

  const FactorPoint& base() const { return base_; }

  /// Orthonormal basis of the orthogonal complement of span(base), n x (n - r).
  DenseMatrix complement(std::uint64_t seed = 0) const;

  /// Section membership: base^T y symmetric and positive definite.
  bool contains(const DenseMatrix& y, double tol = 1e-10) const;

 private:
  FactorPoint base_;
};

FactorPoint project_to_section(const Section& section, const FactorPoint& p);

/// Best rank-`rank` factor of (1/k) sum_i Y_i Y_i^T.
FactorPoint arithmetic_mean(std::span<const FactorPoint> points, Index rank);

/// M_1 = A_1, M_k = geodesic(M_{k-1}, A_k) at 1/k, in the given order.
FactorPoint inductive_mean(std::span<const FactorPoint> points);

}  // namespace covfam
