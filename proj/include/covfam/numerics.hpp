#pragma once

#include <Eigen/Dense>
#include <vector>

namespace covfam {

/// Column-major dense matrix of doubles. Every other module builds on it.
using DenseMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// M = H Q with H symmetric positive semidefinite and Q orthogonal.
struct PolarFactors {
  DenseMatrix h;
  DenseMatrix q;
};

/// Coefficients of a t^3 + b t^2 + c t + d.
struct CubicCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  double operator()(double t) const { return ((a * t + b) * t + c) * t + d; }
  double derivative(double t) const { return (3.0 * a * t + 2.0 * b) * t + c; }
  double discriminant() const;
};

bool all_finite(const DenseMatrix& m);

/// Throws kNonFinite if any entry is NaN or infinite.
void require_finite(const DenseMatrix& m, const char* what);

/// <a, b>_F = Tr(a^T b).
double frob_inner(const DenseMatrix& a, const DenseMatrix& b);

/// Polar decomposition m = h q through the SVD m = U S V^T (h = U S U^T, q = U V^T).
/// Throws kSingularInput when sigma_min(m) < 1e-14 sigma_max(m): the orthogonal
/// factor is then not unique.
PolarFactors polar_decompose(const DenseMatrix& m);

/// Factor Y (n x target_rank) of the best rank-target_rank approximation of m m^T.
/// Columns are ordered by decreasing singular value; the largest-magnitude
/// entry of each left singular vector is made positive.
/// Throws kRankDeficient if the target_rank-th singular value is below 1e-14 sigma_1.
DenseMatrix truncated_svd(const DenseMatrix& m, Index target_rank);

/// Distinct real roots in increasing order. Falls back to the quadratic or
/// linear case when the leading coefficients are negligible (relative 1e-14).
/// Throws kDegenerateCubic when only the constant term remains.
std::vector<double> cubic_real_roots(const CubicCoefficients& c);

/// Solves h X + X h = rhs for skew-symmetric X, h symmetric positive definite.
/// Throws kIllConditioned if lambda_min(h) < 1e-12 lambda_max(h).
DenseMatrix solve_sylvester_sym(const DenseMatrix& h, const DenseMatrix& rhs);

/// ||y y^T - z z^T||_F^2 in O(n (r + s)^2), never forming n x n products.
double frob_dist_sq_lowrank(const DenseMatrix& y, const DenseMatrix& z);

/// True when sigma_min(y) <= 1e-12 sigma_max(y) (or y has no columns / is zero).
bool is_rank_deficient(const DenseMatrix& y);

}  // namespace covfam
