// Independent reference computations used only by the tests. Nothing here
// calls into the library's numerical kernels.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Idx = Eigen::Index;

inline Mat gaussian(Idx rows, Idx cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Mat m(rows, cols);
  for (Idx c = 0; c < cols; ++c) {
    for (Idx r = 0; r < rows; ++r) {
      m(r, c) = normal(rng);
    }
  }
  return m;
}

/// y with zero columns appended up to `cols`.
inline Mat padded(const Mat& y, Idx cols) {
  Mat out = Mat::Zero(y.rows(), cols);
  out.leftCols(y.cols()) = y;
  return out;
}

inline Mat random_orthogonal(Idx r, std::uint64_t seed) {
  Eigen::HouseholderQR<Mat> qr(gaussian(r, r, seed));
  Mat q = qr.householderQ();
  // Fix signs so the distribution does not depend on the QR convention.
  const Mat rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Idx k = 0; k < r; ++k) {
    if (rr(k, k) < 0) q.col(k) *= -1.0;
  }
  return q;
}

inline Mat random_spd(Idx r, std::uint64_t seed) {
  const Mat g = gaussian(r, r, seed);
  return g * g.transpose() + 0.5 * Mat::Identity(r, r);
}

inline Mat random_skew(Idx r, std::uint64_t seed) {
  const Mat g = gaussian(r, r, seed);
  return g - g.transpose();
}

/// H = (M M^T)^{1/2} from a symmetric eigendecomposition, Q = H^{-1} M.
struct Polar {
  Mat h;
  Mat q;
};

inline Polar polar(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m * m.transpose());
  const Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Polar p;
  p.h = es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
  p.q = es.eigenvectors() * s.cwiseInverse().asDiagonal() * es.eigenvectors().transpose() * m;
  return p;
}

/// Solves h X + X h = rhs through the (r^2 x r^2) Kronecker system.
inline Mat sylvester_kron(const Mat& h, const Mat& rhs) {
  const Idx r = h.rows();
  const Mat id = Mat::Identity(r, r);
  Mat k = Mat::Zero(r * r, r * r);
  for (Idx i = 0; i < r; ++i) {
    for (Idx j = 0; j < r; ++j) {
      k.block(i * r, j * r, r, r) += id(i, j) * h;  // I (x) h
      k.block(i * r, j * r, r, r) += h(i, j) * id;  // h^T (x) I
    }
  }
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), r * r);
  const Eigen::VectorXd x = k.fullPivLu().solve(b);
  return Eigen::Map<const Mat>(x.data(), r, r);
}

/// Real roots of a t^3 + b t^2 + c t + d (a != 0), trigonometric/Cardano form.
inline std::vector<double> cubic_roots(double a, double b, double c, double d) {
  const double p = (3 * a * c - b * b) / (3 * a * a);
  const double q = (2 * b * b * b - 9 * a * b * c + 27 * a * a * d) / (27 * a * a * a);
  const double shift = -b / (3 * a);
  const double disc = q * q / 4 + p * p * p / 27;
  std::vector<double> roots;
  if (disc > 0) {
    const double sq = std::sqrt(disc);
    roots.push_back(std::cbrt(-q / 2 + sq) + std::cbrt(-q / 2 - sq) + shift);
  } else if (p == 0) {
    roots.push_back(shift);
  } else {
    const double m = 2 * std::sqrt(-p / 3);
    const double arg = std::clamp(3 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(m * std::cos(theta - 2 * std::numbers::pi * k / 3) + shift);
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// ||Y Y^T - Z Z^T||_F^2 from the dense n x n matrices.
inline double dense_dist_sq(const Mat& y, const Mat& z) {
  return (y * y.transpose() - z * z.transpose()).squaredNorm();
}

/// Best rank-k PSD approximation of a symmetric PSD matrix.
inline Mat dense_truncate(const Mat& c, Idx k) {
  Eigen::SelfAdjointEigenSolver<Mat> es(c);
  const Mat v = es.eigenvectors().rightCols(k);
  const Eigen::VectorXd l = es.eigenvalues().tail(k);
  return v * l.asDiagonal() * v.transpose();
}

/// Euclidean de Casteljau evaluation of a cubic Bezier curve.
inline Mat de_casteljau(std::array<Mat, 4> p, double t) {
  for (int level = 3; level > 0; --level) {
    for (int k = 0; k < level; ++k) {
      p[k] = (1 - t) * p[k] + t * p[k + 1];
    }
  }
  return p[0];
}

/// Geodesic factor Y_A + t (Y_B Q^T - Y_A), Q from the eigen-based polar oracle.
inline Mat geodesic(const Mat& ya, const Mat& yb, double t) {
  const Polar p = polar(ya.transpose() * yb);
  return ya + t * (yb * p.q.transpose() - ya);
}

/// Two-parameter geodesic patch in closed form: edges c00 -> c10 and
/// c01 -> c11 aligned by their polar factors, then joined with Q(t1).
inline Mat lg_closed_form(const Mat& c00, const Mat& c01, const Mat& c10, const Mat& c11, double t1,
                          double t2) {
  const Mat q1 = polar(c00.transpose() * c10).q;
  const Mat q2 = polar(c01.transpose() * c11).q;
  const Mat lower = (1 - t1) * c00 + t1 * c10 * q1.transpose();
  const Mat upper = (1 - t1) * c01 + t1 * c11 * q2.transpose();
  const Mat q = polar(lower.transpose() * upper).q;
  return (1 - t2) * lower + t2 * upper * q.transpose();
}

/// Argmin of f over `count` evenly spaced points of [lo, hi].
template <class F>
double grid_argmin(F&& f, double lo, double hi, int count) {
  double best_t = lo;
  double best_f = f(lo);
  for (int k = 1; k < count; ++k) {
    const double t = lo + (hi - lo) * k / (count - 1);
    const double v = f(t);
    if (v < best_f) {
      best_f = v;
      best_t = t;
    }
  }
  return best_t;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace oracle
