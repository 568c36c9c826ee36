#include "covfam/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "covfam/errors.hpp"

namespace covfam {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kSingularInput: return "SingularInput";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kDegenerateCubic: return "DegenerateCubic";
    case ErrorCode::kIllConditioned: return "IllConditioned";
    case ErrorCode::kCutLocus: return "CutLocus";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

namespace {

constexpr double kRelFloor = 1e-14;

void require_square(const DenseMatrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + " must be square");
  }
}

}  // namespace

double CubicCoefficients::discriminant() const {
  return 18.0 * a * b * c * d - 4.0 * b * b * b * d + b * b * c * c - 4.0 * a * c * c * c -
         27.0 * a * a * d * d;
}

bool all_finite(const DenseMatrix& m) { return m.allFinite(); }

void require_finite(const DenseMatrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNonFinite, std::string(what) + " has non-finite entries");
  }
}

double frob_inner(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "frob_inner operands differ in shape");
  }
  return a.cwiseProduct(b).sum();
}

PolarFactors polar_decompose(const DenseMatrix& m) {
  require_square(m, "polar_decompose input");
  require_finite(m, "polar_decompose input");
  if (m.rows() == 0) {
    return {DenseMatrix(0, 0), DenseMatrix(0, 0)};
  }

  Eigen::JacobiSVD<DenseMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double sigma_max = sigma(0);
  const double sigma_min = sigma(sigma.size() - 1);
  if (!(sigma_max > 0.0) || sigma_min < kRelFloor * sigma_max) {
    throw Error(ErrorCode::kSingularInput, "polar decomposition of a (numerically) singular matrix");
  }

  const DenseMatrix& u = svd.matrixU();
  PolarFactors out;
  out.h = u * sigma.asDiagonal() * u.transpose();
  out.h = 0.5 * (out.h + out.h.transpose()).eval();
  out.q = u * svd.matrixV().transpose();
  return out;
}

DenseMatrix truncated_svd(const DenseMatrix& m, Index target_rank) {
  require_finite(m, "truncated_svd input");
  if (target_rank < 0 || target_rank > std::min(m.rows(), m.cols())) {
    throw Error(ErrorCode::kInvalidArgument, "truncated_svd target rank exceeds min(rows, cols)");
  }
  if (target_rank == 0) {
    return DenseMatrix(m.rows(), 0);
  }

  Eigen::JacobiSVD<DenseMatrix> svd(m, Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  if (!(sigma(0) > 0.0) || sigma(target_rank - 1) < kRelFloor * sigma(0)) {
    throw Error(ErrorCode::kRankDeficient, "requested rank exceeds the numerical rank");
  }

  DenseMatrix y = svd.matrixU().leftCols(target_rank);
  for (Index k = 0; k < target_rank; ++k) {
    Index arg = 0;
    y.col(k).cwiseAbs().maxCoeff(&arg);
    const double sign = y(arg, k) < 0.0 ? -1.0 : 1.0;
    y.col(k) *= sign * sigma(k);
  }
  return y;
}

namespace {

std::vector<double> dedupe_sorted(std::vector<double> roots) {
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double t : roots) {
    if (!out.empty() && std::abs(t - out.back()) <= 1e-7 * (1.0 + std::abs(t))) {
      continue;
    }
    out.push_back(t);
  }
  return out;
}

std::vector<double> quadratic_real_roots(double a, double b, double c) {
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) {
    return {};
  }
  const double s = std::sqrt(disc);
  const double q = -0.5 * (b + (b >= 0.0 ? s : -s));
  std::vector<double> roots;
  if (q != 0.0) {
    roots.push_back(q / a);
    roots.push_back(c / q);
  } else {
    roots.push_back(0.0);
  }
  return dedupe_sorted(std::move(roots));
}

double newton_polish(const CubicCoefficients& p, double t) {
  for (int step = 0; step < 2; ++step) {
    const double slope = p.derivative(t);
    if (slope == 0.0) {
      break;
    }
    const double next = t - p(t) / slope;
    if (!std::isfinite(next) || std::abs(p(next)) >= std::abs(p(t))) {
      break;
    }
    t = next;
  }
  return t;
}

}  // namespace

std::vector<double> cubic_real_roots(const CubicCoefficients& c) {
  const double scale = std::max({std::abs(c.a), std::abs(c.b), std::abs(c.c), std::abs(c.d)});
  if (!std::isfinite(scale)) {
    throw Error(ErrorCode::kNonFinite, "cubic coefficients are not finite");
  }
  const double floor = kRelFloor * scale;
  const bool a_small = std::abs(c.a) <= floor;
  const bool b_small = std::abs(c.b) <= floor;
  const bool c_small = std::abs(c.c) <= floor;
  if (scale == 0.0 || (a_small && b_small && c_small)) {
    throw Error(ErrorCode::kDegenerateCubic, "polynomial is constant");
  }
  if (a_small && b_small) {
    return {-c.d / c.c};
  }
  if (a_small) {
    return quadratic_real_roots(c.b, c.c, c.d);
  }

  // Companion matrix of the monic cubic t^3 + p2 t^2 + p1 t + p0.
  Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  companion(0, 2) = -c.d / c.a;
  companion(1, 2) = -c.c / c.a;
  companion(2, 2) = -c.b / c.a;
  Eigen::EigenSolver<Eigen::Matrix3d> eig(companion, /*computeEigenvectors=*/false);
  const auto& lambda = eig.eigenvalues();

  std::vector<double> roots;
  double best_imag = std::numeric_limits<double>::infinity();
  double best_real = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double re = lambda(k).real();
    const double im = std::abs(lambda(k).imag());
    if (im < best_imag) {
      best_imag = im;
      best_real = re;
    }
    if (im == 0.0) {
      roots.push_back(newton_polish(c, re));
    } else if (im <= 1e-5 * (1.0 + std::abs(re))) {
      // Near-multiple root split into a complex pair by rounding.
      const double t = newton_polish(c, re);
      const double tol = 1e-9 * scale * std::pow(1.0 + std::abs(t), 3);
      if (std::abs(c(t)) <= tol) {
        roots.push_back(t);
      }
    }
  }
  if (roots.empty()) {
    roots.push_back(newton_polish(c, best_real));
  }
  return dedupe_sorted(std::move(roots));
}

DenseMatrix solve_sylvester_sym(const DenseMatrix& h, const DenseMatrix& rhs) {
  require_square(h, "Sylvester coefficient");
  if (rhs.rows() != h.rows() || rhs.cols() != h.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "Sylvester right-hand side shape");
  }
  require_finite(h, "Sylvester coefficient");
  require_finite(rhs, "Sylvester right-hand side");
  if (h.rows() == 0) {
    return DenseMatrix(0, 0);
  }

  const DenseMatrix hs = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(hs);
  const auto& lambda = eig.eigenvalues();
  const double lmax = lambda(lambda.size() - 1);
  if (!(lmax > 0.0) || lambda(0) < 1e-12 * lmax) {
    throw Error(ErrorCode::kIllConditioned, "Sylvester coefficient is not safely positive definite");
  }

  const DenseMatrix& v = eig.eigenvectors();
  DenseMatrix x = v.transpose() * rhs * v;
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) {
      x(i, j) /= lambda(i) + lambda(j);
    }
  }
  x = v * x * v.transpose();
  return 0.5 * (x - x.transpose());
}

double frob_dist_sq_lowrank(const DenseMatrix& y, const DenseMatrix& z) {
  if (y.rows() != z.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "factors must share their row count");
  }
  // With [y z] = QR, y y^T - z z^T = Q (Ry Ry^T - Rz Rz^T) Q^T. Unlike the
  // expansion ||y^T y||^2 + ||z^T z||^2 - 2 ||y^T z||^2 this does not cancel
  // when the two matrices are close.
  // Factored in place in a per-thread buffer: for large n a fresh n x (r + s)
  // allocation is served by mmap and costs more than the factorization.
  thread_local DenseMatrix stacked;
  stacked.resize(y.rows(), y.cols() + z.cols());
  stacked << y, z;
  Eigen::HouseholderQR<Eigen::Ref<DenseMatrix>> qr(stacked);
  const Index k = std::min(stacked.rows(), stacked.cols());
  const DenseMatrix r = stacked.topRows(k).triangularView<Eigen::Upper>();
  const DenseMatrix ry = r.leftCols(y.cols());
  const DenseMatrix rz = r.rightCols(z.cols());
  return (ry * ry.transpose() - rz * rz.transpose()).squaredNorm();
}

bool is_rank_deficient(const DenseMatrix& y) {
  if (y.cols() == 0 || y.rows() < y.cols()) {
    return true;
  }
  Eigen::JacobiSVD<DenseMatrix> svd(y);
  const auto& sigma = svd.singularValues();
  return !(sigma(0) > 0.0) || sigma(sigma.size() - 1) <= 1e-12 * sigma(0);
}

}  // namespace covfam
