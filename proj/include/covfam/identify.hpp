#pragma once

#include <array>
#include <vector>

#include "covfam/surfaces.hpp"

namespace covfam {

/// Sample covariance C = F F^T kept in factored form (n x q', q' <= n).
struct SampleCovariance {
  DenseMatrix factor;
  Index sample_count = 0;

  /// Columns of `samples` are centered observations y_i; C = (1/q) sum y_i y_i^T.
  /// With q > n the factor is compressed to n columns without changing C.
  static SampleCovariance from_samples(const DenseMatrix& samples);
  static SampleCovariance from_factor(DenseMatrix factor, Index sample_count = 0);
  static SampleCovariance from_point(const FactorPoint& p);
};

struct IdentificationResult {
  std::vector<double> t;  // one or two parameters, global coordinates
  double distance = 0.0;  // Frobenius distance, not squared
  PatchIndex patch;
  int iterations = 0;
  bool converged = true;
};

struct IdentifyOptions {
  int max_iters = 500;
  double grad_tol = 1e-8;
  double armijo = 1e-4;
  double shrink = 0.5;
  /// Restrict the inner t2 optimum of the geodesic surface to its patch.
  /// Unconstrained, the extended t2-geodesics of different patches can meet the
  /// same target and the patch of the optimum is no longer determined.
  bool constrain_t2 = true;
  /// Additional starting points in global coordinates, each used in its own patch.
  std::vector<std::array<double, 2>> extra_starts;
  /// Worker threads for the per-patch runs; 0 keeps the OpenMP default.
  int threads = 0;
};

/// f(t) = ||(y + t dir)(y + t dir)^T - C||_F^2 as an explicit quartic.
struct Quartic {
  std::array<double, 5> c{};  // c[k] multiplies t^k

  double operator()(double t) const;
  CubicCoefficients derivative() const;
};

Quartic line_distance_quartic(const DenseMatrix& y, const DenseMatrix& dir, const DenseMatrix& target);

/// Global minimizer over the real line (or over [lo, hi] when `bounded`).
/// Ties within 1e-12 (relative) go to the smaller t.
double argmin_quartic(const Quartic& q, bool bounded = false, double lo = 0.0, double hi = 1.0);

/// ||y y^T - C||_F^2.
double squared_distance(const DenseMatrix& y, const SampleCovariance& c_hat);

/// Gradient of ||Y Y^T - C||^2 along the two jet directions.
std::array<double, 2> jet_gradient(const FactorJet& jet, const SampleCovariance& c_hat);

/// Inner optimum t2*(t1) of a geodesic-surface patch and the value there.
struct InnerOptimum {
  double t2 = 0.0;
  double value = 0.0;
};

InnerOptimum lg_inner_optimum(const LinearGeodesicSurface& surface, PatchIndex p, double u,
                              const SampleCovariance& c_hat, bool constrain_t2 = false);

/// d/dt1 of t1 -> f(t1, t2*(t1)), taken as the partial in t1 at the inner optimum.
double lg_envelope_gradient(const LinearGeodesicSurface& surface, PatchIndex p, double u,
                            const SampleCovariance& c_hat, bool constrain_t2 = false);

/// Closed-form identification along the geodesic a -> b.
IdentificationResult identify_1p(const FactorPoint& a, const FactorPoint& b,
                                 const SampleCovariance& c_hat);

IdentificationResult identify_ls(const CovarianceSurface& surface, const SampleCovariance& c_hat,
                                 const IdentifyOptions& options = {});
IdentificationResult identify_lg(const CovarianceSurface& surface, const SampleCovariance& c_hat,
                                 const IdentifyOptions& options = {});
IdentificationResult identify_bs(const CovarianceSurface& surface, const SampleCovariance& c_hat,
                                 const IdentifyOptions& options = {});
IdentificationResult identify_bg(const CovarianceSurface& surface, const SampleCovariance& c_hat,
                                 const IdentifyOptions& options = {});

/// Dispatches on the surface kind.
IdentificationResult identify(const CovarianceSurface& surface, const SampleCovariance& c_hat,
                              const IdentifyOptions& options = {});

}  // namespace covfam
