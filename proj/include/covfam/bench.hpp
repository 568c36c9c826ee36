#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "covfam/identify.hpp"

namespace covfam {

enum class TestLayout { kCenters, kInterleaved };

const char* to_string(TestLayout layout);
TestLayout parse_test_layout(const std::string& text);

/// Seeded smooth synthetic family Y(theta, W) = G(rho theta) U0 diag(s(W)).
struct SyntheticFieldSpec {
  Index n = 200;
  Index r = 10;
  Index nodes1 = 5;  // training nodes along theta
  Index nodes2 = 4;  // training nodes along W
  double theta_min = 0.0;
  double theta_max = 22.5;
  double w_min = 4.0;
  double w_max = 13.0;
  std::uint64_t seed = 1;
  double rho = 0.05;  // radians per unit theta
  double eta = 0.1;   // scale growth per unit W
  Index samples = 0;  // q > 0 switches anchors and targets to sample covariances
  TestLayout test_layout = TestLayout::kCenters;

  /// Wind-field scale: n = 3024, r = 20, 5 x 4 training nodes, interleaved tests.
  static SyntheticFieldSpec wind();

  /// Throws InvalidArgument when the spec cannot produce a valid grid.
  void validate() const;
};

class SyntheticField {
 public:
  explicit SyntheticField(SyntheticFieldSpec spec);

  const SyntheticFieldSpec& spec() const { return spec_; }

  /// Ground-truth factor at physical labels.
  DenseMatrix factor(double theta, double w) const;

  /// q Gaussian draws with covariance Y Y^T, as columns of an n x q matrix.
  DenseMatrix samples(double theta, double w, Index q, std::uint64_t stream) const;

  /// Factor of the sample covariance of q draws (n x r when q >= r).
  DenseMatrix noisy_factor(double theta, double w, Index q, std::uint64_t stream) const;

  double theta_node(Index i) const;
  double w_node(Index j) const;

 private:
  SyntheticFieldSpec spec_;
  DenseMatrix u0_;
  std::vector<Index> plane_p_;
  std::vector<Index> plane_q_;
  std::vector<double> rate_;
  Eigen::VectorXd profile_;
};

SyntheticField generate_field(const SyntheticFieldSpec& spec);

/// Spec file used by `covfam bench` (schema covfam-spec/1).
std::string emit_spec_json(const SyntheticFieldSpec& spec);
SyntheticFieldSpec parse_spec_json(const std::string& text);

struct TestPoint {
  double theta = 0.0;
  double w = 0.0;
  SampleCovariance target;
};

/// Training grid plus test targets.
struct BenchProblem {
  std::shared_ptr<const AnchorGrid> grid;
  std::vector<TestPoint> tests;
};

BenchProblem make_problem(const SyntheticField& field);

enum class BenchMode { kInterpolation, kIdentification };

const char* to_string(BenchMode mode);
BenchMode parse_bench_mode(const std::string& text);

struct ErrorRecord {
  std::string method;
  double theta = 0.0;
  double w = 0.0;
  double e = 0.0;
  double e_n = 0.0;
  double e_star = 0.0;
  double e_star_n = 0.0;
  double t1_star = 0.0;
  double t2_star = 0.0;
  Index patch_l = 0;
  Index patch_m = 0;
  int iterations = 0;
  std::string status = "ok";  // ok, not_converged, or a snake_case error code (cut_locus, ...)

  friend bool operator==(const ErrorRecord&, const ErrorRecord&);
};

struct MethodAverage {
  std::string method;
  Index count = 0;  // records contributing to E
  double e = 0.0;
  double e_n = 0.0;
  double e_star = 0.0;
  double e_star_n = 0.0;

  friend bool operator==(const MethodAverage&, const MethodAverage&);
};

/// Records are ordered method-major, then by test point.
struct ErrorReport {
  BenchMode mode = BenchMode::kInterpolation;
  std::vector<ErrorRecord> records;
  std::vector<MethodAverage> averages;

  friend bool operator==(const ErrorReport&, const ErrorReport&) = default;
};

struct BenchOptions {
  int threads = 0;  // 0 falls back to $COVFAM_THREADS, then the OpenMP default
  IdentifyOptions identify;
};

/// Records run in parallel; each writes its own slot so output does not
/// depend on the thread count.
ErrorReport run_benchmark(const BenchProblem& problem, const std::vector<MethodSpec>& methods,
                          BenchMode mode, const BenchOptions& options = {});

/// Single-threaded reference with identical results.
ErrorReport run_benchmark_serial(const BenchProblem& problem, const std::vector<MethodSpec>& methods,
                                 BenchMode mode, const BenchOptions& options = {});

/// Means over the finite per-record values, one entry per method in record order.
std::vector<MethodAverage> compute_averages(const std::vector<ErrorRecord>& records);

enum class ReportFormat { kCsv, kJson };

std::string emit_report(const ErrorReport& report, ReportFormat format);
std::string emit_averages_csv(const ErrorReport& report);
ErrorReport parse_report_json(const std::string& text);

/// 17 significant digits; NaN as "nan".
std::string format_double(double v);

}  // namespace covfam
