#include "covfam/bench.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "covfam/errors.hpp"
#include "covfam/parallel.hpp"
#include "json.hpp"

namespace covfam {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

DenseMatrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  DenseMatrix m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) {
      m(r, c) = normal(rng);
    }
  }
  return m;
}

bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

// Stream ids keep anchors and targets on disjoint random sequences.
constexpr std::uint64_t kAnchorStream = 1;
constexpr std::uint64_t kTargetStream = std::uint64_t{1} << 32;

}  // namespace

const char* to_string(TestLayout layout) {
  return layout == TestLayout::kCenters ? "centers" : "interleaved";
}

TestLayout parse_test_layout(const std::string& text) {
  if (text == "centers") return TestLayout::kCenters;
  if (text == "interleaved") return TestLayout::kInterleaved;
  throw Error(ErrorCode::kInvalidArgument, "unknown test layout '" + text + "'");
}

const char* to_string(BenchMode mode) {
  return mode == BenchMode::kInterpolation ? "interp" : "identify";
}

BenchMode parse_bench_mode(const std::string& text) {
  if (text == "interp" || text == "interpolation") return BenchMode::kInterpolation;
  if (text == "identify" || text == "identification") return BenchMode::kIdentification;
  throw Error(ErrorCode::kInvalidArgument, "unknown bench mode '" + text + "'");
}

SyntheticFieldSpec SyntheticFieldSpec::wind() {
  SyntheticFieldSpec s;
  s.n = 3024;
  s.r = 20;
  s.nodes1 = 5;
  s.nodes2 = 4;
  s.theta_min = 0.0;
  s.theta_max = 22.5;
  s.w_min = 4.0;
  s.w_max = 13.0;
  s.test_layout = TestLayout::kInterleaved;
  return s;
}

void SyntheticFieldSpec::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); };
  if (r < 1 || n < r) fail("need n >= r >= 1");
  if (nodes1 < 2 || nodes2 < 1) fail("need at least 2 x 1 training nodes");
  if (!(theta_max > theta_min)) fail("theta range must be increasing");
  if (nodes2 > 1 && !(w_max > w_min)) fail("w range must be increasing");
  if (!std::isfinite(rho) || !std::isfinite(eta)) fail("rho and eta must be finite");
  if (samples < 0 || (samples > 0 && samples < r)) fail("sample count must be 0 or at least r");
}

SyntheticField::SyntheticField(SyntheticFieldSpec spec) : spec_(spec) {
  spec_.validate();
  std::mt19937_64 rng = stream_rng(spec_.seed, 0);
  const DenseMatrix g = gaussian(spec_.n, spec_.r, rng);
  Eigen::HouseholderQR<DenseMatrix> qr(g);
  u0_ = qr.householderQ() * DenseMatrix::Identity(spec_.n, spec_.r);

  std::uniform_int_distribution<Index> coord(0, spec_.n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (spec_.n >= 2) {
    for (Index k = 0; k < spec_.r; ++k) {
      const Index p = coord(rng);
      Index q = coord(rng);
      while (q == p) {
        q = coord(rng);
      }
      plane_p_.push_back(p);
      plane_q_.push_back(q);
      rate_.push_back(0.5 + unit(rng));
    }
  }
  profile_.resize(spec_.r);
  for (Index k = 0; k < spec_.r; ++k) {
    profile_(k) = 0.5 + unit(rng);
  }
}

DenseMatrix SyntheticField::factor(double theta, double w) const {
  const double scale = 1.0 + spec_.eta * (w - spec_.w_min);
  DenseMatrix y = u0_ * (scale * profile_).asDiagonal();
  const double alpha = spec_.rho * theta;
  for (std::size_t k = plane_p_.size(); k-- > 0;) {
    const double c = std::cos(alpha * rate_[k]);
    const double s = std::sin(alpha * rate_[k]);
    const Eigen::RowVectorXd yp = y.row(plane_p_[k]);
    const Eigen::RowVectorXd yq = y.row(plane_q_[k]);
    y.row(plane_p_[k]) = c * yp - s * yq;
    y.row(plane_q_[k]) = s * yp + c * yq;
  }
  return y;
}

DenseMatrix SyntheticField::samples(double theta, double w, Index q, std::uint64_t stream) const {
  std::mt19937_64 rng = stream_rng(spec_.seed, stream);
  return factor(theta, w) * gaussian(spec_.r, q, rng);
}

DenseMatrix SyntheticField::noisy_factor(double theta, double w, Index q, std::uint64_t stream) const {
  if (q < 1) {
    throw Error(ErrorCode::kInvalidArgument, "sample count must be positive");
  }
  std::mt19937_64 rng = stream_rng(spec_.seed, stream);
  const DenseMatrix xi = gaussian(spec_.r, q, rng);
  const DenseMatrix y = factor(theta, w);
  if (q < spec_.r) {
    return y * xi / std::sqrt(static_cast<double>(q));
  }
  // (Y xi)(Y xi)^T / q = Y L L^T Y^T with L L^T = xi xi^T / q.
  const DenseMatrix gram = xi * xi.transpose() / static_cast<double>(q);
  Eigen::LLT<DenseMatrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kRankDeficient, "sample Gram matrix is singular");
  }
  return y * DenseMatrix(llt.matrixL());
}

double SyntheticField::theta_node(Index i) const {
  return spec_.theta_min +
         (spec_.theta_max - spec_.theta_min) * static_cast<double>(i) / static_cast<double>(spec_.nodes1 - 1);
}

double SyntheticField::w_node(Index j) const {
  if (spec_.nodes2 == 1) {
    return spec_.w_min;
  }
  return spec_.w_min +
         (spec_.w_max - spec_.w_min) * static_cast<double>(j) / static_cast<double>(spec_.nodes2 - 1);
}

SyntheticField generate_field(const SyntheticFieldSpec& spec) { return SyntheticField(spec); }

std::string emit_spec_json(const SyntheticFieldSpec& spec) {
  const nlohmann::ordered_json doc = {{"schema", "covfam-spec/1"},
                                      {"n", spec.n},
                                      {"r", spec.r},
                                      {"grid", {spec.nodes1, spec.nodes2}},
                                      {"theta_range", {spec.theta_min, spec.theta_max}},
                                      {"w_range", {spec.w_min, spec.w_max}},
                                      {"seed", spec.seed},
                                      {"rho", spec.rho},
                                      {"eta", spec.eta},
                                      {"samples", spec.samples},
                                      {"test_layout", to_string(spec.test_layout)}};
  return doc.dump(2) + "\n";
}

SyntheticFieldSpec parse_spec_json(const std::string& text) {
  SyntheticFieldSpec spec;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.value("schema", std::string()) != "covfam-spec/1") {
      throw Error(ErrorCode::kInvalidArgument, "spec schema must be covfam-spec/1");
    }
    spec.n = doc.at("n").get<Index>();
    spec.r = doc.at("r").get<Index>();
    spec.nodes1 = doc.at("grid").at(0).get<Index>();
    spec.nodes2 = doc.at("grid").at(1).get<Index>();
    spec.theta_min = doc.at("theta_range").at(0).get<double>();
    spec.theta_max = doc.at("theta_range").at(1).get<double>();
    spec.w_min = doc.at("w_range").at(0).get<double>();
    spec.w_max = doc.at("w_range").at(1).get<double>();
    spec.seed = doc.value("seed", spec.seed);
    spec.rho = doc.value("rho", spec.rho);
    spec.eta = doc.value("eta", spec.eta);
    spec.samples = doc.value("samples", spec.samples);
    spec.test_layout = parse_test_layout(doc.value("test_layout", std::string("centers")));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

BenchProblem make_problem(const SyntheticField& field) {
  const auto& spec = field.spec();
  std::vector<FactorPoint> anchors;
  std::vector<double> theta;
  std::vector<double> w;
  for (Index i = 0; i < spec.nodes1; ++i) {
    theta.push_back(field.theta_node(i));
  }
  for (Index j = 0; j < spec.nodes2; ++j) {
    w.push_back(field.w_node(j));
  }
  for (Index i = 0; i < spec.nodes1; ++i) {
    for (Index j = 0; j < spec.nodes2; ++j) {
      const auto stream = kAnchorStream + static_cast<std::uint64_t>(i * spec.nodes2 + j);
      anchors.emplace_back(spec.samples > 0 ? field.noisy_factor(theta[i], w[j], spec.samples, stream)
                                            : field.factor(theta[i], w[j]));
    }
  }
  BenchProblem problem;
  problem.grid = std::make_shared<const AnchorGrid>(spec.nodes1, spec.nodes2, std::move(anchors),
                                                    theta, w);

  // Test labels on the grid refined by two; centers keeps only odd-odd points.
  const Index fine1 = 2 * (spec.nodes1 - 1) + 1;
  const Index fine2 = spec.nodes2 > 1 ? 2 * (spec.nodes2 - 1) + 1 : 1;
  const double h1 = (spec.theta_max - spec.theta_min) / static_cast<double>(fine1 - 1);
  const double h2 = fine2 > 1 ? (spec.w_max - spec.w_min) / static_cast<double>(fine2 - 1) : 0.0;
  for (Index a = 0; a < fine1; ++a) {
    for (Index b = 0; b < fine2; ++b) {
      const bool odd1 = a % 2 == 1;
      const bool odd2 = fine2 == 1 || b % 2 == 1;
      const bool keep =
          spec.test_layout == TestLayout::kCenters ? (odd1 && odd2) : (a % 2 == 1 || b % 2 == 1);
      if (!keep) {
        continue;
      }
      TestPoint tp;
      tp.theta = spec.theta_min + h1 * static_cast<double>(a);
      tp.w = spec.w_min + h2 * static_cast<double>(b);
      const auto stream = kTargetStream + problem.tests.size();
      tp.target = spec.samples > 0
                      ? SampleCovariance::from_factor(
                            field.noisy_factor(tp.theta, tp.w, spec.samples, stream), spec.samples)
                      : SampleCovariance::from_factor(field.factor(tp.theta, tp.w));
      problem.tests.push_back(std::move(tp));
    }
  }
  return problem;
}

bool operator==(const ErrorRecord& a, const ErrorRecord& b) {
  return a.method == b.method && same_double(a.theta, b.theta) && same_double(a.w, b.w) &&
         same_double(a.e, b.e) && same_double(a.e_n, b.e_n) && same_double(a.e_star, b.e_star) &&
         same_double(a.e_star_n, b.e_star_n) && same_double(a.t1_star, b.t1_star) &&
         same_double(a.t2_star, b.t2_star) && a.patch_l == b.patch_l && a.patch_m == b.patch_m &&
         a.iterations == b.iterations && a.status == b.status;
}

bool operator==(const MethodAverage& a, const MethodAverage& b) {
  return a.method == b.method && a.count == b.count && same_double(a.e, b.e) &&
         same_double(a.e_n, b.e_n) && same_double(a.e_star, b.e_star) &&
         same_double(a.e_star_n, b.e_star_n);
}

namespace {

/// 100 * err / (mean squared distance to the patch corners); a target sitting
/// on all four corners has no scale, and a zero error there normalizes to 0.
double normalized(double err, double denom, double c_norm_sq) {
  if (std::isnan(err)) {
    return kNaN;
  }
  if (denom > 1e-14 * c_norm_sq) {
    return 100.0 * err / denom;
  }
  return err <= 1e-14 * c_norm_sq ? 0.0 : kNaN;
}

/// Error code name in snake case, e.g. CutLocus -> cut_locus.
std::string status_of(const Error& e) {
  std::string out;
  for (const char* c = to_string(e.code()); *c != '\0'; ++c) {
    if (std::isupper(static_cast<unsigned char>(*c))) {
      if (!out.empty()) out += '_';
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(*c)));
    } else {
      out += *c;
    }
  }
  return out;
}

ErrorRecord run_record(const CovarianceSurface& surface, const TestPoint& tp, BenchMode mode,
                       const BenchOptions& options) {
  const AnchorGrid& grid = surface.grid();
  ErrorRecord rec;
  rec.method = surface.method().name();
  rec.theta = tp.theta;
  rec.w = tp.w;
  rec.e = rec.e_n = rec.e_star = rec.e_star_n = rec.t1_star = rec.t2_star = kNaN;

  const auto t = grid.label_map().to_params(tp.theta, tp.w);
  const PatchIndex p = grid.locate(t[0], t[1]);
  const double c_norm_sq = (tp.target.factor.transpose() * tp.target.factor).squaredNorm();
  double denom = 0.0;
  for (Index di = 0; di < 2; ++di) {
    for (Index dj = 0; dj < 2; ++dj) {
      const Index j = grid.one_parameter() ? 0 : p.m + dj;
      denom += 0.25 * squared_distance(grid.at(p.l + di, j).y(), tp.target);
    }
  }
  rec.patch_l = p.l;
  rec.patch_m = p.m;

  try {
    const double u = t[0] - static_cast<double>(p.l);
    const double v = t[1] - static_cast<double>(p.m);
    rec.e = squared_distance(surface.local_factor(p, u, v), tp.target);
    rec.e_n = normalized(rec.e, denom, c_norm_sq);
  } catch (const Error& e) {
    rec.status = status_of(e);
    return rec;
  }
  if (mode == BenchMode::kInterpolation) {
    return rec;
  }

  try {
    IdentifyOptions io = options.identify;
    io.threads = 1;
    io.extra_starts.push_back({t[0], t[1]});
    const IdentificationResult res = identify(surface, tp.target, io);
    const PatchIndex q = res.patch;
    rec.t1_star = res.t[0];
    rec.t2_star = res.t.size() > 1 ? res.t[1] : 0.0;
    rec.patch_l = q.l;
    rec.patch_m = q.m;
    rec.iterations = res.iterations;
    rec.e_star = squared_distance(
        surface.local_factor(q, rec.t1_star - static_cast<double>(q.l),
                             rec.t2_star - static_cast<double>(q.m)),
        tp.target);
    rec.e_star_n = normalized(rec.e_star, denom, c_norm_sq);
    if (!res.converged) {
      rec.status = "not_converged";
    }
  } catch (const Error& e) {
    rec.status = status_of(e);
  }
  return rec;
}

template <class Loop>
ErrorReport run_impl(const BenchProblem& problem, const std::vector<MethodSpec>& methods,
                     BenchMode mode, const BenchOptions& options, Loop&& loop) {
  std::vector<std::unique_ptr<CovarianceSurface>> surfaces(methods.size());
  std::vector<std::string> build_errors(methods.size());
  loop(static_cast<std::ptrdiff_t>(methods.size()), [&](std::ptrdiff_t k) {
    try {
      surfaces[k] = std::make_unique<CovarianceSurface>(build_surface(problem.grid, methods[k]));
    } catch (const Error& e) {
      build_errors[k] = status_of(e);
    }
  });

  const std::size_t per_method = problem.tests.size();
  ErrorReport report;
  report.mode = mode;
  report.records.resize(methods.size() * per_method);
  loop(static_cast<std::ptrdiff_t>(report.records.size()), [&](std::ptrdiff_t idx) {
    const std::size_t k = static_cast<std::size_t>(idx) / per_method;
    const TestPoint& tp = problem.tests[static_cast<std::size_t>(idx) % per_method];
    ErrorRecord& rec = report.records[static_cast<std::size_t>(idx)];
    if (!surfaces[k]) {
      rec.method = methods[k].name();
      rec.theta = tp.theta;
      rec.w = tp.w;
      rec.e = rec.e_n = rec.e_star = rec.e_star_n = rec.t1_star = rec.t2_star = kNaN;
      rec.status = build_errors[k];
      return;
    }
    rec = run_record(*surfaces[k], tp, mode, options);
  });
  report.averages = compute_averages(report.records);
  return report;
}

}  // namespace

ErrorReport run_benchmark(const BenchProblem& problem, const std::vector<MethodSpec>& methods,
                          BenchMode mode, const BenchOptions& options) {
  const int threads = resolve_threads(options.threads);
  return run_impl(problem, methods, mode, options, [threads](std::ptrdiff_t count, auto&& body) {
    parallel_for(count, threads, body);
  });
}

ErrorReport run_benchmark_serial(const BenchProblem& problem, const std::vector<MethodSpec>& methods,
                                 BenchMode mode, const BenchOptions& options) {
  return run_impl(problem, methods, mode, options,
                  [](std::ptrdiff_t count, auto&& body) { serial_for(count, body); });
}

std::vector<MethodAverage> compute_averages(const std::vector<ErrorRecord>& records) {
  std::vector<MethodAverage> out;
  struct Acc {
    double sum = 0.0;
    Index count = 0;
    void add(double v) {
      if (std::isfinite(v)) {
        sum += v;
        ++count;
      }
    }
    double mean() const { return count > 0 ? sum / static_cast<double>(count) : kNaN; }
  };
  std::vector<std::array<Acc, 4>> acc;
  for (const auto& rec : records) {
    std::size_t k = 0;
    while (k < out.size() && out[k].method != rec.method) {
      ++k;
    }
    if (k == out.size()) {
      out.push_back({rec.method});
      acc.emplace_back();
    }
    acc[k][0].add(rec.e);
    acc[k][1].add(rec.e_n);
    acc[k][2].add(rec.e_star);
    acc[k][3].add(rec.e_star_n);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].count = acc[k][0].count;
    out[k].e = acc[k][0].mean();
    out[k].e_n = acc[k][1].mean();
    out[k].e_star = acc[k][2].mean();
    out[k].e_star_n = acc[k][3].mean();
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) {
    return "nan";
  }
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

constexpr const char* kCsvHeader =
    "method,theta,w,E,E_N,E_star,E_star_N,t1_star,t2_star,patch_l,patch_m,iterations,status\n";

std::string json_number(double v) {
  return std::isfinite(v) ? format_double(v) : "null";
}

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

double json_double(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  return v.is_null() ? kNaN : v.get<double>();
}

}  // namespace

std::string emit_report(const ErrorReport& report, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::kCsv) {
    out << kCsvHeader;
    for (const auto& r : report.records) {
      out << r.method << ',' << format_double(r.theta) << ',' << format_double(r.w) << ','
          << format_double(r.e) << ',' << format_double(r.e_n) << ',' << format_double(r.e_star)
          << ',' << format_double(r.e_star_n) << ',' << format_double(r.t1_star) << ','
          << format_double(r.t2_star) << ',' << r.patch_l << ',' << r.patch_m << ','
          << r.iterations << ',' << r.status << '\n';
    }
    return out.str();
  }

  out << "{\n  \"schema\": \"covfam-report/1\",\n  \"mode\": " << json_string(to_string(report.mode))
      << ",\n  \"records\": [";
  for (std::size_t k = 0; k < report.records.size(); ++k) {
    const auto& r = report.records[k];
    out << (k ? ",\n    " : "\n    ") << "{\"method\": " << json_string(r.method)
        << ", \"theta\": " << json_number(r.theta) << ", \"w\": " << json_number(r.w)
        << ", \"E\": " << json_number(r.e) << ", \"E_N\": " << json_number(r.e_n)
        << ", \"E_star\": " << json_number(r.e_star) << ", \"E_star_N\": " << json_number(r.e_star_n)
        << ", \"t_star\": [" << json_number(r.t1_star) << ", " << json_number(r.t2_star) << "]"
        << ", \"patch\": [" << r.patch_l << ", " << r.patch_m << "]"
        << ", \"iterations\": " << r.iterations << ", \"status\": " << json_string(r.status) << "}";
  }
  out << (report.records.empty() ? "],\n" : "\n  ],\n") << "  \"averages\": [";
  for (std::size_t k = 0; k < report.averages.size(); ++k) {
    const auto& a = report.averages[k];
    out << (k ? ",\n    " : "\n    ") << "{\"method\": " << json_string(a.method)
        << ", \"count\": " << a.count << ", \"E\": " << json_number(a.e)
        << ", \"E_N\": " << json_number(a.e_n) << ", \"E_star\": " << json_number(a.e_star)
        << ", \"E_star_N\": " << json_number(a.e_star_n) << "}";
  }
  out << (report.averages.empty() ? "]\n}\n" : "\n  ]\n}\n");
  return out.str();
}

std::string emit_averages_csv(const ErrorReport& report) {
  std::ostringstream out;
  out << "method,count,avg_E,avg_E_N,avg_E_star,avg_E_star_N\n";
  for (const auto& a : report.averages) {
    out << a.method << ',' << a.count << ',' << format_double(a.e) << ',' << format_double(a.e_n)
        << ',' << format_double(a.e_star) << ',' << format_double(a.e_star_n) << '\n';
  }
  return out.str();
}

ErrorReport parse_report_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("schema").get<std::string>() != "covfam-report/1") {
      throw Error(ErrorCode::kIo, "unsupported report schema");
    }
    ErrorReport report;
    report.mode = parse_bench_mode(doc.at("mode").get<std::string>());
    for (const auto& j : doc.at("records")) {
      ErrorRecord r;
      r.method = j.at("method").get<std::string>();
      r.theta = json_double(j, "theta");
      r.w = json_double(j, "w");
      r.e = json_double(j, "E");
      r.e_n = json_double(j, "E_N");
      r.e_star = json_double(j, "E_star");
      r.e_star_n = json_double(j, "E_star_N");
      const auto& ts = j.at("t_star");
      r.t1_star = ts.at(0).is_null() ? kNaN : ts.at(0).get<double>();
      r.t2_star = ts.at(1).is_null() ? kNaN : ts.at(1).get<double>();
      r.patch_l = j.at("patch").at(0).get<Index>();
      r.patch_m = j.at("patch").at(1).get<Index>();
      r.iterations = j.at("iterations").get<int>();
      r.status = j.at("status").get<std::string>();
      report.records.push_back(std::move(r));
    }
    for (const auto& j : doc.at("averages")) {
      MethodAverage a;
      a.method = j.at("method").get<std::string>();
      a.count = j.at("count").get<Index>();
      a.e = json_double(j, "E");
      a.e_n = json_double(j, "E_N");
      a.e_star = json_double(j, "E_star");
      a.e_star_n = json_double(j, "E_star_N");
      report.averages.push_back(std::move(a));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("malformed report: ") + e.what());
  }
}

}  // namespace covfam
