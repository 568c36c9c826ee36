// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "covfam/bench.hpp"
#include "covfam/cli.hpp"
#include "covfam/errors.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace {

using namespace covfam;
using oracle::gaussian;
using oracle::rel_err;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

const std::vector<std::string> kMethods{"ls:one", "ls:arithm", "ls:inductive", "lg",
                                        "bs:one", "bs:arithm", "bs:inductive", "bg"};

double matrix_rel(const DenseMatrix& y, const DenseMatrix& z) {
  const DenseMatrix a = y * y.transpose();
  const DenseMatrix b = z * z.transpose();
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

// 1 -------------------------------------------------------------------------

Outcome geodesic_endpoints() {
  double worst = 0.0;
  bool start_exact = true;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const FactorPoint a(gaussian(120, 8, 2 * seed + 1));
    const FactorPoint b(gaussian(120, 8, 2 * seed + 2));
    const auto g = geodesic(a, b);
    const DenseMatrix y0 = g.evaluate(0.0).y;
    const DenseMatrix y1 = g.evaluate(1.0).y;
    start_exact = start_exact && (y0 * y0.transpose() - a.matrix()).norm() == 0.0;
    worst = std::max(worst, matrix_rel(y1, b.y()));
  }
  return {start_exact && worst <= 1e-10,
          std::string("phi(0) exact: ") + (start_exact ? "yes" : "no") + ", max rel err at 1: " +
              fmt("%.2e", worst)};
}

// 2 -------------------------------------------------------------------------

Outcome representative_invariance() {
  double worst_eval = 0.0;
  double worst_dist = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto grid = testing::random_grid(3, 3, 16, 3, 500 + seed, 0.4);
    const auto rot = testing::rotated(*grid, 900 + seed);
    std::mt19937_64 rng(seed);
    const DenseMatrix target = oracle::padded(grid->at(1, 1).y(), 4) + 0.3 * gaussian(16, 4, 700 + seed);
    const DenseMatrix target_rot = target * oracle::random_orthogonal(4, 800 + seed);
    for (const auto& name : kMethods) {
      const MethodSpec m = MethodSpec::parse(name);
      const auto s = build_surface(grid, m);
      const auto sr = build_surface(rot, m);
      for (int k = 0; k < 5; ++k) {
        const double t1 = uniform(rng, 0.0, 2.0);
        const double t2 = uniform(rng, 0.0, 2.0);
        worst_eval = std::max(worst_eval, matrix_rel(sr.evaluate(t1, t2).y, s.evaluate(t1, t2).y));
      }
      const auto a = identify(s, SampleCovariance::from_factor(target));
      const auto b = identify(sr, SampleCovariance::from_factor(target_rot));
      worst_dist = std::max(worst_dist, rel_err(a.distance, b.distance));
    }
  }
  return {worst_eval <= 1e-10 && worst_dist <= 1e-10,
          "max rel change: evaluations " + fmt("%.2e", worst_eval) + ", distances " +
              fmt("%.2e", worst_dist)};
}

// 3 -------------------------------------------------------------------------

Outcome sectional_geodesic_coincidence() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const FactorPoint a(gaussian(30, 4, 3000 + seed));
    const FactorPoint b(gaussian(30, 4, 4000 + seed));
    const DenseMatrix b_on_section = align_to(a.y(), b.y());
    const auto g = geodesic(a, b);
    for (int k = 0; k <= 32; ++k) {
      const double t = k / 32.0;
      const DenseMatrix sectional = (1.0 - t) * a.y() + t * b_on_section;
      worst = std::max(worst, matrix_rel(sectional, g.evaluate(t).y));
    }
  }
  return {worst <= 1e-10, "max rel gap: " + fmt("%.2e", worst)};
}

// 4 -------------------------------------------------------------------------

Outcome closed_form_1p() {
  double worst_t = 0.0;
  double worst_d = 0.0;
  int problems = 0;
  for (std::uint64_t seed = 0; problems < 100; ++seed) {
    const double scale = 1.0 / std::sqrt(20.0);
    const FactorPoint a(scale * gaussian(20, 3, 5000 + seed));
    const FactorPoint b(scale * gaussian(20, 3, 6000 + seed));
    const auto g = geodesic(a, b);
    std::mt19937_64 rng(seed);
    const DenseMatrix target =
        oracle::padded(g.factor(uniform(rng, 0.0, 1.0)), 4) + 0.3 * scale * gaussian(20, 4, 7000 + seed);
    const auto c = SampleCovariance::from_factor(target);
    const auto res = identify_1p(a, b, c);
    if (res.t[0] < -0.99 || res.t[0] > 1.99) continue;  // keep the optimum inside the scan
    ++problems;
    const auto f = [&](double t) { return squared_distance(g.factor(t), c); };
    const double t_scan = oracle::grid_argmin(f, -1.0, 2.0, 100000);
    worst_t = std::max(worst_t, std::abs(res.t[0] - t_scan));
    worst_d = std::max(worst_d, std::abs(res.distance - std::sqrt(f(t_scan))));
  }

  // Timing: one solve at n in {500, 1000, 2000}, r = 4.
  std::vector<double> log_n;
  std::vector<double> log_time;
  for (const Index n : {500, 1000, 2000}) {
    const FactorPoint a(gaussian(n, 4, 11));
    const FactorPoint b(gaussian(n, 4, 12));
    const auto c = SampleCovariance::from_factor(gaussian(n, 4, 13));
    double best = std::numeric_limits<double>::infinity();
    double sink = 0.0;
    for (int batch = 0; batch < 9; ++batch) {
      const auto start = std::chrono::steady_clock::now();
      for (int k = 0; k < 40; ++k) sink += identify_1p(a, b, c).distance;
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
      best = std::min(best, dt.count());
    }
    if (!std::isfinite(sink)) best = std::nan("");
    log_n.push_back(std::log(static_cast<double>(n)));
    log_time.push_back(std::log(best));
  }
  const double mx = std::accumulate(log_n.begin(), log_n.end(), 0.0) / 3.0;
  const double my = std::accumulate(log_time.begin(), log_time.end(), 0.0) / 3.0;
  double sxy = 0.0;
  double sxx = 0.0;
  for (int k = 0; k < 3; ++k) {
    sxy += (log_n[k] - mx) * (log_time[k] - my);
    sxx += (log_n[k] - mx) * (log_n[k] - mx);
  }
  const double exponent = sxy / sxx;
  return {worst_t <= 2e-5 && worst_d <= 1e-8 && std::abs(exponent - 1.0) <= 0.2,
          "max |dt| " + fmt("%.2e", worst_t) + ", max |dd| " + fmt("%.2e", worst_d) +
              ", time ~ n^" + fmt("%.2f", exponent)};
}

// 5 -------------------------------------------------------------------------

double grad_rel(const std::array<double, 2>& g, const std::array<double, 2>& fd) {
  const double diff = std::hypot(g[0] - fd[0], g[1] - fd[1]);
  return diff / std::max(std::hypot(fd[0], fd[1]), 1e-300);
}

Outcome gradient_fidelity() {
  constexpr double h = 1e-6;
  const SectionPolicy policies[] = {SectionPolicy::kOne, SectionPolicy::kArithm, SectionPolicy::kInductive};
  double worst_ls = 0.0;
  double worst_bs = 0.0;
  double worst_env = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::uint64_t seed = 8000 + static_cast<std::uint64_t>(k);
    const auto grid = testing::random_grid(3, 3, 12, 3, seed, 0.4);
    std::mt19937_64 rng(seed);
    const PatchIndex p{static_cast<Index>(k % 2), static_cast<Index>((k / 2) % 2)};
    const double u = uniform(rng, 0.05, 0.95);
    const double v = uniform(rng, 0.05, 0.95);
    const auto c = SampleCovariance::from_factor(oracle::padded(grid->at(1, 1).y(), 4) + 0.5 * gaussian(12, 4, seed + 1));

    const auto check = [&](const auto& surface) {
      const auto g = jet_gradient(surface.local_jet(p, u, v), c);
      const auto f = [&](double a, double b) { return squared_distance(surface.local_factor(p, a, b), c); };
      const std::array<double, 2> fd{(f(u + h, v) - f(u - h, v)) / (2 * h),
                                     (f(u, v + h) - f(u, v - h)) / (2 * h)};
      return grad_rel(g, fd);
    };
    worst_ls = std::max(worst_ls, check(LinearSectionSurface(grid, policies[k % 3])));
    worst_bs = std::max(worst_bs, check(BezierSectionSurface(grid, policies[k % 3])));

    const LinearGeodesicSurface lg(grid);
    const double g = lg_envelope_gradient(lg, p, u, c);
    const double fd = (lg_inner_optimum(lg, p, u + h, c).value - lg_inner_optimum(lg, p, u - h, c).value) / (2 * h);
    worst_env = std::max(worst_env, std::abs(g - fd) / std::max(std::abs(fd), 1e-300));
  }
  return {worst_ls <= 1e-4 && worst_bs <= 1e-4 && worst_env <= 1e-4,
          "max rel err: ls " + fmt("%.2e", worst_ls) + ", bs " + fmt("%.2e", worst_bs) +
              ", envelope " + fmt("%.2e", worst_env)};
}

// 6 -------------------------------------------------------------------------

Outcome sylvester_rate() {
  constexpr double h = 1e-5;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto grid = testing::random_grid(2, 2, 12, 3, 9000 + seed, 0.4);
    const LinearGeodesicSurface lg(grid);
    std::mt19937_64 rng(seed);
    const double u = uniform(rng, 0.1, 0.9);
    const DenseMatrix rate = lg.polar_rate({0, 0}, u, lg.slice({0, 0}, u));
    const DenseMatrix fd = (lg.slice({0, 0}, u + h).polar.q - lg.slice({0, 0}, u - h).polar.q) / (2 * h);
    worst = std::max(worst, (rate - fd).norm() / std::max(fd.norm(), 1e-300));
  }
  return {worst <= 1e-5, "max rel err: " + fmt("%.2e", worst)};
}

// 7 -------------------------------------------------------------------------

Outcome plant_and_recover() {
  bool pass = true;
  std::string detail;
  for (const auto& name : kMethods) {
    const MethodSpec m = MethodSpec::parse(name);
    const double tol = m.kind == SurfaceKind::kBezierGeodesic ? 1e-4 : 1e-6;
    int recovered = 0;
    int silent_failures = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      SyntheticFieldSpec spec;
      spec.n = 24;
      spec.r = 3;
      spec.seed = 100 + seed;
      spec.rho = 0.08;
      const auto problem = make_problem(SyntheticField(spec));
      const auto s = build_surface(problem.grid, m);
      std::mt19937_64 rng(seed);
      const double t1 = uniform(rng, 0.0, 4.0);
      const double t2 = uniform(rng, 0.0, 3.0);
      const auto res = identify(s, SampleCovariance::from_factor(s.evaluate(t1, t2).y));
      if (std::abs(res.t[0] - t1) <= tol && std::abs(res.t[1] - t2) <= tol) {
        ++recovered;
      } else if (res.converged) {
        ++silent_failures;
      }
    }
    pass = pass && recovered >= 95 && silent_failures == 0;
    detail += (detail.empty() ? "" : ", ") + name + " " + std::to_string(recovered) +
              (silent_failures ? " (" + std::to_string(silent_failures) + " silent)" : "");
  }
  return {pass, detail};
}

// 8 -------------------------------------------------------------------------

Outcome error_ordering() {
  const SyntheticFieldSpec spec;  // n = 200, r = 10, 5 x 4 nodes, 12 centre tests
  const auto problem = make_problem(SyntheticField(spec));
  const auto report = run_benchmark(problem, all_methods(), BenchMode::kIdentification);
  bool star_ok = true;
  double worst_bezier = 0.0;
  double best_first = std::numeric_limits<double>::infinity();
  std::string detail;
  for (const auto& a : report.averages) {
    star_ok = star_ok && a.e_star <= a.e;
    const bool bezier = a.method.rfind("b", 0) == 0;
    if (bezier) worst_bezier = std::max(worst_bezier, a.e);
    else best_first = std::min(best_first, a.e);
    detail += (detail.empty() ? "" : ", ") + a.method + " " + fmt("%.3g", a.e) + "/" + fmt("%.3g", a.e_star);
  }
  const bool pass = star_ok && problem.tests.size() == 12 && worst_bezier < best_first;
  return {pass, "avg E/E*: " + detail};
}

// 9 -------------------------------------------------------------------------

Outcome rank_psd() {
  const auto grid = testing::random_grid(4, 3, 20, 3, 42, 0.6);
  int flagged = 0;
  int violations = 0;
  int draws = 0;
  std::mt19937_64 rng(9);
  for (const auto& name : kMethods) {
    const auto s = build_surface(grid, MethodSpec::parse(name));
    for (int k = 0; k < 1250; ++k, ++draws) {
      const auto sample = s.evaluate(uniform(rng, 0.0, 3.0), uniform(rng, 0.0, 2.0));
      if (sample.y.cols() > grid->r()) ++violations;
      if (sample.degenerate) {
        ++flagged;
        continue;
      }
      const Eigen::JacobiSVD<DenseMatrix> svd(sample.y.transpose() * sample.y);
      if (!(svd.singularValues().minCoeff() > 0.0)) ++violations;
    }
  }
  return {violations == 0 && flagged * 1000 < draws,
          std::to_string(draws) + " draws, " + std::to_string(flagged) + " flagged degenerate, " +
              std::to_string(violations) + " violations"};
}

// 10 ------------------------------------------------------------------------

Outcome lowrank_distance() {
  double worst = 0.0;
  std::mt19937_64 rng(10);
  for (std::uint64_t k = 0; k < 200; ++k) {
    const Index n = std::uniform_int_distribution<Index>(1, 60)(rng);
    const Index r = std::uniform_int_distribution<Index>(1, n)(rng);
    const Index s = std::uniform_int_distribution<Index>(1, n)(rng);
    const DenseMatrix y = gaussian(n, r, 10000 + k);
    const DenseMatrix z = gaussian(n, s, 20000 + k);
    worst = std::max(worst, rel_err(frob_dist_sq_lowrank(y, z), oracle::dense_dist_sq(y, z)));
  }
  return {worst <= 1e-9, "max rel err: " + fmt("%.2e", worst)};
}

// 11 ------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome bench_determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "covfam_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "spec.json") << emit_spec_json(SyntheticFieldSpec{});

  const std::vector<std::string> threads{"1", "4", "4"};
  std::vector<std::string> outputs;
  for (std::size_t k = 0; k < threads.size(); ++k) {
    const fs::path out = dir / ("run" + std::to_string(k));
    std::ostringstream sink;
    const int code = run_cli({"bench", "--spec", (dir / "spec.json").string(), "--mode", "identify",
                              "--threads", threads[k], "--out", out.string()},
                             sink, sink);
    if (code != 0) {
      fs::remove_all(dir);
      return {false, "bench exited with " + std::to_string(code)};
    }
    outputs.push_back(slurp(out / "report.csv") + slurp(out / "report.json") + slurp(out / "averages.csv"));
  }
  fs::remove_all(dir);
  const bool threads_equal = outputs[0] == outputs[1];
  const bool repeat_equal = outputs[1] == outputs[2];
  return {threads_equal && repeat_equal && !outputs[0].empty(),
          std::string("1 vs 4 threads ") + (threads_equal ? "identical" : "differ") +
              ", repeated run " + (repeat_equal ? "identical" : "differ")};
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"geodesic endpoints", 5, geodesic_endpoints},
      {"representative invariance", 30, representative_invariance},
      {"sectional/geodesic coincidence", 10, sectional_geodesic_coincidence},
      {"closed-form 1p identification", 60, closed_form_1p},
      {"gradient fidelity", 60, gradient_fidelity},
      {"sylvester derivative", 10, sylvester_rate},
      {"plant and recover", 300, plant_and_recover},
      {"error ordering", 300, error_ordering},
      {"rank/psd", 120, rank_psd},
      {"low-rank distance", 5, lowrank_distance},
      {"bench determinism", 120, bench_determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto& c = criteria[k];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    const bool in_time = dt.count() < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %2zu %s: %s [%.2fs of %.0fs%s]\n", pass ? "PASS" : "FAIL", k + 1, c.name,
                o.detail.c_str(), dt.count(), c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
