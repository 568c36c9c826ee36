#include "covfam/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "covfam/bench.hpp"
#include "covfam/errors.hpp"
#include "covfam/io.hpp"

namespace covfam {

namespace fs = std::filesystem;

namespace {

/// Bad flag values; reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) {
        throw std::invalid_argument(item);
      }
    } catch (const std::exception&) {
      throw UsageError(std::string("cannot parse ") + what + " '" + text + "'");
    }
  }
  return values;
}

std::array<double, 2> parse_range(const std::string& text, const char* what) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    throw UsageError(std::string(what) + " must look like a..b");
  }
  const auto lo = parse_list(text.substr(0, dots), what);
  const auto hi = parse_list(text.substr(dots + 2), what);
  if (lo.size() != 1 || hi.size() != 1) {
    throw UsageError(std::string(what) + " must look like a..b");
  }
  return {lo[0], hi[0]};
}

/// `AxB` counts grid nodes. Two-parameter grids need at least 2 x 2 nodes;
/// A x 1 describes a one-parameter family.
std::array<Index, 2> parse_grid_shape(const std::string& text) {
  const auto x = text.find('x');
  Index a = 0;
  Index b = 0;
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used_a = 0;
    std::size_t used_b = 0;
    a = std::stol(text.substr(0, x), &used_a);
    b = std::stol(text.substr(x + 1), &used_b);
    if (used_a != x || used_b != text.size() - x - 1) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw UsageError("--grid must look like N1xN2, got '" + text + "'");
  }
  if (a < 2 || b < 1 || (b == 1 && a < 2)) {
    throw UsageError("--grid counts nodes and requires at least 2x2 (or Nx1 with N >= 2), got '" +
                     text + "'");
  }
  return {a, b};
}

MethodSpec parse_method(const std::string& method, const std::string& section) {
  MethodSpec spec;
  try {
    spec = MethodSpec::parse(method);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const bool has_inline = method.find(':') != std::string::npos;
  if (!section.empty()) {
    if (!spec.sectional()) {
      throw UsageError("--section applies only to ls and bs");
    }
    if (has_inline) {
      throw UsageError("give the section either inline or with --section, not both");
    }
    try {
      spec.section = parse_section_policy(section);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  } else if (spec.sectional() && !has_inline) {
    throw UsageError("method '" + method + "' needs --section {one,arithm,inductive}");
  }
  return spec;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string json_number(double v) { return std::isfinite(v) ? format_double(v) : "null"; }

// ---------------------------------------------------------------------------

struct GenArgs {
  Index n = 200;
  Index r = 10;
  std::string grid = "5x4";
  std::string theta_range = "0..22.5";
  std::string w_range = "4..13";
  std::uint64_t seed = 1;
  double rho = SyntheticFieldSpec{}.rho;
  double eta = SyntheticFieldSpec{}.eta;
  std::string out;
  bool noisy = false;
  Index samples = 0;
  std::string preset;
  std::string test_layout = "centers";
};

int cmd_gen(const GenArgs& a, const CLI::App& app, std::ostream& out) {
  SyntheticFieldSpec spec;
  if (!a.preset.empty()) {
    if (a.preset != "wind") {
      throw UsageError("unknown preset '" + a.preset + "'");
    }
    spec = SyntheticFieldSpec::wind();
  }
  auto given = [&](const char* name) { return app.count(name) > 0 || a.preset.empty(); };
  if (given("--n")) spec.n = a.n;
  if (given("--r")) spec.r = a.r;
  if (given("--grid")) {
    const auto shape = parse_grid_shape(a.grid);
    spec.nodes1 = shape[0];
    spec.nodes2 = shape[1];
  }
  if (given("--theta-range")) {
    const auto range = parse_range(a.theta_range, "--theta-range");
    spec.theta_min = range[0];
    spec.theta_max = range[1];
  }
  if (given("--w-range")) {
    const auto range = parse_range(a.w_range, "--w-range");
    spec.w_min = range[0];
    spec.w_max = range[1];
  }
  if (given("--test-layout")) {
    try {
      spec.test_layout = parse_test_layout(a.test_layout);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  spec.seed = a.seed;
  spec.rho = a.rho;
  spec.eta = a.eta;
  if (a.noisy != (a.samples > 0)) {
    throw UsageError("--noisy and --samples q go together");
  }
  spec.samples = a.samples;
  try {
    spec.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  const SyntheticField field(spec);
  const BenchProblem problem = make_problem(field);
  const fs::path dir(a.out);
  write_grid(dir, *problem.grid);
  write_file(dir / "spec.json", emit_spec_json(spec));
  out << (dir / "grid.json").string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string grid;
  std::string method;
  std::string section;
  std::string t;
  std::string label;
  std::string out;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  if (a.t.empty() == a.label.empty()) {
    throw UsageError("give exactly one of --t and --label");
  }
  const MethodSpec method = parse_method(a.method, a.section);
  auto grid = std::make_shared<const AnchorGrid>(read_grid(a.grid));

  std::array<double, 2> t{0.0, 0.0};
  if (!a.t.empty()) {
    const auto v = parse_list(a.t, "--t");
    if (v.empty() || v.size() > 2 || (v.size() == 1 && !grid->one_parameter())) {
      throw UsageError("--t takes t1,t2 (or a single t on a one-parameter grid)");
    }
    t = {v[0], v.size() > 1 ? v[1] : 0.0};
  } else {
    const auto v = parse_list(a.label, "--label");
    if (v.size() != 2) {
      throw UsageError("--label takes theta,W");
    }
    t = grid->label_map().to_params(v[0], v[1]);
  }
  if (grid->one_parameter()) {
    t[1] = 0.0;
  }
  if (!grid->in_domain(t[0], t[1])) {
    err << "warning: extrapolation outside [0," << grid->patches1() << "]x[0," << grid->patches2()
        << "]\n";
  }

  FactorSample sample;
  if (grid->one_parameter()) {
    const PatchIndex p = grid->locate(t[0], 0.0);
    sample = eval_geodesic_1p(grid->at(p.l, 0), grid->at(p.l + 1, 0), t[0] - static_cast<double>(p.l));
  } else {
    sample = build_surface(grid, method).evaluate(t[0], t[1]);
  }
  err << "rank: " << (sample.degenerate ? "degenerate" : "full") << '\n';

  const auto labels = grid->label_map().to_labels(t[0], t[1]);
  write_factor_file(a.out, {sample.y, FactorLabel{labels[0], labels[1]}});
  out << factor_stem(a.out).string() << ".json\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct IdentifyArgs {
  std::string grid;
  std::string method;
  std::string section;
  std::string target;
  std::string samples;
  int threads = 0;
  bool free_t2 = false;
};

SampleCovariance load_target(const IdentifyArgs& a) {
  if (a.target.empty() == a.samples.empty()) {
    throw UsageError("give exactly one of --target and --samples");
  }
  fs::path path = a.target.empty() ? fs::path(a.samples) : fs::path(a.target);
  if (fs::is_directory(path)) {
    const FactorFile raw = read_factor_file(path / "samples");
    return SampleCovariance::from_samples(raw.factor);
  }
  if (!a.samples.empty()) {
    throw Error(ErrorCode::kIo, "--samples must name a directory holding samples.json/.bin");
  }
  return SampleCovariance::from_factor(read_factor_file(path).factor);
}

IdentificationResult identify_on_segments(const AnchorGrid& grid, const SampleCovariance& c_hat) {
  IdentificationResult best;
  best.distance = std::numeric_limits<double>::infinity();
  for (Index l = 0; l < grid.patches1(); ++l) {
    IdentificationResult r = identify_1p(grid.at(l, 0), grid.at(l + 1, 0), c_hat);
    if (r.distance < best.distance) {
      best = r;
      best.t[0] += static_cast<double>(l);
      best.patch = {l, 0};
    }
  }
  return best;
}

int cmd_identify(const IdentifyArgs& a, std::ostream& out) {
  const auto grid = std::make_shared<const AnchorGrid>(read_grid(a.grid));
  const SampleCovariance c_hat = load_target(a);
  if (c_hat.factor.rows() != grid->n()) {
    throw Error(ErrorCode::kShapeMismatch, "target dimension does not match the grid");
  }

  IdentificationResult result;
  if (grid->one_parameter()) {
    result = identify_on_segments(*grid, c_hat);
  } else {
    const MethodSpec method = parse_method(a.method, a.section);
    IdentifyOptions options;
    options.threads = a.threads;
    options.constrain_t2 = !a.free_t2;
    result = identify(build_surface(grid, method), c_hat, options);
  }

  out << "{\"t\": [";
  for (std::size_t k = 0; k < result.t.size(); ++k) {
    out << (k ? ", " : "") << json_number(result.t[k]);
  }
  out << "], \"distance\": " << json_number(result.distance) << ", \"patch\": [" << result.patch.l
      << ", " << result.patch.m << "], \"iterations\": " << result.iterations
      << ", \"converged\": " << (result.converged ? "true" : "false") << "}\n";
  return result.converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string spec;
  std::string preset;
  std::string methods = "ls:one,ls:arithm,ls:inductive,lg,bs:one,bs:arithm,bs:inductive,bg";
  std::string mode = "interp";
  std::string out;
  int threads = 0;
  bool free_t2 = false;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  if (a.spec.empty() == a.preset.empty()) {
    throw UsageError("give exactly one of --spec and --preset");
  }
  SyntheticFieldSpec spec;
  if (!a.preset.empty()) {
    if (a.preset != "wind") {
      throw UsageError("unknown preset '" + a.preset + "'");
    }
    spec = SyntheticFieldSpec::wind();
  } else {
    try {
      spec = parse_spec_json(read_file(a.spec));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kIo) throw;
      throw UsageError(e.what());
    }
  }
  BenchMode mode;
  try {
    mode = parse_bench_mode(a.mode);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  std::vector<MethodSpec> methods;
  std::stringstream ss(a.methods);
  std::string item;
  while (std::getline(ss, item, ',')) {
    methods.push_back(parse_method(item, ""));
  }
  if (methods.empty()) {
    throw UsageError("--methods is empty");
  }

  BenchOptions options;
  options.threads = a.threads;
  options.identify.constrain_t2 = !a.free_t2;
  const ErrorReport report = run_benchmark(make_problem(SyntheticField(spec)), methods, mode, options);

  const fs::path dir(a.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  }
  write_file(dir / "report.csv", emit_report(report, ReportFormat::kCsv));
  write_file(dir / "report.json", emit_report(report, ReportFormat::kJson));
  const std::string averages = emit_averages_csv(report);
  write_file(dir / "averages.csv", averages);
  out << averages;

  std::size_t usable = 0;
  for (const auto& rec : report.records) {
    if (rec.status == "ok" || rec.status == "not_converged") {
      ++usable;
    } else {
      err << "record " << rec.method << " (" << format_double(rec.theta) << ", "
          << format_double(rec.w) << "): " << rec.status << '\n';
    }
  }
  return usable > 0 || report.records.empty() ? kExitOk : kExitFailure;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kIo: return kExitIo;
    case ErrorCode::kCutLocus: return kExitCutLocus;
    case ErrorCode::kInvalidArgument: return kExitUsage;
    default: return kExitFailure;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low-rank covariance families: generation, evaluation, identification, benchmarks"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "write a synthetic anchor grid");
  g->add_option("--n", gen.n, "ambient dimension");
  g->add_option("--r", gen.r, "rank");
  g->add_option("--grid", gen.grid, "training nodes N1xN2");
  g->add_option("--theta-range", gen.theta_range, "theta labels a..b");
  g->add_option("--w-range", gen.w_range, "W labels a..b");
  g->add_option("--seed", gen.seed, "random seed");
  g->add_option("--rho", gen.rho, "rotation rate per unit theta");
  g->add_option("--eta", gen.eta, "scale rate per unit W");
  g->add_option("--test-layout", gen.test_layout, "centers or interleaved (recorded in spec.json)");
  g->add_option("--out", gen.out, "output directory")->required();
  g->add_flag("--noisy", gen.noisy, "store sample covariances instead of exact anchors");
  g->add_option("--samples", gen.samples, "samples per anchor in noisy mode");
  g->add_option("--preset", gen.preset, "wind: n=3024, r=20, 5x4 nodes");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "evaluate a surface");
  e->add_option("--grid", eval.grid, "grid manifest")->required();
  e->add_option("--method", eval.method, "ls, lg, bs or bg")->required();
  e->add_option("--section", eval.section, "one, arithm or inductive");
  e->add_option("--t", eval.t, "surface parameters t1,t2");
  e->add_option("--label", eval.label, "physical labels theta,W");
  e->add_option("--out", eval.out, "output factor file")->required();

  IdentifyArgs ident;
  auto* i = app.add_subcommand("identify", "minimum-distance parameter identification");
  i->add_option("--grid", ident.grid, "grid manifest")->required();
  i->add_option("--method", ident.method, "ls, lg, bs or bg");
  i->add_option("--section", ident.section, "one, arithm or inductive");
  i->add_option("--target", ident.target, "factor file, or a directory with samples.json/.bin");
  i->add_option("--samples", ident.samples, "directory with samples.json/.bin (n x q)");
  i->add_option("--threads", ident.threads, "worker threads");
  i->add_flag("--free-t2", ident.free_t2, "let the inner lg optimum leave the patch");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "interpolation/identification error benchmark");
  b->add_option("--spec", bench.spec, "spec JSON");
  b->add_option("--preset", bench.preset, "wind");
  b->add_option("--methods", bench.methods, "comma-separated method list");
  b->add_option("--mode", bench.mode, "interp or identify");
  b->add_option("--out", bench.out, "output directory")->required();
  b->add_option("--threads", bench.threads, "worker threads");
  b->add_flag("--free-t2", bench.free_t2, "let the inner lg optimum leave the patch");

  std::vector<const char*> argv{"covfam"};
  for (const auto& s : args) {
    argv.push_back(s.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, *g, out);
    if (e->parsed()) return cmd_eval(eval, out, err);
    if (i->parsed()) {
      if (ident.method.empty() && !read_grid(ident.grid).one_parameter()) {
        throw UsageError("--method is required for two-parameter grids");
      }
      return cmd_identify(ident, out);
    }
    if (b->parsed()) return cmd_bench(bench, out, err);
  } catch (const UsageError& ue) {
    err << "error: " << ue.what() << '\n';
    return kExitUsage;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return exit_code_for(ex);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace covfam
