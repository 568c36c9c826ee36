#include "covfam/identify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "covfam/errors.hpp"
#include "covfam/parallel.hpp"
#include "descent.hpp"

namespace covfam {

SampleCovariance SampleCovariance::from_samples(const DenseMatrix& samples) {
  require_finite(samples, "samples");
  const Index q = samples.cols();
  if (q == 0) {
    throw Error(ErrorCode::kInvalidArgument, "no samples");
  }
  DenseMatrix factor = samples / std::sqrt(static_cast<double>(q));
  if (q > samples.rows()) {
    // C = U S^2 U^T; keep all n singular directions, zero ones included.
    Eigen::JacobiSVD<DenseMatrix> svd(factor, Eigen::ComputeThinU);
    factor = svd.matrixU() * svd.singularValues().asDiagonal();
  }
  return {std::move(factor), q};
}

SampleCovariance SampleCovariance::from_factor(DenseMatrix factor, Index sample_count) {
  require_finite(factor, "sample covariance factor");
  return {std::move(factor), sample_count};
}

SampleCovariance SampleCovariance::from_point(const FactorPoint& p) { return {p.y(), 0}; }

double Quartic::operator()(double t) const {
  return (((c[4] * t + c[3]) * t + c[2]) * t + c[1]) * t + c[0];
}

CubicCoefficients Quartic::derivative() const {
  return {4.0 * c[4], 3.0 * c[3], 2.0 * c[2], c[1]};
}

Quartic line_distance_quartic(const DenseMatrix& y, const DenseMatrix& dir, const DenseMatrix& target) {
  if (y.rows() != dir.rows() || y.cols() != dir.cols() || target.rows() != y.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "quartic operands differ in shape");
  }
  // ||P P^T||^2 with P^T P = g0 + t g1 + t^2 g2, and ||P^T Z||^2 = ||a + t b||^2.
  const DenseMatrix cross = y.transpose() * dir;
  const DenseMatrix g0 = y.transpose() * y;
  const DenseMatrix g1 = cross + cross.transpose();
  const DenseMatrix g2 = dir.transpose() * dir;
  const DenseMatrix a = y.transpose() * target;
  const DenseMatrix b = dir.transpose() * target;
  const double zz = (target.transpose() * target).squaredNorm();

  Quartic q;
  q.c[0] = g0.squaredNorm() - 2.0 * a.squaredNorm() + zz;
  q.c[1] = 2.0 * frob_inner(g0, g1) - 4.0 * frob_inner(a, b);
  q.c[2] = g1.squaredNorm() + 2.0 * frob_inner(g0, g2) - 2.0 * b.squaredNorm();
  q.c[3] = 2.0 * frob_inner(g1, g2);
  q.c[4] = g2.squaredNorm();
  return q;
}

double argmin_quartic(const Quartic& q, bool bounded, double lo, double hi) {
  std::vector<double> candidates;
  try {
    candidates = cubic_real_roots(q.derivative());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateCubic) {
      throw;
    }
    candidates.clear();  // constant objective
  }
  if (bounded) {
    for (double& t : candidates) {
      t = std::clamp(t, lo, hi);
    }
    candidates.push_back(lo);
    candidates.push_back(hi);
  }
  if (candidates.empty()) {
    return bounded ? lo : 0.0;
  }
  std::sort(candidates.begin(), candidates.end());
  double best_t = candidates.front();
  double best_f = q(best_t);
  for (double t : candidates) {
    const double f = q(t);
    const double tie = 1e-12 * std::max({1.0, std::abs(f), std::abs(best_f)});
    if (f < best_f - tie) {
      best_f = f;
      best_t = t;
    }
  }
  return best_t;
}

double squared_distance(const DenseMatrix& y, const SampleCovariance& c_hat) {
  return frob_dist_sq_lowrank(y, c_hat.factor);
}

std::array<double, 2> jet_gradient(const FactorJet& jet, const SampleCovariance& c_hat) {
  // d||Y^T Y||^2 = 4 <Y^T Y, Y^T dY>,  d||Z^T Y||^2 = 2 <Z^T Y, Z^T dY>.
  const DenseMatrix gram = jet.y.transpose() * jet.y;
  const DenseMatrix zy = c_hat.factor.transpose() * jet.y;
  auto partial = [&](const DenseMatrix& dy) {
    return 4.0 * frob_inner(gram, jet.y.transpose() * dy) -
           4.0 * frob_inner(zy, c_hat.factor.transpose() * dy);
  };
  return {partial(jet.d1), partial(jet.d2)};
}

InnerOptimum lg_inner_optimum(const LinearGeodesicSurface& surface, PatchIndex p, double u,
                              const SampleCovariance& c_hat, bool constrain_t2) {
  const auto s = surface.slice(p, u);
  const Quartic q = line_distance_quartic(s.lower, s.direction, c_hat.factor);
  InnerOptimum out;
  out.t2 = argmin_quartic(q, constrain_t2, 0.0, 1.0);
  out.value = squared_distance(s.lower + out.t2 * s.direction, c_hat);
  return out;
}

double lg_envelope_gradient(const LinearGeodesicSurface& surface, PatchIndex p, double u,
                            const SampleCovariance& c_hat, bool constrain_t2) {
  const auto s = surface.slice(p, u);
  const Quartic q = line_distance_quartic(s.lower, s.direction, c_hat.factor);
  const double v = argmin_quartic(q, constrain_t2, 0.0, 1.0);
  const auto& patch = surface.patch(p);
  const DenseMatrix q_rate = surface.polar_rate(p, u, s);
  const DenseMatrix aligned_rate =
      (patch.y11 - patch.y01) * s.polar.q.transpose() + s.upper * q_rate.transpose();
  FactorJet jet;
  jet.y = s.lower + v * s.direction;
  jet.d1 = (1.0 - v) * (patch.y10 - patch.y00) + v * aligned_rate;
  jet.d2 = s.direction;
  return jet_gradient(jet, c_hat)[0];
}

IdentificationResult identify_1p(const FactorPoint& a, const FactorPoint& b,
                                 const SampleCovariance& c_hat) {
  const DenseMatrix velocity = log_map(a, b);
  const Quartic q = line_distance_quartic(a.y(), velocity, c_hat.factor);
  IdentificationResult out;
  const double t = argmin_quartic(q);
  out.t = {t};
  out.distance = std::sqrt(squared_distance(a.y() + t * velocity, c_hat));
  out.iterations = 1;
  out.converged = true;
  return out;
}

namespace {

using Vec = Eigen::VectorXd;

detail::DescentOptions descent_options(const IdentifyOptions& o) {
  return {o.max_iters, o.grad_tol, o.armijo, o.shrink};
}

struct PatchRun {
  PatchIndex patch;
  Vec local;  // optimum in local coordinates (t2 may leave [0, 1] for lg)
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/// Local starting points of a patch: its center plus any extra start located there.
std::vector<Vec> starts_for(const AnchorGrid& grid, PatchIndex p, const IdentifyOptions& options,
                            int dims) {
  std::vector<Vec> starts;
  starts.push_back(Vec::Constant(dims, 0.5));
  for (const auto& s : options.extra_starts) {
    if (grid.locate(s[0], s[1]) == p) {
      Vec x(dims);
      x(0) = std::clamp(s[0] - static_cast<double>(p.l), 0.0, 1.0);
      if (dims > 1) {
        x(1) = std::clamp(s[1] - static_cast<double>(p.m), 0.0, 1.0);
      }
      starts.push_back(x);
    }
  }
  return starts;
}

/// Runs `solve` on every patch (possibly in parallel) and keeps the best,
/// ties going to the lower patch index.
template <class Solve>
IdentificationResult best_over_patches(const AnchorGrid& grid, const IdentifyOptions& options,
                                       Solve&& solve) {
  const Index p2 = grid.patches2();
  const Index count = grid.patches1() * p2;
  std::vector<PatchRun> runs(static_cast<std::size_t>(count));
  parallel_for(count, resolve_threads(options.threads), [&](std::ptrdiff_t k) {
    const PatchIndex p{static_cast<Index>(k) / p2, static_cast<Index>(k) % p2};
    runs[static_cast<std::size_t>(k)] = solve(p);
  });

  std::size_t best = 0;
  bool all_converged = true;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    all_converged = all_converged && runs[k].converged;
    if (runs[k].value < runs[best].value) {
      best = k;
    }
  }
  const PatchRun& run = runs[best];
  IdentificationResult out;
  if (!std::isfinite(run.value)) {
    throw Error(ErrorCode::kCutLocus, "objective undefined on every patch");
  }
  out.patch = run.patch;
  out.t = {static_cast<double>(run.patch.l) + run.local(0),
           static_cast<double>(run.patch.m) + run.local(1)};
  out.distance = std::sqrt(std::max(0.0, run.value));
  out.iterations = run.iterations;
  out.converged = all_converged;
  return out;
}

/// Multi-start descent inside one patch.
PatchRun descend_patch(PatchIndex p, const std::vector<Vec>& starts, const detail::Objective& f,
                       const detail::Gradient& g, const Vec& lower, const Vec& upper,
                       const detail::DescentOptions& options) {
  PatchRun best;
  best.patch = p;
  best.local = starts.front();
  bool first = true;
  for (const Vec& start : starts) {
    const detail::DescentResult r = detail::projected_descent(f, g, start, lower, upper, options);
    if (first || r.value < best.value) {
      best.local = r.x;
      best.value = r.value;
      best.iterations = r.iterations;
      best.converged = r.converged;
      first = false;
    }
  }
  return best;
}

template <class Surface>
const Surface& require_impl(const CovarianceSurface& surface, const char* name) {
  const auto* impl = std::get_if<Surface>(&surface.impl());
  if (impl == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, std::string("surface is not ") + name);
  }
  return *impl;
}

template <class Surface>
IdentificationResult identify_with_jets(const CovarianceSurface& surface, const Surface& impl,
                                        const SampleCovariance& c_hat,
                                        const IdentifyOptions& options) {
  const auto dopts = descent_options(options);
  const Vec lower = Vec::Zero(2);
  const Vec upper = Vec::Ones(2);
  return best_over_patches(surface.grid(), options, [&](PatchIndex p) {
    auto f = [&](const Vec& x) { return squared_distance(impl.local_factor(p, x(0), x(1)), c_hat); };
    auto g = [&](const Vec& x) {
      const auto grad = jet_gradient(impl.local_jet(p, x(0), x(1)), c_hat);
      return Vec{{grad[0], grad[1]}};
    };
    return descend_patch(p, starts_for(surface.grid(), p, options, 2), f, g, lower, upper, dopts);
  });
}

}  // namespace

IdentificationResult identify_ls(const CovarianceSurface& surface, const SampleCovariance& c_hat,
                                 const IdentifyOptions& options) {
  const auto& impl = require_impl<LinearSectionSurface>(surface, "first-order sectional");
  return identify_with_jets(surface, impl, c_hat, options);
}

IdentificationResult identify_lg(const CovarianceSurface& surface, const SampleCovariance& c_hat,
                                 const IdentifyOptions& options) {
  const auto& impl = require_impl<LinearGeodesicSurface>(surface, "first-order geodesic");
  const auto dopts = descent_options(options);
  const Vec lower = Vec::Zero(1);
  const Vec upper = Vec::Ones(1);
  return best_over_patches(surface.grid(), options, [&](PatchIndex p) {
    auto f = [&](const Vec& x) {
      return lg_inner_optimum(impl, p, x(0), c_hat, options.constrain_t2).value;
    };
    auto g = [&](const Vec& x) {
      return Vec::Constant(1, lg_envelope_gradient(impl, p, x(0), c_hat, options.constrain_t2));
    };
    PatchRun run =
        descend_patch(p, starts_for(surface.grid(), p, options, 1), f, g, lower, upper, dopts);
    Vec local(2);
    local(0) = run.local(0);
    try {
      local(1) = lg_inner_optimum(impl, p, run.local(0), c_hat, options.constrain_t2).t2;
    } catch (const Error&) {
      local(1) = 0.5;
      run.value = std::numeric_limits<double>::infinity();
      run.converged = false;
    }
    run.local = local;
    return run;
  });
}

IdentificationResult identify_bs(const CovarianceSurface& surface, const SampleCovariance& c_hat,
                                 const IdentifyOptions& options) {
  const auto& impl = require_impl<BezierSectionSurface>(surface, "Bezier sectional");
  IdentificationResult best = identify_with_jets(surface, impl, c_hat, options);

  // The composite surface is C^1, so also descend over the whole domain.
  const AnchorGrid& grid = surface.grid();
  const Vec lower = Vec::Zero(2);
  const Vec upper{{static_cast<double>(grid.patches1()), static_cast<double>(grid.patches2())}};
  auto f = [&](const Vec& x) {
    const PatchIndex p = grid.locate(x(0), x(1));
    return squared_distance(impl.local_factor(p, x(0) - p.l, x(1) - p.m), c_hat);
  };
  auto g = [&](const Vec& x) {
    const PatchIndex p = grid.locate(x(0), x(1));
    const auto grad = jet_gradient(impl.local_jet(p, x(0) - p.l, x(1) - p.m), c_hat);
    return Vec{{grad[0], grad[1]}};
  };
  const std::array<Vec, 2> starts{Vec{{best.t[0], best.t[1]}}, 0.5 * upper};
  const double best_value = best.distance * best.distance;
  double value = best_value;
  for (const Vec& start : starts) {
    const auto r = detail::projected_descent(f, g, start, lower, upper, descent_options(options));
    if (r.value < value - 1e-12 * std::max(1.0, value)) {
      value = r.value;
      best.t = {r.x(0), r.x(1)};
      best.patch = grid.locate(r.x(0), r.x(1));
      best.distance = std::sqrt(std::max(0.0, r.value));
      best.iterations = r.iterations;
    }
  }
  return best;
}

IdentificationResult identify_bg(const CovarianceSurface& surface, const SampleCovariance& c_hat,
                                 const IdentifyOptions& options) {
  const auto& impl = require_impl<BezierGeodesicSurface>(surface, "Bezier geodesic");
  const auto dopts = descent_options(options);
  const Vec lower = Vec::Zero(2);
  const Vec upper = Vec::Ones(2);
  return best_over_patches(surface.grid(), options, [&](PatchIndex p) {
    auto f = [&](const Vec& x) { return squared_distance(impl.local_factor(p, x(0), x(1)), c_hat); };
    auto g = [&](const Vec& x) {
      Vec grad(2);
      const double origin[2] = {static_cast<double>(p.l), static_cast<double>(p.m)};
      for (int k = 0; k < 2; ++k) {
        const double h = 1e-6 * (1.0 + std::abs(origin[k] + x(k)));
        Vec plus = x;
        Vec minus = x;
        plus(k) += h;
        minus(k) -= h;
        grad(k) = (f(plus) - f(minus)) / (2.0 * h);
      }
      return grad;
    };
    return descend_patch(p, starts_for(surface.grid(), p, options, 2), f, g, lower, upper, dopts);
  });
}

IdentificationResult identify(const CovarianceSurface& surface, const SampleCovariance& c_hat,
                              const IdentifyOptions& options) {
  switch (surface.kind()) {
    case SurfaceKind::kLinearSection: return identify_ls(surface, c_hat, options);
    case SurfaceKind::kLinearGeodesic: return identify_lg(surface, c_hat, options);
    case SurfaceKind::kBezierSection: return identify_bs(surface, c_hat, options);
    case SurfaceKind::kBezierGeodesic: return identify_bg(surface, c_hat, options);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown surface kind");
}

}  // namespace covfam
