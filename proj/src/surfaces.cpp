#include "covfam/surfaces.hpp"

#include <cmath>

#include "covfam/errors.hpp"

namespace covfam {

const char* to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::kLinearSection: return "ls";
    case SurfaceKind::kLinearGeodesic: return "lg";
    case SurfaceKind::kBezierSection: return "bs";
    case SurfaceKind::kBezierGeodesic: return "bg";
  }
  return "?";
}

const char* to_string(SectionPolicy policy) {
  switch (policy) {
    case SectionPolicy::kOne: return "one";
    case SectionPolicy::kArithm: return "arithm";
    case SectionPolicy::kInductive: return "inductive";
  }
  return "?";
}

SectionPolicy parse_section_policy(std::string_view text) {
  if (text == "one") return SectionPolicy::kOne;
  if (text == "arithm") return SectionPolicy::kArithm;
  if (text == "inductive") return SectionPolicy::kInductive;
  throw Error(ErrorCode::kInvalidArgument, "unknown section policy '" + std::string(text) + "'");
}

std::string MethodSpec::name() const {
  std::string out = to_string(kind);
  if (sectional()) {
    out += ":";
    out += to_string(section);
  }
  return out;
}

MethodSpec MethodSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  MethodSpec spec;
  if (head == "ls") {
    spec.kind = SurfaceKind::kLinearSection;
  } else if (head == "lg") {
    spec.kind = SurfaceKind::kLinearGeodesic;
  } else if (head == "bs") {
    spec.kind = SurfaceKind::kBezierSection;
  } else if (head == "bg") {
    spec.kind = SurfaceKind::kBezierGeodesic;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown method '" + std::string(text) + "'");
  }
  if (colon != std::string_view::npos) {
    if (!spec.sectional()) {
      throw Error(ErrorCode::kInvalidArgument, "method '" + std::string(head) + "' takes no section");
    }
    spec.section = parse_section_policy(text.substr(colon + 1));
  }
  return spec;
}

std::vector<MethodSpec> all_methods() {
  using K = SurfaceKind;
  using S = SectionPolicy;
  return {{K::kLinearSection, S::kOne},   {K::kLinearSection, S::kArithm},
          {K::kLinearSection, S::kInductive}, {K::kLinearGeodesic, S::kOne},
          {K::kBezierSection, S::kOne},   {K::kBezierSection, S::kArithm},
          {K::kBezierSection, S::kInductive}, {K::kBezierGeodesic, S::kOne}};
}

PatchCorners corners_of(const AnchorGrid& grid, PatchIndex p) {
  if (p.l < 0 || p.l >= grid.patches1() || p.m < 0 || p.m >= grid.patches2()) {
    throw Error(ErrorCode::kInvalidArgument, "patch index out of range");
  }
  return {grid.at(p.l, p.m), grid.at(p.l, p.m + 1), grid.at(p.l + 1, p.m),
          grid.at(p.l + 1, p.m + 1)};
}

FactorSample eval_geodesic_1p(const FactorPoint& a, const FactorPoint& b, double t) {
  return geodesic(a, b).evaluate(t);
}

FactorPoint patch_section_base(const PatchCorners& c, SectionPolicy policy) {
  switch (policy) {
    case SectionPolicy::kOne:
      return c.c00;
    case SectionPolicy::kArithm: {
      const std::array<FactorPoint, 4> pts{c.c00, c.c10, c.c01, c.c11};
      return arithmetic_mean(pts, c.c00.r());
    }
    case SectionPolicy::kInductive: {
      const std::array<FactorPoint, 4> pts{c.c00, c.c10, c.c01, c.c11};
      return inductive_mean(pts);
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown section policy");
}

namespace {

DenseMatrix bilinear(const DenseMatrix& y00, const DenseMatrix& y01, const DenseMatrix& y10,
                     const DenseMatrix& y11, double u, double v) {
  return (1.0 - u) * (1.0 - v) * y00 + (1.0 - u) * v * y01 + u * (1.0 - v) * y10 + u * v * y11;
}

}  // namespace

FactorSample eval_ls_patch(const PatchCorners& c, SectionPolicy policy, double t1, double t2) {
  const FactorPoint base = patch_section_base(c, policy);
  const DenseMatrix& b = base.y();
  return make_sample(bilinear(align_to(b, c.c00.y()), align_to(b, c.c01.y()),
                              align_to(b, c.c10.y()), align_to(b, c.c11.y()), t1, t2));
}

FactorSample eval_lg_patch(const PatchCorners& c, double t1, double t2) {
  const FactorSample lower = geodesic(c.c00, c.c10).evaluate(t1);
  const FactorSample upper = geodesic(c.c01, c.c11).evaluate(t1);
  return make_sample(lower.y + t2 * log_map(lower.y, upper.y));
}

// ---------------------------------------------------------------------------

LinearSectionSurface::LinearSectionSurface(std::shared_ptr<const AnchorGrid> grid,
                                           SectionPolicy policy)
    : grid_(std::move(grid)), policy_(policy) {
  if (grid_->patches2() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "two-parameter surfaces need at least 2x2 nodes");
  }
  patches_.reserve(static_cast<std::size_t>(grid_->patches1() * grid_->patches2()));
  for (Index l = 0; l < grid_->patches1(); ++l) {
    for (Index m = 0; m < grid_->patches2(); ++m) {
      const PatchCorners c = corners_of(*grid_, {l, m});
      const FactorPoint base = patch_section_base(c, policy_);
      patches_.push_back({align_to(base.y(), c.c00.y()), align_to(base.y(), c.c01.y()),
                          align_to(base.y(), c.c10.y()), align_to(base.y(), c.c11.y())});
    }
  }
}

std::size_t LinearSectionSurface::index(PatchIndex p) const {
  return static_cast<std::size_t>(p.l * grid_->patches2() + p.m);
}

DenseMatrix LinearSectionSurface::local_factor(PatchIndex p, double u, double v) const {
  const Patch& q = patch(p);
  return bilinear(q.y00, q.y01, q.y10, q.y11, u, v);
}

FactorJet LinearSectionSurface::local_jet(PatchIndex p, double u, double v) const {
  const Patch& q = patch(p);
  FactorJet jet;
  jet.y = bilinear(q.y00, q.y01, q.y10, q.y11, u, v);
  jet.d1 = (1.0 - v) * (q.y10 - q.y00) + v * (q.y11 - q.y01);
  jet.d2 = (1.0 - u) * (q.y01 - q.y00) + u * (q.y11 - q.y10);
  return jet;
}

// ---------------------------------------------------------------------------

LinearGeodesicSurface::LinearGeodesicSurface(std::shared_ptr<const AnchorGrid> grid)
    : grid_(std::move(grid)) {
  if (grid_->patches2() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "two-parameter surfaces need at least 2x2 nodes");
  }
  patches_.reserve(static_cast<std::size_t>(grid_->patches1() * grid_->patches2()));
  for (Index l = 0; l < grid_->patches1(); ++l) {
    for (Index m = 0; m < grid_->patches2(); ++m) {
      const PatchCorners c = corners_of(*grid_, {l, m});
      patches_.push_back({c.c00.y(), align_to(c.c00.y(), c.c10.y()), c.c01.y(),
                          align_to(c.c01.y(), c.c11.y())});
    }
  }
}

std::size_t LinearGeodesicSurface::index(PatchIndex p) const {
  return static_cast<std::size_t>(p.l * grid_->patches2() + p.m);
}

LinearGeodesicSurface::Slice LinearGeodesicSurface::slice(PatchIndex p, double u) const {
  const Patch& q = patch(p);
  Slice s;
  s.lower = (1.0 - u) * q.y00 + u * q.y10;
  s.upper = (1.0 - u) * q.y01 + u * q.y11;
  try {
    s.polar = polar_decompose(s.lower.transpose() * s.upper);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSingularInput) {
      throw Error(ErrorCode::kCutLocus, "t2-geodesic of a patch is not defined at this t1");
    }
    throw;
  }
  s.direction = s.upper * s.polar.q.transpose() - s.lower;
  return s;
}

DenseMatrix LinearGeodesicSurface::local_factor(PatchIndex p, double u, double v) const {
  const Slice s = slice(p, u);
  return s.lower + v * s.direction;
}

DenseMatrix LinearGeodesicSurface::polar_rate(PatchIndex p, double /*u*/, const Slice& s) const {
  const Patch& q = patch(p);
  const DenseMatrix lower_rate = q.y10 - q.y00;
  const DenseMatrix upper_rate = q.y11 - q.y01;
  const DenseMatrix m_rate = lower_rate.transpose() * s.upper + s.lower.transpose() * upper_rate;
  const DenseMatrix rhs = m_rate * s.polar.q.transpose() - s.polar.q * m_rate.transpose();
  const DenseMatrix omega = solve_sylvester_sym(s.polar.h, rhs);
  return omega * s.polar.q;
}

DenseMatrix LinearGeodesicSurface::partial_t1(PatchIndex p, double u, double v) const {
  const Patch& q = patch(p);
  const Slice s = slice(p, u);
  const DenseMatrix q_rate = polar_rate(p, u, s);
  const DenseMatrix aligned_rate =
      (q.y11 - q.y01) * s.polar.q.transpose() + s.upper * q_rate.transpose();
  return (1.0 - v) * (q.y10 - q.y00) + v * aligned_rate;
}

// ---------------------------------------------------------------------------

CovarianceSurface::CovarianceSurface(std::shared_ptr<const AnchorGrid> grid, MethodSpec method,
                                     Impl impl)
    : grid_(std::move(grid)), method_(method), impl_(std::move(impl)) {}

DenseMatrix CovarianceSurface::local_factor(PatchIndex p, double u, double v) const {
  return std::visit([&](const auto& s) { return s.local_factor(p, u, v); }, impl_);
}

FactorSample CovarianceSurface::evaluate_local(PatchIndex p, double u, double v) const {
  return make_sample(local_factor(p, u, v));
}

FactorSample CovarianceSurface::evaluate(double t1, double t2) const {
  const PatchIndex p = grid_->locate(t1, t2);
  return evaluate_local(p, t1 - static_cast<double>(p.l), t2 - static_cast<double>(p.m));
}

CovarianceSurface build_surface(std::shared_ptr<const AnchorGrid> grid, const MethodSpec& method) {
  switch (method.kind) {
    case SurfaceKind::kLinearSection:
      return CovarianceSurface(grid, method, LinearSectionSurface(grid, method.section));
    case SurfaceKind::kLinearGeodesic:
      return CovarianceSurface(grid, {method.kind, SectionPolicy::kOne},
                               LinearGeodesicSurface(grid));
    case SurfaceKind::kBezierSection:
      return build_bezier_section(std::move(grid), method.section);
    case SurfaceKind::kBezierGeodesic:
      return build_bezier_geodesic(std::move(grid));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown surface kind");
}

CovarianceSurface build_surface(const AnchorGrid& grid, const MethodSpec& method) {
  return build_surface(std::make_shared<const AnchorGrid>(grid), method);
}

}  // namespace covfam
