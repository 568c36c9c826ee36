#include "descent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "covfam/errors.hpp"

namespace covfam::detail {

namespace {

double safe_value(const Objective& f, const Eigen::VectorXd& x) {
  try {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

DescentResult projected_descent(const Objective& f, const Gradient& grad, Eigen::VectorXd x0,
                                const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                const DescentOptions& options) {
  auto clamp = [&](const Eigen::VectorXd& x) { return x.cwiseMax(lower).cwiseMin(upper).eval(); };

  DescentResult out;
  out.x = clamp(x0);
  out.value = safe_value(f, out.x);
  if (!std::isfinite(out.value)) {
    return out;
  }
  Eigen::VectorXd g;
  try {
    g = grad(out.x);
  } catch (const Error&) {
    return out;
  }

  double step = 1.0 / std::max(1.0, g.norm());
  bool stalled = false;
  for (int it = 0; it < options.max_iters; ++it) {
    const double pg = (out.x - clamp(out.x - g)).norm();
    if (pg <= options.grad_tol) {
      out.converged = true;
      return out;
    }

    double trial = step;
    bool accepted = false;
    Eigen::VectorXd next;
    double next_value = 0.0;
    for (int k = 0; k < 80; ++k) {
      next = clamp(out.x - trial * g);
      const Eigen::VectorXd d = next - out.x;
      if (d.norm() <= 1e-16 * (1.0 + out.x.norm())) {
        break;
      }
      next_value = safe_value(f, next);
      if (next_value <= out.value + options.armijo * g.dot(d)) {
        accepted = true;
        break;
      }
      trial *= options.shrink;
    }
    if (!accepted) {
      stalled = true;
      break;
    }

    Eigen::VectorXd next_g;
    try {
      next_g = grad(next);
    } catch (const Error&) {
      out.x = next;
      out.value = next_value;
      out.iterations = it + 1;
      return out;
    }
    const Eigen::VectorXd s = next - out.x;
    const double sy = s.dot(next_g - g);
    step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e12) : std::min(2.0 * trial, 1e12);

    out.x = std::move(next);
    out.value = next_value;
    g = std::move(next_g);
    out.iterations = it + 1;
  }

  const double pg = (out.x - clamp(out.x - g)).norm();
  if (pg <= options.grad_tol) {
    out.converged = true;
  } else if (stalled) {
    // No representable decrease left along the projected gradient: the
    // residual gradient is at the noise level of f.
    out.converged = pg <= 1e-6 * std::max(1.0, std::abs(out.value));
  }
  return out;
}

}  // namespace covfam::detail
