#pragma once

#include <Eigen/Dense>
#include <functional>

namespace covfam::detail {

struct DescentOptions {
  int max_iters = 500;
  double grad_tol = 1e-8;
  double armijo = 1e-4;
  double shrink = 0.5;
};

struct DescentResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;
using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Projected gradient descent on the box [lower, upper] with Armijo
/// backtracking. Trial steps start from the Barzilai-Borwein length.
/// Objective evaluations that throw count as +inf.
DescentResult projected_descent(const Objective& f, const Gradient& grad, Eigen::VectorXd x0,
                                const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                const DescentOptions& options);

}  // namespace covfam::detail
