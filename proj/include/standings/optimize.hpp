#pragma once

#include <functional>

#include <Eigen/Dense>

namespace standings {

// Objective for minimisation: returns f(x) and writes the gradient into grad.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct BfgsOptions {
  int max_iterations = 500;
  // Stop when (f_prev - f) / max(|f|, 1) falls below this.
  double relative_tolerance = 1e-9;
  // Stop when the infinity norm of the gradient falls below this.
  double gradient_tolerance = 1e-6;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
};

// Quasi-Newton minimisation with an inverse-Hessian BFGS update and an
// Armijo backtracking line search. Never throws on non-convergence; the
// caller inspects `converged` and gets the best iterate either way.
BfgsResult minimize_bfgs(const Objective& objective, Eigen::VectorXd x0,
                         const BfgsOptions& options = {});

}  // namespace standings
