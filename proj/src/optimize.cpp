#include "standings/optimize.hpp"

#include <algorithm>
#include <cmath>

namespace standings {

BfgsResult minimize_bfgs(const Objective& objective, Eigen::VectorXd x0,
                         const BfgsOptions& options) {
  const Eigen::Index n = x0.size();
  BfgsResult res;
  res.x = std::move(x0);
  res.gradient.resize(n);
  res.value = objective(res.x, res.gradient);

  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  Eigen::VectorXd grad_new(n);

  if (!std::isfinite(res.value)) return res;
  if (res.gradient.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
    res.converged = true;
    return res;
  }

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    res.iterations = iter;
    Eigen::VectorXd direction = -inv_hessian * res.gradient;
    double slope = res.gradient.dot(direction);
    if (!(slope < 0.0)) {
      // Lost descent; restart from steepest descent.
      inv_hessian.setIdentity();
      direction = -res.gradient;
      slope = res.gradient.dot(direction);
    }

    constexpr double kArmijo = 1e-4;
    double step = 1.0;
    double value_new = 0.0;
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = res.x + step * direction;
      value_new = objective(x_new, grad_new);
      if (std::isfinite(value_new) && value_new <= res.value + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = grad_new - res.gradient;
    const double improvement = res.value - value_new;

    res.x = x_new;
    res.gradient = grad_new;
    const double prev_value = res.value;
    res.value = value_new;

    if (res.gradient.lpNorm<Eigen::Infinity>() < options.gradient_tolerance ||
        improvement / std::max(std::abs(prev_value), 1.0) < options.relative_tolerance) {
      res.converged = true;
      break;
    }

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        inv_hessian *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = inv_hessian * y;
      inv_hessian += rho * ((1.0 + rho * y.dot(hy)) * (s * s.transpose()) -
                            (hy * s.transpose() + s * hy.transpose()));
    }
  }
  return res;
}

}  // namespace standings
