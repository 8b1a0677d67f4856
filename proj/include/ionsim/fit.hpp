#pragma once

#include <Eigen/Dense>
#include <functional>

namespace ionsim {

struct FitOptions {
  int max_iterations = 200;
  double step_tol = 1e-12;    // relative parameter step
  double residual_tol = 1e-14;  // relative RSS improvement
  double jacobian_step = 1e-6;  // relative finite-difference step
};

struct FitResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // sigma^2 (J^T J)^{-1}
  Eigen::VectorXd sigma;       // 1-sigma uncertainties, sqrt of covariance diagonal
  double rss = 0.0;
  int iterations = 0;
  bool converged = false;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Levenberg-Marquardt with a forward-difference Jacobian.
// Throws FitError (carrying the best iterate) if the damping search stalls.
FitResult fit_least_squares(const ResidualFn& residuals, const Eigen::VectorXd& initial,
                            const FitOptions& options = {});

}  // namespace ionsim
