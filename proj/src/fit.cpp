#include "ionsim/fit.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "ionsim/errors.hpp"

namespace ionsim {

namespace {

Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& p,
                                 const Eigen::VectorXd& r0, double rel_step) {
  Eigen::MatrixXd J(r0.size(), p.size());
  for (int j = 0; j < p.size(); ++j) {
    double h = rel_step * std::max(std::abs(p[j]), 1.0);
    Eigen::VectorXd pj = p;
    pj[j] += h;
    J.col(j) = (f(pj) - r0) / h;
  }
  return J;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

FitResult fit_least_squares(const ResidualFn& residuals, const Eigen::VectorXd& initial,
                            const FitOptions& options) {
  Eigen::VectorXd p = initial;
  Eigen::VectorXd r = residuals(p);
  if (r.size() < p.size())
    throw FitError("fit: fewer residuals than parameters", to_std(p));
  double rss = r.squaredNorm();
  if (!std::isfinite(rss)) throw FitError("fit: non-finite residuals at initial guess", to_std(p));

  double lambda = 1e-3;
  int iter = 0;
  bool converged = false;
  Eigen::MatrixXd J = numeric_jacobian(residuals, p, r, options.jacobian_step);

  for (; iter < options.max_iterations && !converged; ++iter) {
    Eigen::MatrixXd JtJ = J.transpose() * J;
    Eigen::VectorXd Jtr = J.transpose() * r;
    bool stepped = false;
    for (int tries = 0; tries < 60; ++tries) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-30);
      Eigen::VectorXd step = A.ldlt().solve(-Jtr);
      Eigen::VectorXd pn = p + step;
      Eigen::VectorXd rn = residuals(pn);
      double rss_n = rn.squaredNorm();
      if (std::isfinite(rss_n) && rss_n <= rss) {
        double drop = rss - rss_n;
        double rel_step = step.norm() / std::max(p.norm(), 1.0);
        p = pn;
        r = rn;
        rss = rss_n;
        lambda = std::max(lambda * 0.3, 1e-12);
        stepped = true;
        if (rel_step < options.step_tol || drop <= options.residual_tol * std::max(rss, 1e-300))
          converged = true;
        else
          J = numeric_jacobian(residuals, p, r, options.jacobian_step);
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) {
      // No downhill step at any damping: either at a minimum or stuck.
      if (Jtr.norm() < 1e-8 * std::max(1.0, std::sqrt(rss))) {
        converged = true;
        break;
      }
      throw FitError("fit: no downhill step found", to_std(p));
    }
  }
  if (!converged)
    throw FitError("fit: iteration budget exhausted", to_std(p));

  FitResult out;
  out.params = p;
  out.rss = rss;
  out.iterations = iter;
  out.converged = true;
  J = numeric_jacobian(residuals, p, r, options.jacobian_step);
  int dof = static_cast<int>(r.size()) - static_cast<int>(p.size());
  double s2 = dof > 0 ? rss / dof : 0.0;
  Eigen::MatrixXd JtJ = J.transpose() * J;
  out.covariance = s2 * JtJ.completeOrthogonalDecomposition().pseudoInverse();
  out.sigma = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

}  // namespace ionsim
