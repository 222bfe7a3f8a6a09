#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <stdexcept>

#include "rensem/likelihood.hpp"
#include "rensem/model.hpp"

namespace rensem {

struct RankDeficiencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Divergent logistic iterates (complete or quasi-complete separation),
// distinct from a rank-deficient design.
struct SeparationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularInformationError : std::runtime_error {
  double condition;
  SingularInformationError(const std::string& what, double cond)
      : std::runtime_error(what), condition(cond) {}
};

struct LogisticOptions {
  int max_iter = 100;
  double grad_tol = 1e-8;
  double separation_norm = 30.0;  // ||alpha|| beyond this flags separation
};

struct LogisticFit {
  Eigen::VectorXd alpha;
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
};

// Newton-Raphson MLE of the Bernoulli block.
LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& a,
                         const LogisticOptions& opts = {});

struct GaussianOptions {
  int max_outer = 500;
  double grad_tol = 1e-7;  // projected profile gradient, log-variance scale
  double var_floor = 1e-10;
  std::optional<Eigen::Vector2d> init_vars;  // (var_err, var_re) start override
};

struct GaussianBlockFit {
  Eigen::VectorXd coef;
  double var_err = 0.0;
  double var_re = 0.0;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  // Variance component pinned at (within 1e3 of) the floor: a legitimate
  // boundary solution, not an error. No interior standard error exists there.
  bool boundary = false;      // var_re at the floor
  bool boundary_err = false;  // var_err at the floor (degenerate noiseless fits)
  double grad_norm = 0.0;
};

// Marginal Gaussian block with covariance var_err*I + var_re*EE^T: exact GLS
// for the coefficients at fixed variances, quasi-Newton outer loop on
// (log var_err, log var_re) with the analytic profile gradient.
GaussianBlockFit fit_gaussian_block(const Eigen::VectorXd& resp, const Eigen::MatrixXd& design,
                                    const SpectralCovariance& spectral,
                                    const GaussianOptions& opts = {});

struct FitResult {
  RenSemParams params;
  ParameterLayout layout{0};
  double loglik = 0.0;
  // Observed information J at the MLE and its blockwise SPD inverse. Rows of
  // variance components pinned at the boundary are excluded from the inverse
  // (their info_inv entries and standard errors are 0): the interior
  // information is not positive definite across a boundary solution.
  Eigen::MatrixXd info;
  Eigen::MatrixXd info_inv;
  Eigen::VectorXd std_errors;
  bool converged = false;
  double gradient_norm = 0.0;  // joint score norm, log-variance scale, projected
  int iterations_y = 0;
  int iterations_m = 0;
  int iterations_a = 0;
  bool boundary_var_y = false;
  bool boundary_var_by = false;
  bool boundary_var_m = false;
  bool boundary_var_bm = false;
};

// Full MLE: logistic exposure block + two profiled Gaussian blocks (the three
// blocks separate exactly), then J and its blockwise inverse at the optimum.
FitResult fit_mle(const Dataset& data,
                  std::shared_ptr<const SpectralCovariance> spectral = nullptr,
                  const GaussianOptions& gauss_opts = {}, const LogisticOptions& logit_opts = {});

}  // namespace rensem
