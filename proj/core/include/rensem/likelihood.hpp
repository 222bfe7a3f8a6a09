#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "rensem/model.hpp"
#include "rensem/network.hpp"

namespace rensem {

// Index map for the grand parameter vector
//   phi = (beta, gamma, alpha, var_y, var_by, var_m, var_bm),
// dimension K = (5+2p) + (3+2p) + (1+p) + 4 = 13 + 5p.
class ParameterLayout {
 public:
  explicit ParameterLayout(int p);

  int p() const { return p_; }
  int n_beta() const { return 5 + 2 * p_; }
  int n_gamma() const { return 3 + 2 * p_; }
  int n_alpha() const { return 1 + p_; }
  int size() const { return n_beta() + n_gamma() + n_alpha() + 4; }

  int beta(int k) const { return k; }
  int gamma(int k) const { return n_beta() + k; }
  int alpha(int k) const { return n_beta() + n_gamma() + k; }
  int var_y() const { return n_beta() + n_gamma() + n_alpha(); }
  int var_by() const { return var_y() + 1; }
  int var_m() const { return var_y() + 2; }
  int var_bm() const { return var_y() + 3; }

  Eigen::VectorXd pack(const RenSemParams& params) const;
  RenSemParams unpack(const Eigen::VectorXd& phi) const;
  // "beta0",...,"gamma0",...,"alpha0",...,"var_y","var_by","var_m","var_bm"
  std::vector<std::string> names() const;

 private:
  int p_;
};

// Eigen-structure of EE^T for one network: EE^T = U diag(lambda) U', shared
// (read-only) by every likelihood evaluation and fit on that network. The
// marginal covariances s2*I + sb2*EE^T diagonalize in the same basis with
// effective eigenvalues d_k = s2 + sb2*lambda_k.
class SpectralCovariance {
 public:
  explicit SpectralCovariance(const Network& net);

  int size() const { return static_cast<int>(lambda_.size()); }
  const Eigen::VectorXd& lambda() const { return lambda_; }
  const Eigen::MatrixXd& u() const { return u_; }

  // d_k = var_err + var_re * lambda_k; throws if any d_k <= 0, naming the
  // offending component ("outcome" / "mediator").
  Eigen::VectorXd effective(double var_err, double var_re, const char* component) const;

  double logdet(const Eigen::VectorXd& d) const;
  // Sigma^-1 v computed through the eigenbasis.
  Eigen::VectorXd solve(const Eigen::VectorXd& d, const Eigen::VectorXd& v) const;

 private:
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd u_;
};

struct LikelihoodParts {
  double l_y = 0.0;
  double l_m = 0.0;
  double l_a = 0.0;
  double total() const { return l_y + l_m + l_a; }
};

// Marginal log-likelihood, analytic score and Hessian of the REN-SEM.
// Construction rotates the data into the EE^T eigenbasis once; evaluations
// are then O(N * dim) per call. Immutable and safe to share across threads.
class LikelihoodContext {
 public:
  LikelihoodContext(const Dataset& data, std::shared_ptr<const SpectralCovariance> spectral = nullptr);

  const ParameterLayout& layout() const { return layout_; }
  const SpectralCovariance& spectral() const { return *spectral_; }
  int size() const { return n_; }

  LikelihoodParts loglik(const RenSemParams& params) const;
  Eigen::VectorXd score(const RenSemParams& params) const;
  // Hessian of the log-likelihood in phi. Exactly block-diagonal across the
  // (beta, var_y, var_by), (gamma, var_m, var_bm) and alpha groups.
  Eigen::MatrixXd hessian(const RenSemParams& params) const;
  // Observed information J = -Hessian.
  Eigen::MatrixXd observed_information(const RenSemParams& params) const;

 private:
  void check(const RenSemParams& params) const;

  int n_ = 0;
  ParameterLayout layout_;
  std::shared_ptr<const SpectralCovariance> spectral_;
  Eigen::MatrixXd xy_rot_, xm_rot_;  // U' X
  Eigen::VectorXd y_rot_, m_rot_;    // U' response
  Eigen::MatrixXd x_a_;
  Eigen::VectorXd a_;
};

// One-shot conveniences (build a context, evaluate, discard).
LikelihoodParts loglik(const Dataset& data, const RenSemParams& params);
Eigen::VectorXd score(const Dataset& data, const RenSemParams& params);
Eigen::MatrixXd hessian(const Dataset& data, const RenSemParams& params);

}  // namespace rensem
