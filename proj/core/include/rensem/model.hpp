#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>

#include "rensem/network.hpp"

namespace rensem {

// Parameters of the random-effects network SEM with p confounders.
//
//   A_i ~ Bernoulli(logistic(alpha' (1, C_i)))                  alpha: 1+p
//   M   = X_m gamma + E b^M + eps^M                             gamma: 3+2p
//   Y   = X_y beta  + E b^Y + eps^Y                             beta:  5+2p
//
// with design rows
//   X_m,i = (1, A_i, (T A)_i, C_i, (T C)_i)
//   X_y,i = (1, A_i, (T A)_i, M_i, (T M)_i, C_i, (T C)_i)
// where T is the row-normalized adjacency and E the unit-diagonal adjacency.
// b^M ~ N(0, var_bm I), eps^M ~ N(0, var_m I), likewise for Y.
struct RenSemParams {
  Eigen::VectorXd beta;   // (b0, b1 direct, b2 spill-direct, b3 mediator, b4 spill-mediator, bC, bTC)
  Eigen::VectorXd gamma;  // (g0, g1 direct, g2 spill, gC, gTC)
  Eigen::VectorXd alpha;  // (a0, aC)
  double var_y = 1.0;
  double var_by = 1.0;
  double var_m = 1.0;
  double var_bm = 1.0;

  int p() const { return static_cast<int>(alpha.size()) - 1; }

  // Structural consistency: dimensions match a common p >= 0, all entries
  // finite, variance components nonnegative. Strict positivity of the error
  // variances is a likelihood-side requirement, checked there.
  void validate() const;
};

// Observed data bound to the network they were sampled on.
struct Dataset {
  std::shared_ptr<const Network> net;
  Eigen::VectorXd a;  // binary exposure
  Eigen::VectorXd m;  // mediator
  Eigen::VectorXd y;  // outcome
  Eigen::MatrixXd c;  // N x p confounders

  int size() const { return static_cast<int>(a.size()); }
  int p() const { return static_cast<int>(c.cols()); }
  void validate() const;
};

// iid confounder columns C_ij ~ N(mean, sd^2).
struct ConfounderSpec {
  int p = 1;
  double mean = 0.0;
  double sd = 1.0;
};

double logistic_prob(double eta);

// Design matrices implied by a dataset (column order as documented above).
Eigen::MatrixXd design_y(const Dataset& data);
Eigen::MatrixXd design_m(const Dataset& data);
Eigen::MatrixXd design_a(const Dataset& data);

// Forward simulation. Draw order (one mt19937_64 seeded from `seed`):
// C column by column, exposure uniforms, b^M, eps^M, b^Y, eps^Y. Gaussian
// draws are standard normals scaled by the requested SD, so zero-variance
// components yield exact zeros without perturbing the stream.
Dataset simulate_dataset(std::shared_ptr<const Network> net, const RenSemParams& params,
                         const ConfounderSpec& conf, std::uint64_t seed);

}  // namespace rensem
