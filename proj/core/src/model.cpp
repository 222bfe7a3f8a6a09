#include "rensem/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "rensem/rng.hpp"

namespace rensem {

namespace {
void require_finite(const Eigen::VectorXd& v, const char* name) {
  if (!v.allFinite()) throw std::invalid_argument(std::string(name) + " contains non-finite entries");
}
}  // namespace

void RenSemParams::validate() const {
  const int pp = p();
  if (pp < 0) throw std::invalid_argument("RenSemParams: alpha must have length >= 1");
  if (beta.size() != 5 + 2 * pp) {
    throw std::invalid_argument("RenSemParams: beta length " + std::to_string(beta.size()) +
                                " != 5+2p with p=" + std::to_string(pp));
  }
  if (gamma.size() != 3 + 2 * pp) {
    throw std::invalid_argument("RenSemParams: gamma length " + std::to_string(gamma.size()) +
                                " != 3+2p with p=" + std::to_string(pp));
  }
  require_finite(beta, "beta");
  require_finite(gamma, "gamma");
  require_finite(alpha, "alpha");
  auto check_var = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument(std::string("RenSemParams: ") + name +
                                  " must be finite and >= 0, got " + std::to_string(v));
    }
  };
  check_var(var_y, "var_y");
  check_var(var_by, "var_by");
  check_var(var_m, "var_m");
  check_var(var_bm, "var_bm");
}

void Dataset::validate() const {
  if (!net) throw std::invalid_argument("Dataset: missing network");
  const int n = net->size();
  if (a.size() != n || m.size() != n || y.size() != n || c.rows() != n) {
    throw std::invalid_argument("Dataset: column lengths must equal network size " +
                                std::to_string(n));
  }
  for (int i = 0; i < n; ++i) {
    if (a[i] != 0.0 && a[i] != 1.0) {
      throw std::invalid_argument("Dataset: exposure must be binary, got " + std::to_string(a[i]) +
                                  " at node " + std::to_string(i));
    }
  }
  require_finite(m, "mediator");
  require_finite(y, "outcome");
  if (!c.allFinite()) throw std::invalid_argument("Dataset: confounders contain non-finite entries");
}

double logistic_prob(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

Eigen::MatrixXd design_y(const Dataset& data) {
  const int n = data.size(), p = data.p();
  Eigen::MatrixXd x(n, 5 + 2 * p);
  x.col(0).setOnes();
  x.col(1) = data.a;
  x.col(2) = data.net->s1_apply(data.a);
  x.col(3) = data.m;
  x.col(4) = data.net->s1_apply(data.m);
  for (int k = 0; k < p; ++k) {
    x.col(5 + k) = data.c.col(k);
    x.col(5 + p + k) = data.net->s1_apply(data.c.col(k));
  }
  return x;
}

Eigen::MatrixXd design_m(const Dataset& data) {
  const int n = data.size(), p = data.p();
  Eigen::MatrixXd x(n, 3 + 2 * p);
  x.col(0).setOnes();
  x.col(1) = data.a;
  x.col(2) = data.net->s1_apply(data.a);
  for (int k = 0; k < p; ++k) {
    x.col(3 + k) = data.c.col(k);
    x.col(3 + p + k) = data.net->s1_apply(data.c.col(k));
  }
  return x;
}

Eigen::MatrixXd design_a(const Dataset& data) {
  const int n = data.size(), p = data.p();
  Eigen::MatrixXd x(n, 1 + p);
  x.col(0).setOnes();
  for (int k = 0; k < p; ++k) x.col(1 + k) = data.c.col(k);
  return x;
}

Dataset simulate_dataset(std::shared_ptr<const Network> net, const RenSemParams& params,
                         const ConfounderSpec& conf, std::uint64_t seed) {
  if (!net) throw std::invalid_argument("simulate_dataset: missing network");
  params.validate();
  if (conf.p != params.p()) {
    throw std::invalid_argument("simulate_dataset: confounder dimension " + std::to_string(conf.p) +
                                " != parameter p " + std::to_string(params.p()));
  }
  if (!(conf.sd >= 0.0) || !std::isfinite(conf.sd) || !std::isfinite(conf.mean)) {
    throw std::invalid_argument("simulate_dataset: confounder spec must have finite mean, sd >= 0");
  }

  const int n = net->size(), p = conf.p;
  std::mt19937_64 engine = make_engine(seed, 0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto draw_std_normal = [&engine](int len) {
    std::normal_distribution<double> norm(0.0, 1.0);
    Eigen::VectorXd z(len);
    for (int i = 0; i < len; ++i) z[i] = norm(engine);
    return z;
  };

  Dataset data;
  data.net = net;
  data.c.resize(n, p);
  for (int k = 0; k < p; ++k) {
    data.c.col(k) = conf.mean + conf.sd * draw_std_normal(n).array();
  }

  data.a.resize(n);
  for (int i = 0; i < n; ++i) {
    double eta = params.alpha[0];
    for (int k = 0; k < p; ++k) eta += params.alpha[1 + k] * data.c(i, k);
    data.a[i] = (unif(engine) < logistic_prob(eta)) ? 1.0 : 0.0;
  }

  const Eigen::MatrixXd& e = net->adjacency();
  const double sd_bm = std::sqrt(params.var_bm), sd_m = std::sqrt(params.var_m);
  const double sd_by = std::sqrt(params.var_by), sd_y = std::sqrt(params.var_y);

  const Eigen::VectorXd b_m = sd_bm * draw_std_normal(n);
  const Eigen::VectorXd eps_m = sd_m * draw_std_normal(n);
  data.m = design_m(data) * params.gamma + e * b_m + eps_m;

  const Eigen::VectorXd b_y = sd_by * draw_std_normal(n);
  const Eigen::VectorXd eps_y = sd_y * draw_std_normal(n);
  data.y = design_y(data) * params.beta + e * b_y + eps_y;

  return data;
}

}  // namespace rensem
