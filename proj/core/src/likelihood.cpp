#include "rensem/likelihood.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rensem {

ParameterLayout::ParameterLayout(int p) : p_(p) {
  if (p < 0) throw std::invalid_argument("ParameterLayout: p must be >= 0");
}

Eigen::VectorXd ParameterLayout::pack(const RenSemParams& params) const {
  if (params.p() != p_) {
    throw std::invalid_argument("pack: parameter p " + std::to_string(params.p()) +
                                " != layout p " + std::to_string(p_));
  }
  Eigen::VectorXd phi(size());
  phi.segment(0, n_beta()) = params.beta;
  phi.segment(n_beta(), n_gamma()) = params.gamma;
  phi.segment(n_beta() + n_gamma(), n_alpha()) = params.alpha;
  phi[var_y()] = params.var_y;
  phi[var_by()] = params.var_by;
  phi[var_m()] = params.var_m;
  phi[var_bm()] = params.var_bm;
  return phi;
}

RenSemParams ParameterLayout::unpack(const Eigen::VectorXd& phi) const {
  if (phi.size() != size()) {
    throw std::invalid_argument("unpack: vector length " + std::to_string(phi.size()) +
                                " != layout size " + std::to_string(size()));
  }
  RenSemParams params;
  params.beta = phi.segment(0, n_beta());
  params.gamma = phi.segment(n_beta(), n_gamma());
  params.alpha = phi.segment(n_beta() + n_gamma(), n_alpha());
  params.var_y = phi[var_y()];
  params.var_by = phi[var_by()];
  params.var_m = phi[var_m()];
  params.var_bm = phi[var_bm()];
  return params;
}

std::vector<std::string> ParameterLayout::names() const {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (int k = 0; k < n_beta(); ++k) out.push_back("beta" + std::to_string(k));
  for (int k = 0; k < n_gamma(); ++k) out.push_back("gamma" + std::to_string(k));
  for (int k = 0; k < n_alpha(); ++k) out.push_back("alpha" + std::to_string(k));
  out.insert(out.end(), {"var_y", "var_by", "var_m", "var_bm"});
  return out;
}

SpectralCovariance::SpectralCovariance(const Network& net) {
  const Eigen::MatrixXd& e = net.adjacency();
  Eigen::MatrixXd eet = e * e.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(eet);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("SpectralCovariance: eigendecomposition of EE^T failed");
  }
  lambda_ = solver.eigenvalues().cwiseMax(0.0);  // EE^T is PSD; clip round-off
  u_ = solver.eigenvectors();
}

Eigen::VectorXd SpectralCovariance::effective(double var_err, double var_re,
                                              const char* component) const {
  Eigen::VectorXd d = (var_err + var_re * lambda_.array()).matrix();
  if (!(d.minCoeff() > 0.0)) {
    throw std::runtime_error(std::string("covariance for ") + component +
                             " is not positive definite: var_err=" + std::to_string(var_err) +
                             " var_re=" + std::to_string(var_re) +
                             " min effective eigenvalue=" + std::to_string(d.minCoeff()));
  }
  return d;
}

double SpectralCovariance::logdet(const Eigen::VectorXd& d) const {
  return d.array().log().sum();
}

Eigen::VectorXd SpectralCovariance::solve(const Eigen::VectorXd& d, const Eigen::VectorXd& v) const {
  return u_ * (u_.transpose() * v).cwiseQuotient(d);
}

LikelihoodContext::LikelihoodContext(const Dataset& data,
                                     std::shared_ptr<const SpectralCovariance> spectral)
    : n_(data.size()), layout_(data.p()), spectral_(std::move(spectral)) {
  data.validate();
  if (!spectral_) spectral_ = std::make_shared<SpectralCovariance>(*data.net);
  if (spectral_->size() != n_) {
    throw std::invalid_argument("LikelihoodContext: spectral cache size " +
                                std::to_string(spectral_->size()) + " != data size " +
                                std::to_string(n_));
  }
  const Eigen::MatrixXd ut = spectral_->u().transpose();
  xy_rot_ = ut * design_y(data);
  xm_rot_ = ut * design_m(data);
  y_rot_ = ut * data.y;
  m_rot_ = ut * data.m;
  x_a_ = design_a(data);
  a_ = data.a;
}

void LikelihoodContext::check(const RenSemParams& params) const {
  params.validate();
  if (params.p() != layout_.p()) {
    throw std::invalid_argument("likelihood: parameter p " + std::to_string(params.p()) +
                                " != data p " + std::to_string(layout_.p()));
  }
  if (!(params.var_y > 0.0)) {
    throw std::invalid_argument("likelihood: var_y must be > 0, got " + std::to_string(params.var_y));
  }
  if (!(params.var_m > 0.0)) {
    throw std::invalid_argument("likelihood: var_m must be > 0, got " + std::to_string(params.var_m));
  }
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// log(1 + e^x) without overflow.
double softplus(double x) {
  const double ax = std::abs(x);
  return std::log1p(std::exp(-ax)) + std::max(x, 0.0);
}

// Gaussian block in the eigenbasis: with t = U'(resp - X coef) and
// d_k = var_err + var_re*lambda_k,
//   l    = -(N/2) log 2pi - (1/2) sum log d_k - (1/2) sum t_k^2 / d_k.
struct GaussianEval {
  Eigen::VectorXd d;  // effective eigenvalues
  Eigen::VectorXd t;  // rotated residual

  double loglik(int n) const {
    return -0.5 * n * kLog2Pi - 0.5 * d.array().log().sum() -
           0.5 * (t.array().square() / d.array()).sum();
  }
};

GaussianEval eval_block(const SpectralCovariance& spectral, const Eigen::MatrixXd& x_rot,
                        const Eigen::VectorXd& resp_rot, const Eigen::VectorXd& coef,
                        double var_err, double var_re, const char* component) {
  GaussianEval ev;
  ev.d = spectral.effective(var_err, var_re, component);
  ev.t = resp_rot - x_rot * coef;
  return ev;
}

}  // namespace

LikelihoodParts LikelihoodContext::loglik(const RenSemParams& params) const {
  check(params);
  LikelihoodParts parts;
  const GaussianEval ey = eval_block(*spectral_, xy_rot_, y_rot_, params.beta, params.var_y,
                                     params.var_by, "outcome");
  const GaussianEval em = eval_block(*spectral_, xm_rot_, m_rot_, params.gamma, params.var_m,
                                     params.var_bm, "mediator");
  parts.l_y = ey.loglik(n_);
  parts.l_m = em.loglik(n_);

  double la = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double eta = x_a_.row(i).dot(params.alpha);
    la += a_[i] * eta - softplus(eta);
  }
  parts.l_a = la;
  return parts;
}

Eigen::VectorXd LikelihoodContext::score(const RenSemParams& params) const {
  check(params);
  const Eigen::VectorXd& lambda = spectral_->lambda();
  Eigen::VectorXd s = Eigen::VectorXd::Zero(layout_.size());

  auto block = [&](const Eigen::MatrixXd& x_rot, const Eigen::VectorXd& resp_rot,
                   const Eigen::VectorXd& coef, double var_err, double var_re,
                   const char* component, int coef0, int iv_err, int iv_re) {
    const GaussianEval ev = eval_block(*spectral_, x_rot, resp_rot, coef, var_err, var_re, component);
    const Eigen::ArrayXd d = ev.d.array(), t = ev.t.array(), lam = lambda.array();
    s.segment(coef0, static_cast<int>(coef.size())) = x_rot.transpose() * (t / d).matrix();
    s[iv_err] = -0.5 * d.inverse().sum() + 0.5 * (t.square() / d.square()).sum();
    s[iv_re] = -0.5 * (lam / d).sum() + 0.5 * (lam * t.square() / d.square()).sum();
  };
  block(xy_rot_, y_rot_, params.beta, params.var_y, params.var_by, "outcome", layout_.beta(0),
        layout_.var_y(), layout_.var_by());
  block(xm_rot_, m_rot_, params.gamma, params.var_m, params.var_bm, "mediator", layout_.gamma(0),
        layout_.var_m(), layout_.var_bm());

  Eigen::VectorXd sa = Eigen::VectorXd::Zero(layout_.n_alpha());
  for (int i = 0; i < n_; ++i) {
    const double pi = logistic_prob(x_a_.row(i).dot(params.alpha));
    sa += (a_[i] - pi) * x_a_.row(i).transpose();
  }
  s.segment(layout_.alpha(0), layout_.n_alpha()) = sa;
  return s;
}

Eigen::MatrixXd LikelihoodContext::hessian(const RenSemParams& params) const {
  check(params);
  const Eigen::VectorXd& lambda = spectral_->lambda();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(layout_.size(), layout_.size());

  auto block = [&](const Eigen::MatrixXd& x_rot, const Eigen::VectorXd& resp_rot,
                   const Eigen::VectorXd& coef, double var_err, double var_re,
                   const char* component, int coef0, int iv_err, int iv_re) {
    const int q = static_cast<int>(coef.size());
    const GaussianEval ev = eval_block(*spectral_, x_rot, resp_rot, coef, var_err, var_re, component);
    const Eigen::ArrayXd d = ev.d.array(), t = ev.t.array(), lam = lambda.array();
    const Eigen::ArrayXd d2 = d.square(), d3 = d2 * d, t2 = t.square();

    h.block(coef0, coef0, q, q) =
        -(x_rot.transpose() * d.inverse().matrix().asDiagonal() * x_rot);
    const Eigen::VectorXd h_c_err = -(x_rot.transpose() * (t / d2).matrix());
    const Eigen::VectorXd h_c_re = -(x_rot.transpose() * (lam * t / d2).matrix());
    h.block(coef0, iv_err, q, 1) = h_c_err;
    h.block(iv_err, coef0, 1, q) = h_c_err.transpose();
    h.block(coef0, iv_re, q, 1) = h_c_re;
    h.block(iv_re, coef0, 1, q) = h_c_re.transpose();
    // d/dv of the score's quadratic forms carries coefficient -1 (central
    // finite differences of the analytic score pin this down).
    h(iv_err, iv_err) = 0.5 * d2.inverse().sum() - (t2 / d3).sum();
    h(iv_re, iv_re) = 0.5 * (lam.square() / d2).sum() - (lam.square() * t2 / d3).sum();
    const double mixed = 0.5 * (lam / d2).sum() - (lam * t2 / d3).sum();
    h(iv_err, iv_re) = mixed;
    h(iv_re, iv_err) = mixed;
  };
  block(xy_rot_, y_rot_, params.beta, params.var_y, params.var_by, "outcome", layout_.beta(0),
        layout_.var_y(), layout_.var_by());
  block(xm_rot_, m_rot_, params.gamma, params.var_m, params.var_bm, "mediator", layout_.gamma(0),
        layout_.var_m(), layout_.var_bm());

  const int qa = layout_.n_alpha();
  Eigen::MatrixXd haa = Eigen::MatrixXd::Zero(qa, qa);
  for (int i = 0; i < n_; ++i) {
    const double pi = logistic_prob(x_a_.row(i).dot(params.alpha));
    haa -= pi * (1.0 - pi) * (x_a_.row(i).transpose() * x_a_.row(i));
  }
  h.block(layout_.alpha(0), layout_.alpha(0), qa, qa) = haa;
  return h;
}

Eigen::MatrixXd LikelihoodContext::observed_information(const RenSemParams& params) const {
  return -hessian(params);
}

LikelihoodParts loglik(const Dataset& data, const RenSemParams& params) {
  return LikelihoodContext(data).loglik(params);
}

Eigen::VectorXd score(const Dataset& data, const RenSemParams& params) {
  return LikelihoodContext(data).score(params);
}

Eigen::MatrixXd hessian(const Dataset& data, const RenSemParams& params) {
  return LikelihoodContext(data).hessian(params);
}

}  // namespace rensem
