#include "rensem/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace rensem {

namespace {

void require_full_rank(const Eigen::MatrixXd& x, const char* what) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) {
    throw RankDeficiencyError(std::string(what) + " design is rank deficient: rank " +
                              std::to_string(qr.rank()) + " < " + std::to_string(x.cols()) +
                              " columns");
  }
}

constexpr double kLog2Pi = 1.8378770664093454836;

}  // namespace

LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& a,
                         const LogisticOptions& opts) {
  if (x.rows() != a.size()) {
    throw std::invalid_argument("fit_logistic: design rows " + std::to_string(x.rows()) +
                                " != response length " + std::to_string(a.size()));
  }
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] != 0.0 && a[i] != 1.0) {
      throw std::invalid_argument("fit_logistic: response must be binary, got " +
                                  std::to_string(a[i]) + " at row " + std::to_string(i));
    }
  }
  require_full_rank(x, "exposure");

  const int q = static_cast<int>(x.cols());
  LogisticFit fit;
  fit.alpha = Eigen::VectorXd::Zero(q);
  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    Eigen::VectorXd pi(x.rows());
    for (int i = 0; i < x.rows(); ++i) pi[i] = logistic_prob(x.row(i).dot(fit.alpha));
    const Eigen::VectorXd grad = x.transpose() * (a - pi);
    fit.grad_norm = grad.norm();
    fit.iterations = iter;
    if (fit.grad_norm <= opts.grad_tol) {
      fit.converged = true;
      return fit;
    }
    if (iter == opts.max_iter) break;
    const Eigen::VectorXd w = (pi.array() * (1.0 - pi.array())).matrix();
    const Eigen::MatrixXd h = x.transpose() * w.asDiagonal() * x;
    fit.alpha += h.ldlt().solve(grad);
    if (fit.alpha.norm() > opts.separation_norm) {
      throw SeparationError("fit_logistic: iterates diverged (||alpha|| = " +
                            std::to_string(fit.alpha.norm()) + " > " +
                            std::to_string(opts.separation_norm) +
                            "); data are (quasi-)separated");
    }
  }
  throw NonConvergenceError("fit_logistic: no convergence in " + std::to_string(opts.max_iter) +
                            " iterations (gradient norm " + std::to_string(fit.grad_norm) + ")");
}

namespace {

// Profile objective for one Gaussian block, everything in the EE^T eigenbasis.
struct ProfileEval {
  double f = 0.0;           // negative profile log-likelihood
  Eigen::Vector2d grad;     // d f / d(log var_err, log var_re)
  Eigen::VectorXd coef;     // GLS coefficients at these variances
};

class ProfileObjective {
 public:
  ProfileObjective(const Eigen::MatrixXd& x_rot, const Eigen::VectorXd& y_rot,
                   const Eigen::VectorXd& lambda)
      : x_rot_(x_rot), y_rot_(y_rot), lambda_(lambda) {}

  ProfileEval eval(const Eigen::Vector2d& u) const {
    const double ve = std::exp(u[0]), vr = std::exp(u[1]);
    const Eigen::ArrayXd d = ve + vr * lambda_.array();
    const Eigen::ArrayXd dinv = d.inverse();
    const Eigen::MatrixXd g = x_rot_.transpose() * dinv.matrix().asDiagonal() * x_rot_;
    const Eigen::VectorXd b = x_rot_.transpose() * (y_rot_.array() * dinv).matrix();

    ProfileEval ev;
    ev.coef = g.ldlt().solve(b);
    const Eigen::ArrayXd t = (y_rot_ - x_rot_ * ev.coef).array();
    const Eigen::ArrayXd t2 = t.square(), d2 = d.square();
    const int n = static_cast<int>(y_rot_.size());
    const double ll = -0.5 * n * kLog2Pi - 0.5 * d.log().sum() - 0.5 * (t2 * dinv).sum();
    // Envelope theorem: at the GLS coefficients the partial derivatives in the
    // variances are the full profile derivatives.
    const double g_ve = -0.5 * dinv.sum() + 0.5 * (t2 / d2).sum();
    const double g_vr = -0.5 * (lambda_.array() * dinv).sum() +
                        0.5 * (lambda_.array() * t2 / d2).sum();
    ev.f = -ll;
    ev.grad = Eigen::Vector2d(-ve * g_ve, -vr * g_vr);
    return ev;
  }

 private:
  const Eigen::MatrixXd& x_rot_;
  const Eigen::VectorXd& y_rot_;
  const Eigen::VectorXd& lambda_;
};

Eigen::Vector2d project_at_bounds(const Eigen::Vector2d& grad, const Eigen::Vector2d& u,
                                  double lo) {
  // Minimization with lower bounds: a component pinned at the bound whose
  // gradient points out of the feasible set is stationary.
  Eigen::Vector2d pg = grad;
  for (int j = 0; j < 2; ++j) {
    if (u[j] <= lo + 1e-9 && pg[j] > 0.0) pg[j] = 0.0;
  }
  return pg;
}

}  // namespace

GaussianBlockFit fit_gaussian_block(const Eigen::VectorXd& resp, const Eigen::MatrixXd& design,
                                    const SpectralCovariance& spectral,
                                    const GaussianOptions& opts) {
  const int n = static_cast<int>(resp.size());
  const int q = static_cast<int>(design.cols());
  if (design.rows() != n) {
    throw std::invalid_argument("fit_gaussian_block: design rows " + std::to_string(design.rows()) +
                                " != response length " + std::to_string(n));
  }
  if (spectral.size() != n) {
    throw std::invalid_argument("fit_gaussian_block: spectral cache size mismatch");
  }
  if (n <= q) {
    throw std::invalid_argument("fit_gaussian_block: need more observations (" + std::to_string(n) +
                                ") than coefficients (" + std::to_string(q) + ")");
  }
  require_full_rank(design, "gaussian block");

  const Eigen::MatrixXd x_rot = spectral.u().transpose() * design;
  const Eigen::VectorXd y_rot = spectral.u().transpose() * resp;
  const ProfileObjective obj(x_rot, y_rot, spectral.lambda());
  const double lo = std::log(opts.var_floor);
  auto clamp = [lo](Eigen::Vector2d u) {
    u[0] = std::max(u[0], lo);
    u[1] = std::max(u[1], lo);
    return u;
  };

  Eigen::Vector2d u;
  if (opts.init_vars) {
    const Eigen::Vector2d u0 = (*opts.init_vars).array().max(opts.var_floor).log().matrix();
    u = clamp(u0);
  } else {
    // OLS split: half the residual variance to the error term, the rest to
    // the random effect scaled by the average EE^T eigenvalue.
    const Eigen::VectorXd ols = x_rot.colPivHouseholderQr().solve(y_rot);
    const double s2 = (y_rot - x_rot * ols).squaredNorm() / static_cast<double>(n - q);
    const double lam_bar = std::max(spectral.lambda().mean(), 1e-12);
    u = clamp(Eigen::Vector2d(std::log(std::max(0.5 * s2, opts.var_floor)),
                              std::log(std::max(0.5 * s2 / lam_bar, opts.var_floor))));
  }

  ProfileEval cur = obj.eval(u);

  // Central-difference Hessian of the analytic profile gradient. The profile
  // objective is defined on all of R^2 (variances exp(u) stay positive), so
  // the probes never need clamping.
  auto fd_hessian = [&obj](const Eigen::Vector2d& at) {
    Eigen::Matrix2d h;
    for (int j = 0; j < 2; ++j) {
      const double step = 1e-6 * std::max(1.0, std::abs(at[j]));
      Eigen::Vector2d up = at, dn = at;
      up[j] += step;
      dn[j] -= step;
      h.col(j) = (obj.eval(up).grad - obj.eval(dn).grad) / (2.0 * step);
    }
    return Eigen::Matrix2d(0.5 * (h + h.transpose()));
  };

  GaussianBlockFit fit;
  double mu = 0.0;  // Levenberg damping carried across iterations
  for (int iter = 0; iter <= opts.max_outer; ++iter) {
    const Eigen::Vector2d pg = project_at_bounds(cur.grad, u, lo);
    fit.iterations = iter;
    fit.grad_norm = pg.norm();
    if (fit.grad_norm <= opts.grad_tol) {
      fit.converged = true;
      break;
    }
    if (iter == opts.max_outer) break;

    // Damped Newton direction on the free (non-bound-pinned) components:
    // solve (H + mu I) d = -pg with mu grown until d is a descent direction.
    const Eigen::Matrix2d hess = fd_hessian(u);
    Eigen::Vector2d dir = Eigen::Vector2d::Zero();
    for (int attempt = 0;; ++attempt) {
      Eigen::Matrix2d damped = hess + mu * Eigen::Matrix2d::Identity();
      for (int j = 0; j < 2; ++j) {
        if (pg[j] == 0.0 && cur.grad[j] != 0.0) {  // pinned at the floor
          damped.row(j).setZero();
          damped.col(j).setZero();
          damped(j, j) = 1.0;
        }
      }
      dir = damped.fullPivLu().solve(-pg);
      if (std::isfinite(dir[0]) && std::isfinite(dir[1]) && dir.dot(pg) < 0.0) break;
      mu = std::max(1e-4, 4.0 * mu) * (attempt + 1);
      if (attempt >= 30) {
        dir = -pg;  // steepest descent as a last resort
        break;
      }
    }
    const double dmax = dir.cwiseAbs().maxCoeff();
    if (dmax > 5.0) dir *= 5.0 / dmax;  // at most a factor e^5 per step

    double step = 1.0;
    bool accepted = false;
    Eigen::Vector2d u_new;
    ProfileEval next;
    while (step >= 1e-12) {
      u_new = clamp(u + step * dir);
      next = obj.eval(u_new);
      const double armijo = cur.f + 1e-4 * cur.grad.dot(u_new - u);
      if (std::isfinite(next.f) && next.f <= armijo) {
        accepted = true;
        break;
      }
      // Near the optimum the predicted decrease ~ |pg|^2/H falls below the
      // floating-point resolution of f (~eps * |f|); the objective can no
      // longer arbitrate, but a full Newton step still contracts the
      // gradient quadratically. Accept on gradient decrease instead.
      if (std::isfinite(next.f) &&
          std::abs(cur.grad.dot(u_new - u)) <= 64.0 * 2.2e-16 * (1.0 + std::abs(cur.f)) &&
          project_at_bounds(next.grad, u_new, lo).norm() < fit.grad_norm) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (fit.grad_norm <= 10.0 * opts.grad_tol) {
        fit.converged = true;  // stationary to within f's resolution
      }
      break;
    }
    mu *= 0.25;
    if (mu < 1e-10) mu = 0.0;
    u = u_new;
    cur = next;
  }

  if (!fit.converged) {
    throw NonConvergenceError("fit_gaussian_block: no convergence after " +
                              std::to_string(fit.iterations) +
                              " outer iterations (projected gradient norm " +
                              std::to_string(fit.grad_norm) + ")");
  }
  fit.coef = cur.coef;
  fit.var_err = std::exp(u[0]);
  fit.var_re = std::exp(u[1]);
  fit.loglik = -cur.f;
  // The log-scale gradient vanishes as a variance heads to zero, so boundary
  // solutions stop a little above the clamp; anything within a factor 1e3 of
  // the floor is a boundary solution for every practical purpose.
  const double window = std::log(1e3);
  fit.boundary = u[1] <= lo + window;
  fit.boundary_err = u[0] <= lo + window;
  return fit;
}

namespace {

// Invert the SPD submatrix of J on `idx`, scattering into `out`.
void invert_block(const Eigen::MatrixXd& j, const std::vector<int>& idx, const char* what,
                  Eigen::MatrixXd& out) {
  const int m = static_cast<int>(idx.size());
  Eigen::MatrixXd sub(m, m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) sub(r, c) = j(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(c)]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub, Eigen::EigenvaluesOnly);
    const double emin = es.eigenvalues().minCoeff(), emax = es.eigenvalues().maxCoeff();
    const double cond = (emin > 0.0) ? emax / emin : std::numeric_limits<double>::infinity();
    throw SingularInformationError(
        std::string("observed information ") + what +
            " block is not positive definite (condition number " + std::to_string(cond) + ")",
        cond);
  }
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m, m));
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) out(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(c)]) = inv(r, c);
  }
}

}  // namespace

FitResult fit_mle(const Dataset& data, std::shared_ptr<const SpectralCovariance> spectral,
                  const GaussianOptions& gauss_opts, const LogisticOptions& logit_opts) {
  data.validate();
  if (!spectral) spectral = std::make_shared<SpectralCovariance>(*data.net);

  const LogisticFit fa = fit_logistic(design_a(data), data.a, logit_opts);
  const GaussianBlockFit fm = fit_gaussian_block(data.m, design_m(data), *spectral, gauss_opts);
  const GaussianBlockFit fy = fit_gaussian_block(data.y, design_y(data), *spectral, gauss_opts);

  FitResult res;
  res.layout = ParameterLayout(data.p());
  res.params.beta = fy.coef;
  res.params.gamma = fm.coef;
  res.params.alpha = fa.alpha;
  res.params.var_y = fy.var_err;
  res.params.var_by = fy.var_re;
  res.params.var_m = fm.var_err;
  res.params.var_bm = fm.var_re;
  res.converged = fa.converged && fm.converged && fy.converged;
  res.iterations_a = fa.iterations;
  res.iterations_m = fm.iterations;
  res.iterations_y = fy.iterations;
  res.boundary_var_y = fy.boundary_err;
  res.boundary_var_by = fy.boundary;
  res.boundary_var_m = fm.boundary_err;
  res.boundary_var_bm = fm.boundary;

  LikelihoodContext ctx(data, spectral);
  res.loglik = ctx.loglik(res.params).total();
  res.info = ctx.observed_information(res.params);

  const ParameterLayout& lay = res.layout;
  res.info_inv = Eigen::MatrixXd::Zero(lay.size(), lay.size());
  std::vector<int> idx_y, idx_m, idx_a;
  for (int k = 0; k < lay.n_beta(); ++k) idx_y.push_back(lay.beta(k));
  if (!res.boundary_var_y) idx_y.push_back(lay.var_y());
  if (!res.boundary_var_by) idx_y.push_back(lay.var_by());
  for (int k = 0; k < lay.n_gamma(); ++k) idx_m.push_back(lay.gamma(k));
  if (!res.boundary_var_m) idx_m.push_back(lay.var_m());
  if (!res.boundary_var_bm) idx_m.push_back(lay.var_bm());
  for (int k = 0; k < lay.n_alpha(); ++k) idx_a.push_back(lay.alpha(k));
  invert_block(res.info, idx_y, "outcome", res.info_inv);
  invert_block(res.info, idx_m, "mediator", res.info_inv);
  invert_block(res.info, idx_a, "exposure", res.info_inv);
  res.std_errors = res.info_inv.diagonal().cwiseMax(0.0).cwiseSqrt();

  // Joint score at the optimum, variance components on the log scale with
  // boundary components projected out (one-sided stationarity at the floor).
  Eigen::VectorXd s = ctx.score(res.params);
  s[lay.var_y()] *= res.params.var_y;
  s[lay.var_by()] *= res.params.var_by;
  s[lay.var_m()] *= res.params.var_m;
  s[lay.var_bm()] *= res.params.var_bm;
  if (res.boundary_var_by && s[lay.var_by()] < 0.0) s[lay.var_by()] = 0.0;
  if (res.boundary_var_bm && s[lay.var_bm()] < 0.0) s[lay.var_bm()] = 0.0;
  res.gradient_norm = s.norm();
  return res;
}

}  // namespace rensem
