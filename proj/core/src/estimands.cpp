#include "rensem/estimands.hpp"

#include <cmath>
#include <stdexcept>

namespace rensem {

std::string to_string(VarianceMethod method) {
  return method == VarianceMethod::general_delta ? "general-delta" : "closed-form";
}

VarianceMethod variance_method_from_string(const std::string& name) {
  if (name == "general-delta") return VarianceMethod::general_delta;
  if (name == "closed-form") return VarianceMethod::closed_form;
  throw std::invalid_argument("unknown variance method '" + name +
                              "' (expected general-delta or closed-form)");
}

EstimandValues estimands_point(const RenSemParams& params, const NetworkDeltas& deltas,
                               const ExposureShift& shift) {
  params.validate();
  shift.validate();
  const double da = shift.a_to - shift.a_from;
  const Eigen::VectorXd& b = params.beta;
  const Eigen::VectorXd& g = params.gamma;
  EstimandValues v;
  v.tau[0] = b[1] * da;
  v.tau[1] = b[3] * g[1] * da;
  v.tau[2] = b[4] * g[2] * da * deltas.delta1;
  v.tau[3] = b[2] * deltas.delta2;
  v.tau[4] = b[3] * g[2] * deltas.delta2;
  v.tau[5] = b[4] * (g[1] * deltas.delta2 + g[2] * deltas.delta3);
  v.total = v.tau[0] + v.tau[1] + v.tau[2] + v.tau[3] + v.tau[4] + v.tau[5];
  return v;
}

namespace {

// Gradient of tau_k in the grand parameter vector (only beta/gamma entries
// are ever nonzero).
Eigen::VectorXd tau_gradient(int k, const RenSemParams& params, const ParameterLayout& lay,
                             const NetworkDeltas& deltas, const ExposureShift& shift) {
  const double da = shift.a_to - shift.a_from;
  const Eigen::VectorXd& b = params.beta;
  const Eigen::VectorXd& g = params.gamma;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(lay.size());
  switch (k) {
    case 0:
      grad[lay.beta(1)] = da;
      break;
    case 1:
      grad[lay.beta(3)] = g[1] * da;
      grad[lay.gamma(1)] = b[3] * da;
      break;
    case 2:
      grad[lay.beta(4)] = g[2] * da * deltas.delta1;
      grad[lay.gamma(2)] = b[4] * da * deltas.delta1;
      break;
    case 3:
      grad[lay.beta(2)] = deltas.delta2;
      break;
    case 4:
      grad[lay.beta(3)] = g[2] * deltas.delta2;
      grad[lay.gamma(2)] = b[3] * deltas.delta2;
      break;
    case 5:
      grad[lay.beta(4)] = g[1] * deltas.delta2 + g[2] * deltas.delta3;
      grad[lay.gamma(1)] = b[4] * deltas.delta2;
      grad[lay.gamma(2)] = b[4] * deltas.delta3;
      break;
    default:
      throw std::invalid_argument("tau_gradient: index out of range");
  }
  return grad;
}

double quad_form(const Eigen::MatrixXd& m, const Eigen::VectorXd& v) {
  return v.dot(m * v);
}

std::array<double, 6> delta_variances(const FitResult& fit, const NetworkDeltas& deltas,
                                      const ExposureShift& shift) {
  std::array<double, 6> out{};
  for (int k = 0; k < 6; ++k) {
    out[static_cast<std::size_t>(k)] =
        quad_form(fit.info_inv, tau_gradient(k, fit.params, fit.layout, deltas, shift));
  }
  return out;
}

std::array<double, 6> printed_variances(const FitResult& fit, const NetworkDeltas& deltas,
                                        const ExposureShift& shift) {
  const ParameterLayout& lay = fit.layout;
  const Eigen::MatrixXd& j = fit.info_inv;
  const Eigen::VectorXd& b = fit.params.beta;
  const Eigen::VectorXd& g = fit.params.gamma;
  const double da = shift.a_to - shift.a_from, da2 = da * da;
  const double d1 = deltas.delta1, d2 = deltas.delta2, d3 = deltas.delta3;
  const double jb1 = j(lay.beta(1), lay.beta(1));
  const double jb2 = j(lay.beta(2), lay.beta(2));
  const double jb3 = j(lay.beta(3), lay.beta(3));
  const double jb4 = j(lay.beta(4), lay.beta(4));
  const double jg1 = j(lay.gamma(1), lay.gamma(1));
  const double jg2 = j(lay.gamma(2), lay.gamma(2));
  const double jg12 = j(lay.gamma(1), lay.gamma(2));

  std::array<double, 6> out{};
  out[0] = jb1 * da2;
  out[1] = (g[1] * g[1] * jb3 + b[3] * b[3] * jg1) * da2;
  out[2] = (g[2] * g[2] * jb4 + b[4] * b[4] * jg2) * da2 * d1 * d1;
  out[3] = jb2 * d2 * d2;
  out[4] = (g[2] * g[2] * jb3 + b[3] * b[3] * jg2) * d2 * d2;
  // (f) as printed: the first factor mixes delta1 into the weight on
  // j^(b4,b4), the b4^2 delta2^2 term carries no information factor, and
  // j^(g1,g1) never appears. Kept verbatim; the cross-check against the
  // delta method surfaces the disagreement.
  out[5] = jb4 * (g[1] * d1 + g[2] * d2) * (g[1] * d1 + g[2] * d2) +
           b[4] * b[4] * (d2 * d2 + jg2 * d3 * d3) + 2.0 * b[4] * b[4] * jg12 * d2 * d3;
  return out;
}

}  // namespace

std::array<double, 6> estimand_variances(const FitResult& fit, const NetworkDeltas& deltas,
                                         const ExposureShift& shift, VarianceMethod method) {
  shift.validate();
  return method == VarianceMethod::general_delta ? delta_variances(fit, deltas, shift)
                                                 : printed_variances(fit, deltas, shift);
}

double total_effect_variance(const FitResult& fit, const NetworkDeltas& deltas,
                             const ExposureShift& shift) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(fit.layout.size());
  for (int k = 0; k < 6; ++k) grad += tau_gradient(k, fit.params, fit.layout, deltas, shift);
  return quad_form(fit.info_inv, grad);
}

VarianceCrossCheck variance_cross_check(const FitResult& fit, const NetworkDeltas& deltas,
                                        const ExposureShift& shift) {
  VarianceCrossCheck chk;
  chk.general_delta = delta_variances(fit, deltas, shift);
  chk.closed_form = printed_variances(fit, deltas, shift);
  for (std::size_t k = 0; k < 6; ++k) {
    chk.abs_diff[k] = std::abs(chk.general_delta[k] - chk.closed_form[k]);
  }
  const double scale = std::max({1e-300, chk.general_delta[5], chk.closed_form[5]});
  chk.tau6_rel_diff = chk.abs_diff[5] / scale;
  chk.tau6_divergent = chk.tau6_rel_diff > 1e-8;
  return chk;
}

EstimandEstimate wald_estimate(const std::string& name, double estimate, double variance) {
  if (variance < 0.0) {
    throw std::invalid_argument("wald_estimate: negative variance " + std::to_string(variance) +
                                " for " + name);
  }
  EstimandEstimate e;
  e.name = name;
  e.estimate = estimate;
  e.se = std::sqrt(variance);
  e.ci_lo = estimate - 1.96 * e.se;
  e.ci_hi = estimate + 1.96 * e.se;
  if (e.se == 0.0) {
    e.p_value = (estimate == 0.0) ? 1.0 : 0.0;
  } else {
    const double z = std::abs(estimate) / e.se;
    e.p_value = std::erfc(z / std::sqrt(2.0));
  }
  return e;
}

EstimandReport effects_report(const FitResult& fit, const Network& net, const ExposureShift& shift,
                              VarianceMethod method) {
  return effects_report(fit, network_deltas(net, shift), shift, method);
}

EstimandReport effects_report(const FitResult& fit, const NetworkDeltas& deltas,
                              const ExposureShift& shift, VarianceMethod method) {
  const EstimandValues values = estimands_point(fit.params, deltas, shift);
  const std::array<double, 6> vars = estimand_variances(fit, deltas, shift, method);

  EstimandReport report;
  report.deltas = deltas;
  report.shift = shift;
  report.method = method;
  report.cross_check = variance_cross_check(fit, deltas, shift);
  for (int k = 0; k < 6; ++k) {
    report.rows.push_back(wald_estimate("tau" + std::to_string(k + 1),
                                        values.tau[static_cast<std::size_t>(k)],
                                        vars[static_cast<std::size_t>(k)]));
  }
  report.rows.push_back(
      wald_estimate("total", values.total, total_effect_variance(fit, deltas, shift)));
  return report;
}

}  // namespace rensem
