#pragma once

#include <array>
#include <string>
#include <vector>

#include "rensem/fit.hpp"
#include "rensem/network.hpp"

namespace rensem {

// How standard errors for the six effects are computed.
//   general_delta: grad(tau)' J^-1 grad(tau) through the blockwise inverse
//                  of the observed information (the default).
//   closed_form:   the printed per-effect expressions; (a)-(e) coincide with
//                  the delta method identically, (f) does not in general.
enum class VarianceMethod { general_delta, closed_form };

std::string to_string(VarianceMethod method);
VarianceMethod variance_method_from_string(const std::string& name);

// Effects of the shift (a_from, s_from) -> (a_to, s_to), functions of
// (beta, gamma) and the realized-network deltas:
//   tau1 = beta1 (a - a')                       direct individual
//   tau2 = beta3 gamma1 (a - a')                mediated individual
//   tau3 = beta4 gamma2 (a - a') delta1         mediated spillover (own a)
//   tau4 = beta2 delta2                         direct spillover
//   tau5 = beta3 gamma2 delta2                  mediated spillover (neighbors)
//   tau6 = beta4 (gamma1 delta2 + gamma2 delta3)  two-step spillover
// plus their sum as the total effect.
struct EstimandValues {
  std::array<double, 6> tau{};
  double total = 0.0;
};

EstimandValues estimands_point(const RenSemParams& params, const NetworkDeltas& deltas,
                               const ExposureShift& shift);

// Variances of the six plug-in estimators under the requested method.
std::array<double, 6> estimand_variances(const FitResult& fit, const NetworkDeltas& deltas,
                                         const ExposureShift& shift, VarianceMethod method);

// Delta-method variance of the total effect.
double total_effect_variance(const FitResult& fit, const NetworkDeltas& deltas,
                             const ExposureShift& shift);

// Agreement between the two variance methods: (a)-(e) must match to numerical
// identity; (f) diverges whenever the printed form and the delta method
// disagree on the realized network (they do on rings, for instance).
struct VarianceCrossCheck {
  std::array<double, 6> general_delta{};
  std::array<double, 6> closed_form{};
  std::array<double, 6> abs_diff{};
  bool tau6_divergent = false;
  double tau6_rel_diff = 0.0;
};

VarianceCrossCheck variance_cross_check(const FitResult& fit, const NetworkDeltas& deltas,
                                        const ExposureShift& shift);

struct EstimandEstimate {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double p_value = 1.0;
};

// Wald interval estimate +- 1.96*se and two-sided normal p-value. se = 0
// degenerates to a point interval with p = 1 (estimate 0) or p = 0.
EstimandEstimate wald_estimate(const std::string& name, double estimate, double variance);

struct EstimandReport {
  std::vector<EstimandEstimate> rows;  // tau1..tau6 then total
  NetworkDeltas deltas;
  ExposureShift shift;
  VarianceMethod method = VarianceMethod::general_delta;
  VarianceCrossCheck cross_check;
};

// Full effects report for a fitted model on its network. The total-effect SE
// always comes from the delta method (no printed closed form exists for it).
EstimandReport effects_report(const FitResult& fit, const Network& net, const ExposureShift& shift,
                              VarianceMethod method = VarianceMethod::general_delta);
EstimandReport effects_report(const FitResult& fit, const NetworkDeltas& deltas,
                              const ExposureShift& shift,
                              VarianceMethod method = VarianceMethod::general_delta);

}  // namespace rensem
