// Copyright 2026 The dpcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpcal/accountant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpcal/math.hpp"

namespace dpcal {

PrivacyBudget::PrivacyBudget(double eps, double del) : epsilon(eps), delta(del) {
  if (!(eps >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
  if (!(del >= 0.0 && del < 1.0)) throw std::invalid_argument("delta must be in [0, 1)");
}

const std::vector<double>& default_rdp_orders() {
  static const std::vector<double> orders = {1.25, 1.5, 1.75, 2,  2.5, 3,   4,   5,
                                             6,    8,   16,   32, 64,  128, 256, 512};
  return orders;
}

namespace {

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// log E_{j ~ Binomial(alpha, q)} [ exp(j (j - 1) / (2 sigma^2)) ] for
// integer alpha; (alpha - 1) * epsilon(alpha) of the subsampled Gaussian.
double log_moment_integer(int alpha, double q, double sigma) {
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  std::vector<double> terms(static_cast<std::size_t>(alpha) + 1);
  for (int j = 0; j <= alpha; ++j) {
    terms[static_cast<std::size_t>(j)] = log_binomial(alpha, j) + j * log_q +
                                         (alpha - j) * log_1mq +
                                         j * (j - 1.0) / (2.0 * sigma * sigma);
  }
  return log_sum_exp(terms);
}

double rdp_single_order(double q, double sigma, double alpha) {
  if (q == 1.0) return alpha / (2.0 * sigma * sigma);
  // RDP is non-decreasing in the order, so the next integer order bounds
  // fractional ones from above.
  const int alpha_int = static_cast<int>(std::ceil(alpha));
  return log_moment_integer(alpha_int, q, sigma) / (alpha_int - 1.0);
}

}  // namespace

RdpCurve rdp_subsampled_gaussian(double q, double sigma,
                                 const std::vector<double>& orders) {
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("sampling rate must be in (0, 1]");
  if (!(sigma > 0.0)) throw std::invalid_argument("noise multiplier must be positive");
  RdpCurve curve;
  curve.orders = orders;
  curve.values.reserve(orders.size());
  double prev = 1.0;
  for (double alpha : orders) {
    if (!(alpha > 1.0)) throw std::invalid_argument("RDP orders must exceed 1");
    if (!(alpha > prev)) throw std::invalid_argument("RDP orders must be strictly increasing");
    prev = alpha;
    curve.values.push_back(rdp_single_order(q, sigma, alpha));
  }
  return curve;
}

RdpCurve compose_steps(const RdpCurve& curve, std::size_t steps) {
  RdpCurve out = curve;
  for (double& v : out.values) v *= static_cast<double>(steps);
  return out;
}

PrivacyBudget rdp_to_dp(const RdpCurve& curve, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0, 1)");
  if (curve.orders.empty()) throw std::invalid_argument("empty RDP curve");
  double best = std::numeric_limits<double>::infinity();
  const double log_inv_delta = std::log(1.0 / delta);
  for (std::size_t i = 0; i < curve.orders.size(); ++i) {
    best = std::min(best, curve.values[i] + log_inv_delta / (curve.orders[i] - 1.0));
  }
  return PrivacyBudget(std::max(best, 0.0), delta);
}

PrivacyBudget account(const MechanismSpec& spec, double delta,
                      const std::vector<double>& orders) {
  return rdp_to_dp(compose_steps(rdp_subsampled_gaussian(spec.q, spec.sigma, orders),
                                 spec.steps),
                   delta);
}

double calibrate_noise(const PrivacyBudget& target, double q, std::size_t steps,
                       const std::vector<double>& orders) {
  if (!(target.epsilon > 0.0)) throw std::invalid_argument("target epsilon must be positive");
  if (!(target.delta > 0.0 && target.delta < 1.0))
    throw std::invalid_argument("target delta must be in (0, 1)");
  if (steps < 1) throw std::invalid_argument("steps must be at least 1");

  const auto spent = [&](double sigma) {
    return account({q, sigma, steps}, target.delta, orders).epsilon;
  };

  double lo = 0.01, hi = 100.0;
  if (spent(hi) > target.epsilon)
    throw std::runtime_error("noise calibration failed: target unreachable in bracket");
  if (spent(lo) <= target.epsilon) return lo;
  while (hi - lo > 1e-4) {
    const double mid = 0.5 * (lo + hi);
    if (spent(mid) <= target.epsilon)
      hi = mid;
    else
      lo = mid;
  }
  return hi;  // forward epsilon <= target by construction
}

PrivacyBudget partition_compose(const PrivacyBudget& a, const PrivacyBudget& b) {
  PrivacyBudget out;
  out.epsilon = std::max(a.epsilon, b.epsilon);
  out.delta = std::max(a.delta, b.delta);
  return out;
}

}  // namespace dpcal
