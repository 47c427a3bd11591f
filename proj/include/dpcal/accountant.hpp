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

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace dpcal {

// An (epsilon, delta) pair. epsilon == +inf marks a release with no privacy
// guarantee (e.g. unclipped gradients).
struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;

  PrivacyBudget() = default;
  PrivacyBudget(double eps, double del);

  static PrivacyBudget not_private() {
    PrivacyBudget b;
    b.epsilon = std::numeric_limits<double>::infinity();
    b.delta = 0.0;
    return b;
  }
  bool is_private() const { return std::isfinite(epsilon); }
};

// Renyi-DP curve: epsilon(alpha) sampled at strictly increasing orders > 1.
struct RdpCurve {
  std::vector<double> orders;
  std::vector<double> values;
};

// Subsampled Gaussian mechanism parameters; q = B / n.
struct MechanismSpec {
  double q = 1.0;
  double sigma = 1.0;
  std::size_t steps = 0;
};

inline constexpr double kDefaultDelta = 1e-5;

// Order grid spanning the regimes used by common accountants.
const std::vector<double>& default_rdp_orders();

// Per-step RDP of the Poisson-subsampled Gaussian mechanism. Exact
// alpha/(2 sigma^2) at q = 1; for q < 1 an upper bound via the binomial
// series at the next integer order.
RdpCurve rdp_subsampled_gaussian(double q, double sigma,
                                 const std::vector<double>& orders);

// Additive composition over `steps` identical releases.
RdpCurve compose_steps(const RdpCurve& curve, std::size_t steps);

// Standard conversion: eps = min_alpha [eps(alpha) + log(1/delta)/(alpha-1)].
PrivacyBudget rdp_to_dp(const RdpCurve& curve, double delta);

// Smallest noise multiplier on a bisection grid whose forward accounting at
// (q, steps) stays within the target budget. Throws std::runtime_error when
// the target is unreachable inside the search bracket.
double calibrate_noise(const PrivacyBudget& target, double q, std::size_t steps,
                       const std::vector<double>& orders = default_rdp_orders());

// Composition over disjoint data splits: elementwise max (the equal-budget
// case returns that budget unchanged).
PrivacyBudget partition_compose(const PrivacyBudget& a, const PrivacyBudget& b);

// Forward accounting helper: spent budget of a full run.
PrivacyBudget account(const MechanismSpec& spec, double delta = kDefaultDelta,
                      const std::vector<double>& orders = default_rdp_orders());

}  // namespace dpcal
