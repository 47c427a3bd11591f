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

#include <cmath>
#include <limits>

#include <stdexcept>

#include <doctest.h>

#include "dpcal/accountant.hpp"

using namespace dpcal;

namespace {

// Classical closed-form Gaussian mechanism bound, implemented independently
// of the accountant: eps = sqrt(2 ln(1.25/delta)) / sigma.
double gaussian_mechanism_epsilon(double sigma, double delta) {
  return std::sqrt(2.0 * std::log(1.25 / delta)) / sigma;
}

double forward_eps(double q, double sigma, std::size_t steps, double delta) {
  return rdp_to_dp(compose_steps(rdp_subsampled_gaussian(q, sigma, default_rdp_orders()),
                                 steps),
                   delta)
      .epsilon;
}

}  // namespace

TEST_CASE("privacy budget invariants") {
  CHECK_THROWS_AS(PrivacyBudget(-1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(PrivacyBudget(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PrivacyBudget(1.0, -0.1), std::invalid_argument);
  CHECK(PrivacyBudget(0.0, 0.0).is_private());
  CHECK_FALSE(PrivacyBudget::not_private().is_private());
}

TEST_CASE("q=1 reduces to the Gaussian closed form") {
  CHECK(rdp_subsampled_gaussian(1.0, 1.0, {2.0}).values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rdp_subsampled_gaussian(1.0, 2.0, {9.0}).values[0] == doctest::Approx(1.125).epsilon(1e-12));

  for (double sigma : {0.5, 1.0, 2.0, 5.0}) {
    for (double alpha : {1.5, 2.0, 8.0, 64.0}) {
      const double got = rdp_subsampled_gaussian(1.0, sigma, {alpha}).values[0];
      const double want = alpha / (2.0 * sigma * sigma);
      CHECK(std::abs(got - want) / want < 1e-9);
    }
  }
}

TEST_CASE("subsampling never hurts") {
  const double full = rdp_subsampled_gaussian(1.0, 1.0, {2.0}).values[0];
  const double sub = rdp_subsampled_gaussian(0.01, 1.0, {2.0}).values[0];
  CHECK(sub <= full);
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(rdp_subsampled_gaussian(0.0, 1.0, {2.0}), std::invalid_argument);
  CHECK_THROWS_AS(rdp_subsampled_gaussian(1.1, 1.0, {2.0}), std::invalid_argument);
  CHECK_THROWS_AS(rdp_subsampled_gaussian(0.5, 0.0, {2.0}), std::invalid_argument);
  CHECK_THROWS_AS(rdp_subsampled_gaussian(0.5, 1.0, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(rdp_to_dp(rdp_subsampled_gaussian(1.0, 1.0, {2.0}), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(rdp_to_dp(rdp_subsampled_gaussian(1.0, 1.0, {2.0}), 1.0),
                  std::invalid_argument);
}

TEST_CASE("monotonicity grid") {
  const std::vector<double> qs = {0.001, 0.01, 0.1, 1.0};
  const std::vector<double> sigmas = {0.5, 1.0, 2.0, 5.0};
  const std::vector<double> alphas = {1.5, 2.0, 8.0, 64.0};
  for (double alpha : alphas) {
    // non-increasing in sigma at fixed (q, alpha)
    for (double q : qs) {
      double prev = std::numeric_limits<double>::infinity();
      for (double sigma : sigmas) {
        const double v = rdp_subsampled_gaussian(q, sigma, {alpha}).values[0];
        CHECK(v <= prev + 1e-15);
        prev = v;
      }
    }
    // non-decreasing in q at fixed (sigma, alpha)
    for (double sigma : sigmas) {
      double prev = 0.0;
      for (double q : qs) {
        const double v = rdp_subsampled_gaussian(q, sigma, {alpha}).values[0];
        CHECK(v >= prev - 1e-15);
        prev = v;
      }
    }
  }
}

TEST_CASE("compose_steps linearity") {
  const RdpCurve base = rdp_subsampled_gaussian(0.01, 1.0, default_rdp_orders());
  const RdpCurve zero = compose_steps(base, 0);
  for (double v : zero.values) CHECK(v == 0.0);
  const RdpCurve one = compose_steps(base, 1);
  CHECK(one.values == base.values);

  RdpCurve synthetic;
  synthetic.orders = {2.0};
  synthetic.values = {0.01};
  CHECK(compose_steps(synthetic, 100).values[0] == doctest::Approx(1.0));
}

TEST_CASE("rdp_to_dp formula and superset property") {
  RdpCurve curve;
  curve.orders = {2.0};
  curve.values = {1.0};
  const PrivacyBudget b = rdp_to_dp(curve, std::exp(-1.0));
  CHECK(b.epsilon == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(b.delta == doctest::Approx(std::exp(-1.0)));

  // more orders can only lower the minimum
  RdpCurve more = rdp_subsampled_gaussian(1.0, 2.0, {2.0});
  const double eps_one = rdp_to_dp(more, 1e-5).epsilon;
  const double eps_many =
      rdp_to_dp(rdp_subsampled_gaussian(1.0, 2.0, default_rdp_orders()), 1e-5).epsilon;
  CHECK(eps_many <= eps_one);
}

TEST_CASE("rdp_to_dp epsilon non-increasing in delta") {
  const RdpCurve curve =
      compose_steps(rdp_subsampled_gaussian(0.1, 1.0, default_rdp_orders()), 100);
  double prev = std::numeric_limits<double>::infinity();
  for (double delta : {1e-9, 1e-7, 1e-5, 1e-3, 1e-1}) {
    const double eps = rdp_to_dp(curve, delta).epsilon;
    CHECK(eps <= prev);
    prev = eps;
  }
}

TEST_CASE("q=1 single step agrees with the Gaussian mechanism oracle") {
  const double eps = forward_eps(1.0, 5.0, 1, 1e-5);
  const double oracle = gaussian_mechanism_epsilon(5.0, 1e-5);
  CHECK(std::abs(eps - oracle) / oracle < 0.10);
}

TEST_CASE("calibrate_noise round-trip and monotonicity") {
  const PrivacyBudget target(8.0, 1e-5);
  const double q = 0.4;
  const double sigma = calibrate_noise(target, q, 180);
  const double eps = forward_eps(q, sigma, 180, 1e-5);
  CHECK(eps <= target.epsilon);
  CHECK(eps >= target.epsilon * (1.0 - 1e-3));

  // doubling steps raises sigma
  const double sigma2 = calibrate_noise(target, q, 360);
  CHECK(sigma2 > sigma);

  // tightening epsilon from 8 to 3 raises sigma
  const double sigma3 = calibrate_noise(PrivacyBudget(3.0, 1e-5), q, 180);
  CHECK(sigma3 > sigma);
}

TEST_CASE("calibrate_noise unreachable target") {
  CHECK_THROWS_AS(calibrate_noise(PrivacyBudget(1e-9, 1e-12), 1.0, 1000000),
                  std::runtime_error);
}

TEST_CASE("partition_compose") {
  const PrivacyBudget equal =
      partition_compose(PrivacyBudget(8.0, 1e-5), PrivacyBudget(8.0, 1e-5));
  CHECK(equal.epsilon == 8.0);
  CHECK(equal.delta == 1e-5);

  const PrivacyBudget vacuous =
      partition_compose(PrivacyBudget(0.0, 0.0), PrivacyBudget(3.0, 1e-5));
  CHECK(vacuous.epsilon == 3.0);
  CHECK(vacuous.delta == 1e-5);

  const PrivacyBudget mixed =
      partition_compose(PrivacyBudget(3.0, 1e-5), PrivacyBudget(8.0, 1e-6));
  CHECK(mixed.epsilon == 8.0);
  CHECK(mixed.delta == 1e-5);
}
