#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "scalereg/bounds.hpp"
#include "scalereg/effective_noise.hpp"
#include "test_helpers.hpp"

using namespace scalereg;
using scalereg::testing::random_vector;
using Catch::Approx;

namespace {

Dataset inputs_only(std::vector<Vector> xs) {
  Dataset d;
  d.inputs = std::move(xs);
  d.responses = Vector(d.inputs.size(), 0.0);
  return d;
}

const ActivationSpec kRelu = make_activation(ActivationKind::relu);
const Architecture kTiny({1, 1, 1});  // two parameters

}  // namespace

TEST_CASE("inner-product maximization") {
  NoiseOptimOptions opts;
  opts.restarts = 16;

  SECTION("zero noise has zero supremum") {
    const Dataset data = inputs_only({{1.0}, {2.0}});
    const auto m = maximize_inner_product(data, {0.0, 0.0}, kRelu, kTiny,
                                          RegularizerKind::sum_l1, opts, 1);
    CHECK(m.value == 0.0);
    const double g = brute_force_sup_tiny(data, {0.0, 0.0}, kRelu, kTiny,
                                          RegularizerKind::sum_l1, 0.05);
    CHECK(g == 0.0);
  }

  SECTION("analytic two-parameter case") {
    // sup of 2 w1 relu(w0) over |w0|+|w1| <= 1 is 1/2 at (1/2, 1/2)
    const Dataset data = inputs_only({{1.0}});
    const auto m =
        maximize_inner_product(data, {1.0}, kRelu, kTiny, RegularizerKind::sum_l1, opts, 2);
    CHECK(m.value == Approx(0.5).margin(1e-3));
    CHECK(std::abs(m.omega.layers[0](0, 0)) == Approx(0.5).margin(5e-2));
    const double g =
        brute_force_sup_tiny(data, {1.0}, kRelu, kTiny, RegularizerKind::sum_l1, 0.001);
    CHECK(g == Approx(0.5).margin(1e-3));
  }

  SECTION("feasibility and the Cauchy-Schwarz envelope") {
    std::mt19937_64 rng(191);
    for (int trial = 0; trial < 30; ++trial) {
      Dataset data = inputs_only({});
      const std::size_t n = 1 + trial % 4;
      for (std::size_t i = 0; i < n; ++i) data.inputs.push_back(random_vector(1, rng));
      data.responses = Vector(n, 0.0);
      const Vector u = random_vector(n, rng);
      const auto m =
          maximize_inner_product(data, u, kRelu, kTiny, RegularizerKind::sum_l1, opts, trial);
      CHECK(m.value >= 0.0);
      CHECK(in_unit_ball(RegularizerKind::sum_l1, m.omega, 1e-10));
      double mean_sq = 0.0;
      for (double x : u) mean_sq += x * x;
      mean_sq /= static_cast<double>(n);
      const double envelope =
          2.0 * lipschitz_unit_ball(kRelu, 1, data) * std::sqrt(mean_sq);
      CHECK(m.value <= envelope * (1.0 + 1e-9));
    }
  }

  SECTION("oracle dominance on tiny instances") {
    std::mt19937_64 rng(193);
    const double res = 0.01;
    for (int trial = 0; trial < 20; ++trial) {
      Dataset data = inputs_only({});
      const std::size_t n = 1 + trial % 3;
      for (std::size_t i = 0; i < n; ++i) data.inputs.push_back(random_vector(1, rng));
      data.responses = Vector(n, 0.0);
      const Vector u = random_vector(n, rng);
      const auto m =
          maximize_inner_product(data, u, kRelu, kTiny, RegularizerKind::sum_l1, opts, trial);
      const double g = brute_force_sup_tiny(data, u, kRelu, kTiny, RegularizerKind::sum_l1, res);
      double mean_sq = 0.0;
      for (double x : u) mean_sq += x * x;
      mean_sq /= static_cast<double>(n);
      const double slack = 2.0 * std::sqrt(mean_sq) * lipschitz_unit_ball(kRelu, 1, data) * res *
                           std::sqrt(2.0);
      CHECK(m.value >= g - slack);
      CHECK(g >= m.value - slack);
    }
  }

  SECTION("grid refinement is monotone") {
    std::mt19937_64 rng(197);
    const Dataset data = inputs_only({{0.7}, {-1.3}});
    const Vector u = random_vector(2, rng);
    double prev = 0.0;
    for (double res : {0.2, 0.1, 0.05, 0.025}) {
      const double g = brute_force_sup_tiny(data, u, kRelu, kTiny, RegularizerKind::sum_l1, res);
      CHECK(g >= prev - 1e-15);
      prev = g;
    }
  }

  SECTION("too many parameters are refused") {
    const Dataset data = inputs_only({{1.0, 1.0}});
    CHECK_THROWS_AS(brute_force_sup_tiny(data, {1.0}, kRelu, Architecture({2, 2, 1}),
                                         RegularizerKind::sum_l1, 0.1),
                    std::invalid_argument);
  }

  SECTION("scaling the noise scales the supremum") {
    std::mt19937_64 rng(199);
    const Dataset data = inputs_only({{1.0}, {0.4}});
    const Vector u = random_vector(2, rng);
    const double c = 3.5;
    Vector cu = u;
    for (double& x : cu) x *= c;
    const auto m1 =
        maximize_inner_product(data, u, kRelu, kTiny, RegularizerKind::sum_l1, opts, 11);
    const auto m2 = maximize_inner_product(data, cu, kRelu, kTiny, RegularizerKind::sum_l1, opts,
                                           11, &m1.omega);
    CHECK(m2.value >= c * m1.value - 1e-12);
    CHECK(m2.value == Approx(c * m1.value).margin(1e-6));
  }
}

TEST_CASE("effective-noise quantile") {
  NoiseOptimOptions opts;
  opts.restarts = 12;

  SECTION("zero-variance noise gives a zero quantile") {
    const Dataset data = inputs_only({{1.0}, {2.0}});
    const SubGaussianSpec silent(NoiseKind::rademacher, 0.0, 1.0, 1.0);
    const auto rep = estimate_quantile(data, silent, kRelu, kTiny, RegularizerKind::sum_l1, 0.1,
                                       20, opts, 5);
    CHECK(rep.lambda_hat == 0.0);
    for (double z : rep.z_values) CHECK(z == 0.0);
  }

  SECTION("symmetric unit spikes pin every replicate at one half") {
    const Dataset data = inputs_only({{1.0}});
    const SubGaussianSpec spikes = rademacher_subgauss_params(1.0);
    const auto rep = estimate_quantile(data, spikes, kRelu, kTiny, RegularizerKind::sum_l1, 0.1,
                                       20, opts, 6);
    for (double z : rep.z_values) CHECK(z == Approx(0.5).margin(1e-3));
    CHECK(rep.lambda_hat == Approx(0.5).margin(1e-3));
  }

  SECTION("quantile is nonincreasing in the level") {
    const Dataset data = inputs_only({{1.0}, {0.3}, {-0.4}});
    const SubGaussianSpec noise = gaussian_subgauss_params(1.0);
    const auto high = estimate_quantile(data, noise, kRelu, kTiny, RegularizerKind::sum_l1, 0.05,
                                        40, opts, 7);
    const auto low = estimate_quantile(data, noise, kRelu, kTiny, RegularizerKind::sum_l1, 0.25,
                                       40, opts, 7);
    CHECK(low.lambda_hat <= high.lambda_hat);
    // identical z-streams given the same seed
    for (int r = 0; r < 40; ++r) CHECK(low.z_values[r] == high.z_values[r]);
  }

  SECTION("too few replicates are refused") {
    const Dataset data = inputs_only({{1.0}});
    CHECK_THROWS_AS(estimate_quantile(data, gaussian_subgauss_params(1.0), kRelu, kTiny,
                                      RegularizerKind::sum_l1, 0.01, 50, opts, 8),
                    std::invalid_argument);
  }

  SECTION("warm starts and parallel runs agree with the serial baseline") {
    const Dataset data = inputs_only({{1.0}, {-0.5}});
    const SubGaussianSpec noise = gaussian_subgauss_params(0.5);
    NoiseOptimOptions serial = opts;
    const auto base = estimate_quantile(data, noise, kRelu, kTiny, RegularizerKind::sum_l1, 0.1,
                                        20, serial, 9);
    NoiseOptimOptions parallel = opts;
    parallel.threads = 4;
    const auto par = estimate_quantile(data, noise, kRelu, kTiny, RegularizerKind::sum_l1, 0.1,
                                       20, parallel, 9);
    CHECK(base.z_values == par.z_values);
    CHECK(base.lambda_hat == par.lambda_hat);

    NoiseOptimOptions warm = opts;
    warm.warm_start = true;
    const auto warmed = estimate_quantile(data, noise, kRelu, kTiny, RegularizerKind::sum_l1, 0.1,
                                          20, warm, 9);
    // warm starts can only improve each replicate's lower bound
    for (int r = 0; r < 20; ++r) CHECK(warmed.z_values[r] >= base.z_values[r] - 1e-12);
  }

  SECTION("order-statistic interval brackets the point estimate") {
    const Dataset data = inputs_only({{1.0}, {0.2}});
    const auto rep = estimate_quantile(data, gaussian_subgauss_params(1.0), kRelu, kTiny,
                                       RegularizerKind::sum_l1, 0.1, 60, opts, 10);
    CHECK(rep.order_lo >= 1);
    CHECK(rep.order_hi <= 60);
    CHECK(rep.z_lo <= rep.lambda_hat);
    CHECK(rep.lambda_hat <= rep.z_hi);
  }
}
