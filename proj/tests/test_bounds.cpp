#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "scalereg/bounds.hpp"
#include "scalereg/regularizer.hpp"
#include "scalereg/subgauss.hpp"
#include "test_helpers.hpp"

using namespace scalereg;
using scalereg::testing::random_arch;
using scalereg::testing::random_params;
using scalereg::testing::random_vector;
using Catch::Approx;

namespace {

NetworkParams chain_net(std::vector<double> weights) {
  Architecture arch(std::vector<std::size_t>(weights.size() + 1, 1));
  NetworkParams p = NetworkParams::zeros(arch);
  for (std::size_t l = 0; l < weights.size(); ++l) p.layers[l](0, 0) = weights[l];
  return p;
}

Dataset inputs_only(std::vector<Vector> xs) {
  Dataset d;
  d.inputs = std::move(xs);
  d.responses = Vector(d.inputs.size(), 0.0);
  return d;
}

}  // namespace

TEST_CASE("pointwise Lipschitz constant") {
  const auto relu = make_activation(ActivationKind::relu);

  SECTION("hand case on scalar chains") {
    const auto theta = chain_net({2.0, 3.0});
    const auto gamma = chain_net({1.0, 1.0});
    const Vector x{1.0};
    const double c = lipschitz_pointwise(theta, gamma, relu, x);
    CHECK(c == Approx(6.0));
    const double lhs = std::abs(forward(theta, relu, x) - forward(gamma, relu, x));
    CHECK(lhs <= c * frobenius_distance(theta, gamma));
    CHECK(lhs == Approx(5.0));
  }

  SECTION("identical parameters satisfy the inequality trivially") {
    std::mt19937_64 rng(149);
    const auto theta = random_params(Architecture({2, 3, 1}), rng);
    CHECK(std::abs(forward(theta, relu, {1.0, -1.0}) - forward(theta, relu, {1.0, -1.0})) == 0.0);
  }

  SECTION("no violations across activation kinds") {
    std::mt19937_64 rng(151);
    for (const auto kind : {ActivationKind::relu, ActivationKind::leaky_relu, ActivationKind::elu,
                            ActivationKind::tanh, ActivationKind::silu}) {
      const auto act = make_activation(kind);
      for (int trial = 0; trial < 200; ++trial) {
        const Architecture arch = random_arch(rng);
        const auto theta = random_params(arch, rng);
        const auto gamma = random_params(arch, rng);
        const Vector x = random_vector(arch.input_dim(), rng);
        const double lhs = std::abs(forward(theta, act, x) - forward(gamma, act, x));
        const double rhs = lipschitz_pointwise(theta, gamma, act, x) *
                           frobenius_distance(theta, gamma);
        CHECK(lhs <= rhs * (1.0 + 1e-9) + 1e-12);
      }
    }
  }

  SECTION("empirical variant dominated on the unit ball") {
    std::mt19937_64 rng(157);
    for (int trial = 0; trial < 100; ++trial) {
      const Architecture arch = random_arch(rng);
      Dataset data = inputs_only({});
      for (int i = 0; i < 6; ++i) data.inputs.push_back(random_vector(arch.input_dim(), rng));
      data.responses = Vector(6, 0.0);
      const auto relu_act = make_activation(ActivationKind::relu);
      const auto omega = random_unit_sphere_direction(arch, RegularizerKind::sum_l1, rng);
      const auto gamma = random_unit_sphere_direction(arch, RegularizerKind::sum_l1, rng);
      const double cbar = lipschitz_empirical(omega, gamma, relu_act, data);
      const double c1 = lipschitz_unit_ball(relu_act, arch.depth(), data);
      CHECK(cbar <= c1 * (1.0 + 1e-9));
      CHECK(pred_distance(omega, gamma, relu_act, data) <=
            cbar * frobenius_distance(omega, gamma) * (1.0 + 1e-9) + 1e-12);
    }
  }
}

TEST_CASE("unit-ball constant") {
  const auto relu = make_activation(ActivationKind::relu);
  const Dataset unit = inputs_only({{1.0}});

  CHECK(lipschitz_unit_ball(relu, 1, unit) == Approx(4.0));
  CHECK(lipschitz_unit_ball(relu, 2, unit) == Approx(2.0 * std::sqrt(2.0)));

  SECTION("bounds the network values over the ball") {
    std::mt19937_64 rng(163);
    for (int trial = 0; trial < 300; ++trial) {
      const Architecture arch = random_arch(rng);
      Dataset data = inputs_only({});
      for (int i = 0; i < 5; ++i) data.inputs.push_back(random_vector(arch.input_dim(), rng));
      data.responses = Vector(5, 0.0);
      const auto omega = random_unit_sphere_direction(arch, RegularizerKind::sum_l1, rng);
      const double c1 = lipschitz_unit_ball(relu, arch.depth(), data);
      const auto zero = NetworkParams::zeros(arch);
      CHECK(pred_distance(omega, zero, relu, data) <= c1 * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("entropy bound") {
  CHECK(entropy_bound(0.5, 0.0, 10) == 0.0);
  CHECK(entropy_bound(4.0, 4.0, 2) == Approx(10.15888308335967));

  SECTION("monotone nonincreasing in the radius") {
    double prev = std::numeric_limits<double>::infinity();
    for (double r = 0.05; r <= 10.0; r += 0.05) {
      const double h = entropy_bound(r, 4.0, 2);
      CHECK(h <= prev * (1.0 + 1e-12));
      prev = h;
    }
  }

  SECTION("independent re-expression") {
    std::mt19937_64 rng(167);
    std::uniform_real_distribution<double> unif(0.1, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
      const double r = unif(rng), c = unif(rng);
      const std::size_t P = 1 + trial % 50;
      const double direct = entropy_bound(r, c, P);
      const double arg = std::numbers::e * P * r * r / (c * c);
      const double redo = 6.0 * c * c / (r * r) * std::log(std::max(arg, 2.0 * std::numbers::e));
      CHECK(direct == Approx(redo).epsilon(1e-12));
    }
  }
}

TEST_CASE("dudley bound") {
  CHECK(dudley_bound(8.0 * 1.0 * 4.0, 1.0, 4.0, 2) == Approx(0.0).margin(1e-12));
  CHECK(dudley_bound(4.0, 1.0, 4.0, 2) == Approx(27.057899018889433));
  CHECK(dudley_bound(1.0, 1.0, 0.0, 7) == 0.0);
  CHECK_THROWS_AS(dudley_bound(100.0, 1.0, 4.0, 2), std::invalid_argument);

  SECTION("halving delta adds one log-2 increment") {
    const double c = 4.0;
    const std::size_t P = 2;
    const double inc = 2.5 * c * std::sqrt(std::log(2.0 * std::numbers::e)) * std::log(2.0);
    for (double delta = 16.0; delta > 0.1; delta *= 0.5)
      CHECK(dudley_bound(delta / 2.0, 1.0, c, P) - dudley_bound(delta, 1.0, c, P) ==
            Approx(inc).epsilon(1e-12));
  }

  SECTION("independent re-expression") {
    std::mt19937_64 rng(241);
    std::uniform_real_distribution<double> unif(0.2, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
      const double sigma = unif(rng), c = unif(rng);
      const std::size_t P = 1 + trial % 40;
      const double delta = unif(rng) / 3.0 * 8.0 * sigma * c;
      const double direct = dudley_bound(delta, sigma, c, P);
      const double redo = (5.0 * c / 2.0) *
                          std::pow(std::log(std::max<double>(std::numbers::e * P,
                                                             2.0 * std::numbers::e)),
                                   0.5) *
                          (std::log(8.0 * sigma * c) - std::log(delta));
      CHECK(direct == Approx(redo).epsilon(1e-12));
    }
  }
}

TEST_CASE("tuning parameter formula") {
  CHECK(tuning_lambda(100, 2, 1, 1.0, 1.0, 1.0) == Approx(1.2476583939682908).epsilon(1e-14));

  SECTION("doubling n rescales by log(4n) / (sqrt(2) log(2n))") {
    for (std::size_t n : {50ul, 100ul, 400ul}) {
      const double ratio = tuning_lambda(2 * n, 8, 2, 1.0, 1.5, 0.7) /
                           tuning_lambda(n, 8, 2, 1.0, 1.5, 0.7);
      CHECK(ratio == Approx(std::log(4.0 * n) / (std::sqrt(2.0) * std::log(2.0 * n))));
    }
  }

  SECTION("monotone and sublinear in the parameter count") {
    double prev = 0.0;
    for (std::size_t P = 2; P <= 1 << 20; P *= 2) {
      const double lam = tuning_lambda(100, P, 1, 1.0, 1.0, 1.0);
      CHECK(lam > prev);
      if (prev > 0.0) CHECK(lam / prev < 2.0);  // grows slower than P itself by far
      prev = lam;
    }
  }

  SECTION("independent re-expression") {
    std::mt19937_64 rng(173);
    std::uniform_real_distribution<double> unif(0.5, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 10 + trial * 7, P = 2 + trial, L = 1 + trial % 4;
      const double a_lip = unif(rng), xn = unif(rng), a = unif(rng);
      const double direct = tuning_lambda(n, P, L, a_lip, xn, a);
      const double redo = a * std::exp(static_cast<double>(L) * std::log(2.0 * a_lip / L)) * xn *
                          std::sqrt(L * std::log(2.0 * P)) * std::log(2.0 * n) /
                          std::sqrt(static_cast<double>(n));
      CHECK(direct == Approx(redo).epsilon(1e-12));
    }
  }
}

TEST_CASE("sub-Gaussian tail bound") {
  const double gamma_sq = 1.6568542494923806;
  const double gamma = std::sqrt(gamma_sq);

  // v = 2 gamma^2 at n = 1: exp(-gamma^2 / (6 K^2))
  CHECK(subgaussian_tail(2.0 * gamma_sq, 1, 2.0, gamma) ==
        Approx(std::exp(-gamma_sq / (6.0 * 4.0))));

  SECTION("doubling n squares the bound") {
    const double v = 2.0 * gamma_sq;
    const double b1 = subgaussian_tail(v, 10, 2.0, gamma);
    const double b2 = subgaussian_tail(v, 20, 2.0, gamma);
    CHECK(b2 == Approx(b1 * b1));
  }

  SECTION("below the validity range is refused") {
    CHECK_THROWS_AS(subgaussian_tail(gamma_sq, 5, 2.0, gamma), std::invalid_argument);
  }
}

TEST_CASE("sub-Gaussian constructors") {
  SECTION("gaussian closed form") {
    const SubGaussianSpec spec = gaussian_subgauss_params(1.0);
    CHECK(spec.K == Approx(2.0));
    CHECK(spec.gamma * spec.gamma == Approx(1.6568542494923806));
    const SubGaussianSpec half = gaussian_subgauss_params(0.01);
    CHECK(half.gamma < 0.05);  // gamma shrinks with sigma
  }

  SECTION("rademacher closed form") {
    const SubGaussianSpec spec = rademacher_subgauss_params(1.5);
    const double lhs = spec.K * spec.K * (std::exp(spec.param * spec.param / (spec.K * spec.K)) - 1.0);
    CHECK(lhs == Approx(spec.gamma * spec.gamma));
  }

  SECTION("uniform spec satisfies its own inequality") {
    const SubGaussianSpec spec = uniform_subgauss_params(2.0);
    const double lhs = spec.K * spec.K * (spec.exp_square_moment() - 1.0);
    CHECK(lhs <= spec.gamma * spec.gamma * (1.0 + 1e-12));
  }

  SECTION("an undersized gamma is rejected") {
    CHECK_THROWS_AS(SubGaussianSpec(NoiseKind::gaussian, 1.0, 2.0, 0.5), std::invalid_argument);
  }

  SECTION("sampler variances match their analytic values") {
    std::mt19937_64 rng(179);
    for (const auto& spec : {gaussian_subgauss_params(0.8), rademacher_subgauss_params(1.2),
                             uniform_subgauss_params(2.0)}) {
      Vector u;
      spec.sample(rng, u, 200000);
      double var = 0.0;
      for (double x : u) var += x * x;
      var /= static_cast<double>(u.size());
      CHECK(var == Approx(spec.variance()).epsilon(0.05));
    }
  }
}

TEST_CASE("bound report") {
  std::mt19937_64 rng(181);
  Dataset data = inputs_only({});
  for (int i = 0; i < 20; ++i) data.inputs.push_back(random_vector(3, rng));
  data.responses = Vector(20, 0.0);
  const Architecture arch({3, 4, 1});
  const auto act = make_activation(ActivationKind::relu);
  const double c1 = lipschitz_unit_ball(act, 1, data);
  const BoundReport rep = make_bound_report(act, arch, data, 1.0, 1.0, c1, {0.1, 0.2});
  CHECK(rep.P == param_count(arch));
  CHECK(rep.c_lip1 == Approx(c1));
  CHECK(rep.lambda_theoretical ==
        Approx(tuning_lambda(20, rep.P, 1, 1.0, rep.inputs_norm, 1.0)));
  REQUIRE(rep.entropy_at.size() == 2);
  CHECK(rep.entropy_at[0].second == Approx(entropy_bound(0.1, c1, rep.P)));
  CHECK(rep.dudley == Approx(dudley_bound(c1, 1.0, c1, rep.P)));
}
