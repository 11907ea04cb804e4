#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "scalereg/regularizer.hpp"
#include "test_helpers.hpp"

using namespace scalereg;
using scalereg::testing::random_arch;
using scalereg::testing::random_params;
using Catch::Approx;

namespace {

NetworkParams chain_net(std::vector<double> weights) {
  Architecture arch(std::vector<std::size_t>(weights.size() + 1, 1));
  NetworkParams p = NetworkParams::zeros(arch);
  for (std::size_t l = 0; l < weights.size(); ++l) p.layers[l](0, 0) = weights[l];
  return p;
}

}  // namespace

TEST_CASE("regularizer values") {
  const auto zero = NetworkParams::zeros(Architecture({2, 3, 1}));
  CHECK(value(RegularizerKind::sum_l1, zero) == 0.0);
  CHECK(value(RegularizerKind::max_layer_l1, zero) == 0.0);

  const auto net = chain_net({2.0, 3.0});
  CHECK(value(RegularizerKind::sum_l1, net) == Approx(5.0));
  CHECK(value(RegularizerKind::max_layer_l1, net) == Approx(3.0));

  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_params(random_arch(rng), rng);
    CHECK(value(RegularizerKind::sum_l1, p) >= value(RegularizerKind::max_layer_l1, p));
  }
}

TEST_CASE("regularizer axioms") {
  std::mt19937_64 rng(89);
  std::uniform_real_distribution<double> scale(0.0, 4.0);
  for (const auto kind : {RegularizerKind::sum_l1, RegularizerKind::max_layer_l1}) {
    for (int trial = 0; trial < 100; ++trial) {
      NetworkParams p = random_params(random_arch(rng), rng);
      const double a = scale(rng);
      const double before = value(kind, p);
      p.scale_entries(a);
      CHECK(value(kind, p) == Approx(a * before).margin(1e-12 * (1.0 + a * before)));
    }
    // positive definiteness
    NetworkParams q = NetworkParams::zeros(Architecture({2, 2, 1}));
    CHECK(value(kind, q) == 0.0);
    q.layers[1](0, 0) = 1e-14;
    CHECK(value(kind, q) > 0.0);
  }
}

TEST_CASE("unit ball membership") {
  CHECK(in_unit_ball(RegularizerKind::sum_l1, NetworkParams::zeros(Architecture({1, 1, 1}))));
  CHECK(in_unit_ball(RegularizerKind::sum_l1, chain_net({0.4, 0.6}), 0.0));
  CHECK_FALSE(in_unit_ball(RegularizerKind::sum_l1, chain_net({2.0, 3.0})));
}

TEST_CASE("l1 ball projection") {
  SECTION("known thresholds") {
    CHECK(project_l1_ball({3.0, 1.0}) == Vector{1.0, 0.0});
    CHECK(project_l1_ball({0.8, -0.8}) == Vector{0.5, -0.5});
  }

  SECTION("hand cases agree with a dense grid search") {
    for (const Vector v : {Vector{3.0, 1.0}, Vector{0.8, -0.8}}) {
      const Vector p = project_l1_ball(v);
      Vector best{0.0, 0.0};
      double best_d = std::numeric_limits<double>::infinity();
      const double res = 1e-3;
      for (double a = -1.0; a <= 1.0 + 1e-12; a += res)
        for (double b = -1.0; std::abs(a) + std::abs(b) <= 1.0 + 1e-12; b += res) {
          const double d = (v[0] - a) * (v[0] - a) + (v[1] - b) * (v[1] - b);
          if (d < best_d) {
            best_d = d;
            best = {a, b};
          }
        }
      CHECK(p[0] == Approx(best[0]).margin(res));
      CHECK(p[1] == Approx(best[1]).margin(res));
      const double dp = (v[0] - p[0]) * (v[0] - p[0]) + (v[1] - p[1]) * (v[1] - p[1]);
      CHECK(dp <= best_d + 1e-12);
    }
  }

  SECTION("interior points are unchanged") {
    const Vector v{0.2, -0.3, 0.1};
    CHECK(project_l1_ball(v) == v);
  }

  SECTION("idempotent and feasible") {
    std::mt19937_64 rng(97);
    std::normal_distribution<double> normal(0.0, 2.0);
    for (int trial = 0; trial < 500; ++trial) {
      Vector v(1 + trial % 12);
      for (double& x : v) x = normal(rng);
      const Vector p = project_l1_ball(v);
      double l1 = 0.0;
      for (double x : p) l1 += std::abs(x);
      CHECK(l1 <= 1.0 + 1e-12);
      const Vector pp = project_l1_ball(p);
      for (std::size_t i = 0; i < p.size(); ++i) CHECK(pp[i] == Approx(p[i]).margin(1e-15));
    }
  }

  SECTION("beats random feasible points in Euclidean distance") {
    std::mt19937_64 rng(101);
    std::normal_distribution<double> normal(0.0, 2.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t d = 1 + trial % 10;
      Vector v(d);
      for (double& x : v) x = normal(rng);
      const Vector p = project_l1_ball(v);
      double dp = 0.0;
      for (std::size_t i = 0; i < d; ++i) dp += (v[i] - p[i]) * (v[i] - p[i]);
      for (int z = 0; z < 30; ++z) {
        // random point of the l1 ball: Dirichlet magnitudes scaled into the interior
        Vector q(d);
        double total = 0.0;
        for (double& x : q) {
          x = -std::log(1.0 - unif(rng));
          total += x;
        }
        const double radius = unif(rng);
        for (double& x : q) x = (unif(rng) < 0.5 ? -1.0 : 1.0) * x / total * radius;
        double dq = 0.0;
        for (std::size_t i = 0; i < d; ++i) dq += (v[i] - q[i]) * (v[i] - q[i]);
        CHECK(dp <= dq + 1e-12);
      }
    }
  }
}

TEST_CASE("network projection") {
  SECTION("sum norm flattens across layers") {
    const auto net = chain_net({3.0, 1.0});
    const auto proj = project_unit_ball(RegularizerKind::sum_l1, net);
    CHECK(proj.layers[0](0, 0) == Approx(1.0));
    CHECK(proj.layers[1](0, 0) == 0.0);
  }

  SECTION("max-layer norm projects layers independently") {
    NetworkParams net = NetworkParams::zeros(Architecture({2, 1, 1}));
    net.layers[0](0, 0) = 0.8;
    net.layers[0](0, 1) = -0.8;
    net.layers[1](0, 0) = 0.25;
    const auto proj = project_unit_ball(RegularizerKind::max_layer_l1, net);
    CHECK(proj.layers[0](0, 0) == Approx(0.5));
    CHECK(proj.layers[0](0, 1) == Approx(-0.5));
    CHECK(proj.layers[1](0, 0) == Approx(0.25));  // feasible layer untouched
  }

  SECTION("projection output is feasible for random parameters") {
    std::mt19937_64 rng(103);
    for (const auto kind : {RegularizerKind::sum_l1, RegularizerKind::max_layer_l1}) {
      for (int trial = 0; trial < 100; ++trial) {
        const auto p = project_unit_ball(kind, random_params(random_arch(rng), rng, 2.0));
        CHECK(in_unit_ball(kind, p, 1e-12));
      }
    }
  }
}

TEST_CASE("random sphere directions") {
  std::mt19937_64 rng(107);
  for (const auto kind : {RegularizerKind::sum_l1, RegularizerKind::max_layer_l1}) {
    for (int trial = 0; trial < 50; ++trial) {
      const auto dir = random_unit_sphere_direction(random_arch(rng), kind, rng);
      CHECK(value(kind, dir) == Approx(1.0).margin(1e-12));
    }
  }
}
