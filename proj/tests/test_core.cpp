#include <doctest.h>

#include <cmath>
#include <random>

#include "proalign/errors.hpp"
#include "proalign/numeric.hpp"
#include "proalign/policy.hpp"
#include "proalign/space.hpp"

using namespace proalign;

TEST_CASE("log_sigmoid examples and tails") {
  CHECK(log_sigmoid(0.0) == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  CHECK(std::abs(log_sigmoid(-1000.0) + 1000.0) < 1e-6);
  CHECK(std::abs(log_sigmoid(std::log(4.0)) - std::log(0.8)) < 1e-15);
  CHECK(std::isfinite(log_sigmoid(-1e300)));
  CHECK(log_sigmoid(40.0) < 0.0);
  CHECK_THROWS_AS(log_sigmoid(NAN), InvalidArgument);
  CHECK_THROWS_AS(log_sigmoid(INFINITY), InvalidArgument);
  double prev = log_sigmoid(-60.0);
  for (double d = -59.5; d <= 60.0; d += 0.5) {
    const double cur = log_sigmoid(d);
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("kl_bernoulli_half examples") {
  CHECK(kl_bernoulli_half(0.0) == 0.0);
  CHECK(std::abs(kl_bernoulli_half(std::log(4.0)) - std::log(1.25)) < 1e-15);
  CHECK(std::abs(kl_bernoulli_half(-std::log(4.0)) - std::log(1.25)) < 1e-15);
  CHECK(kl_bernoulli_half(1e-12) > 0.0);
  CHECK(kl_bernoulli_half(40.0) - kl_bernoulli_half(20.0) > 9.0);
  CHECK_THROWS_AS(kl_bernoulli_half(NAN), InvalidArgument);
}

TEST_CASE("kl_bernoulli_half matches its log-sigmoid expansion") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 2000; ++i) {
    const double d = u(gen);
    const double expanded = -std::log(2.0) - 0.5 * log_sigmoid(d) - 0.5 * log_sigmoid(-d);
    CHECK(std::abs(kl_bernoulli_half(d) - expanded) < 1e-12);
    CHECK(kl_bernoulli_half(d) == kl_bernoulli_half(-d));
  }
  double prev = 0.0;
  for (double d = 0.01; d < 50.0; d *= 1.3) {
    CHECK(kl_bernoulli_half(d) > prev);
    prev = kl_bernoulli_half(d);
  }
}

TEST_CASE("implicit_reward") {
  CHECK(implicit_reward(-1.3, -1.3, 0.7) == 0.0);
  CHECK(std::abs(implicit_reward(std::log(0.2), std::log(0.1), 0.1) - 0.1 * std::log(2.0)) < 1e-15);
  CHECK(std::abs(implicit_reward(std::log(0.1), std::log(0.2), 1.0) + std::log(2.0)) < 1e-15);
  CHECK_THROWS_AS(implicit_reward(0.0, 0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(implicit_reward(0.0, 0.0, -1.0), InvalidArgument);
}

TEST_CASE("response space validation") {
  CHECK_THROWS_AS(make_space({"a"}), InvalidArgument);
  CHECK_THROWS_AS(make_space({"a", "a"}), InvalidArgument);
  CHECK_THROWS_AS(make_space({"a", "b c"}), InvalidArgument);
  auto s = make_space({"a", "b", "c"});
  CHECK(s->index_of("c") == 2);
  CHECK_THROWS_AS(s->index_of("z"), InvalidArgument);
}

TEST_CASE("distribution invariants") {
  auto s = make_indexed_space(3);
  CHECK_THROWS_AS(Distribution::from_probs(s, {0.5, 0.5, 0.0}), InvalidArgument);
  auto emp = Distribution::from_probs(s, {0.5, 0.5, 0.0}, Distribution::Kind::Empirical);
  CHECK(emp.support() == std::vector<std::size_t>{0, 1});
  CHECK_THROWS_AS(Distribution::from_probs(s, {0.5, 0.5, 0.1}), InvalidArgument);
  const double w[] = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(Distribution::from_weights(s, w, Distribution::Kind::Empirical), EmptyInput);
}

TEST_CASE("policy_distribution examples") {
  auto s = make_indexed_space(3);
  auto uni = policy_distribution(Policy(TabularPolicy(s, {0.3, 0.3, 0.3})));
  for (double p : uni.probs()) CHECK(std::abs(p - 1.0 / 3.0) < 1e-15);
  auto d = policy_distribution(Policy(TabularPolicy(s, {0.0, std::log(2.0), 0.0})));
  CHECK(std::abs(d.prob(0) - 0.25) < 1e-15);
  CHECK(std::abs(d.prob(1) - 0.5) < 1e-15);
  auto ar = policy_distribution(Policy(AutoregressivePolicy::uniform(2, 2)));
  REQUIRE(ar.size() == 4);
  for (double p : ar.probs()) CHECK(std::abs(p - 0.25) < 1e-15);
}

TEST_CASE("tabular gauge invariance") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> n(0.0, 2.0);
  auto s = make_indexed_space(6);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> logits(6), shifted(6);
    const double c = n(gen) * 10.0;
    for (int i = 0; i < 6; ++i) {
      logits[i] = n(gen);
      shifted[i] = logits[i] + c;
    }
    auto a = policy_distribution(Policy(TabularPolicy(s, logits)));
    auto b = policy_distribution(Policy(TabularPolicy(s, shifted)));
    for (int i = 0; i < 6; ++i) CHECK(std::abs(a.prob(i) - b.prob(i)) < 1e-12);
  }
}

TEST_CASE("autoregressive policy factorizes and normalizes") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n(0.0, 1.5);
  for (std::size_t v : {2u, 3u, 4u}) {
    for (std::size_t len : {1u, 2u, 3u}) {
      std::vector<double> params(AutoregressivePolicy::param_count(v, len));
      for (double& p : params) p = n(gen);
      AutoregressivePolicy pol(v, len, params);
      const auto lp = pol.log_probs();
      double total = 0.0;
      for (double x : lp) total += std::exp(x);
      CHECK(std::abs(total - 1.0) < 1e-10);
      // log p(seq) = sum of per-position conditionals, recomputed by hand.
      for (std::size_t seq = 0; seq < lp.size(); ++seq) {
        double manual = 0.0;
        for (std::size_t pos = 0; pos < len; ++pos) {
          const std::size_t off = pos == 0 ? 0 : v + ((pos - 1) * v + pol.token(seq, pos - 1)) * v;
          double z = 0.0;
          for (std::size_t k = 0; k < v; ++k) z += std::exp(params[off + k]);
          manual += params[off + pol.token(seq, pos)] - std::log(z);
        }
        CHECK(std::abs(manual - lp[seq]) < 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(AutoregressivePolicy::uniform(9, 2), InvalidArgument);
  CHECK_THROWS_AS(AutoregressivePolicy::uniform(2, 6), InvalidArgument);
}

TEST_CASE("policy backward matches finite differences of a linear functional") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n(0.0, 1.0);
  AutoregressivePolicy ar(3, 2, std::vector<double>(AutoregressivePolicy::param_count(3, 2)));
  std::vector<double> params(ar.params().begin(), ar.params().end());
  for (double& p : params) p = n(gen);
  Policy pol(AutoregressivePolicy(3, 2, params));
  std::vector<double> c(pol.size());
  for (double& x : c) x = n(gen);
  auto f = [&](const Policy& p) {
    const auto lp = p.log_probs();
    double v = 0.0;
    for (std::size_t i = 0; i < lp.size(); ++i) v += c[i] * lp[i];
    return v;
  };
  const auto g = pol.backward(c);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto hi = params, lo = params;
    hi[k] += 1e-5;
    lo[k] -= 1e-5;
    const double fd = (f(pol.with_params(hi)) - f(pol.with_params(lo))) / 2e-5;
    CHECK(std::abs(fd - g[k]) < 1e-8);
  }
}
