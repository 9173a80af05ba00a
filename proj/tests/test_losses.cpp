#include <doctest.h>

#include <cmath>

#include "proalign/errors.hpp"
#include "proalign/instances.hpp"
#include "proalign/losses.hpp"
#include "proalign/numeric.hpp"
#include "proalign/oracle.hpp"

using namespace proalign;

namespace {

const double kLog2 = std::log(2.0);

Policy tab(const Distribution& d) { return Policy(TabularPolicy::from_distribution(d)); }

LossSpec pairwise_spec(LossKind kind, const Distribution& ref, PairwiseDataset data, double beta) {
  LossSpec s;
  s.kind = kind;
  s.beta = beta;
  s.ref = ref;
  s.data = std::move(data);
  return s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double rel_err(const std::vector<double>& analytic, const std::vector<double>& fd) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    num = std::max(num, std::abs(analytic[i] - fd[i]));
    den = std::max(den, std::abs(fd[i]));
  }
  return num / std::max(den, 1e-3);
}

}  // namespace

TEST_CASE("dpo_sample examples") {
  auto s = make_space({"a", "b"});
  auto ref = Distribution::uniform(s);
  auto spec = pairwise_spec(LossKind::DpoSample, ref, PairwiseDataset(s, {{0, 1, 1}}), 1.0);
  CHECK(std::abs(loss_value(spec, tab(ref)) - kLog2) < 1e-15);
  auto pi = Distribution::from_probs(s, {0.8, 0.2});
  CHECK(std::abs(loss_value(spec, tab(pi)) - std::log(1.25)) < 1e-12);
  spec.data = PairwiseDataset(s, {});
  CHECK_THROWS_AS(loss_value(spec, tab(ref)), EmptyInput);
}

TEST_CASE("dpo_sample is blind to a shared shift of labeled log-probs") {
  auto s = make_space({"a", "b", "c", "d"});
  auto ref = Distribution::uniform(s);
  auto dpo = pairwise_spec(LossKind::DpoSample, ref, PairwiseDataset(s, {{0, 1, 1}}), 0.5);
  auto pi = TabularPolicy(s, {-0.6, -1.2, 0.5, 0.8});
  for (double c : {-1.0, -0.5, -0.25, 0.25, 0.5, 1.0}) {
    const auto shifted = shift_labeled(pi, {0, 1}, c);
    CHECK(std::abs(loss_value(dpo, Policy(shifted)) - loss_value(dpo, Policy(pi))) < 1e-12);
  }
}

TEST_CASE("dpo_sample gradient carries the importance weight") {
  auto s = make_space({"a", "b", "c"});
  auto ref = Distribution::uniform(s);
  auto spec = pairwise_spec(LossKind::DpoSample, ref, PairwiseDataset(s, {{0, 1, 1}}), 1.0);
  // Margin 30: sigma(-30) ~ 1e-13.
  auto pol = Policy(TabularPolicy(s, {15.0, -15.0, 0.0}));
  const auto g = loss_gradient(spec, pol);
  double norm = 0.0;
  for (double x : g) norm += x * x;
  CHECK(std::sqrt(norm) < 1e-6);
  // Near the reference the weight is 1/2 on beta * (e_w - e_l) in log-prob space.
  std::vector<double> dlogp;
  const auto lp = ref.log_probs();
  evaluate_logp(spec, lp, &dlogp);
  CHECK(std::abs(dlogp[0] + 0.5) < 1e-15);
  CHECK(std::abs(dlogp[1] - 0.5) < 1e-15);
  CHECK(dlogp[2] == 0.0);
}

TEST_CASE("dpo_population values") {
  Rng rng(31);
  auto s = make_indexed_space(3);
  auto ref = random_distribution(s, rng);
  LossSpec spec;
  spec.kind = LossKind::DpoPopulation;
  spec.beta = 0.7;
  spec.ref = ref;
  spec.mu = random_distribution(s, rng);
  spec.pref = random_preference(s, rng);
  // Sum over ordered pairs of mu mu p is 1/2, so each -log sigma(0) = log 2
  // contributes half.
  CHECK(std::abs(loss_value(spec, tab(ref)) - 0.5 * kLog2) < 1e-15);

  auto pi = random_tabular(s, rng);
  const auto lp = pi.log_probs();
  double brute = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const double d = spec.beta * (lp[i] - ref.log_prob(i)) - spec.beta * (lp[j] - ref.log_prob(j));
      brute -= spec.mu->prob(i) * spec.mu->prob(j) * (*spec.pref)(i, j) * log_sigmoid(d);
    }
  CHECK(std::abs(loss_value(spec, Policy(pi)) - brute) < 1e-14);

  spec.pref = PreferenceMatrix::indifferent(s);
  double kl_mean = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const double d = spec.beta * (lp[i] - ref.log_prob(i) - lp[j] + ref.log_prob(j));
      kl_mean += spec.mu->prob(i) * spec.mu->prob(j) * kl_bernoulli_half(d);
    }
  CHECK(std::abs(loss_value(spec, Policy(pi)) - 0.5 * (kl_mean + kLog2)) < 1e-14);

  spec.mu = Distribution::from_probs(s, {0.5, 0.5, 0.0}, Distribution::Kind::Empirical);
  CHECK_THROWS_AS(loss_value(spec, Policy(pi)), InvalidArgument);
}

TEST_CASE("edpo examples") {
  auto s = make_space({"a", "b"});
  auto ref = Distribution::from_probs(s, {1.0 / 3.0, 2.0 / 3.0});
  LossSpec spec;
  spec.kind = LossKind::Edpo;
  spec.beta = 1.0;
  spec.alpha = 1.0;
  spec.ref = ref;
  spec.mu = Distribution::uniform(s);
  spec.mu_hat = Distribution::uniform(s);
  spec.score = ScoreMap(s, {0.0, 0.0}, {true, true});
  CHECK(std::abs(loss_value(spec, tab(ref))) < 1e-30);
  // Ratios (2, 1/2): delta = log 4 on both off-diagonal pairs, weight 1/4 each.
  auto pi = Distribution::from_probs(s, {2.0 / 3.0, 1.0 / 3.0});
  CHECK(std::abs(loss_value(spec, tab(pi)) - 0.25 * kl_bernoulli_half(std::log(4.0))) < 1e-15);
  spec.score = ScoreMap(s, {0.25, -0.25}, {true, true});
  const double opt = -(0.5 * 0.25 * std::log(2.0 / 3.0) - 0.5 * 0.25 * std::log(1.0 / 3.0));
  CHECK(std::abs(loss_value(spec, tab(pi)) - (opt + 0.25 * kl_bernoulli_half(std::log(4.0)))) < 1e-15);
}

TEST_CASE("pro examples") {
  auto s = make_space({"a", "b", "c", "d"});
  Rng rng(5);
  auto ref = random_distribution(s, rng);
  PairwiseDataset pw(s, {{0, 1, 1}});
  auto pro = pro_spec(ref, pw, 0.5, 2.0);
  // With s-hat = 0 and pi = pi_ref both terms vanish.
  LossSpec zero = pro;
  zero.score = ScoreMap(s, {0.0, 0.0, 0.0, 0.0}, {true, true, false, false});
  CHECK(std::abs(loss_value(zero, tab(ref))) < 1e-15);

  // Singleton H: PRO is eDPO over the relabeled space.
  HyperSpace single(s, {3});
  LossSpec p1 = pro;
  p1.hyper = single;
  auto mu = random_distribution(s, rng);
  p1.mu = hyper_mass(mu, single);
  LossSpec e = edpo_spec(ref, pw, mu, 0.5, 2.0);
  auto pi = random_tabular(s, rng);
  CHECK(std::abs(loss_value(p1, Policy(pi)) - loss_value(e, Policy(pi))) < 1e-13);
  CHECK(max_abs_diff(loss_gradient(p1, Policy(pi)), loss_gradient(e, Policy(pi))) < 1e-13);

  // Shift probe: DPO invariant, PRO not.
  auto dpo = pairwise_spec(LossKind::DpoSample, ref, pw, 0.5);
  auto pr = probe_underdetermination(TabularPolicy::from_distribution(ref), {0, 1}, -0.5, dpo, pro);
  CHECK(std::abs(pr.dpo_delta) < 1e-12);
  CHECK(std::abs(pr.pro_delta) > 1e-3);

  LossSpec bad = pro;
  bad.hyper = HyperSpace(s, {1, 2});
  bad.mu = Distribution::uniform(bad.hyper->collapsed());
  CHECK_THROWS_AS(loss_value(bad, Policy(pi)), InvalidArgument);
}

TEST_CASE("pro shift response grows with the shift at the reference") {
  Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 4 + rng.index(4);
    auto s = make_indexed_space(n);
    auto ref = random_distribution(s, rng);
    auto pw = random_pairwise(s, rng, 2 + rng.index(n - 2), 4);
    auto mu_hat = empirical_response_dist(pw);
    std::vector<std::size_t> labeled = mu_hat.support();
    auto dpo = pairwise_spec(LossKind::DpoSample, ref, pw, 0.3);
    for (bool pin : {true, false}) {
      auto pro = pro_spec(ref, pw, 0.3, 2.5);
      pro.pin_hyper = pin;
      auto base = TabularPolicy::from_distribution(ref);
      for (double sign : {-1.0, 1.0}) {
        double prev = 0.0;
        for (double mag : {0.25, 0.5, 1.0}) {
          double c = sign * mag;
          // Keep the shifted labeled mass below 1.
          double lm = 0.0;
          for (std::size_t y : labeled) lm += ref.prob(y);
          if (std::log(lm) + c >= -1e-3) break;
          auto r = probe_underdetermination(base, labeled, c, dpo, pro);
          CHECK(std::abs(r.dpo_delta) < 1e-12);
          CHECK(std::abs(r.pro_delta) > prev);
          prev = std::abs(r.pro_delta);
        }
      }
    }
  }
}

TEST_CASE("pro_p per-pair examples") {
  auto s = make_space({"a", "b", "c"});
  auto ref = Distribution::uniform(s);
  auto spec = pairwise_spec(LossKind::ProP, ref, PairwiseDataset(s, {{0, 1, 1}}), 1.0);
  CHECK(std::abs(loss_value(spec, tab(ref)) - 3.0 * kLog2) < 1e-14);
  // Pinned r(H) = 0: push r_w = -r_l outward with beta = 1.
  auto at = [&](double m) {
    std::vector<double> lp = {ref.log_prob(0) + m, ref.log_prob(1) - m, 0.0};
    std::vector<double> dummy;
    return evaluate_logp(spec, lp, &dummy);
  };
  CHECK(at(5.0) > at(2.0));
  CHECK(at(2.0) > at(0.5));
}

TEST_CASE("pro_b examples") {
  auto s = make_space({"y", "u", "v", "w"});
  auto ref = Distribution::uniform(s);
  LossSpec spec;
  spec.kind = LossKind::ProB;
  spec.beta = 1.0;
  spec.alpha = 1.0;
  spec.ref = ref;
  spec.data = BinaryDataset(s, {{0, Label::Desired, 1}});
  CHECK(std::abs(loss_value(spec, tab(ref)) - 2.0 * kLog2) < 1e-14);
  spec.data = BinaryDataset(s, {{0, Label::Undesired, 1}});
  CHECK(std::abs(loss_value(spec, tab(ref))) < 1e-14);
  spec.alpha = 2.5;
  CHECK_NOTHROW(loss_value(spec, tab(ref)));
}

TEST_CASE("pro_b class reweighting multiplies each class by total over class count") {
  auto s = make_indexed_space(4);
  Rng rng(3);
  auto ref = random_distribution(s, rng);
  auto pi = random_tabular(s, rng);
  LossSpec spec;
  spec.kind = LossKind::ProB;
  spec.beta = 0.4;
  spec.alpha = 2.5;
  spec.ref = ref;
  BinaryDataset d(s, {{0, Label::Desired, 1}, {1, Label::Undesired, 3}, {2, Label::Undesired, 1}});
  spec.data = d;
  spec.class_reweight = true;
  const double weighted = loss_value(spec, Policy(pi));
  spec.class_reweight = false;
  auto one = [&](BinaryRecord r) {
    LossSpec t = spec;
    t.data = BinaryDataset(s, {r});
    return loss_value(t, Policy(pi));
  };
  const double expect = (1.0 * 5.0 * one(d.records()[0]) + 3.0 * 1.25 * one(d.records()[1]) +
                         1.0 * 1.25 * one(d.records()[2])) / 5.0;
  CHECK(std::abs(weighted - expect) < 1e-14);
}

TEST_CASE("pro_s examples") {
  auto s = make_indexed_space(5);
  auto ref = Distribution::uniform(s);
  LossSpec spec;
  spec.kind = LossKind::ProS;
  spec.beta = 1.0;
  spec.alpha = 1.0;
  spec.ref = ref;
  spec.data = ScalarDataset(s, {{0, 0.5, 1}, {1, -0.5, 1}}, 2);
  CHECK(std::abs(loss_value(spec, tab(ref)) - kLog2) < 1e-14);
  for (std::size_t n : {2u, 3u, 4u}) {
    std::vector<ScalarRecord> recs;
    for (std::size_t k = 0; k < n; ++k) recs.push_back({k, static_cast<double>(k), 2});
    spec.data = ScalarDataset(s, recs, n);
    spec.beta = 0.3;
    spec.alpha = 2.5;
    const double nn = static_cast<double>(n);
    const double expect = 0.3 * (2.0 * 2.5 / (nn * (nn + 1.0))) * (nn * (nn - 1.0) / 2.0 + nn) * kLog2;
    CHECK(std::abs(loss_value(spec, tab(ref)) - expect) < 1e-13);
  }
  spec.data = ScalarDataset(s, {{0, 1.0, 1}}, 1);
  CHECK_THROWS_AS(loss_value(spec, tab(ref)), InvalidArgument);
}

TEST_CASE("pro_s with two responses moves labeled log-probs like pro_p at the reference") {
  auto s = make_indexed_space(4);
  auto ref = Distribution::uniform(s);
  LossSpec ps;
  ps.kind = LossKind::ProS;
  ps.beta = 0.5;
  ps.alpha = 2.5;
  ps.ref = ref;
  ps.data = ScalarDataset(s, {{0, 0.5, 1}, {1, -0.5, 1}}, 2);
  auto pp = pairwise_spec(LossKind::ProP, ref, PairwiseDataset(s, {{0, 1, 1}}), 0.5);
  std::vector<double> ga, gb;
  evaluate_logp(ps, ref.log_probs(), &ga);
  evaluate_logp(pp, ref.log_probs(), &gb);
  const double cos = (ga[0] * gb[0] + ga[1] * gb[1]) /
                     std::sqrt((ga[0] * ga[0] + ga[1] * ga[1]) * (gb[0] * gb[0] + gb[1] * gb[1]));
  CHECK(std::abs(cos - 1.0) < 1e-12);
  CHECK(ga[0] < 0.0);
}

TEST_CASE("kto examples") {
  auto s = make_space({"a", "b", "c"});
  auto ref = Distribution::uniform(s);
  auto spec = pairwise_spec(LossKind::Kto, ref, PairwiseDataset(s, {{0, 1, 1}}), 0.1);
  CHECK_THROWS_AS(loss_value(spec, tab(ref)), InvalidArgument);
  for (auto mode : {KtoSignMode::AsPrinted, KtoSignMode::Utility}) {
    spec.kto.sign_mode = mode;
    CHECK(std::abs(loss_value(spec, tab(ref)) - 1.0) < 1e-15);
  }
  // Doubling lambda_D doubles the desired term only.
  spec.kto.sign_mode = KtoSignMode::AsPrinted;
  Rng rng(1);
  auto pi = random_tabular(s, rng);
  const double lp_w = pi.log_probs()[0];
  const double rw = spec.beta * (lp_w - ref.log_prob(0));
  const double desired = sigmoid(spec.beta * rw);
  const double base = loss_value(spec, Policy(pi));
  spec.kto.lambda_d = 2.0;
  CHECK(std::abs(loss_value(spec, Policy(pi)) - base - desired) < 1e-15);
}

TEST_CASE("kto saturates far from z0") {
  auto s = make_space({"a", "b", "c"});
  auto ref = Distribution::uniform(s);
  for (auto mode : {KtoSignMode::AsPrinted, KtoSignMode::Utility}) {
    auto spec = pairwise_spec(LossKind::Kto, ref, PairwiseDataset(s, {{0, 1, 1}}), 1.0);
    spec.kto.sign_mode = mode;
    std::vector<double> lp(ref.log_probs().begin(), ref.log_probs().end());
    lp[0] -= 20.0;  // r_w - z0 = -20
    std::vector<double> d;
    evaluate_logp(spec, lp, &d);
    CHECK(std::abs(d[0]) < 1e-7);
  }
}

TEST_CASE("regularizer gradient profile") {
  CHECK(regularizer_grad_profile(1.0, 1.0, 0.0) == 0.0);
  CHECK(std::abs(regularizer_grad_profile(1.0, 3.0, 1.0) - 0.5 * (sigmoid(3.0) - 0.5)) < 1e-15);
  CHECK(std::abs(regularizer_grad_profile(1.0, 3.0, 1.0) - 0.226287) < 1e-6);
  CHECK(std::abs(regularizer_grad_profile(2.0, 1.0, 1e3) - 0.5) < 1e-15);
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double a = 0.1 + 10.0 * rng.uniform(), b = 0.01 + 5.0 * rng.uniform(), d = 100.0 * rng.normal();
    CHECK(std::abs(regularizer_grad_profile(a, b, d)) <= a / 4.0 + 1e-15);
    CHECK(regularizer_grad_profile(a, b, -d) == -regularizer_grad_profile(a, b, d));
  }
  CHECK_THROWS_AS(regularizer_grad_profile(0.0, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("pro diverges at the simplex boundary") {
  auto s = make_space({"a", "b", "c", "d"});
  auto ref = Distribution::uniform(s);
  auto pro = pro_spec(ref, PairwiseDataset(s, {{0, 1, 1}}), 1.0, 10.0);
  auto at = [&](double pb) {
    return loss_value(pro, tab(Distribution::from_probs(s, {0.5 - pb, pb, 0.25, 0.25})));
  };
  CHECK(at(1e-8) - at(1e-4) > 1.0);
}

TEST_CASE("analytic gradients match central differences for every loss kind") {
  Rng rng(101);
  int checked = 0;
  for (int t = 0; t < 20; ++t) {
    auto s = make_indexed_space(5 + rng.index(3));
    auto ref = random_distribution(s, rng);
    auto pol = Policy(random_tabular(s, rng));
    for (const auto& spec : every_kind_specs(rng, s, ref)) {
      const auto g = loss_gradient(spec, pol);
      const auto fd = finite_diff_grad(spec, pol);
      CHECK_MESSAGE(rel_err(g, fd) < 1e-6, to_string(spec.kind));
      double sum = 0.0;
      for (double x : g) sum += x;
      CHECK(std::abs(sum) < 1e-10);
      ++checked;
    }
  }
  CHECK(checked > 200);
}

TEST_CASE("analytic gradients match central differences on autoregressive policies") {
  Rng rng(202);
  for (int t = 0; t < 5; ++t) {
    std::vector<double> params(AutoregressivePolicy::param_count(2, 3));
    for (double& p : params) p = rng.normal();
    Policy pol(AutoregressivePolicy(2, 3, params));
    auto ref = policy_distribution(Policy(AutoregressivePolicy::uniform(2, 3)));
    for (const auto& spec : every_kind_specs(rng, pol.space(), ref)) {
      CHECK_MESSAGE(rel_err(loss_gradient(spec, pol), finite_diff_grad(spec, pol)) < 1e-6, to_string(spec.kind));
    }
  }
}

TEST_CASE("population DPO and eDPO share their gradient") {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    auto s = make_indexed_space(2 + rng.index(7));
    auto ref = random_distribution(s, rng);
    LossSpec pop;
    pop.kind = LossKind::DpoPopulation;
    pop.beta = 0.05 + rng.uniform();
    pop.ref = ref;
    pop.mu = random_distribution(s, rng);
    pop.pref = random_preference(s, rng);
    LossSpec e = pop;
    e.kind = LossKind::Edpo;
    e.alpha = 1.0;
    e.mu_hat = pop.mu;
    e.score = true_score(*pop.pref, *pop.mu);
    auto pol = Policy(random_tabular(s, rng, 2.0));
    CHECK(max_abs_diff(loss_gradient(pop, pol), loss_gradient(e, pol)) < 1e-12);
    // Values differ by log 2 / 2 + beta E_mu[s log pi_ref].
    const double offset = 0.5 * std::log(2.0) + pop.beta * e.score->weighted_mean(
        [&] { std::vector<double> w(s->size()); for (std::size_t y = 0; y < w.size(); ++y) w[y] = pop.mu->prob(y) * ref.log_prob(y); return w; }());
    CHECK(std::abs(loss_value(pop, pol) - loss_value(e, pol) - offset) < 1e-12);
  }
}

TEST_CASE("flipping the regularizer breaks the population DPO identity") {
  Rng rng(8);
  auto s = make_indexed_space(4);
  LossSpec pop;
  pop.kind = LossKind::DpoPopulation;
  pop.beta = 0.5;
  pop.ref = random_distribution(s, rng);
  pop.mu = random_distribution(s, rng);
  pop.pref = random_preference(s, rng);
  LossSpec e = pop;
  e.kind = LossKind::Edpo;
  e.alpha = 1.0;
  e.mu_hat = pop.mu;
  e.score = true_score(*pop.pref, *pop.mu);
  e.flip_regularizer = true;
  auto pol = Policy(random_tabular(s, rng, 2.0));
  CHECK(max_abs_diff(loss_gradient(pop, pol), loss_gradient(e, pol)) > 1e-3);
}

TEST_CASE("global PRO-P and PRO at alpha = 1/eta^2 share their gradient") {
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 4 + rng.index(4);
    auto s = make_indexed_space(n);
    auto ref = random_distribution(s, rng);
    auto pw = random_pairwise(s, rng, 2 + rng.index(n - 2), 5);
    const double eta = t % 2 ? 0.5 : 2.0 / 3.0;
    auto pro = pro_spec(ref, pw, 0.1 + rng.uniform(), 1.0 / (eta * eta), eta);
    LossSpec pp = pro;
    pp.kind = LossKind::ProP;
    pp.prop_form = ProPForm::Global;
    auto pol = Policy(random_tabular(s, rng, 1.5));
    CHECK(max_abs_diff(loss_gradient(pro, pol), loss_gradient(pp, pol)) < 1e-12);
    // The values differ by -log 2 / (2 eta^2) - beta E_mu-hat[s-hat log pi_ref].
    double ref_term = 0.0;
    for (std::size_t y = 0; y < n; ++y) ref_term += pro.mu_hat->prob(y) * (*pro.score)[y] * ref.log_prob(y);
    const double offset = -std::log(2.0) / (2.0 * eta * eta) - pro.beta * ref_term;
    CHECK(std::abs(loss_value(pro, pol) - loss_value(pp, pol) - offset) < 1e-12);
  }
}

TEST_CASE("loss evaluation rejects bad hyperparameters") {
  auto s = make_indexed_space(3);
  auto ref = Distribution::uniform(s);
  auto spec = pairwise_spec(LossKind::DpoSample, ref, PairwiseDataset(s, {{0, 1, 1}}), 0.0);
  CHECK_THROWS_AS(loss_value(spec, tab(ref)), InvalidArgument);
  spec.beta = 0.1;
  spec.kind = LossKind::ProB;
  CHECK_THROWS_AS(loss_value(spec, tab(ref)), InvalidArgument);
  spec.kind = LossKind::Pro;
  CHECK_THROWS_AS(loss_value(spec, tab(ref)), InvalidArgument);
  CHECK(parse_loss_kind("pro_b") == LossKind::ProB);
  CHECK_THROWS_AS(parse_loss_kind("nca"), InvalidArgument);
}
