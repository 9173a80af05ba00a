#include <doctest.h>

#include <cmath>

#include "proalign/errors.hpp"
#include "proalign/instances.hpp"
#include "proalign/oracle.hpp"

using namespace proalign;

namespace {

LossSpec dpo_spec(const Distribution& ref, const PairwiseDataset& d, double beta) {
  LossSpec s;
  s.kind = LossKind::DpoSample;
  s.beta = beta;
  s.ref = ref;
  s.data = d;
  return s;
}

}  // namespace

TEST_CASE("zero scores converge to the reference") {
  auto s = make_indexed_space(4);
  Rng rng(1);
  auto ref = random_distribution(s, rng);
  auto pro = pro_spec(ref, PairwiseDataset(s, {{0, 1, 1}}), 1.0, 3.0);
  pro.score = ScoreMap(s, {0.0, 0.0, 0.0, 0.0}, {true, true, false, false});
  auto r = solve_optimal(pro);
  REQUIRE(r.converged);
  CHECK(r.loss < 1e-15);
  const auto v = solution_view(pro, r.policy);
  for (std::size_t y = 0; y < v.pi.size(); ++y) CHECK(std::abs(v.pi[y] / v.ref[y] - 1.0) < 1e-7);
  auto st = check_stationarity(r, pro);
  CHECK(st.pass);
  auto ord = check_ordering(r, pro);
  CHECK(ord.pass);
}

TEST_CASE("single pair: PRO converges interior, sample DPO degenerates") {
  auto s = make_space({"a", "b", "H"});
  auto ref = Distribution::uniform(s);
  PairwiseDataset d(s, {{0, 1, 1}});
  auto pro = pro_spec(ref, d, 1.0, 10.0);
  CHECK(spec_alpha_threshold(pro) == doctest::Approx(4.5));
  auto r = solve_optimal(pro);
  CHECK(r.converged);
  CHECK_FALSE(r.degenerate);
  CHECK(r.min_prob > 1e-6);
  auto st = check_stationarity(r, pro);
  CHECK_MESSAGE(st.pass, to_text(st));
  auto ord = check_ordering(r, pro);
  CHECK_MESSAGE(ord.pass, to_text(ord));
  const auto v = solution_view(pro, r.policy);
  CHECK(v.pi[0] / v.ref[0] > v.pi[2] / v.ref[2]);
  CHECK(v.pi[2] / v.ref[2] > v.pi[1] / v.ref[1]);

  auto dr = solve_optimal(dpo_spec(ref, d, 1.0));
  CHECK(dr.degenerate);
  CHECK_FALSE(dr.converged);
  const auto lp = dr.policy.log_probs();
  CHECK((lp[0] - lp[1]) > 50.0);
}

TEST_CASE("solver restarts are deterministic") {
  Rng rng(4);
  auto s = make_indexed_space(5);
  auto ref = random_distribution(s, rng);
  auto pro = pro_spec(ref, random_pairwise(s, rng, 3, 4), 0.5, 20.0);
  SolveOptions o;
  o.seed = 99;
  auto a = solve_optimal(pro, o);
  auto b = solve_optimal(pro, o);
  CHECK(a.loss == b.loss);
  CHECK(a.iterations == b.iterations);
  CHECK(a.restart_losses == b.restart_losses);
  for (std::size_t i = 0; i < 5; ++i) CHECK(a.policy.params()[i] == b.policy.params()[i]);
}

TEST_CASE("stationarity and ordering on random PRO instances") {
  Rng rng(12);
  for (int t = 0; t < 6; ++t) {
    const std::size_t n = 4 + rng.index(3);
    auto s = make_indexed_space(n);
    auto ref = random_distribution(s, rng);
    auto pro = pro_spec(ref, random_pairwise(s, rng, 2 + rng.index(n - 2), 5), 0.5 + rng.uniform(), 1.0);
    pro.alpha = std::max(1.0, 2.0 * spec_alpha_threshold(pro));
    auto r = solve_optimal(pro);
    REQUIRE(r.converged);
    auto st = check_stationarity(r, pro);
    CHECK_MESSAGE(st.pass, to_text(st));
    auto ord = check_ordering(r, pro);
    CHECK_MESSAGE(ord.pass, to_text(ord));
  }
}

TEST_CASE("stationarity requires a converged, unpinned solve") {
  auto s = make_space({"a", "b", "H"});
  auto ref = Distribution::uniform(s);
  auto pro = pro_spec(ref, PairwiseDataset(s, {{0, 1, 1}}), 1.0, 10.0);
  SolveOptions o;
  o.max_iters = 1;
  auto r = solve_optimal(pro, o);
  CHECK_FALSE(r.converged);
  CHECK_THROWS_AS(check_stationarity(r, pro), InvalidArgument);
  auto full = solve_optimal(pro);
  pro.pin_hyper = true;
  CHECK_THROWS_AS(check_stationarity(full, pro), InvalidArgument);
}

TEST_CASE("eDPO over Y and PRO over Y_H agree") {
  Rng rng(33);
  for (int t = 0; t < 3; ++t) {
    const std::size_t n = 5 + rng.index(3);
    auto s = make_indexed_space(n);
    auto ref = random_distribution(s, rng);
    auto data = random_pairwise(s, rng, n - 3, 5);
    auto mu = random_distribution(s, rng, 0.5);
    auto e = edpo_spec(ref, data, mu, 1.0, 10.0);
    auto p = pro_spec(ref, data, 1.0, 10.0);
    p.mu = hyper_mass(mu, *p.hyper);
    auto re = solve_optimal(e);
    auto rp = solve_optimal(p);
    auto rep = check_hyper_correspondence(re, e, rp, p);
    CHECK_MESSAGE(rep.pass, to_text(rep));
  }
}

TEST_CASE("singleton H and zero scores give trivial correspondence") {
  Rng rng(34);
  auto s = make_indexed_space(4);
  auto ref = random_distribution(s, rng);
  PairwiseDataset data(s, {{0, 1, 1}, {1, 2, 1}});
  auto mu = random_distribution(s, rng);
  auto e = edpo_spec(ref, data, mu, 1.0, 8.0);
  auto p = pro_spec(ref, data, 1.0, 8.0);
  REQUIRE(p.hyper->members().size() == 1);
  p.mu = hyper_mass(mu, *p.hyper);
  auto rep = check_hyper_correspondence(solve_optimal(e), e, solve_optimal(p), p);
  CHECK_MESSAGE(rep.pass, to_text(rep));

  e.score = ScoreMap(s, {0.0, 0.0, 0.0, 0.0}, {true, true, true, false});
  p.score = e.score;
  auto z = check_hyper_correspondence(solve_optimal(e), e, solve_optimal(p), p);
  CHECK_MESSAGE(z.pass, to_text(z));
  CHECK(z.detail.find("C=1") != std::string::npos);
}

TEST_CASE("existence boundary") {
  auto s = make_space({"a", "b", "H"});
  auto ref = Distribution::uniform(s);
  auto pro = pro_spec(ref, PairwiseDataset(s, {{0, 1, 1}}), 1.0, 1.0);
  SolveOptions o;
  o.max_iters = 5000;
  auto rep = check_existence_boundary(pro, {4.5 / 100.0, 9.0, 20.0}, o);
  CHECK(rep.alpha0 == doctest::Approx(4.5));
  CHECK_MESSAGE(rep.report.pass, to_text(rep.report));
  REQUIRE(rep.points.size() == 3);
  CHECK(rep.points[0].degenerate);
  CHECK(rep.points[1].interior);
  CHECK(rep.points[2].interior);

  // alpha0 is sufficient, not tight: the observed boundary sits at or below it.
  const double seen = observed_existence_boundary(pro, 0.045, 20.0, 20, o);
  CHECK(seen > 0.045);
  CHECK(seen <= rep.alpha0 * (1.0 + 1e-9));
  CHECK(check_existence_boundary(pro, {seen * 1.01}, o).points.front().interior);
  CHECK_THROWS_AS(observed_existence_boundary(pro, 0.01, 0.045, 5, o), InvalidArgument);

  // Nothing negative: alpha0 = 0 and every alpha converges.
  auto pos = pro;
  pos.score = ScoreMap(s, {0.0, 0.0, 0.0}, {true, true, false});
  auto rp = check_existence_boundary(pos, {0.1, 1.0}, o);
  CHECK(rp.alpha0 == 0.0);
  CHECK(rp.report.pass);
}

TEST_CASE("finite differences") {
  auto f = [](const std::vector<double>& x) { return 3.0 * x[0] - 2.0 * x[1] + 0.5 * x[2]; };
  auto g = finite_diff_grad(f, {0.3, -1.0, 2.0});
  CHECK(std::abs(g[0] - 3.0) < 1e-9);
  CHECK(std::abs(g[1] + 2.0) < 1e-9);
  CHECK(std::abs(g[2] - 0.5) < 1e-9);
  CHECK_THROWS_AS(finite_diff_grad(f, {0.0, 0.0, 0.0}, 1e-2), InvalidArgument);
  // Halving h leaves the estimate stable on a smooth loss.
  Rng rng(5);
  auto s = make_indexed_space(5);
  auto pro = pro_spec(random_distribution(s, rng), random_pairwise(s, rng, 3, 4), 0.5, 2.5);
  Policy pol(random_tabular(s, rng));
  auto a = finite_diff_grad(pro, pol, 1e-5);
  auto b = finite_diff_grad(pro, pol, 5e-6);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-8);
}

TEST_CASE("gradient equivalence of a loss with itself") {
  Rng rng(6);
  auto s = make_indexed_space(4);
  auto pro = pro_spec(random_distribution(s, rng), random_pairwise(s, rng, 2, 3), 0.5, 2.5);
  auto rep = check_gradient_equivalence(
      "self", [&](int) { return GradientTrial{pro, pro, Policy(random_tabular(s, rng))}; }, 5, 0.0);
  CHECK(rep.pass);
  CHECK(rep.residual == 0.0);
}

TEST_CASE("underdetermination probe") {
  auto s = make_space({"a", "b", "c", "d"});
  auto ref = Distribution::uniform(s);
  PairwiseDataset d(s, {{0, 1, 1}});
  auto pro = pro_spec(ref, d, 0.1, 2.5);
  auto dpo = dpo_spec(ref, d, 0.1);
  auto base = TabularPolicy::from_distribution(ref);
  auto zero = probe_underdetermination(base, {0, 1}, 0.0, dpo, pro);
  CHECK(zero.dpo_delta == 0.0);
  CHECK(zero.pro_delta == 0.0);
  auto half = probe_underdetermination(base, {0, 1}, -0.5, dpo, pro);
  auto one = probe_underdetermination(base, {0, 1}, -1.0, dpo, pro);
  CHECK(std::abs(half.dpo_delta) < 1e-12);
  CHECK(std::abs(half.pro_delta) > 1e-5);
  CHECK(std::abs(one.pro_delta) > std::abs(half.pro_delta));
  CHECK_THROWS_AS(probe_underdetermination(base, {0, 1}, 1.0, dpo, pro), InvalidArgument);
  auto shifted = policy_distribution(Policy(shift_labeled(base, {0, 1}, -0.5)));
  double total = 0.0;
  for (double p : shifted.probs()) total += p;
  CHECK(std::abs(total - 1.0) < 1e-12);
  CHECK(std::abs(shifted.prob(0) - 0.25 * std::exp(-0.5)) < 1e-15);
}

TEST_CASE("theorem report text") {
  auto r = make_report("t31", "20 trials", 1e-13, 1e-9, "ok");
  CHECK(r.pass);
  CHECK(to_text(r) == "check=t31 instance=20 trials residual=1e-13 tolerance=1e-09 pass=1 detail=\"ok\"");
  CHECK_FALSE(make_report("x", "y", 2e-9, 1e-9).pass);
}
