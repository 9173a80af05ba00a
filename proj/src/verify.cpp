#include "proalign/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "proalign/errors.hpp"
#include "proalign/hyper.hpp"
#include "proalign/instances.hpp"
#include "proalign/rng.hpp"

namespace proalign {

namespace {

const double kLog2 = std::log(2.0);

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double relative_error(const std::vector<double>& analytic, const std::vector<double>& fd) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    num = std::max(num, std::abs(analytic[i] - fd[i]));
    den = std::max(den, std::abs(fd[i]));
  }
  return num / std::max(den, 1e-3);
}

// E_w[s log pi_ref] with weights w.
double score_ref_term(const ScoreMap& s, const Distribution& w, const Distribution& ref) {
  double t = 0.0;
  for (std::size_t y = 0; y < ref.size(); ++y) {
    if (w.prob(y) > 0.0) t += w.prob(y) * s[y] * ref.log_prob(y);
  }
  return t;
}

std::vector<std::size_t> labeled_of(const Dataset& data) {
  const auto mu_hat = empirical_response_dist(data);
  return mu_hat.support();
}

}  // namespace

TheoremReport verify_population_identity(const VerifyOptions& opts, int trials, double tol) {
  Rng rng(derive_seed(opts.seed, "t31"));
  double worst_value = 0.0;
  auto report = check_gradient_equivalence(
      "t31",
      [&](int) {
        auto s = make_indexed_space(2 + rng.index(7));
        LossSpec pop;
        pop.kind = LossKind::DpoPopulation;
        pop.beta = 0.05 + rng.uniform();
        pop.ref = random_distribution(s, rng);
        pop.mu = random_distribution(s, rng);
        pop.pref = random_preference(s, rng);
        LossSpec e = pop;
        e.kind = LossKind::Edpo;
        e.alpha = 1.0;
        e.mu_hat = pop.mu;
        e.score = true_score(*pop.pref, *pop.mu);
        e.flip_regularizer = opts.inject_bug;
        Policy pol(random_tabular(s, rng, 2.0));
        const double offset = 0.5 * kLog2 + pop.beta * score_ref_term(*e.score, *pop.mu, *pop.ref);
        worst_value = std::max(worst_value, std::abs(loss_value(pop, pol) - loss_value(e, pol) - offset));
        return GradientTrial{pop, e, pol};
      },
      trials, tol);
  report.instance = std::to_string(trials) + " random instances |Y|<=8";
  report.detail = "max |value gap - (log2/2 + beta E_mu[s log pi_ref])| = " + fmt(worst_value);
  return report;
}

GlobalProPReports verify_global_prop(const VerifyOptions& opts, int trials, double tol) {
  Rng rng(derive_seed(opts.seed, "t43"));
  double worst_grad = 0.0, worst_corrected = 0.0, worst_printed = 0.0;
  for (int t = 0; t < trials; ++t) {
    const std::size_t n = 4 + rng.index(4);
    auto s = make_indexed_space(n);
    auto ref = random_distribution(s, rng);
    auto pw = random_pairwise(s, rng, 2 + rng.index(n - 2), 5);
    const double eta = t % 2 ? 0.5 : 2.0 / 3.0;
    LossSpec pro = pro_spec(ref, pw, 0.1 + rng.uniform(), 1.0 / (eta * eta), eta);
    LossSpec pp = pro;
    pp.kind = LossKind::ProP;
    pp.prop_form = ProPForm::Global;
    pro.flip_regularizer = opts.inject_bug;
    Policy pol(random_tabular(s, rng, 1.5));
    const auto ga = loss_gradient(pro, pol);
    const auto gb = loss_gradient(pp, pol);
    for (std::size_t i = 0; i < ga.size(); ++i) worst_grad = std::max(worst_grad, std::abs(ga[i] - gb[i]));
    const double gap = loss_value(pro, pol) - loss_value(pp, pol);
    const double corrected = -kLog2 / (2.0 * eta * eta) - pro.beta * score_ref_term(*pro.score, *pro.mu_hat, ref);
    const double printed = -((1.0 - eta * eta) / (2.0 * eta * eta)) * kLog2;
    worst_corrected = std::max(worst_corrected, std::abs(gap - corrected));
    worst_printed = std::max(worst_printed, std::abs(gap - printed));
  }
  const std::string inst = std::to_string(trials) + " random pairwise instances, eta in {1/2, 2/3}";
  return {make_report("t43", inst, worst_grad, tol, "max abs gradient difference"),
          make_report("t43c", inst, worst_corrected, tol,
                      "value gap vs -log2/(2 eta^2) - beta E_mu-hat[s-hat log pi_ref]"),
          make_report("t43p", inst, worst_printed, tol, "value gap vs -((1-eta^2)/(2 eta^2)) log2")};
}

SolvedSuiteReports verify_solved_pro(const VerifyOptions& opts, int instances, double stationarity_tol,
                                     double spread_tol, double margin) {
  Rng rng(derive_seed(opts.seed, "t32"));
  double worst_stat = 0.0, worst_order = 0.0;
  int unconverged = 0;
  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 4 + rng.index(4);
    auto s = make_indexed_space(n);
    auto ref = random_distribution(s, rng);
    // |Y_H| = labeled + 1 <= 6.
    const std::size_t labeled = 2 + rng.index(std::min<std::size_t>(n - 2, 4));
    auto pro = pro_spec(ref, random_pairwise(s, rng, labeled, labeled + 3), 0.5 + rng.uniform(), 1.0);
    pro.alpha = std::max(1.0, 2.0 * spec_alpha_threshold(pro));
    SolveOptions so;
    so.seed = derive_seed(opts.seed, "solver-" + std::to_string(t));
    const auto r = solve_optimal(pro, so);
    if (!r.converged) {
      ++unconverged;
      continue;
    }
    worst_stat = std::max(worst_stat, check_stationarity(r, pro, stationarity_tol).residual);
    // Ratio spread on the constant set, or 1 + shortfall on a violated inequality.
    worst_order = std::max(worst_order, check_ordering(r, pro, spread_tol, margin).residual);
  }
  const std::string inst = std::to_string(instances) + " solved PRO instances |Y_H|<=6 alpha>=2 alpha0";
  const double inf = std::numeric_limits<double>::infinity();
  SolvedSuiteReports out{
      make_report("t32", inst, unconverged ? inf : worst_stat, stationarity_tol,
                  "max stationarity residual; unconverged=" + std::to_string(unconverged)),
      make_report("t33", inst, unconverged ? inf : worst_order, spread_tol,
                  "max constant-set ratio spread (1+shortfall if an inequality fails at margin " + fmt(margin) +
                      "); unconverged=" + std::to_string(unconverged))};
  return out;
}

TheoremReport verify_hyper_correspondence(const VerifyOptions& opts, int instances, double tol) {
  Rng rng(derive_seed(opts.seed, "t41"));
  double worst = 0.0;
  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 5 + rng.index(4);
    const std::size_t h = 2 + rng.index(2);
    auto s = make_indexed_space(n);
    auto ref = random_distribution(s, rng);
    auto data = random_pairwise(s, rng, n - h, n - h + 2);
    auto mu = random_distribution(s, rng, 0.5);
    auto e = edpo_spec(ref, data, mu, 1.0, 10.0);
    auto p = pro_spec(ref, data, 1.0, 10.0);
    p.mu = hyper_mass(mu, *p.hyper);
    SolveOptions so;
    so.seed = derive_seed(opts.seed, "solver-" + std::to_string(t));
    const auto rep = check_hyper_correspondence(solve_optimal(e, so), e, solve_optimal(p, so), p, tol);
    worst = std::max(worst, rep.residual);
  }
  return make_report("t41", std::to_string(instances) + " instances |Y| in [5,8], |H| in [2,3]", worst, tol,
                     "max of pointwise and H-mass residuals");
}

BoundaryReports verify_existence(const VerifyOptions& opts, int instances, double interior_floor) {
  const auto suite = standard_suite(static_cast<std::size_t>(instances), derive_seed(opts.seed, "t42"));
  int failures = 0, points = 0, missed = 0, with_negative = 0;
  double worst_alpha0 = 0.0;
  for (std::size_t k = 0; k < suite.size(); ++k) {
    const auto& inst = suite[k];
    auto pro = pro_spec(inst.ref, inst.data, 1.0, 1.0);
    const double a0 = spec_alpha_threshold(pro);
    worst_alpha0 = std::max(worst_alpha0, a0);
    SolveOptions so;
    so.seed = derive_seed(opts.seed, "solver-" + std::to_string(k));
    const auto b = check_existence_boundary(pro, {a0 / 100.0, a0, 2.0 * a0, 5.0 * a0}, so, interior_floor);
    for (const auto& p : b.points) {
      if (p.alpha >= b.alpha0) {
        ++points;
        if (!p.interior) ++failures;
      }
    }
    const auto& sc = *pro.score;
    bool negative = false;
    for (std::size_t y = 0; y < sc.size(); ++y) negative = negative || (sc.labeled(y) && sc[y] < 0.0);
    if (negative) {
      ++with_negative;
      LossSpec dpo;
      dpo.kind = LossKind::DpoSample;
      dpo.beta = 1.0;
      dpo.ref = inst.ref;
      dpo.data = inst.data;
      if (!solve_optimal(dpo, so).degenerate) ++missed;
    }
  }
  const std::string inst = "standard suite of " + std::to_string(instances);
  return {make_report("t42", inst, failures, 0.0,
                      std::to_string(points) + " solves at alpha>=alpha0, max alpha0=" + fmt(worst_alpha0)),
          make_report("b2", inst, missed, 0.0,
                      "sample DPO not degenerate on " + std::to_string(missed) + " of " +
                          std::to_string(with_negative) + " instances with s-hat<0")};
}

TheoremReport verify_probe(const VerifyOptions& opts, int instances, double c, double dpo_tol, double pro_min) {
  Rng rng(derive_seed(opts.seed, "probe"));
  double max_dpo = 0.0, min_pro = std::numeric_limits<double>::infinity();
  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 4 + rng.index(5);
    auto s = make_indexed_space(n);
    auto ref = random_distribution(s, rng);
    auto data = random_pairwise(s, rng, 2 + rng.index(n - 3), 5);
    auto pro = pro_spec(ref, data, 1.0, 2.5);
    pro.flip_regularizer = opts.inject_bug;
    LossSpec dpo;
    dpo.kind = LossKind::DpoSample;
    dpo.beta = 1.0;
    dpo.ref = ref;
    dpo.data = data;
    const auto r = probe_underdetermination(TabularPolicy::from_distribution(ref), labeled_of(data), c, dpo, pro);
    max_dpo = std::max(max_dpo, std::abs(r.dpo_delta));
    min_pro = std::min(min_pro, std::abs(r.pro_delta));
  }
  const double shortfall = std::max({0.0, max_dpo - dpo_tol, pro_min - min_pro});
  return make_report("probe", std::to_string(instances) + " random instances at pi_ref, c=" + fmt(c), shortfall, 0.0,
                     "max |dpo delta|=" + fmt(max_dpo) + " min |pro delta|=" + fmt(min_pro));
}

TheoremReport verify_finite_differences(const VerifyOptions& opts, int instances, double tol) {
  Rng rng(derive_seed(opts.seed, "fd"));
  double worst = 0.0;
  std::string worst_kind;
  std::size_t checked = 0;
  for (int t = 0; t < instances; ++t) {
    auto s = make_indexed_space(5 + rng.index(3));
    auto ref = random_distribution(s, rng);
    Policy pol(random_tabular(s, rng));
    for (const auto& spec : every_kind_specs(rng, s, ref)) {
      const double e = relative_error(loss_gradient(spec, pol), finite_diff_grad(spec, pol));
      if (e > worst) {
        worst = e;
        worst_kind = std::string(to_string(spec.kind));
      }
      ++checked;
    }
  }
  return make_report("fd", std::to_string(instances) + " instances per loss kind", worst, tol,
                     std::to_string(checked) + " gradients; worst kind " + worst_kind);
}

const std::vector<std::string>& verify_check_ids() {
  static const std::vector<std::string> ids = {"t31", "t32", "t33", "t41", "t42", "b2", "t43", "probe", "fd"};
  return ids;
}

std::vector<TheoremReport> run_verify(const VerifyOptions& opts, const std::optional<std::string>& only) {
  const auto& ids = verify_check_ids();
  if (only && std::find(ids.begin(), ids.end(), *only) == ids.end()) {
    throw InvalidArgument("unknown check id '" + *only + "'");
  }
  auto want = [&](const char* id) { return !only || *only == id; };
  std::vector<TheoremReport> out;
  if (want("t31")) out.push_back(verify_population_identity(opts));
  if (want("t32") || want("t33")) {
    const auto r = verify_solved_pro(opts);
    if (want("t32")) out.push_back(r.stationarity);
    if (want("t33")) out.push_back(r.ordering);
  }
  if (want("t41")) out.push_back(verify_hyper_correspondence(opts));
  if (want("t42") || want("b2")) {
    const auto r = verify_existence(opts);
    if (want("t42")) out.push_back(r.existence);
    if (want("b2")) out.push_back(r.dpo_degenerate);
  }
  if (want("t43")) {
    const auto r = verify_global_prop(opts);
    out.push_back(r.gradient);
    out.push_back(r.corrected_constant);
  }
  if (want("probe")) out.push_back(verify_probe(opts));
  if (want("fd")) out.push_back(verify_finite_differences(opts));
  return out;
}

}  // namespace proalign
