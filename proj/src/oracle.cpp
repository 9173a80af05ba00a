#include "proalign/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "proalign/errors.hpp"
#include "proalign/hyper.hpp"
#include "proalign/numeric.hpp"
#include "proalign/rng.hpp"

namespace proalign {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double min_softmax(const std::vector<double>& x) {
  const double lse = log_sum_exp(x);
  return std::exp(*std::min_element(x.begin(), x.end()) - lse);
}

struct Point {
  std::vector<double> x;
  double f = 0.0;
  std::vector<double> g;
};

// Loss and gauge-projected gradient at logits x; false when the loss leaves
// its numerical domain.
bool evaluate_point(const LossSpec& spec, const SpacePtr& space, Point& p) {
  try {
    const LossValue v = evaluate(spec, Policy(TabularPolicy(space, p.x)));
    p.f = v.value;
    p.g = v.gradient;
  } catch (const NumericalError&) {
    return false;
  }
  const double mean = std::accumulate(p.g.begin(), p.g.end(), 0.0) / static_cast<double>(p.g.size());
  for (double& gi : p.g) gi -= mean;
  return true;
}

SolveReport solve_once(const LossSpec& spec, const SolveOptions& opts, std::uint64_t seed) {
  const Distribution& ref = *spec.ref;
  const SpacePtr& space = ref.space();
  const std::size_t n = ref.size();
  Rng rng(seed);
  Point cur;
  cur.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) cur.x[i] = ref.log_prob(i) + opts.init_noise * rng.normal();
  if (!evaluate_point(spec, space, cur)) throw NumericalError("solve_optimal: loss undefined at the start point");

  SolveReport rep{.policy = TabularPolicy(space, cur.x), .restart_losses = {}};
  rep.seed = seed;
  Point prev;
  bool have_prev = false;
  double t = 1.0;
  int below_floor = 0;
  int it = 0;
  auto note_step = [&] {
    below_floor = min_softmax(cur.x) < opts.floor ? below_floor + 1 : 0;
    if (below_floor >= opts.window) rep.degenerate = true;
  };
  for (; it < opts.max_iters && !rep.degenerate; ++it) {
    const double gn = std::sqrt(dot(cur.g, cur.g));
    if (gn < opts.tol) {
      // A unit move downhill must not help; otherwise the gradient is small
      // only because the loss flattens out towards the boundary.
      Point probe;
      probe.x = cur.x;
      for (std::size_t i = 0; i < n; ++i) probe.x[i] -= cur.g[i] / gn;
      if (gn > 0.0 && evaluate_point(spec, space, probe) && probe.f < cur.f) {
        prev = cur;
        have_prev = false;
        cur = std::move(probe);
        note_step();
        continue;
      }
      rep.converged = true;
      break;
    }
    if (have_prev) {
      std::vector<double> s(n), y(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = cur.x[i] - prev.x[i];
        y[i] = cur.g[i] - prev.g[i];
      }
      const double sy = dot(s, y);
      t = sy > 0.0 ? dot(s, s) / sy : 2.0 * t;
    }
    t = std::min(t, opts.max_step / gn);
    bool accepted = false;
    Point trial;
    for (int back = 0; back < 80; ++back) {
      trial.x = cur.x;
      for (std::size_t i = 0; i < n; ++i) trial.x[i] -= t * cur.g[i];
      if (!evaluate_point(spec, space, trial)) {
        t *= 0.5;
        continue;
      }
      // Armijo, or, once decreases drop below round-off, a step that keeps the
      // loss flat and shrinks the gradient.
      const double flat = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(cur.f));
      if (trial.f <= cur.f - 1e-4 * t * gn * gn ||
          (trial.f <= cur.f + flat && std::sqrt(dot(trial.g, trial.g)) < gn)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // line search stalled at round-off level
    prev = std::move(cur);
    cur = std::move(trial);
    have_prev = true;
    note_step();
  }
  rep.policy = TabularPolicy(space, cur.x);
  rep.loss = cur.f;
  rep.grad_norm = std::sqrt(dot(cur.g, cur.g));
  rep.iterations = it;
  rep.min_prob = min_softmax(cur.x);
  if (rep.degenerate) rep.converged = false;
  return rep;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

SolveReport solve_optimal(const LossSpec& spec, const SolveOptions& opts) {
  if (!spec.ref) throw InvalidArgument("solve_optimal: spec has no reference distribution");
  if (opts.restarts < 1) throw InvalidArgument("solve_optimal: need at least one restart");
  std::vector<SolveReport> runs;
  for (int k = 0; k < opts.restarts; ++k) {
    runs.push_back(solve_once(spec, opts, derive_seed(opts.seed, "restart-" + std::to_string(k))));
  }
  std::vector<double> losses;
  for (const auto& r : runs) losses.push_back(r.loss);
  auto best = std::min_element(runs.begin(), runs.end(), [](const SolveReport& a, const SolveReport& b) {
    if (a.loss != b.loss) return a.loss < b.loss;
    if (a.grad_norm != b.grad_norm) return a.grad_norm < b.grad_norm;
    return a.seed < b.seed;
  });
  SolveReport out = *best;
  out.restart_losses = std::move(losses);
  return out;
}

std::string to_text(const TheoremReport& r) {
  std::ostringstream os;
  os << "check=" << r.id << " instance=" << r.instance << " residual=" << fmt(r.residual)
     << " tolerance=" << fmt(r.tolerance) << " pass=" << (r.pass ? 1 : 0);
  if (!r.detail.empty()) os << " detail=\"" << r.detail << '"';
  return os.str();
}

TheoremReport make_report(std::string id, std::string instance, double residual, double tolerance,
                          std::string detail) {
  TheoremReport r;
  r.id = std::move(id);
  r.instance = std::move(instance);
  r.residual = residual;
  r.tolerance = tolerance;
  r.pass = residual <= tolerance;
  r.detail = std::move(detail);
  return r;
}

SolutionView solution_view(const LossSpec& spec, const TabularPolicy& policy) {
  const Distribution pi = policy_distribution(Policy(policy));
  const Distribution& ref = *spec.ref;
  SolutionView v;
  if (spec.kind == LossKind::Edpo) {
    v.space = pi.space();
    v.pi.assign(pi.probs().begin(), pi.probs().end());
    v.ref.assign(ref.probs().begin(), ref.probs().end());
    for (std::size_t y = 0; y < pi.size(); ++y) v.reward.push_back(spec.beta * (pi.log_prob(y) - ref.log_prob(y)));
    v.mu.assign(spec.mu->probs().begin(), spec.mu->probs().end());
    v.mu_hat.assign(spec.mu_hat->probs().begin(), spec.mu_hat->probs().end());
    v.score.assign(spec.score->values().begin(), spec.score->values().end());
    return v;
  }
  if (spec.kind != LossKind::Pro || !spec.hyper) {
    throw InvalidArgument("solution_view: only eDPO and PRO specs have a solution view");
  }
  const HyperSpace& hs = *spec.hyper;
  v.space = hs.collapsed();
  const Distribution pic = hyper_mass(pi, hs);
  const Distribution refc = hyper_mass(ref, hs);
  v.pi.assign(pic.probs().begin(), pic.probs().end());
  v.ref.assign(refc.probs().begin(), refc.probs().end());
  for (std::size_t o : hs.outside()) v.reward.push_back(spec.beta * (pi.log_prob(o) - ref.log_prob(o)));
  v.reward.push_back(spec.beta * (hyper_log_mass(pi.log_probs(), hs) - hyper_log_mass(ref.log_probs(), hs)));
  v.mu.assign(spec.mu->probs().begin(), spec.mu->probs().end());
  const Distribution mhc = hyper_mass(*spec.mu_hat, hs);
  v.mu_hat.assign(mhc.probs().begin(), mhc.probs().end());
  const ScoreMap sc = lift_score(*spec.score, hs);
  v.score.assign(sc.values().begin(), sc.values().end());
  return v;
}

TheoremReport check_stationarity(const SolveReport& report, const LossSpec& spec, double tol) {
  if (!report.converged) throw InvalidArgument("check_stationarity: solve did not converge");
  if (spec.kind == LossKind::Pro && spec.pin_hyper) {
    throw InvalidArgument("check_stationarity: r(H) must not be pinned");
  }
  const SolutionView v = solution_view(spec, report.policy);
  double worst = 0.0;
  for (std::size_t y = 0; y < v.pi.size(); ++y) {
    double lhs = 0.0;
    for (std::size_t z = 0; z < v.pi.size(); ++z) lhs += v.mu[z] * (sigmoid(v.reward[y] - v.reward[z]) - 0.5);
    lhs *= spec.alpha;
    const double rhs = v.mu_hat[y] * v.score[y] / v.mu[y];
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return make_report("stationarity", std::string(to_string(spec.kind)) + "/|Y|=" + std::to_string(v.pi.size()),
                     worst, tol);
}

TheoremReport check_ordering(const SolveReport& report, const LossSpec& spec, double spread_tol, double margin) {
  if (!report.converged) throw InvalidArgument("check_ordering: solve did not converge");
  const SolutionView v = solution_view(spec, report.policy);
  std::vector<double> ratio(v.pi.size());
  for (std::size_t y = 0; y < v.pi.size(); ++y) ratio[y] = v.pi[y] / v.ref[y];
  auto is_constant = [&](std::size_t y) { return v.mu_hat[y] == 0.0 || std::abs(v.score[y]) <= 1e-12; };
  double log_sum = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  int k = 0;
  double min_pos = std::numeric_limits<double>::infinity();
  double max_neg = -std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < v.pi.size(); ++y) {
    if (is_constant(y)) {
      log_sum += std::log(ratio[y]);
      lo = std::min(lo, ratio[y]);
      hi = std::max(hi, ratio[y]);
      ++k;
    } else if (v.score[y] > 0.0) {
      min_pos = std::min(min_pos, ratio[y]);
    } else {
      max_neg = std::max(max_neg, ratio[y]);
    }
  }
  double residual = 0.0;
  std::string detail;
  double shortfall = 0.0;
  if (k > 0) {
    const double c = std::exp(log_sum / k);
    residual = hi - lo;
    shortfall = std::max({0.0, c + margin - min_pos, max_neg - (c - margin)});
    detail = "C=" + fmt(c) + " spread=" + fmt(hi - lo);
  } else {
    // No constant set: any C strictly between the two groups will do.
    shortfall = std::max(0.0, max_neg + 2.0 * margin - min_pos);
    detail = "C separates groups";
  }
  if (std::isfinite(min_pos)) detail += " min_ratio(s>0)=" + fmt(min_pos);
  if (std::isfinite(max_neg)) detail += " max_ratio(s<0)=" + fmt(max_neg);
  if (shortfall > 0.0) {
    // A strict inequality failed: never within tolerance.
    residual = std::max(residual, 1.0 + shortfall);
    detail += " ordering violated";
  }
  return make_report("ordering", std::string(to_string(spec.kind)) + "/|Y|=" + std::to_string(v.pi.size()),
                     residual, spread_tol, detail);
}

TheoremReport check_hyper_correspondence(const SolveReport& full, const LossSpec& full_spec,
                                         const SolveReport& hyper, const LossSpec& hyper_spec, double tol) {
  const std::string inst = "|Y|=" + std::to_string(full_spec.ref->size());
  if (!full.converged || !hyper.converged) {
    return make_report("hyper_correspondence", inst, std::numeric_limits<double>::infinity(), tol,
                       "not applicable: a solve did not converge");
  }
  if (full_spec.kind != LossKind::Edpo || hyper_spec.kind != LossKind::Pro || !hyper_spec.hyper) {
    throw InvalidArgument("check_hyper_correspondence: expects an eDPO and a PRO spec");
  }
  const HyperSpace& hs = *hyper_spec.hyper;
  const Distribution a = policy_distribution(Policy(full.policy));
  const Distribution b = policy_distribution(Policy(hyper.policy));
  const Distribution& ref = *full_spec.ref;
  double off = 0.0;
  for (std::size_t o : hs.outside()) off = std::max(off, std::abs(a.prob(o) - b.prob(o)));
  double log_c = 0.0;
  double mass_full = 0.0;
  double mass_ref = 0.0;
  for (std::size_t m : hs.members()) {
    log_c += a.log_prob(m) - ref.log_prob(m);
    mass_full += a.prob(m);
    mass_ref += ref.prob(m);
  }
  const double c = std::exp(log_c / static_cast<double>(hs.members().size()));
  const double mass_h = std::exp(hyper_log_mass(b.log_probs(), hs));
  const double mass_res = std::max(std::abs(mass_h - c * mass_ref), std::abs(mass_full - mass_h));
  return make_report("hyper_correspondence", inst + ",|H|=" + std::to_string(hs.members().size()),
                     std::max(off, mass_res), tol,
                     "off_H=" + fmt(off) + " H_mass=" + fmt(mass_res) + " C=" + fmt(c));
}

double spec_alpha_threshold(const LossSpec& spec) {
  const SolutionView v = solution_view(spec, TabularPolicy::from_distribution(*spec.ref));
  const Distribution mu = Distribution::from_probs(v.space, v.mu);
  const Distribution mu_hat = Distribution::from_probs(v.space, v.mu_hat, Distribution::Kind::Empirical);
  std::vector<bool> labeled(v.mu_hat.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) labeled[i] = v.mu_hat[i] > 0.0;
  return alpha_threshold(mu_hat, ScoreMap(v.space, v.score, labeled), mu);
}

BoundaryReport check_existence_boundary(const LossSpec& spec, const std::vector<double>& alpha_grid,
                                        const SolveOptions& opts, double interior_floor) {
  BoundaryReport out;
  out.alpha0 = spec_alpha_threshold(spec);
  int failures = 0;
  bool seen_interior = false;
  bool monotone = true;
  for (double alpha : alpha_grid) {
    LossSpec s = spec;
    s.alpha = alpha;
    const SolveReport r = solve_optimal(s, opts);
    double min_prob = r.min_prob;
    if (spec.kind == LossKind::Pro) {
      const SolutionView v = solution_view(s, r.policy);
      min_prob = *std::min_element(v.pi.begin(), v.pi.end());
    }
    BoundaryPoint p{alpha, r.converged && min_prob > interior_floor, r.degenerate, min_prob};
    if (alpha >= out.alpha0 && !p.interior) ++failures;
    if (seen_interior && !p.interior) monotone = false;
    seen_interior = seen_interior || p.interior;
    out.points.push_back(p);
  }
  out.report = make_report("existence_boundary", std::string(to_string(spec.kind)), failures, 0.0,
                           "alpha0=" + fmt(out.alpha0) + (monotone ? " transition monotone" : " transition non-monotone"));
  return out;
}

double observed_existence_boundary(const LossSpec& spec, double lo, double hi, int iters, const SolveOptions& opts,
                                   double interior_floor) {
  if (!(lo > 0.0 && hi > lo) || iters < 1) throw InvalidArgument("observed_existence_boundary: need 0 < lo < hi");
  auto interior = [&](double alpha) {
    return check_existence_boundary(spec, {alpha}, opts, interior_floor).points.front().interior;
  };
  if (!interior(hi)) throw InvalidArgument("observed_existence_boundary: hi is not interior");
  if (interior(lo)) return lo;
  for (int i = 0; i < iters; ++i) {
    const double mid = std::sqrt(lo * hi);
    (interior(mid) ? hi : lo) = mid;
  }
  return hi;
}

std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& f,
                                     const std::vector<double>& x, double h) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw InvalidArgument("finite_diff_grad: h must lie in [1e-7, 1e-3]");
  std::vector<double> g(x.size());
  std::vector<double> probe = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + h;
    const double hi = f(probe);
    probe[k] = x[k] - h;
    const double lo = f(probe);
    probe[k] = x[k];
    g[k] = (hi - lo) / (2.0 * h);
  }
  return g;
}

std::vector<double> finite_diff_grad(const LossSpec& spec, const Policy& policy, double h) {
  const std::vector<double> x(policy.params().begin(), policy.params().end());
  return finite_diff_grad([&](const std::vector<double>& p) { return loss_value(spec, policy.with_params(p)); }, x,
                          h);
}

TheoremReport check_gradient_equivalence(const std::string& id, const std::function<GradientTrial(int)>& make_trial,
                                         int trials, double tol) {
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    const GradientTrial t = make_trial(k);
    const auto ga = loss_gradient(t.a, t.policy);
    const auto gb = loss_gradient(t.b, t.policy);
    if (ga.size() != gb.size()) throw InvalidArgument("check_gradient_equivalence: gradient shapes differ");
    for (std::size_t i = 0; i < ga.size(); ++i) worst = std::max(worst, std::abs(ga[i] - gb[i]));
  }
  return make_report(id, std::to_string(trials) + " trials", worst, tol);
}

TabularPolicy shift_labeled(const TabularPolicy& policy, const std::vector<std::size_t>& labeled, double c) {
  const std::vector<double> lp = policy.log_probs();
  std::vector<bool> in(lp.size(), false);
  std::vector<double> l_lp;
  for (std::size_t y : labeled) {
    if (y >= lp.size() || in[y]) throw InvalidArgument("shift_labeled: bad labeled set");
    in[y] = true;
    l_lp.push_back(lp[y]);
  }
  const double log_l = log_sum_exp(l_lp);
  if (!(log_l + c < 0.0) || !(log_l < 0.0)) throw InvalidArgument("shift_labeled: shifted labeled mass leaves (0,1)");
  // Rescale the complement so the total stays 1.
  const double log_scale = log1m_exp(log_l + c) - log1m_exp(log_l);
  std::vector<double> out(lp.size());
  for (std::size_t y = 0; y < lp.size(); ++y) out[y] = lp[y] + (in[y] ? c : log_scale);
  return TabularPolicy(policy.space(), out);
}

ProbeResult probe_underdetermination(const TabularPolicy& policy, const std::vector<std::size_t>& labeled, double c,
                                     const LossSpec& dpo, const LossSpec& pro) {
  const TabularPolicy shifted = shift_labeled(policy, labeled, c);
  ProbeResult r;
  r.dpo_delta = loss_value(dpo, Policy(shifted)) - loss_value(dpo, Policy(policy));
  r.pro_delta = loss_value(pro, Policy(shifted)) - loss_value(pro, Policy(policy));
  return r;
}

}  // namespace proalign
