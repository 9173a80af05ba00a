#include "proalign/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "proalign/errors.hpp"
#include "proalign/numeric.hpp"

namespace proalign {

namespace {

template <typename T>
const T& require(const std::optional<T>& field, LossKind kind, const char* name) {
  if (!field) {
    throw InvalidArgument(std::string("loss ") + std::string(to_string(kind)) + ": missing " + name);
  }
  return *field;
}

template <typename T>
const T& require_data(const LossSpec& spec) {
  const Dataset& data = require(spec.data, spec.kind, "dataset");
  const T* typed = std::get_if<T>(&data);
  if (!typed) {
    throw InvalidArgument(std::string("loss ") + std::string(to_string(spec.kind)) +
                          ": wrong dataset kind");
  }
  if (typed->total_count() == 0) throw EmptyInput("loss: dataset has no records");
  return *typed;
}

// ½ log σ(δ) + ½ log σ(−δ) = −log 2 − KL(B(½) ‖ B(σ(δ))), and its derivative.
double sym_pair(double delta) { return -std::log(2.0) - kl_bernoulli_half(delta); }
double sym_pair_grad(double delta) { return -kl_bernoulli_half_grad(delta); }

struct Rewards {
  const LossSpec& spec;
  std::span<const double> logp;
  std::span<const double> ref;

  double operator()(std::size_t y) const { return spec.beta * (logp[y] - ref[y]); }
};

// Reward of the complement of a small response set S, β log((1 − π(S)) / (1 − π_ref(S))).
struct Complement {
  double reward = 0.0;
  double log_mass = 0.0;
};

double log_complement(std::span<const double> lp, std::span<const std::size_t> set) {
  std::vector<double> xs;
  xs.reserve(set.size());
  for (std::size_t y : set) xs.push_back(lp[y]);
  const double log_in = log_sum_exp(xs);
  if (!(log_in < 0.0)) throw NumericalError("hyper reward: labeled responses carry all the mass");
  const double out = log1m_exp(log_in);
  if (!std::isfinite(out)) throw NumericalError("hyper reward: aggregated mass underflowed");
  return out;
}

Complement complement_reward(const LossSpec& spec, std::span<const double> logp,
                             std::span<const double> ref, std::span<const std::size_t> set) {
  if (spec.pin_hyper) return {};
  Complement c;
  c.log_mass = log_complement(logp, set);
  c.reward = spec.beta * (c.log_mass - log_complement(ref, set));
  return c;
}

void add_complement_grad(const LossSpec& spec, std::span<const double> logp,
                         std::span<const std::size_t> set, const Complement& c, double d_reward,
                         std::vector<double>* dlogp) {
  if (spec.pin_hyper || !dlogp) return;
  for (std::size_t y : set) (*dlogp)[y] -= d_reward * spec.beta * std::exp(logp[y] - c.log_mass);
}

void add(std::vector<double>* dlogp, std::size_t y, double v) {
  if (dlogp) (*dlogp)[y] += v;
}

// (α/2) Σ_ij w_i w_j KL(r_i − r_j); accumulates d/dr_i into dr.
double kl_regularizer(std::span<const double> w, std::span<const double> r, double alpha,
                      std::span<double> dr) {
  double value = 0.0;
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] == 0.0) continue;
    double gi = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (w[j] == 0.0) continue;
      const double delta = r[i] - r[j];
      value += w[i] * w[j] * kl_bernoulli_half(delta);
      gi += w[j] * kl_bernoulli_half_grad(delta);
    }
    if (!dr.empty()) dr[i] += alpha * w[i] * gi;
  }
  return 0.5 * alpha * value;
}

// −Σ_ij w_i w_j p(i, j) log σ(r_i − r_j); accumulates d/dr into dr.
template <typename Pref>
double weighted_log_sigmoid(std::span<const double> w, std::span<const double> r, Pref p,
                            std::span<double> dr) {
  double value = 0.0;
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double c = w[i] * w[j] * p(i, j);
      if (c == 0.0) continue;
      const double delta = r[i] - r[j];
      value -= c * log_sigmoid(delta);
      if (!dr.empty()) {
        const double g = c * sigmoid(-delta);
        dr[i] -= g;
        dr[j] += g;
      }
    }
  }
  return value;
}

// −β Σ_y μ̂(y) ŝ(y) log π(y).
double score_optimizer(const LossSpec& spec, std::span<const double> logp, std::vector<double>* dlogp) {
  const Distribution& mu_hat = require(spec.mu_hat, spec.kind, "mu_hat");
  const ScoreMap& score = require(spec.score, spec.kind, "score");
  if (mu_hat.size() != logp.size() || score.size() != logp.size()) {
    throw InvalidArgument("loss: mu_hat / score do not match the policy space");
  }
  double value = 0.0;
  for (std::size_t y = 0; y < logp.size(); ++y) {
    const double w = mu_hat.prob(y) * score[y];
    if (w == 0.0) continue;
    value -= spec.beta * w * logp[y];
    add(dlogp, y, -spec.beta * w);
  }
  return value;
}

double reg_sign(const LossSpec& spec) { return spec.flip_regularizer ? -1.0 : 1.0; }

double eval_dpo_sample(const LossSpec& spec, const Rewards& r, std::vector<double>* dlogp) {
  const auto& data = require_data<PairwiseDataset>(spec);
  const double total = static_cast<double>(data.total_count());
  double value = 0.0;
  for (const auto& rec : data.records()) {
    const double w = static_cast<double>(rec.count) / total;
    const double delta = r(rec.winner) - r(rec.loser);
    value -= w * log_sigmoid(delta);
    // Importance weight σ(r_l − r_w) on β ∇(log π_w − log π_l).
    const double g = w * sigmoid(-delta) * spec.beta;
    add(dlogp, rec.winner, -g);
    add(dlogp, rec.loser, g);
  }
  return value;
}

double eval_dpo_population(const LossSpec& spec, const Rewards& r, std::vector<double>* dlogp) {
  const PreferenceMatrix& pref = require(spec.pref, spec.kind, "preference matrix");
  const Distribution& mu = require(spec.mu, spec.kind, "mu");
  const std::size_t n = r.logp.size();
  if (pref.size() != n || mu.size() != n) throw InvalidArgument("dpo_population: space mismatch");
  if (!mu.strictly_positive()) throw InvalidArgument("dpo_population: mu must be strictly positive");
  std::vector<double> rv(n), dr(dlogp ? n : 0, 0.0);
  for (std::size_t y = 0; y < n; ++y) rv[y] = r(y);
  const double value = weighted_log_sigmoid(mu.probs(), rv, [&](std::size_t i, std::size_t j) { return pref(i, j); }, dr);
  if (dlogp) {
    for (std::size_t y = 0; y < n; ++y) (*dlogp)[y] += spec.beta * dr[y];
  }
  return value;
}

double eval_edpo(const LossSpec& spec, const Rewards& r, std::vector<double>* dlogp) {
  const Distribution& mu = require(spec.mu, spec.kind, "mu");
  const std::size_t n = r.logp.size();
  if (mu.size() != n) throw InvalidArgument("edpo: mu does not match the policy space");
  if (!mu.strictly_positive()) throw InvalidArgument("edpo: mu must be strictly positive");
  double value = score_optimizer(spec, r.logp, dlogp);
  std::vector<double> rv(n), dr(dlogp ? n : 0, 0.0);
  for (std::size_t y = 0; y < n; ++y) rv[y] = r(y);
  const double s = reg_sign(spec);
  value += s * kl_regularizer(mu.probs(), rv, spec.alpha, dr);
  if (dlogp) {
    for (std::size_t y = 0; y < n; ++y) (*dlogp)[y] += s * spec.beta * dr[y];
  }
  return value;
}

// Rewards over Y_H: individual responses outside H, then H itself.
struct CollapsedRewards {
  std::vector<double> r;
  double log_mass_h = 0.0;
};

CollapsedRewards collapsed_rewards(const LossSpec& spec, const HyperSpace& hs, const Rewards& r) {
  CollapsedRewards out;
  out.r.resize(hs.collapsed_size());
  for (std::size_t k = 0; k < hs.outside().size(); ++k) out.r[k] = r(hs.outside()[k]);
  out.r[hs.hyper_index()] = hyper_reward(r.logp, r.ref, spec.beta, hs, spec.pin_hyper);
  return out;
}

void pull_back_collapsed(const LossSpec& spec, const HyperSpace& hs, const Rewards& r,
                         std::span<const double> dr, std::vector<double>* dlogp) {
  if (!dlogp) return;
  for (std::size_t k = 0; k < hs.outside().size(); ++k) {
    (*dlogp)[hs.outside()[k]] += spec.beta * dr[k];
  }
  if (!spec.pin_hyper) {
    hyper_log_mass(r.logp, hs, *dlogp, spec.beta * dr[hs.hyper_index()]);
  }
}

const HyperSpace& require_hyper(const LossSpec& spec, std::size_t n) {
  const HyperSpace& hs = require(spec.hyper, spec.kind, "hyper space");
  if (hs.base()->size() != n) throw InvalidArgument("loss: hyper space does not match the policy");
  const Distribution& mu = require(spec.mu, spec.kind, "mu");
  if (!same_space(mu.space(), hs.collapsed())) {
    throw InvalidArgument("loss: mu must live on the collapsed space");
  }
  if (!mu.strictly_positive()) throw InvalidArgument("loss: mu must be strictly positive on Y_H");
  return hs;
}

double eval_pro(const LossSpec& spec, const Rewards& r, std::vector<double>* dlogp) {
  const HyperSpace& hs = require_hyper(spec, r.logp.size());
  const Distribution& mu_hat = require(spec.mu_hat, spec.kind, "mu_hat");
  for (std::size_t m : hs.members()) {
    if (mu_hat.prob(m) > 0.0) throw InvalidArgument("pro: H must avoid supp(mu_hat)");
  }
  double value = score_optimizer(spec, r.logp, dlogp);
  const CollapsedRewards cr = collapsed_rewards(spec, hs, r);
  std::vector<double> dr(dlogp ? cr.r.size() : 0, 0.0);
  const double s = reg_sign(spec);
  value += s * kl_regularizer(spec.mu->probs(), cr.r, spec.alpha, dr);
  for (double& d : dr) d *= s;
  pull_back_collapsed(spec, hs, r, dr, dlogp);
  return value;
}

double eval_prop_global(const LossSpec& spec, const Rewards& r, std::vector<double>* dlogp) {
  const auto& data = require_data<PairwiseDataset>(spec);
  const HyperSpace& hs = require_hyper(spec, r.logp.size());
  if (!(spec.eta > 0.0 && spec.eta < 1.0)) throw InvalidArgument("pro_p: eta must lie in (0,1)");
  const PreferenceMatrix p_hat = empirical_preference(data);
  const Distribution mu_hat = empirical_response_dist(Dataset(data));
  std::vector<bool> labeled(hs.collapsed_size(), false);
  for (std::size_t k = 0; k < hs.outside().size(); ++k) labeled[k] = mu_hat.prob(hs.outside()[k]) > 0.0;
  for (std::size_t m : hs.members()) {
    if (mu_hat.prob(m) > 0.0) throw InvalidArgument("pro_p: H must avoid supp(mu_hat)");
  }
  const CollapsedRewards cr = collapsed_rewards(spec, hs, r);
  std::vector<double> dr(dlogp ? cr.r.size() : 0, 0.0);
  const double scale = 1.0 / (spec.eta * spec.eta);
  double value = weighted_log_sigmoid(
      spec.mu->probs(), cr.r,
      [&](std::size_t i, std::size_t j) { return augmented_preference(p_hat, hs, i, j, labeled); }, dr);
  for (double& d : dr) d *= scale;
  pull_back_collapsed(spec, hs, r, dr, dlogp);
  return scale * value;
}

double eval_prop_per_pair(const LossSpec& spec, const Rewards& r, std::vector<double>* dlogp) {
  const auto& data = require_data<PairwiseDataset>(spec);
  const double total = static_cast<double>(data.total_count());
  const double s = reg_sign(spec);
  double value = 0.0;
  for (const auto& rec : data.records()) {
    const double w = static_cast<double>(rec.count) / total;
    const std::size_t set[2] = {rec.winner, rec.loser};
    const Complement h = complement_reward(spec, r.logp, r.ref, set);
    const double rw = r(rec.winner);
    const double rl = r(rec.loser);
    double term = -log_sigmoid(rw - rl);
    double d_rw = -sigmoid(rl - rw);
    double d_rl = -d_rw;
    double d_rh = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double ry = k == 0 ? rw : rl;
      const double delta = ry - h.reward;
      term -= s * sym_pair(delta);
      const double g = -s * sym_pair_grad(delta);
      (k == 0 ? d_rw : d_rl) += g;
      d_rh -= g;
    }
    value += w * term;
    add(dlogp, rec.winner, w * spec.beta * d_rw);
    add(dlogp, rec.loser, w * spec.beta * d_rl);
    add_complement_grad(spec, r.logp, set, h, w * d_rh, dlogp);
  }
  return value;
}

double eval_prob(const LossSpec& spec, const Rewards& r, std::vector<double>* dlogp) {
  const auto& data = require_data<BinaryDataset>(spec);
  const double total = static_cast<double>(data.total_count());
  const double s = reg_sign(spec);
  double num = 0.0;
  double den = 0.0;
  struct Acc {
    std::size_t y;
    double coef;  // weight * d(term)/d(log pi_y) excluding the hyper part
    Complement h;
    double d_rh;
  };
  std::vector<Acc> accs;
  for (const auto& rec : data.records()) {
    double m = 1.0;
    if (spec.class_reweight) {
      const auto cc = static_cast<double>(data.class_count(rec.label));
      m = total / cc;
    }
    const double c = static_cast<double>(rec.count);
    const double lab = label_value(rec.label);
    const std::size_t set[1] = {rec.response};
    const Complement h = complement_reward(spec, r.logp, r.ref, set);
    const double delta = r(rec.response) - h.reward;
    const double term = -spec.beta * (lab * r.logp[rec.response] + s * spec.alpha * sym_pair(delta));
    const double d_r = -spec.beta * s * spec.alpha * sym_pair_grad(delta);
    num += c * m * term;
    den += c;
    accs.push_back({rec.response, c * m * (-spec.beta * lab + spec.beta * d_r), h, -c * m * d_r});
  }
  if (dlogp) {
    for (const auto& a : accs) {
      (*dlogp)[a.y] += a.coef / den;
      const std::size_t set[1] = {a.y};
      add_complement_grad(spec, r.logp, set, a.h, a.d_rh / den, dlogp);
    }
  }
  return num / den;
}

double eval_pros(const LossSpec& spec, const Rewards& r, std::vector<double>* dlogp) {
  const auto& data = require_data<ScalarDataset>(spec);
  const std::size_t n_per = data.group_size();
  if (n_per < 2) throw InvalidArgument("pro_s: groups need at least two responses");
  const double nn = static_cast<double>(n_per);
  const double k = 2.0 * spec.alpha / (nn * (nn + 1.0));
  const double s = reg_sign(spec);
  double num = 0.0;
  double den = 0.0;
  std::vector<std::size_t> set(n_per);
  std::vector<double> rv(n_per), dr(n_per), sc(n_per);
  for (std::size_t g = 0; g < data.group_count(); ++g) {
    const auto group = data.group(g);
    const double c = static_cast<double>(group[0].count);
    double mean = 0.0;
    for (std::size_t n = 0; n < n_per; ++n) {
      if (group[n].count != group[0].count) {
        throw InvalidArgument("pro_s: records of one group must share a count");
      }
      set[n] = group[n].response;
      for (std::size_t m = 0; m < n; ++m) {
        if (set[m] == set[n]) throw InvalidArgument("pro_s: duplicate response within a group");
      }
      mean += group[n].score;
    }
    mean /= nn;
    const Complement h = complement_reward(spec, r.logp, r.ref, set);
    double opt = 0.0;
    double reg = 0.0;
    double d_rh = 0.0;
    for (std::size_t n = 0; n < n_per; ++n) {
      sc[n] = group[n].score - mean;
      rv[n] = r(set[n]);
      dr[n] = 0.0;
      opt += sc[n] * r.logp[set[n]] / nn;
    }
    for (std::size_t a = 0; a < n_per; ++a) {
      for (std::size_t b = a + 1; b < n_per; ++b) {
        const double delta = rv[a] - rv[b];
        reg += sym_pair(delta);
        dr[a] += sym_pair_grad(delta);
        dr[b] -= sym_pair_grad(delta);
      }
      const double delta = rv[a] - h.reward;
      reg += sym_pair(delta);
      dr[a] += sym_pair_grad(delta);
      d_rh -= sym_pair_grad(delta);
    }
    num += c * (-spec.beta * (opt + s * k * reg));
    den += c;
    if (dlogp) {
      // Deferred normalization: scale by c now, divide by den after the loop.
      for (std::size_t n = 0; n < n_per; ++n) {
        (*dlogp)[set[n]] += c * (-spec.beta * (sc[n] / nn + s * k * spec.beta * dr[n]));
      }
      add_complement_grad(spec, r.logp, set, h, c * (-spec.beta * s * k * d_rh), dlogp);
    }
  }
  if (dlogp) {
    for (double& d : *dlogp) d /= den;
  }
  return num / den;
}

double eval_kto(const LossSpec& spec, const Rewards& r, std::vector<double>* dlogp) {
  const KtoParams& kp = spec.kto;
  if (!kp.sign_mode) throw InvalidArgument("kto: sign_mode must be set explicitly");
  if (!(kp.z0 >= 0.0) || !(kp.lambda_d > 0.0) || !(kp.lambda_u > 0.0)) {
    throw InvalidArgument("kto: requires z0 >= 0 and positive lambdas");
  }
  const bool utility = *kp.sign_mode == KtoSignMode::Utility;
  const double b = spec.beta;
  // One sigmoid term λ σ(b x) (or λ (1 − σ(b x))), with x = ±(r − z0).
  auto term = [&](double lambda, double x, double& dx) {
    const double sgm = sigmoid(b * x);
    const double d = lambda * sgm * (1.0 - sgm) * b;
    dx = utility ? -d : d;
    return utility ? lambda * (1.0 - sgm) : lambda * sgm;
  };
  const Dataset& data = require(spec.data, spec.kind, "dataset");
  double num = 0.0;
  double den = 0.0;
  if (const auto* pw = std::get_if<PairwiseDataset>(&data)) {
    for (const auto& rec : pw->records()) {
      const double c = static_cast<double>(rec.count);
      double dw = 0.0;
      double dl = 0.0;
      num += c * (term(kp.lambda_d, r(rec.winner) - kp.z0, dw) + term(kp.lambda_u, kp.z0 - r(rec.loser), dl));
      den += c;
      add(dlogp, rec.winner, c * dw * b);
      add(dlogp, rec.loser, -c * dl * b);
    }
  } else if (const auto* bin = std::get_if<BinaryDataset>(&data)) {
    for (const auto& rec : bin->records()) {
      const double c = static_cast<double>(rec.count);
      double d = 0.0;
      if (rec.label == Label::Desired) {
        num += c * term(kp.lambda_d, r(rec.response) - kp.z0, d);
        add(dlogp, rec.response, c * d * b);
      } else {
        num += c * term(kp.lambda_u, kp.z0 - r(rec.response), d);
        add(dlogp, rec.response, -c * d * b);
      }
      den += c;
    }
  } else {
    throw InvalidArgument("kto: requires pairwise or binary feedback");
  }
  if (den == 0.0) throw EmptyInput("kto: dataset has no records");
  if (dlogp) {
    for (double& d : *dlogp) d /= den;
  }
  return num / den;
}

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::DpoSample: return "dpo";
    case LossKind::DpoPopulation: return "dpo_population";
    case LossKind::Edpo: return "edpo";
    case LossKind::Pro: return "pro";
    case LossKind::ProP: return "pro_p";
    case LossKind::ProB: return "pro_b";
    case LossKind::ProS: return "pro_s";
    case LossKind::Kto: return "kto";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view name) {
  for (LossKind k : {LossKind::DpoSample, LossKind::DpoPopulation, LossKind::Edpo, LossKind::Pro,
                     LossKind::ProP, LossKind::ProB, LossKind::ProS, LossKind::Kto}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown loss kind '" + std::string(name) + "'");
}

std::string_view to_string(ProPForm form) { return form == ProPForm::PerPair ? "per_pair" : "global"; }

ProPForm parse_prop_form(std::string_view name) {
  if (name == "per_pair") return ProPForm::PerPair;
  if (name == "global") return ProPForm::Global;
  throw InvalidArgument("unknown PRO-P form '" + std::string(name) + "'");
}

std::string_view to_string(KtoSignMode mode) {
  return mode == KtoSignMode::AsPrinted ? "as_printed" : "utility";
}

KtoSignMode parse_kto_sign_mode(std::string_view name) {
  if (name == "as_printed") return KtoSignMode::AsPrinted;
  if (name == "utility") return KtoSignMode::Utility;
  throw InvalidArgument("unknown KTO sign mode '" + std::string(name) + "'");
}

double evaluate_logp(const LossSpec& spec, std::span<const double> logp, std::vector<double>* dlogp) {
  if (!(spec.beta > 0.0) || !std::isfinite(spec.beta)) throw InvalidArgument("loss: beta must be positive");
  const bool uses_alpha = spec.kind != LossKind::DpoSample && spec.kind != LossKind::DpoPopulation &&
                          spec.kind != LossKind::Kto &&
                          !(spec.kind == LossKind::ProP);
  if (uses_alpha && !(spec.alpha > 0.0)) throw InvalidArgument("loss: alpha must be positive");
  const Distribution& ref = require(spec.ref, spec.kind, "reference");
  if (ref.size() != logp.size()) throw InvalidArgument("loss: reference does not match the policy space");
  for (double v : logp) {
    if (!std::isfinite(v)) throw NumericalError("loss: non-finite policy log-probability");
  }
  if (dlogp) dlogp->assign(logp.size(), 0.0);
  const Rewards r{spec, logp, ref.log_probs()};
  double value = 0.0;
  switch (spec.kind) {
    case LossKind::DpoSample: value = eval_dpo_sample(spec, r, dlogp); break;
    case LossKind::DpoPopulation: value = eval_dpo_population(spec, r, dlogp); break;
    case LossKind::Edpo: value = eval_edpo(spec, r, dlogp); break;
    case LossKind::Pro: value = eval_pro(spec, r, dlogp); break;
    case LossKind::ProP:
      value = spec.prop_form == ProPForm::Global ? eval_prop_global(spec, r, dlogp)
                                                 : eval_prop_per_pair(spec, r, dlogp);
      break;
    case LossKind::ProB: value = eval_prob(spec, r, dlogp); break;
    case LossKind::ProS: value = eval_pros(spec, r, dlogp); break;
    case LossKind::Kto: value = eval_kto(spec, r, dlogp); break;
  }
  if (!std::isfinite(value)) {
    throw NumericalError("loss " + std::string(to_string(spec.kind)) + ": non-finite value");
  }
  if (dlogp) {
    for (std::size_t y = 0; y < dlogp->size(); ++y) {
      if (!std::isfinite((*dlogp)[y])) {
        throw NumericalError("loss " + std::string(to_string(spec.kind)) +
                             ": non-finite gradient at response " + std::to_string(y));
      }
    }
  }
  return value;
}

LossValue evaluate(const LossSpec& spec, const Policy& policy) {
  const std::vector<double> logp = policy.log_probs();
  std::vector<double> dlogp;
  LossValue out;
  out.value = evaluate_logp(spec, logp, &dlogp);
  out.gradient = policy.backward(dlogp);
  return out;
}

double loss_value(const LossSpec& spec, const Policy& policy) {
  const std::vector<double> logp = policy.log_probs();
  return evaluate_logp(spec, logp, nullptr);
}

std::vector<double> loss_gradient(const LossSpec& spec, const Policy& policy) {
  return evaluate(spec, policy).gradient;
}

double regularizer_grad_profile(double alpha, double beta, double delta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw InvalidArgument("regularizer_grad_profile: alpha, beta > 0");
  return 0.5 * alpha * kl_bernoulli_half_grad(beta * delta);
}

LossSpec spec_from_dataset(LossKind kind, const Distribution& ref, const Dataset& data, double beta, double alpha,
                           double eta) {
  if (!same_space(ref.space(), dataset_space(data))) {
    throw InvalidArgument("spec_from_dataset: reference and dataset live on different spaces");
  }
  LossSpec spec;
  spec.kind = kind;
  spec.beta = beta;
  spec.alpha = alpha;
  spec.eta = eta;
  spec.ref = ref;
  spec.data = data;
  const Distribution mu_hat = empirical_response_dist(data);
  bool has_unobserved = false;
  for (std::size_t y = 0; y < mu_hat.size(); ++y) has_unobserved |= mu_hat.prob(y) == 0.0;
  auto mixture_mu = [&] {
    std::vector<double> w(mu_hat.size());
    const double u = 1.0 / static_cast<double>(mu_hat.size());
    for (std::size_t y = 0; y < w.size(); ++y) w[y] = spec.eta * mu_hat.prob(y) + (1.0 - spec.eta) * u;
    return Distribution::from_weights(mu_hat.space(), w);
  };
  switch (kind) {
    case LossKind::Edpo:
      spec.mu_hat = mu_hat;
      spec.score = empirical_score(data);
      spec.mu = mixture_mu();
      break;
    case LossKind::DpoPopulation:
      if (const auto* pw = std::get_if<PairwiseDataset>(&data)) {
        spec.pref = empirical_preference(*pw);
      } else {
        throw InvalidArgument("spec_from_dataset: dpo_population needs pairwise data");
      }
      spec.mu = mixture_mu();
      break;
    case LossKind::Pro:
    case LossKind::ProP:
      if (kind == LossKind::Pro) {
        spec.mu_hat = mu_hat;
        spec.score = empirical_score(data);
      }
      if (has_unobserved) {
        HyperSpace hs = HyperSpace::unobserved(mu_hat);
        const Distribution mu_hat_c = hyper_mass(mu_hat, hs);
        spec.mu = mu_bar(mu_hat_c, HyperConfig::uniform_rho(spec.eta, mu_hat_c));
        spec.hyper = std::move(hs);
      } else if (kind == LossKind::Pro) {
        throw InvalidArgument("spec_from_dataset: pro needs at least one unobserved response");
      }
      break;
    default:
      break;
  }
  return spec;
}

}  // namespace proalign
