#include "proalign/hyper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "proalign/errors.hpp"
#include "proalign/numeric.hpp"

namespace proalign {

HyperSpace::HyperSpace(SpacePtr base, std::vector<std::size_t> members, bool allow_full)
    : base_(std::move(base)), members_(std::move(members)) {
  const std::size_t n = base_->size();
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (members_.empty()) throw InvalidArgument("HyperSpace: H must be non-empty");
  if (members_.back() >= n) throw InvalidArgument("HyperSpace: member index out of range");
  if (members_.size() == n && !allow_full) {
    throw InvalidArgument("HyperSpace: H covers the whole space");
  }
  in_hyper_.assign(n, false);
  for (std::size_t m : members_) in_hyper_[m] = true;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_hyper_[i]) {
      outside_.push_back(i);
      ids.push_back(base_->id(i));
    }
  }
  ids.push_back("<H>");
  if (ids.size() >= 2) {
    collapsed_ = make_space(std::move(ids));
  }
}

HyperSpace HyperSpace::unobserved(const Distribution& mu_hat) {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < mu_hat.size(); ++i) {
    if (mu_hat.prob(i) == 0.0) members.push_back(i);
  }
  return HyperSpace(mu_hat.space(), std::move(members));
}

HyperSpace HyperSpace::within_unobserved(const Distribution& mu_hat, std::vector<std::size_t> members) {
  for (std::size_t m : members) {
    if (m >= mu_hat.size() || mu_hat.prob(m) > 0.0) {
      throw InvalidArgument("HyperSpace: H must avoid labeled responses");
    }
  }
  return HyperSpace(mu_hat.space(), std::move(members));
}

std::size_t HyperSpace::collapsed_index(std::size_t base_index) const {
  if (in_hyper_.at(base_index)) return hyper_index();
  return static_cast<std::size_t>(std::lower_bound(outside_.begin(), outside_.end(), base_index) -
                                  outside_.begin());
}

double hyper_log_mass(std::span<const double> base_log_probs, const HyperSpace& hs,
                      std::span<double> grad, double upstream) {
  if (base_log_probs.size() != hs.base()->size()) {
    throw InvalidArgument("hyper_log_mass: log-prob vector does not match base space");
  }
  const bool want_grad = !grad.empty() && upstream != 0.0;
  if (hs.use_member_sum()) {
    std::vector<double> lp;
    lp.reserve(hs.members().size());
    for (std::size_t m : hs.members()) lp.push_back(base_log_probs[m]);
    const double log_mass = log_sum_exp(lp);
    if (want_grad) {
      for (std::size_t m : hs.members()) grad[m] += upstream * std::exp(base_log_probs[m] - log_mass);
    }
    return log_mass;
  }
  // Complement: log(1 - sum_{y outside H} p(y)).
  std::vector<double> lp;
  lp.reserve(hs.outside().size());
  for (std::size_t o : hs.outside()) lp.push_back(base_log_probs[o]);
  const double log_outside = log_sum_exp(lp);
  if (!(log_outside < 0.0)) {
    throw NumericalError("hyper_log_mass: responses outside H carry all the mass");
  }
  const double log_mass = log1m_exp(log_outside);
  if (want_grad) {
    for (std::size_t o : hs.outside()) grad[o] -= upstream * std::exp(base_log_probs[o] - log_mass);
  }
  return log_mass;
}

Distribution hyper_mass(const Distribution& dist, const HyperSpace& hs) {
  if (!same_space(dist.space(), hs.base())) {
    throw InvalidArgument("hyper_mass: distribution is not on the base space");
  }
  std::vector<double> out(hs.collapsed_size(), 0.0);
  for (std::size_t k = 0; k < hs.outside().size(); ++k) out[k] = dist.prob(hs.outside()[k]);
  if (dist.kind() == Distribution::Kind::Strict) {
    out[hs.hyper_index()] = std::exp(hyper_log_mass(dist.log_probs(), hs));
  } else {
    double mass = 0.0;
    for (std::size_t m : hs.members()) mass += dist.prob(m);
    out[hs.hyper_index()] = mass;
  }
  // Absorb rounding so the collapsed vector sums to 1 within 1e-12.
  double total = 0.0;
  for (double p : out) total += p;
  for (double& p : out) p /= total;
  return Distribution::from_probs(hs.collapsed(), std::move(out), dist.kind());
}

ScoreMap lift_score(const ScoreMap& score, const HyperSpace& hs) {
  if (!same_space(score.space(), hs.base())) {
    throw InvalidArgument("lift_score: score map is not on the base space");
  }
  std::vector<double> values(hs.collapsed_size(), 0.0);
  std::vector<bool> labeled(hs.collapsed_size(), false);
  for (std::size_t m : hs.members()) {
    if (score.labeled(m)) throw InvalidArgument("lift_score: H contains a labeled response");
  }
  for (std::size_t k = 0; k < hs.outside().size(); ++k) {
    values[k] = score[hs.outside()[k]];
    labeled[k] = score.labeled(hs.outside()[k]);
  }
  return ScoreMap(hs.collapsed(), std::move(values), std::move(labeled));
}

HyperConfig HyperConfig::uniform_rho(double eta, const Distribution& mu_hat_collapsed) {
  std::vector<double> w(mu_hat_collapsed.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (mu_hat_collapsed.prob(i) == 0.0) w[i] = 1.0;
  }
  return HyperConfig{eta, Distribution::from_weights(mu_hat_collapsed.space(), w,
                                                     Distribution::Kind::Empirical)};
}

Distribution mu_bar(const Distribution& mu_hat, const HyperConfig& cfg) {
  if (!(cfg.eta > 0.0 && cfg.eta < 1.0)) throw InvalidArgument("mu_bar: eta must lie in (0,1)");
  if (!same_space(mu_hat.space(), cfg.rho.space())) {
    throw InvalidArgument("mu_bar: rho and mu-hat live on different spaces");
  }
  const std::size_t n = mu_hat.size();
  std::vector<double> out(n);
  bool room = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (mu_hat.prob(i) > 0.0) {
      if (cfg.rho.prob(i) != 0.0) throw InvalidArgument("mu_bar: rho must vanish on supp(mu-hat)");
      out[i] = cfg.eta * mu_hat.prob(i);
    } else {
      room = true;
      if (!(cfg.rho.prob(i) > 0.0)) {
        throw InvalidArgument("mu_bar: rho must be positive outside supp(mu-hat)");
      }
      out[i] = (1.0 - cfg.eta) * cfg.rho.prob(i);
    }
  }
  if (!room) throw InvalidArgument("mu_bar: supp(mu-hat) covers the whole space");
  double total = 0.0;
  for (double p : out) total += p;
  for (double& p : out) p /= total;
  return Distribution::from_probs(mu_hat.space(), std::move(out));
}

double hyper_reward(std::span<const double> policy_log_probs, std::span<const double> ref_log_probs,
                    double beta, const HyperSpace& hs, bool pin_to_zero) {
  if (!(beta > 0.0)) throw InvalidArgument("hyper_reward: beta must be positive");
  if (pin_to_zero) return 0.0;
  const double lp = hyper_log_mass(policy_log_probs, hs);
  const double lr = hyper_log_mass(ref_log_probs, hs);
  if (!(lp < 0.0 && std::isfinite(lp)) || !(lr < 0.0 && std::isfinite(lr))) {
    throw NumericalError("hyper_reward: aggregated mass outside (0, 1)");
  }
  return beta * (lp - lr);
}

double augmented_preference(const PreferenceMatrix& p_hat, const HyperSpace& hs, std::size_t y1,
                            std::size_t y2, const std::vector<bool>& labeled) {
  if (y1 >= hs.collapsed_size() || y2 >= hs.collapsed_size() || labeled.size() != hs.collapsed_size()) {
    throw InvalidArgument("augmented_preference: index out of range");
  }
  if (labeled[y1] && labeled[y2]) {
    return p_hat(hs.outside().at(y1), hs.outside().at(y2));
  }
  return 0.5;
}

double alpha_threshold(const Distribution& mu_hat, const ScoreMap& s_hat, const Distribution& mu) {
  if (!same_space(mu_hat.space(), mu.space()) || !same_space(s_hat.space(), mu.space())) {
    throw InvalidArgument("alpha_threshold: inputs live on different spaces");
  }
  if (!mu.strictly_positive()) throw InvalidArgument("alpha_threshold: mu must be strictly positive");
  const double min_mu = mu.min_prob();
  double alpha0 = 0.0;
  for (std::size_t y = 0; y < mu.size(); ++y) {
    if (s_hat[y] < 0.0) {
      alpha0 = std::max(alpha0, 4.0 * mu_hat.prob(y) * (-s_hat[y]) / (mu.prob(y) * min_mu));
    }
  }
  return alpha0;
}

}  // namespace proalign
