#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "proalign/feedback.hpp"
#include "proalign/space.hpp"

namespace proalign {

/// A base space with a subset of responses (H) collapsed into one hyper
/// response. The collapsed space lists every response outside H in base
/// order, followed by H itself (identifier "<H>").
class HyperSpace {
 public:
  /// `members` must be non-empty and leave at least one response outside H,
  /// unless `allow_full` is set (degenerate test spaces only).
  HyperSpace(SpacePtr base, std::vector<std::size_t> members, bool allow_full = false);

  /// Default construction: H is every response outside supp(mu-hat).
  static HyperSpace unobserved(const Distribution& mu_hat);

  /// H = `members`, additionally required to avoid supp(mu-hat).
  static HyperSpace within_unobserved(const Distribution& mu_hat, std::vector<std::size_t> members);

  const SpacePtr& base() const { return base_; }
  const SpacePtr& collapsed() const { return collapsed_; }
  const std::vector<std::size_t>& members() const { return members_; }
  /// Base indices outside H, in collapsed order.
  const std::vector<std::size_t>& outside() const { return outside_; }
  bool in_hyper(std::size_t base_index) const { return in_hyper_[base_index]; }

  std::size_t collapsed_size() const { return outside_.size() + 1; }
  std::size_t hyper_index() const { return outside_.size(); }
  /// Collapsed index of a base response (hyper_index() for members of H).
  std::size_t collapsed_index(std::size_t base_index) const;

  /// Whether log-mass of H is summed over members (true) or taken as the
  /// complement of everything outside H (false).
  bool use_member_sum() const { return 2 * members_.size() <= base_->size(); }

 private:
  SpacePtr base_;
  SpacePtr collapsed_;
  std::vector<std::size_t> members_;
  std::vector<std::size_t> outside_;
  std::vector<bool> in_hyper_;
};

/// log p(H) from a base log-probability vector. With `grad` non-null, adds
/// d log p(H) / d log p(y) * upstream for every y the chosen formula reads.
double hyper_log_mass(std::span<const double> base_log_probs, const HyperSpace& hs,
                      std::span<double> grad = {}, double upstream = 0.0);

/// Extends `dist` to the collapsed space: p(H) = sum over members.
/// Empirical inputs stay empirical (H may then carry zero mass).
Distribution hyper_mass(const Distribution& dist, const HyperSpace& hs);

/// Lifts a base score map onto the collapsed space (H scores 0, unlabeled).
ScoreMap lift_score(const ScoreMap& score, const HyperSpace& hs);

/// Mixture weights for mu-bar: eta on supp(mu-hat), rho elsewhere.
struct HyperConfig {
  double eta = 2.0 / 3.0;
  /// Distribution over the collapsed space; must be positive exactly on
  /// responses outside supp(mu-hat).
  Distribution rho;

  /// rho uniform over collapsed responses outside supp(mu-hat-collapsed).
  static HyperConfig uniform_rho(double eta, const Distribution& mu_hat_collapsed);
};

/// mu-bar(y) = eta * mu-hat(y) on supp(mu-hat), (1 - eta) * rho(y) elsewhere.
/// `mu_hat` lives on the collapsed space.
Distribution mu_bar(const Distribution& mu_hat, const HyperConfig& cfg);

/// Hyper-response implicit reward beta * log(pi(H) / pi_ref(H)), or exactly 0
/// in pin mode. Throws NumericalError when a mass leaves (0, 1).
double hyper_reward(std::span<const double> policy_log_probs, std::span<const double> ref_log_probs,
                    double beta, const HyperSpace& hs, bool pin_to_zero);

/// p-bar: p-hat when both responses are labeled, 1/2 otherwise. Indices are
/// collapsed; `labeled` marks collapsed responses in supp(mu-hat).
double augmented_preference(const PreferenceMatrix& p_hat, const HyperSpace& hs, std::size_t y1,
                            std::size_t y2, const std::vector<bool>& labeled);

/// Constructive existence threshold
///   max_{y: s(y) < 0} 4 mu-hat(y) (-s(y)) / (mu(y) * min_y' mu(y')),
/// or 0 when no score is negative. All three inputs share one space.
double alpha_threshold(const Distribution& mu_hat, const ScoreMap& s_hat, const Distribution& mu);

}  // namespace proalign
