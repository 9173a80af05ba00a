#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proalign/feedback.hpp"
#include "proalign/losses.hpp"
#include "proalign/policy.hpp"

namespace proalign {

/// Ground truth for a synthetic run: a response space, a latent reward per
/// response, and the base policy that both serves as pi_ref / training init
/// and generates the responses that get labeled (mu = pi_ref).
struct WorldSpec {
  std::uint64_t seed = 0;
  double reward_scale = 1.0;
  /// vocab = length = 0 for a tabular world.
  std::size_t vocab = 0;
  std::size_t length = 0;
  Policy base;
  std::vector<double> rewards;

  bool autoregressive() const { return length > 0; }
  const SpacePtr& space() const { return base.space(); }
  Distribution mu() const { return policy_distribution(base); }
};

/// Tabular world of `size` responses. Rewards are reward_scale * N(0, 1);
/// the base policy has N(0, 0.5^2) logits.
WorldSpec gen_world(std::uint64_t seed, std::size_t size, double reward_scale);
/// Sequence world over vocab^length token strings with an autoregressive
/// base policy (N(0, 0.5^2) parameters).
WorldSpec gen_world(std::uint64_t seed, std::size_t vocab, std::size_t length, double reward_scale);

/// Bradley-Terry: p(i > j) = sigmoid(reward_i - reward_j).
PreferenceMatrix true_preferences(const WorldSpec& world);

/// E_{y ~ policy}[latent reward].
double expected_latent_reward(const WorldSpec& world, const Policy& policy);

enum class FeedbackKind { Pairwise, Binary, Scalar };
std::string_view to_string(FeedbackKind kind);
FeedbackKind parse_feedback_kind(std::string_view name);

/// Fraction of one binary class kept after labeling.
struct ImbalanceSpec {
  Label label = Label::Desired;
  double keep = 1.0;
};

struct FeedbackOptions {
  FeedbackKind kind = FeedbackKind::Pairwise;
  /// Pairs for pairwise / binary feedback, prompt groups for scalar.
  std::size_t n_records = 1;
  std::size_t group_size = 4;
  /// Scalar score noise; negative means 0.1 * reward_scale.
  double noise = -1.0;
  std::optional<ImbalanceSpec> imbalance;
};

/// Pairwise: y1 != y2 drawn from mu, winner ~ Bernoulli(p(y1 > y2)).
/// Binary: the same pairs with winner -> desired, loser -> undesired, then
///   round(keep * n) units of the imbalanced class kept at random.
/// Scalar: groups of distinct responses from mu scored reward + noise.
/// Identical records are merged in order of first appearance.
Dataset sample_feedback(const WorldSpec& world, const FeedbackOptions& opts, std::uint64_t seed);

/// Count-weighted response sets followed during training.
struct TrackedSets {
  std::vector<std::size_t> responses;  // every labeled response, ascending
  std::vector<double> preferred, dispreferred, desired, undesired;  // weights per response
  std::vector<bool> hyper;  // unobserved responses
};
TrackedSets tracked_sets(const Dataset& data);

struct TrajectoryRecord {
  std::size_t step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double mean_logp_preferred = 0.0;
  double mean_logp_dispreferred = 0.0;
  double mean_logp_desired = 0.0;
  double mean_logp_undesired = 0.0;
  double mean_reward_preferred = 0.0;
  double mean_reward_dispreferred = 0.0;
  double hyper_mass = 0.0;
  double expected_latent_reward = 0.0;
  /// beta * log(pi / pi_ref) for each tracked response.
  std::vector<double> rewards;

  bool operator==(const TrajectoryRecord&) const = default;
};

struct Trajectory {
  std::vector<std::size_t> tracked;
  std::vector<TrajectoryRecord> records;
  bool diverged = false;
  std::uint64_t seed = 0;

  bool operator==(const Trajectory&) const = default;
};

struct TrainResult {
  Trajectory trajectory;
  Policy final_policy;
};

/// Full-batch gradient descent with a fixed learning rate. Stops early and
/// flags divergence on a non-finite loss or gradient.
TrainResult train(const Policy& init, const LossSpec& spec, const WorldSpec& world, std::size_t steps,
                  double lr, std::uint64_t seed);

struct SeriesSummary {
  double initial = 0.0;
  double final = 0.0;
  double min = 0.0;
  double max = 0.0;
  double delta() const { return final - initial; }
};

struct Diagnostics {
  std::size_t steps = 0;
  bool diverged = false;
  SeriesSummary loss, logp_preferred, logp_dispreferred, reward_preferred, reward_dispreferred,
      hyper_mass, expected_latent_reward;
  /// Share of last-quartile records whose mean preferred reward is < 0.
  double last_quartile_negative_reward_fraction = 0.0;
};

Diagnostics diagnostics(const Trajectory& traj);

/// Fixed column order of the trajectory CSV.
extern const std::vector<std::string> kTrajectoryColumns;
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// step, then one column per tracked response id.
void write_rewards_csv(std::ostream& os, const Trajectory& traj, const ResponseSpace& space);
std::string diagnostics_json(const Diagnostics& d);

void write_world(std::ostream& os, const WorldSpec& world);
WorldSpec read_world(std::istream& is);
void write_dataset(std::ostream& os, const Dataset& data);
Dataset read_dataset(std::istream& is, const SpacePtr& space);

}  // namespace proalign
