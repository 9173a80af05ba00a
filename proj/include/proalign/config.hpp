#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "proalign/experiments.hpp"
#include "proalign/losses.hpp"

namespace proalign {

enum class WorldKind { Tabular, Autoregressive };
std::string_view to_string(WorldKind kind);
WorldKind parse_world_kind(std::string_view name);

/// Every parameter of a gen / train / verify run. File form: sections of
/// `key = value` lines (see README); unknown sections and keys are rejected.
struct RunConfig {
  // [run]
  std::uint64_t seed = 0;
  // [world]
  WorldKind world = WorldKind::Autoregressive;
  std::size_t size = 6;
  std::size_t vocab = 3;
  std::size_t length = 3;
  double reward_scale = 1.0;
  // [data]
  FeedbackKind feedback = FeedbackKind::Pairwise;
  std::size_t records = 40;
  std::size_t group_size = 4;
  /// Unset: 0.1 * reward_scale.
  std::optional<double> noise;
  /// Class thinned by `keep`; unset for no imbalance.
  std::optional<Label> imbalance;
  double keep = 1.0;
  // [loss]
  LossKind loss = LossKind::DpoSample;
  double beta = 0.1;
  double alpha = 2.5;
  double eta = 2.0 / 3.0;
  bool pin_hyper = true;
  bool class_reweight = false;
  ProPForm prop_form = ProPForm::PerPair;
  double kto_z0 = 0.0;
  double kto_lambda_d = 1.0;
  double kto_lambda_u = 1.0;
  std::optional<KtoSignMode> kto_sign_mode;
  // [train]
  std::size_t steps = 500;
  double lr = 1.0;
  /// Directory written by `gen`; read by `train`.
  std::string data_dir;

  bool operator==(const RunConfig&) const = default;
};

/// Canonical text form; every field is written, doubles with 17 digits.
std::string serialize(const RunConfig& config);
/// Parses the file form. Keys missing from the text keep their defaults.
/// Throws InvalidArgument on unknown sections or keys, duplicate keys,
/// malformed values or lines outside a section.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Sub-seed for a named consumer (world, data, solver, train).
std::uint64_t sub_seed(const RunConfig& config, std::string_view name);

WorldSpec make_world(const RunConfig& config);
FeedbackOptions feedback_options(const RunConfig& config);
/// Loss spec for `data` built around the world's base policy.
LossSpec make_loss_spec(const RunConfig& config, const WorldSpec& world, const Dataset& data);

}  // namespace proalign
