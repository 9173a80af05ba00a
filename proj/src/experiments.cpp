#include "proalign/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "proalign/errors.hpp"
#include "proalign/numeric.hpp"
#include "proalign/rng.hpp"

namespace proalign {

namespace {

constexpr double kBaseSpread = 0.5;

std::vector<double> draw_rewards(Rng& rng, std::size_t n, double scale) {
  if (!std::isfinite(scale) || scale < 0.0) throw InvalidArgument("gen_world: reward_scale must be finite and >= 0");
  std::vector<double> r(n);
  for (double& x : r) x = scale * rng.normal();
  return r;
}

std::vector<double> draw_params(Rng& rng, std::size_t n) {
  std::vector<double> p(n);
  for (double& x : p) x = kBaseSpread * rng.normal();
  return p;
}

std::size_t sample_from(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Rounding left u above the cumulative total: take the last positive entry.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return probs.size() - 1;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw InvalidArgument(std::string(what) + ": bad number '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw InvalidArgument(std::string(what) + ": bad integer '" + s + "'");
  }
  return std::stoull(s);
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

double weighted_mean(std::span<const double> values, std::span<const double> w) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (w[i] > 0.0) {
      num += w[i] * values[i];
      den += w[i];
    }
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

WorldSpec gen_world(std::uint64_t seed, std::size_t size, double reward_scale) {
  if (size < 2) throw InvalidArgument("gen_world: size must be >= 2");
  Rng rng(seed);
  auto rewards = draw_rewards(rng, size, reward_scale);
  TabularPolicy base(make_indexed_space(size), draw_params(rng, size));
  return WorldSpec{seed, reward_scale, 0, 0, Policy(std::move(base)), std::move(rewards)};
}

WorldSpec gen_world(std::uint64_t seed, std::size_t vocab, std::size_t length, double reward_scale) {
  if (vocab < 2 || length < 1) throw InvalidArgument("gen_world: need vocab >= 2 and length >= 1");
  Rng rng(seed);
  AutoregressivePolicy base(vocab, length, draw_params(rng, AutoregressivePolicy::param_count(vocab, length)));
  auto rewards = draw_rewards(rng, base.space()->size(), reward_scale);
  return WorldSpec{seed, reward_scale, vocab, length, Policy(std::move(base)), std::move(rewards)};
}

PreferenceMatrix true_preferences(const WorldSpec& world) {
  const std::size_t n = world.rewards.size();
  std::vector<double> p(n * n, 0.5);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // The complement of the larger side is exact, so p_ij + p_ji == 1.
      const double d = world.rewards[i] - world.rewards[j];
      const double hi = sigmoid(std::abs(d));
      p[i * n + j] = d >= 0.0 ? hi : 1.0 - hi;
      p[j * n + i] = d >= 0.0 ? 1.0 - hi : hi;
    }
  }
  return PreferenceMatrix(world.space(), std::move(p));
}

double expected_latent_reward(const WorldSpec& world, const Policy& policy) {
  if (!same_space(world.space(), policy.space())) throw InvalidArgument("expected_latent_reward: space mismatch");
  const auto dist = policy_distribution(policy);
  const auto probs = dist.probs();
  double e = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) e += probs[i] * world.rewards[i];
  return e;
}

std::string_view to_string(FeedbackKind kind) {
  switch (kind) {
    case FeedbackKind::Pairwise: return "pairwise";
    case FeedbackKind::Binary: return "binary";
    case FeedbackKind::Scalar: return "scalar";
  }
  return "?";
}

FeedbackKind parse_feedback_kind(std::string_view name) {
  for (auto k : {FeedbackKind::Pairwise, FeedbackKind::Binary, FeedbackKind::Scalar}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown feedback kind '" + std::string(name) + "'");
}

Dataset sample_feedback(const WorldSpec& world, const FeedbackOptions& opts, std::uint64_t seed) {
  if (opts.n_records < 1) throw InvalidArgument("sample_feedback: n_records must be >= 1");
  if (opts.imbalance && opts.kind != FeedbackKind::Binary) {
    throw InvalidArgument("sample_feedback: imbalance applies to binary feedback only");
  }
  if (opts.imbalance && !(opts.imbalance->keep > 0.0 && opts.imbalance->keep <= 1.0)) {
    throw InvalidArgument("sample_feedback: keep fraction must lie in (0, 1]");
  }
  Rng rng(seed);
  const auto space = world.space();
  const auto mu = world.mu();
  const auto probs = mu.probs();

  if (opts.kind == FeedbackKind::Scalar) {
    if (opts.group_size < 1 || opts.group_size > space->size()) {
      throw InvalidArgument("sample_feedback: group size must be in [1, |Y|]");
    }
    const double noise = opts.noise < 0.0 ? 0.1 * world.reward_scale : opts.noise;
    std::vector<ScalarRecord> recs;
    for (std::size_t g = 0; g < opts.n_records; ++g) {
      std::vector<std::size_t> picked;
      while (picked.size() < opts.group_size) {
        const std::size_t y = sample_from(probs, rng);
        if (std::find(picked.begin(), picked.end(), y) == picked.end()) picked.push_back(y);
      }
      for (std::size_t y : picked) recs.push_back({y, world.rewards[y] + noise * rng.normal(), 1});
    }
    return ScalarDataset(space, std::move(recs), opts.group_size);
  }

  const auto pref = true_preferences(world);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 0; k < opts.n_records; ++k) {
    const std::size_t a = sample_from(probs, rng);
    std::size_t b = a;
    while (b == a) b = sample_from(probs, rng);
    if (rng.bernoulli(pref(a, b))) {
      pairs.emplace_back(a, b);
    } else {
      pairs.emplace_back(b, a);
    }
  }

  if (opts.kind == FeedbackKind::Pairwise) {
    std::vector<PairRecord> recs;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> at;
    for (const auto& [w, l] : pairs) {
      auto [it, fresh] = at.emplace(std::make_pair(w, l), recs.size());
      if (fresh) {
        recs.push_back({w, l, 1});
      } else {
        ++recs[it->second].count;
      }
    }
    return PairwiseDataset(space, std::move(recs));
  }

  struct Unit {
    std::size_t y;
    Label label;
  };
  std::vector<Unit> units;
  for (const auto& [w, l] : pairs) {
    units.push_back({w, Label::Desired});
    units.push_back({l, Label::Undesired});
  }
  std::vector<bool> kept(units.size(), true);
  if (opts.imbalance) {
    std::vector<std::size_t> cls;
    for (std::size_t i = 0; i < units.size(); ++i) {
      if (units[i].label == opts.imbalance->label) cls.push_back(i);
    }
    const auto keep = static_cast<std::size_t>(std::lround(opts.imbalance->keep * static_cast<double>(cls.size())));
    if (keep == 0) throw EmptyClass("sample_feedback: imbalance removed every record of a class");
    for (std::size_t i = cls.size(); i-- > 1;) std::swap(cls[i], cls[rng.index(i + 1)]);
    for (std::size_t i = keep; i < cls.size(); ++i) kept[cls[i]] = false;
  }
  std::vector<BinaryRecord> recs;
  std::map<std::pair<std::size_t, int>, std::size_t> at;
  for (std::size_t i = 0; i < units.size(); ++i) {
    if (!kept[i]) continue;
    const auto key = std::make_pair(units[i].y, static_cast<int>(units[i].label));
    auto [it, fresh] = at.emplace(key, recs.size());
    if (fresh) {
      recs.push_back({units[i].y, units[i].label, 1});
    } else {
      ++recs[it->second].count;
    }
  }
  return BinaryDataset(space, std::move(recs));
}

TrackedSets tracked_sets(const Dataset& data) {
  const auto& space = dataset_space(data);
  const std::size_t n = space->size();
  TrackedSets t;
  t.preferred.assign(n, 0.0);
  t.dispreferred.assign(n, 0.0);
  t.desired.assign(n, 0.0);
  t.undesired.assign(n, 0.0);
  if (const auto* pw = std::get_if<PairwiseDataset>(&data)) {
    for (const auto& r : pw->records()) {
      t.preferred[r.winner] += static_cast<double>(r.count);
      t.dispreferred[r.loser] += static_cast<double>(r.count);
    }
    t.desired = t.preferred;
    t.undesired = t.dispreferred;
  } else if (const auto* bd = std::get_if<BinaryDataset>(&data)) {
    for (const auto& r : bd->records()) {
      (r.label == Label::Desired ? t.desired : t.undesired)[r.response] += static_cast<double>(r.count);
    }
    t.preferred = t.desired;
    t.dispreferred = t.undesired;
  } else {
    const auto& sd = std::get<ScalarDataset>(data);
    for (std::size_t g = 0; g < sd.group_count(); ++g) {
      const auto grp = sd.group(g);
      double mean = 0.0;
      for (const auto& r : grp) mean += r.score;
      mean /= static_cast<double>(grp.size());
      auto [lo, hi] = std::minmax_element(grp.begin(), grp.end(),
                                          [](const auto& a, const auto& b) { return a.score < b.score; });
      t.preferred[hi->response] += static_cast<double>(hi->count);
      t.dispreferred[lo->response] += static_cast<double>(lo->count);
      for (const auto& r : grp) {
        (r.score >= mean ? t.desired : t.undesired)[r.response] += static_cast<double>(r.count);
      }
    }
  }
  const auto mu_hat = empirical_response_dist(data);
  t.hyper.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (mu_hat.prob(i) > 0.0) {
      t.responses.push_back(i);
    } else {
      t.hyper[i] = true;
    }
  }
  return t;
}

namespace {

TrajectoryRecord make_record(std::size_t step, const LossValue& lv, const Policy& policy, const LossSpec& spec,
                             const WorldSpec& world, const TrackedSets& sets) {
  const auto logp = policy.log_probs();
  const auto ref = spec.ref->log_probs();
  std::vector<double> r(logp.size());
  for (std::size_t i = 0; i < logp.size(); ++i) r[i] = implicit_reward(logp[i], ref[i], spec.beta);
  TrajectoryRecord rec;
  rec.step = step;
  rec.loss = lv.value;
  double g2 = 0.0;
  for (double g : lv.gradient) g2 += g * g;
  rec.grad_norm = std::sqrt(g2);
  rec.mean_logp_preferred = weighted_mean(logp, sets.preferred);
  rec.mean_logp_dispreferred = weighted_mean(logp, sets.dispreferred);
  rec.mean_logp_desired = weighted_mean(logp, sets.desired);
  rec.mean_logp_undesired = weighted_mean(logp, sets.undesired);
  rec.mean_reward_preferred = weighted_mean(r, sets.preferred);
  rec.mean_reward_dispreferred = weighted_mean(r, sets.dispreferred);
  double hm = 0.0, er = 0.0;
  for (std::size_t i = 0; i < logp.size(); ++i) {
    const double p = std::exp(logp[i]);
    if (sets.hyper[i]) hm += p;
    er += p * world.rewards[i];
  }
  rec.hyper_mass = hm;
  rec.expected_latent_reward = er;
  for (std::size_t y : sets.responses) rec.rewards.push_back(r[y]);
  return rec;
}

bool finite_record(const TrajectoryRecord& r) {
  for (double x : {r.loss, r.grad_norm, r.mean_logp_preferred, r.mean_logp_dispreferred, r.mean_logp_desired,
                   r.mean_logp_undesired, r.mean_reward_preferred, r.mean_reward_dispreferred, r.hyper_mass,
                   r.expected_latent_reward}) {
    if (!std::isfinite(x)) return false;
  }
  return std::all_of(r.rewards.begin(), r.rewards.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

TrainResult train(const Policy& init, const LossSpec& spec, const WorldSpec& world, std::size_t steps, double lr,
                  std::uint64_t seed) {
  if (steps < 1) throw InvalidArgument("train: steps must be >= 1");
  if (!std::isfinite(lr) || lr < 0.0) throw InvalidArgument("train: lr must be finite and >= 0");
  if (!spec.data) throw InvalidArgument("train: the loss spec carries no dataset");
  if (!spec.ref) throw InvalidArgument("train: the loss spec carries no reference");
  if (!same_space(init.space(), world.space())) throw InvalidArgument("train: policy / world space mismatch");
  const auto sets = tracked_sets(*spec.data);
  Trajectory traj;
  traj.tracked = sets.responses;
  traj.seed = seed;
  Policy policy = init;
  std::vector<double> params(init.params().begin(), init.params().end());
  for (std::size_t step = 0; step <= steps; ++step) {
    LossValue lv;
    try {
      lv = evaluate(spec, policy);
    } catch (const NumericalError&) {
      traj.diverged = true;
      break;
    }
    auto rec = make_record(step, lv, policy, spec, world, sets);
    if (!finite_record(rec)) {
      traj.diverged = true;
      break;
    }
    traj.records.push_back(std::move(rec));
    if (step == steps) break;
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * lv.gradient[i];
    policy = policy.with_params(params);
  }
  return TrainResult{std::move(traj), std::move(policy)};
}

Diagnostics diagnostics(const Trajectory& traj) {
  if (traj.records.empty()) throw EmptyInput("diagnostics: empty trajectory");
  Diagnostics d;
  d.steps = traj.records.back().step;
  d.diverged = traj.diverged;
  auto series = [&](double TrajectoryRecord::*field) {
    SeriesSummary s;
    s.initial = traj.records.front().*field;
    s.final = traj.records.back().*field;
    s.min = s.max = s.initial;
    for (const auto& r : traj.records) {
      s.min = std::min(s.min, r.*field);
      s.max = std::max(s.max, r.*field);
    }
    return s;
  };
  d.loss = series(&TrajectoryRecord::loss);
  d.logp_preferred = series(&TrajectoryRecord::mean_logp_preferred);
  d.logp_dispreferred = series(&TrajectoryRecord::mean_logp_dispreferred);
  d.reward_preferred = series(&TrajectoryRecord::mean_reward_preferred);
  d.reward_dispreferred = series(&TrajectoryRecord::mean_reward_dispreferred);
  d.hyper_mass = series(&TrajectoryRecord::hyper_mass);
  d.expected_latent_reward = series(&TrajectoryRecord::expected_latent_reward);
  // Last quartile: records at step >= 3/4 of the final step.
  std::size_t in = 0, neg = 0;
  for (const auto& r : traj.records) {
    if (4 * r.step < 3 * d.steps) continue;
    ++in;
    if (r.mean_reward_preferred < 0.0) ++neg;
  }
  d.last_quartile_negative_reward_fraction = static_cast<double>(neg) / static_cast<double>(in);
  return d;
}

const std::vector<std::string> kTrajectoryColumns = {
    "step",
    "loss",
    "grad_norm",
    "mean_logp_preferred",
    "mean_logp_dispreferred",
    "mean_logp_desired",
    "mean_logp_undesired",
    "mean_reward_preferred",
    "mean_reward_dispreferred",
    "hyper_mass",
    "expected_latent_reward",
};

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  for (std::size_t i = 0; i < kTrajectoryColumns.size(); ++i) os << (i ? "," : "") << kTrajectoryColumns[i];
  os << '\n';
  for (const auto& r : traj.records) {
    os << r.step;
    for (double x : {r.loss, r.grad_norm, r.mean_logp_preferred, r.mean_logp_dispreferred, r.mean_logp_desired,
                     r.mean_logp_undesired, r.mean_reward_preferred, r.mean_reward_dispreferred, r.hyper_mass,
                     r.expected_latent_reward}) {
      os << ',' << fmt(x);
    }
    os << '\n';
  }
}

void write_rewards_csv(std::ostream& os, const Trajectory& traj, const ResponseSpace& space) {
  os << "step";
  for (std::size_t y : traj.tracked) os << ',' << space.id(y);
  os << '\n';
  for (const auto& r : traj.records) {
    os << r.step;
    for (double x : r.rewards) os << ',' << fmt(x);
    os << '\n';
  }
}

std::string diagnostics_json(const Diagnostics& d) {
  auto s = [](const SeriesSummary& x) {
    return nlohmann::ordered_json{
        {"initial", x.initial}, {"final", x.final}, {"min", x.min}, {"max", x.max}, {"delta", x.delta()}};
  };
  nlohmann::ordered_json j;
  j["steps"] = d.steps;
  j["diverged"] = d.diverged;
  j["loss"] = s(d.loss);
  j["mean_logp_preferred"] = s(d.logp_preferred);
  j["mean_logp_dispreferred"] = s(d.logp_dispreferred);
  j["mean_reward_preferred"] = s(d.reward_preferred);
  j["mean_reward_dispreferred"] = s(d.reward_dispreferred);
  j["hyper_mass"] = s(d.hyper_mass);
  j["expected_latent_reward"] = s(d.expected_latent_reward);
  j["last_quartile_negative_reward_fraction"] = d.last_quartile_negative_reward_fraction;
  return j.dump(2) + "\n";
}

// World file:
//   world 1
//   seed <u64>
//   reward_scale <x>
//   shape <vocab> <length>        (0 0 for tabular)
//   params <x> <x> ...
//   response <id> <reward>        (one per response, space order)
void write_world(std::ostream& os, const WorldSpec& world) {
  os << "world 1\n";
  os << "seed " << world.seed << '\n';
  os << "reward_scale " << fmt(world.reward_scale) << '\n';
  os << "shape " << world.vocab << ' ' << world.length << '\n';
  os << "params";
  for (double p : world.base.params()) os << ' ' << fmt(p);
  os << '\n';
  for (std::size_t i = 0; i < world.rewards.size(); ++i) {
    os << "response " << world.space()->id(i) << ' ' << fmt(world.rewards[i]) << '\n';
  }
}

WorldSpec read_world(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || split(line) != std::vector<std::string>{"world", "1"}) {
    throw InvalidArgument("read_world: missing 'world 1' header");
  }
  std::optional<std::uint64_t> seed;
  std::optional<double> scale;
  std::optional<std::pair<std::size_t, std::size_t>> shape;
  std::optional<std::vector<double>> params;
  std::vector<std::string> ids;
  std::vector<double> rewards;
  while (std::getline(is, line)) {
    const auto tok = split(line);
    if (tok.empty()) continue;
    if (tok[0] == "seed" && tok.size() == 2) {
      seed = parse_u64(tok[1], "read_world");
    } else if (tok[0] == "reward_scale" && tok.size() == 2) {
      scale = parse_double(tok[1], "read_world");
    } else if (tok[0] == "shape" && tok.size() == 3) {
      shape = {parse_u64(tok[1], "read_world"), parse_u64(tok[2], "read_world")};
    } else if (tok[0] == "params") {
      params.emplace();
      for (std::size_t i = 1; i < tok.size(); ++i) params->push_back(parse_double(tok[i], "read_world"));
    } else if (tok[0] == "response" && tok.size() == 3) {
      ids.push_back(tok[1]);
      rewards.push_back(parse_double(tok[2], "read_world"));
    } else {
      throw InvalidArgument("read_world: unexpected line '" + line + "'");
    }
  }
  if (!seed || !scale || !shape || !params) throw InvalidArgument("read_world: incomplete world file");
  for (double r : rewards) {
    if (!std::isfinite(r)) throw InvalidArgument("read_world: non-finite reward");
  }
  const auto [vocab, length] = *shape;
  if (length == 0) {
    TabularPolicy base(make_space(ids), *params);
    return WorldSpec{*seed, *scale, 0, 0, Policy(std::move(base)), std::move(rewards)};
  }
  AutoregressivePolicy base(vocab, length, *params);
  if (base.space()->ids() != ids) throw InvalidArgument("read_world: response ids do not match the sequence space");
  return WorldSpec{*seed, *scale, vocab, length, Policy(std::move(base)), std::move(rewards)};
}

// Dataset file:
//   dataset 1
//   kind pairwise|binary|scalar
//   group_size <n>                (scalar only)
//   pair <winner> <loser> <count>
//   bin <id> desired|undesired <count>
//   scalar <id> <score> <count>
void write_dataset(std::ostream& os, const Dataset& data) {
  const auto& space = *dataset_space(data);
  os << "dataset 1\n";
  if (const auto* pw = std::get_if<PairwiseDataset>(&data)) {
    os << "kind pairwise\n";
    for (const auto& r : pw->records()) {
      os << "pair " << space.id(r.winner) << ' ' << space.id(r.loser) << ' ' << r.count << '\n';
    }
  } else if (const auto* bd = std::get_if<BinaryDataset>(&data)) {
    os << "kind binary\n";
    for (const auto& r : bd->records()) {
      os << "bin " << space.id(r.response) << ' ' << (r.label == Label::Desired ? "desired" : "undesired") << ' '
         << r.count << '\n';
    }
  } else {
    const auto& sd = std::get<ScalarDataset>(data);
    os << "kind scalar\n";
    os << "group_size " << sd.group_size() << '\n';
    for (const auto& r : sd.records()) {
      os << "scalar " << space.id(r.response) << ' ' << fmt(r.score) << ' ' << r.count << '\n';
    }
  }
}

Dataset read_dataset(std::istream& is, const SpacePtr& space) {
  std::string line;
  if (!std::getline(is, line) || split(line) != std::vector<std::string>{"dataset", "1"}) {
    throw InvalidArgument("read_dataset: missing 'dataset 1' header");
  }
  std::optional<FeedbackKind> kind;
  std::size_t group_size = 0;
  std::vector<PairRecord> pairs;
  std::vector<BinaryRecord> bins;
  std::vector<ScalarRecord> scalars;
  while (std::getline(is, line)) {
    const auto tok = split(line);
    if (tok.empty()) continue;
    if (tok[0] == "kind" && tok.size() == 2) {
      kind = parse_feedback_kind(tok[1]);
    } else if (tok[0] == "group_size" && tok.size() == 2) {
      group_size = parse_u64(tok[1], "read_dataset");
    } else if (tok[0] == "pair" && tok.size() == 4) {
      pairs.push_back({space->index_of(tok[1]), space->index_of(tok[2]), parse_u64(tok[3], "read_dataset")});
    } else if (tok[0] == "bin" && tok.size() == 4) {
      if (tok[2] != "desired" && tok[2] != "undesired") throw InvalidArgument("read_dataset: bad label '" + tok[2] + "'");
      bins.push_back({space->index_of(tok[1]), tok[2] == "desired" ? Label::Desired : Label::Undesired,
                      parse_u64(tok[3], "read_dataset")});
    } else if (tok[0] == "scalar" && tok.size() == 4) {
      scalars.push_back(
          {space->index_of(tok[1]), parse_double(tok[2], "read_dataset"), parse_u64(tok[3], "read_dataset")});
    } else {
      throw InvalidArgument("read_dataset: unexpected line '" + line + "'");
    }
  }
  if (!kind) throw InvalidArgument("read_dataset: missing kind");
  const bool mixed = (*kind != FeedbackKind::Pairwise && !pairs.empty()) ||
                     (*kind != FeedbackKind::Binary && !bins.empty()) ||
                     (*kind != FeedbackKind::Scalar && !scalars.empty());
  if (mixed) throw InvalidArgument("read_dataset: records do not match the declared kind");
  switch (*kind) {
    case FeedbackKind::Pairwise: return PairwiseDataset(space, std::move(pairs));
    case FeedbackKind::Binary: return BinaryDataset(space, std::move(bins));
    case FeedbackKind::Scalar: return ScalarDataset(space, std::move(scalars), group_size);
  }
  throw InvalidArgument("read_dataset: unreachable");
}

}  // namespace proalign
