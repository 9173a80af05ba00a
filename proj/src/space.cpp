#include "proalign/space.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "proalign/errors.hpp"
#include "proalign/numeric.hpp"

namespace proalign {

ResponseSpace::ResponseSpace(std::vector<std::string> ids) : ids_(std::move(ids)) {
  if (ids_.size() < 2) {
    throw InvalidArgument("ResponseSpace: at least two responses required");
  }
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const auto& id = ids_[i];
    if (id.empty() || std::any_of(id.begin(), id.end(), [](unsigned char c) { return std::isspace(c); })) {
      throw InvalidArgument("ResponseSpace: identifier '" + id + "' is empty or has whitespace");
    }
    if (!index_.emplace(id, i).second) {
      throw InvalidArgument("ResponseSpace: duplicate identifier '" + id + "'");
    }
  }
}

std::size_t ResponseSpace::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw InvalidArgument("ResponseSpace: unknown response '" + id + "'");
  }
  return it->second;
}

SpacePtr make_space(std::vector<std::string> ids) {
  return std::make_shared<const ResponseSpace>(std::move(ids));
}

SpacePtr make_indexed_space(std::size_t n, const std::string& prefix) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return make_space(std::move(ids));
}

bool same_space(const SpacePtr& a, const SpacePtr& b) {
  return a == b || (a && b && *a == *b);
}

Distribution::Distribution(SpacePtr space, std::vector<double> probs,
                           std::vector<double> log_probs, Kind kind)
    : space_(std::move(space)), probs_(std::move(probs)), log_probs_(std::move(log_probs)), kind_(kind) {}

Distribution Distribution::from_probs(SpacePtr space, std::vector<double> probs, Kind kind) {
  if (!space || probs.size() != space->size()) {
    throw InvalidArgument("Distribution: probability vector does not match space size");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw InvalidArgument("Distribution: entries must be finite and non-negative");
    }
    if (kind == Kind::Strict && p <= 0.0) {
      throw InvalidArgument("Distribution: strict distribution requires every entry > 0");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidArgument("Distribution: entries must sum to 1");
  }
  std::vector<double> logs(probs.size());
  std::transform(probs.begin(), probs.end(), logs.begin(), [](double p) {
    return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  });
  return Distribution(std::move(space), std::move(probs), std::move(logs), kind);
}

Distribution Distribution::from_weights(SpacePtr space, std::span<const double> weights, Kind kind) {
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw InvalidArgument("Distribution: weights must be finite and non-negative");
    }
    total += w;
  }
  if (!(total > 0.0)) {
    throw EmptyInput("Distribution: weights sum to zero");
  }
  std::vector<double> probs(weights.begin(), weights.end());
  for (double& p : probs) p /= total;
  return from_probs(std::move(space), std::move(probs), kind);
}

Distribution Distribution::from_log_weights(SpacePtr space, std::span<const double> log_weights) {
  if (!space || log_weights.size() != space->size()) {
    throw InvalidArgument("Distribution: log-weight vector does not match space size");
  }
  for (double v : log_weights) {
    if (!std::isfinite(v)) throw InvalidArgument("Distribution: non-finite log-weight");
  }
  const double lse = log_sum_exp(log_weights);
  std::vector<double> logs(log_weights.size());
  std::vector<double> probs(log_weights.size());
  for (std::size_t i = 0; i < logs.size(); ++i) {
    logs[i] = log_weights[i] - lse;
    probs[i] = std::exp(logs[i]);
    if (!(probs[i] > 0.0)) {
      throw NumericalError("Distribution: probability underflowed to zero");
    }
  }
  return Distribution(std::move(space), std::move(probs), std::move(logs), Kind::Strict);
}

Distribution Distribution::uniform(SpacePtr space) {
  std::vector<double> zeros(space->size(), 0.0);
  return from_log_weights(std::move(space), zeros);
}

std::vector<std::size_t> Distribution::support(double zero_threshold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (probs_[i] > zero_threshold) out.push_back(i);
  }
  return out;
}

bool Distribution::strictly_positive() const {
  return std::all_of(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; });
}

double Distribution::min_prob() const {
  return *std::min_element(probs_.begin(), probs_.end());
}

}  // namespace proalign
