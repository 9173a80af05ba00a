#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace proalign {

/// Finite, ordered universe of responses. Identifiers are unique and contain
/// no whitespace; enumeration order is the construction order.
class ResponseSpace {
 public:
  explicit ResponseSpace(std::vector<std::string> ids);

  std::size_t size() const { return ids_.size(); }
  const std::string& id(std::size_t i) const { return ids_.at(i); }
  const std::vector<std::string>& ids() const { return ids_; }

  /// Index of an identifier; throws InvalidArgument when unknown.
  std::size_t index_of(const std::string& id) const;
  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  bool operator==(const ResponseSpace& other) const { return ids_ == other.ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
};

using SpacePtr = std::shared_ptr<const ResponseSpace>;

SpacePtr make_space(std::vector<std::string> ids);

/// Space of `n` responses named y0, y1, ...
SpacePtr make_indexed_space(std::size_t n, const std::string& prefix = "y");

bool same_space(const SpacePtr& a, const SpacePtr& b);

/// Probability vector over a ResponseSpace, carried alongside its logarithm.
///
/// Strict distributions (policies, references, mu) are positive everywhere.
/// Empirical ones (mu-hat) may hold exact zeros; their log entry is -inf.
class Distribution {
 public:
  enum class Kind { Strict, Empirical };

  static Distribution from_probs(SpacePtr space, std::vector<double> probs,
                                 Kind kind = Kind::Strict);
  /// Normalizes non-negative weights before validation.
  static Distribution from_weights(SpacePtr space, std::span<const double> weights,
                                   Kind kind = Kind::Strict);
  /// Softmax of arbitrary finite log-weights (always strict).
  static Distribution from_log_weights(SpacePtr space, std::span<const double> log_weights);
  static Distribution uniform(SpacePtr space);

  const SpacePtr& space() const { return space_; }
  std::size_t size() const { return probs_.size(); }
  Kind kind() const { return kind_; }

  double prob(std::size_t i) const { return probs_.at(i); }
  double log_prob(std::size_t i) const { return log_probs_.at(i); }
  std::span<const double> probs() const { return probs_; }
  std::span<const double> log_probs() const { return log_probs_; }

  /// Indices with probability strictly above `zero_threshold`.
  std::vector<std::size_t> support(double zero_threshold = 0.0) const;
  bool strictly_positive() const;
  double min_prob() const;

 private:
  Distribution(SpacePtr space, std::vector<double> probs, std::vector<double> log_probs,
               Kind kind);

  SpacePtr space_;
  std::vector<double> probs_;
  std::vector<double> log_probs_;
  Kind kind_;
};

}  // namespace proalign
