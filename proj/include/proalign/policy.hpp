#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "proalign/space.hpp"

namespace proalign {

/// Softmax over one free logit per response.
class TabularPolicy {
 public:
  TabularPolicy(SpacePtr space, std::vector<double> logits);

  static TabularPolicy from_distribution(const Distribution& dist);

  const SpacePtr& space() const { return space_; }
  std::span<const double> params() const { return logits_; }
  std::vector<double> log_probs() const;
  /// Pulls d(loss)/d(log p) back onto the logits.
  std::vector<double> backward(std::span<const double> dlogp) const;
  TabularPolicy with_params(std::span<const double> params) const;

 private:
  SpacePtr space_;
  std::vector<double> logits_;
};

/// Fixed-length token sequences generated left to right. Position 0 has a
/// table of `vocab` logits; every later position has a `vocab x vocab` table
/// indexed by the previous token. The induced space is every vocab^length
/// sequence, enumerated lexicographically with position 0 most significant.
class AutoregressivePolicy {
 public:
  static constexpr std::size_t kMaxVocab = 8;
  static constexpr std::size_t kMaxLength = 5;

  AutoregressivePolicy(std::size_t vocab, std::size_t length, std::vector<double> params);
  static AutoregressivePolicy uniform(std::size_t vocab, std::size_t length);

  std::size_t vocab() const { return vocab_; }
  std::size_t length() const { return length_; }
  const SpacePtr& space() const { return space_; }
  std::span<const double> params() const { return params_; }
  static std::size_t param_count(std::size_t vocab, std::size_t length);

  /// Token at `position` of the sequence with enumeration index `seq`.
  std::size_t token(std::size_t seq, std::size_t position) const;

  std::vector<double> log_probs() const;
  std::vector<double> backward(std::span<const double> dlogp) const;
  AutoregressivePolicy with_params(std::span<const double> params) const;

 private:
  std::size_t row_offset(std::size_t position, std::size_t prev) const;
  std::vector<double> row_log_softmax() const;

  std::size_t vocab_;
  std::size_t length_;
  SpacePtr space_;
  std::vector<double> params_;
};

/// Either policy family behind one value type.
class Policy {
 public:
  Policy(TabularPolicy p) : impl_(std::move(p)) {}
  Policy(AutoregressivePolicy p) : impl_(std::move(p)) {}

  const SpacePtr& space() const;
  std::size_t size() const { return space()->size(); }
  std::span<const double> params() const;
  std::size_t param_count() const { return params().size(); }

  std::vector<double> log_probs() const;
  std::vector<double> backward(std::span<const double> dlogp) const;
  Policy with_params(std::span<const double> params) const;

  bool is_tabular() const { return std::holds_alternative<TabularPolicy>(impl_); }
  const TabularPolicy* as_tabular() const { return std::get_if<TabularPolicy>(&impl_); }
  const AutoregressivePolicy* as_autoregressive() const {
    return std::get_if<AutoregressivePolicy>(&impl_);
  }

 private:
  std::variant<TabularPolicy, AutoregressivePolicy> impl_;
};

/// Full probability vector over the policy's space (enumerates every
/// sequence for autoregressive policies).
Distribution policy_distribution(const Policy& policy);

}  // namespace proalign
