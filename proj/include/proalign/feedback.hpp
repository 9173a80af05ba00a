#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "proalign/space.hpp"

namespace proalign {

/// p(i > j) for every ordered pair: complementary (p_ij + p_ji = 1) with
/// 1/2 on the diagonal.
class PreferenceMatrix {
 public:
  PreferenceMatrix(SpacePtr space, std::vector<double> row_major);
  static PreferenceMatrix indifferent(SpacePtr space);

  const SpacePtr& space() const { return space_; }
  std::size_t size() const { return space_->size(); }
  double operator()(std::size_t i, std::size_t j) const { return p_[i * size() + j]; }

 private:
  SpacePtr space_;
  std::vector<double> p_;
};

struct PairRecord {
  std::size_t winner;
  std::size_t loser;
  std::uint64_t count;
  bool operator==(const PairRecord&) const = default;
};

class PairwiseDataset {
 public:
  PairwiseDataset(SpacePtr space, std::vector<PairRecord> records);
  const SpacePtr& space() const { return space_; }
  const std::vector<PairRecord>& records() const { return records_; }
  std::uint64_t total_count() const;
  bool operator==(const PairwiseDataset& o) const {
    return same_space(space_, o.space_) && records_ == o.records_;
  }

 private:
  SpacePtr space_;
  std::vector<PairRecord> records_;
};

enum class Label { Desired, Undesired };

/// +1/2 for desired, -1/2 for undesired.
double label_value(Label label);

struct BinaryRecord {
  std::size_t response;
  Label label;
  std::uint64_t count;
  bool operator==(const BinaryRecord&) const = default;
};

class BinaryDataset {
 public:
  BinaryDataset(SpacePtr space, std::vector<BinaryRecord> records);
  const SpacePtr& space() const { return space_; }
  const std::vector<BinaryRecord>& records() const { return records_; }
  std::uint64_t total_count() const;
  std::uint64_t class_count(Label label) const;
  bool operator==(const BinaryDataset& o) const {
    return same_space(space_, o.space_) && records_ == o.records_;
  }

 private:
  SpacePtr space_;
  std::vector<BinaryRecord> records_;
};

struct ScalarRecord {
  std::size_t response;
  double score;
  std::uint64_t count;
  bool operator==(const ScalarRecord&) const = default;
};

/// Scalar feedback. Consecutive blocks of `group_size` records form one
/// prompt group (the N responses scored together).
class ScalarDataset {
 public:
  ScalarDataset(SpacePtr space, std::vector<ScalarRecord> records, std::size_t group_size);
  const SpacePtr& space() const { return space_; }
  const std::vector<ScalarRecord>& records() const { return records_; }
  std::size_t group_size() const { return group_size_; }
  std::size_t group_count() const;
  /// Records of group `g`.
  std::span<const ScalarRecord> group(std::size_t g) const;
  std::uint64_t total_count() const;
  bool operator==(const ScalarDataset& o) const {
    return same_space(space_, o.space_) && records_ == o.records_ && group_size_ == o.group_size_;
  }

 private:
  SpacePtr space_;
  std::vector<ScalarRecord> records_;
  std::size_t group_size_;
};

using Dataset = std::variant<PairwiseDataset, BinaryDataset, ScalarDataset>;

const SpacePtr& dataset_space(const Dataset& data);

/// Pointwise learning signal over a space. Entries outside `labeled` are 0.
class ScoreMap {
 public:
  ScoreMap(SpacePtr space, std::vector<double> values, std::vector<bool> labeled);

  const SpacePtr& space() const { return space_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  bool labeled(std::size_t i) const { return labeled_[i]; }

  /// sum_i w_i * s_i
  double weighted_mean(std::span<const double> weights) const;

 private:
  SpacePtr space_;
  std::vector<double> values_;
  std::vector<bool> labeled_;
};

/// Empirical response distribution: each response weighted by the number of
/// times it appears in the dataset. Zeros allowed.
Distribution empirical_response_dist(const Dataset& data);

/// Win fraction for every observed ordered pair; 1/2 for the diagonal and
/// for pairs never compared.
PreferenceMatrix empirical_preference(const PairwiseDataset& data);

/// Empirical score on supp(mu-hat):
///   pairwise:  E_{y'~mu-hat}[p-hat(y > y')] - 1/2
///   pointwise: b-hat(y) - E_{mu-hat}[b-hat]
ScoreMap empirical_score(const Dataset& data);

/// s(y) = E_{y'~mu}[p(y > y')] - 1/2 over every response.
ScoreMap true_score(const PreferenceMatrix& pref, const Distribution& mu);

/// Winner -> desired, loser -> undesired; identical records merged.
BinaryDataset binarize(const PairwiseDataset& data);

}  // namespace proalign
