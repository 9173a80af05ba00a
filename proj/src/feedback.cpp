#include "proalign/feedback.hpp"

#include <cmath>
#include <map>
#include <tuple>

#include "proalign/errors.hpp"

namespace proalign {

PreferenceMatrix::PreferenceMatrix(SpacePtr space, std::vector<double> row_major)
    : space_(std::move(space)), p_(std::move(row_major)) {
  const std::size_t n = space_->size();
  if (p_.size() != n * n) throw InvalidArgument("PreferenceMatrix: expected n*n entries");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(p_[i * n + i] - 0.5) > 1e-12) {
      throw InvalidArgument("PreferenceMatrix: diagonal must be 1/2");
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double v = p_[i * n + j];
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("PreferenceMatrix: entries must lie in [0,1]");
      if (std::abs(v + p_[j * n + i] - 1.0) > 1e-12) {
        throw InvalidArgument("PreferenceMatrix: p(i>j) + p(j>i) must equal 1");
      }
    }
  }
}

PreferenceMatrix PreferenceMatrix::indifferent(SpacePtr space) {
  const std::size_t n = space->size();
  return PreferenceMatrix(std::move(space), std::vector<double>(n * n, 0.5));
}

PairwiseDataset::PairwiseDataset(SpacePtr space, std::vector<PairRecord> records)
    : space_(std::move(space)), records_(std::move(records)) {
  for (const auto& r : records_) {
    if (r.winner >= space_->size() || r.loser >= space_->size()) {
      throw InvalidArgument("PairwiseDataset: response index out of range");
    }
    if (r.winner == r.loser) throw InvalidArgument("PairwiseDataset: winner equals loser");
    if (r.count == 0) throw InvalidArgument("PairwiseDataset: counts must be positive");
  }
}

std::uint64_t PairwiseDataset::total_count() const {
  std::uint64_t n = 0;
  for (const auto& r : records_) n += r.count;
  return n;
}

double label_value(Label label) { return label == Label::Desired ? 0.5 : -0.5; }

BinaryDataset::BinaryDataset(SpacePtr space, std::vector<BinaryRecord> records)
    : space_(std::move(space)), records_(std::move(records)) {
  for (const auto& r : records_) {
    if (r.response >= space_->size()) throw InvalidArgument("BinaryDataset: response index out of range");
    if (r.count == 0) throw InvalidArgument("BinaryDataset: counts must be positive");
  }
}

std::uint64_t BinaryDataset::total_count() const {
  std::uint64_t n = 0;
  for (const auto& r : records_) n += r.count;
  return n;
}

std::uint64_t BinaryDataset::class_count(Label label) const {
  std::uint64_t n = 0;
  for (const auto& r : records_) {
    if (r.label == label) n += r.count;
  }
  return n;
}

ScalarDataset::ScalarDataset(SpacePtr space, std::vector<ScalarRecord> records, std::size_t group_size)
    : space_(std::move(space)), records_(std::move(records)), group_size_(group_size) {
  if (group_size_ == 0) throw InvalidArgument("ScalarDataset: group size must be positive");
  if (records_.size() % group_size_ != 0) {
    throw InvalidArgument("ScalarDataset: record count is not a multiple of the group size");
  }
  for (const auto& r : records_) {
    if (r.response >= space_->size()) throw InvalidArgument("ScalarDataset: response index out of range");
    if (!std::isfinite(r.score)) throw InvalidArgument("ScalarDataset: scores must be finite");
    if (r.count == 0) throw InvalidArgument("ScalarDataset: counts must be positive");
  }
}

std::size_t ScalarDataset::group_count() const { return records_.size() / group_size_; }

std::span<const ScalarRecord> ScalarDataset::group(std::size_t g) const {
  return std::span<const ScalarRecord>(records_).subspan(g * group_size_, group_size_);
}

std::uint64_t ScalarDataset::total_count() const {
  std::uint64_t n = 0;
  for (const auto& r : records_) n += r.count;
  return n;
}

const SpacePtr& dataset_space(const Dataset& data) {
  return std::visit([](const auto& d) -> const SpacePtr& { return d.space(); }, data);
}

ScoreMap::ScoreMap(SpacePtr space, std::vector<double> values, std::vector<bool> labeled)
    : space_(std::move(space)), values_(std::move(values)), labeled_(std::move(labeled)) {
  if (values_.size() != space_->size() || labeled_.size() != space_->size()) {
    throw InvalidArgument("ScoreMap: size does not match space");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw InvalidArgument("ScoreMap: non-finite score");
    if (!labeled_[i] && values_[i] != 0.0) {
      throw InvalidArgument("ScoreMap: unlabeled responses must score 0");
    }
  }
}

double ScoreMap::weighted_mean(std::span<const double> weights) const {
  if (weights.size() != values_.size()) throw InvalidArgument("ScoreMap: weight size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) m += weights[i] * values_[i];
  return m;
}

namespace {

std::vector<double> appearance_counts(const Dataset& data) {
  const std::size_t n = dataset_space(data)->size();
  std::vector<double> counts(n, 0.0);
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        for (const auto& r : d.records()) {
          if constexpr (std::is_same_v<T, PairwiseDataset>) {
            counts[r.winner] += static_cast<double>(r.count);
            counts[r.loser] += static_cast<double>(r.count);
          } else {
            counts[r.response] += static_cast<double>(r.count);
          }
        }
      },
      data);
  return counts;
}

void require_nonempty(const Dataset& data) {
  const bool empty = std::visit([](const auto& d) { return d.records().empty(); }, data);
  if (empty) throw EmptyInput("dataset has no records");
}

}  // namespace

Distribution empirical_response_dist(const Dataset& data) {
  require_nonempty(data);
  return Distribution::from_weights(dataset_space(data), appearance_counts(data),
                                    Distribution::Kind::Empirical);
}

PreferenceMatrix empirical_preference(const PairwiseDataset& data) {
  const std::size_t n = data.space()->size();
  std::vector<double> wins(n * n, 0.0);
  for (const auto& r : data.records()) wins[r.winner * n + r.loser] += static_cast<double>(r.count);
  std::vector<double> p(n * n, 0.5);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double total = wins[i * n + j] + wins[j * n + i];
      if (total > 0.0) p[i * n + j] = wins[i * n + j] / total;
    }
  }
  // Force exact complementarity after division.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) p[j * n + i] = 1.0 - p[i * n + j];
  }
  return PreferenceMatrix(data.space(), std::move(p));
}

ScoreMap empirical_score(const Dataset& data) {
  const Distribution mu_hat = empirical_response_dist(data);
  const auto& space = mu_hat.space();
  const std::size_t n = space->size();
  std::vector<bool> labeled(n, false);
  for (std::size_t i : mu_hat.support()) labeled[i] = true;
  std::vector<double> s(n, 0.0);

  if (const auto* pairs = std::get_if<PairwiseDataset>(&data)) {
    const PreferenceMatrix p_hat = empirical_preference(*pairs);
    for (std::size_t y = 0; y < n; ++y) {
      if (!labeled[y]) continue;
      double e = 0.0;
      for (std::size_t z = 0; z < n; ++z) e += mu_hat.prob(z) * p_hat(y, z);
      s[y] = e - 0.5;
    }
    return ScoreMap(space, std::move(s), std::move(labeled));
  }

  // Pointwise: b-hat is the count-weighted mean label or score per response.
  std::vector<double> sum(n, 0.0);
  std::vector<double> weight(n, 0.0);
  if (const auto* bin = std::get_if<BinaryDataset>(&data)) {
    for (const auto& r : bin->records()) {
      sum[r.response] += label_value(r.label) * static_cast<double>(r.count);
      weight[r.response] += static_cast<double>(r.count);
    }
  } else {
    for (const auto& r : std::get<ScalarDataset>(data).records()) {
      sum[r.response] += r.score * static_cast<double>(r.count);
      weight[r.response] += static_cast<double>(r.count);
    }
  }
  double mean = 0.0;
  for (std::size_t y = 0; y < n; ++y) {
    if (labeled[y]) mean += mu_hat.prob(y) * (sum[y] / weight[y]);
  }
  for (std::size_t y = 0; y < n; ++y) {
    if (labeled[y]) s[y] = sum[y] / weight[y] - mean;
  }
  return ScoreMap(space, std::move(s), std::move(labeled));
}

ScoreMap true_score(const PreferenceMatrix& pref, const Distribution& mu) {
  if (!same_space(pref.space(), mu.space())) {
    throw InvalidArgument("true_score: preference and mu live on different spaces");
  }
  if (!mu.strictly_positive()) throw InvalidArgument("true_score: mu must be strictly positive");
  const std::size_t n = pref.size();
  std::vector<double> s(n, 0.0);
  for (std::size_t y = 0; y < n; ++y) {
    double e = 0.0;
    for (std::size_t z = 0; z < n; ++z) e += mu.prob(z) * pref(y, z);
    s[y] = e - 0.5;
  }
  return ScoreMap(pref.space(), std::move(s), std::vector<bool>(n, true));
}

BinaryDataset binarize(const PairwiseDataset& data) {
  std::map<std::tuple<std::size_t, int>, std::uint64_t> merged;
  for (const auto& r : data.records()) {
    merged[{r.winner, 0}] += r.count;
    merged[{r.loser, 1}] += r.count;
  }
  std::vector<BinaryRecord> out;
  out.reserve(merged.size());
  for (const auto& [key, count] : merged) {
    out.push_back({std::get<0>(key), std::get<1>(key) == 0 ? Label::Desired : Label::Undesired, count});
  }
  return BinaryDataset(data.space(), std::move(out));
}

}  // namespace proalign
