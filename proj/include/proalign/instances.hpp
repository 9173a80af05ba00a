#pragma once

#include <cstddef>
#include <vector>

#include "proalign/feedback.hpp"
#include "proalign/losses.hpp"
#include "proalign/rng.hpp"
#include "proalign/space.hpp"

namespace proalign {

/// Softmax of N(0, spread^2) log-weights.
Distribution random_distribution(const SpacePtr& space, Rng& rng, double spread = 1.0);

/// p(i > j) uniform on (0, 1), p(j > i) = 1 - p(i > j).
PreferenceMatrix random_preference(const SpacePtr& space, Rng& rng);

/// Random tabular logits, N(0, spread^2).
TabularPolicy random_tabular(const SpacePtr& space, Rng& rng, double spread = 1.0);

/// `n_records` comparisons among the first `n_labeled` responses, winner
/// drawn at random (possibly inconsistent), counts in [1, 3].
PairwiseDataset random_pairwise(const SpacePtr& space, Rng& rng, std::size_t n_labeled, std::size_t n_records);

/// As random_pairwise but every comparison follows a hidden total order of
/// the labeled responses, so the data contain no cycle or contradiction.
PairwiseDataset consistent_pairwise(const SpacePtr& space, Rng& rng, std::size_t n_labeled, std::size_t n_records);

BinaryDataset random_binary(const SpacePtr& space, Rng& rng, std::size_t n_labeled, std::size_t n_records);

/// Groups of `group_size` distinct labeled responses with N(0,1) scores.
ScalarDataset random_scalar(const SpacePtr& space, Rng& rng, std::size_t n_labeled, std::size_t groups,
                            std::size_t group_size);

/// An unpinned PRO spec over H = unobserved responses with mu = mu-bar.
LossSpec pro_spec(const Distribution& ref, const Dataset& data, double beta, double alpha, double eta = 2.0 / 3.0);

/// An eDPO spec over Y with the given mu.
LossSpec edpo_spec(const Distribution& ref, const Dataset& data, const Distribution& mu, double beta, double alpha);

/// Theorem-suite instance: a consistent pairwise dataset over |Y| in [4, 6]
/// with 2..|Y|-1 labeled responses, a random reference and the derived PRO spec.
struct SuiteInstance {
  SpacePtr space;
  Distribution ref;
  PairwiseDataset data;
};
std::vector<SuiteInstance> standard_suite(std::size_t count, std::uint64_t seed);

/// One spec of every loss kind (both PRO-P forms, pinned and unpinned
/// PRO-B / PRO-S, both KTO sign modes on pairwise and binary data) over one
/// random instance on `space`.
std::vector<LossSpec> every_kind_specs(Rng& rng, const SpacePtr& space, const Distribution& ref);

}  // namespace proalign
