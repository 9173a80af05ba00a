#include "proalign/instances.hpp"

#include <algorithm>

#include "proalign/errors.hpp"
#include "proalign/hyper.hpp"

namespace proalign {

Distribution random_distribution(const SpacePtr& space, Rng& rng, double spread) {
  std::vector<double> lw(space->size());
  for (double& x : lw) x = spread * rng.normal();
  return Distribution::from_log_weights(space, lw);
}

PreferenceMatrix random_preference(const SpacePtr& space, Rng& rng) {
  const std::size_t n = space->size();
  std::vector<double> p(n * n, 0.5);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = rng.uniform();
      p[i * n + j] = v;
      p[j * n + i] = 1.0 - v;
    }
  }
  return PreferenceMatrix(space, p);
}

TabularPolicy random_tabular(const SpacePtr& space, Rng& rng, double spread) {
  std::vector<double> x(space->size());
  for (double& v : x) v = spread * rng.normal();
  return TabularPolicy(space, x);
}

namespace {

std::vector<std::size_t> pick_labeled(const SpacePtr& space, Rng& rng, std::size_t n_labeled) {
  if (n_labeled < 2 || n_labeled > space->size()) throw InvalidArgument("instances: bad labeled count");
  std::vector<std::size_t> idx(space->size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[rng.index(i + 1)]);
  idx.resize(n_labeled);
  return idx;
}

PairwiseDataset pairwise(const SpacePtr& space, Rng& rng, std::size_t n_labeled, std::size_t n_records,
                         bool consistent) {
  const auto labeled = pick_labeled(space, rng, n_labeled);
  // labeled[k] is ranked k-th best under the hidden order.
  std::vector<PairRecord> recs;
  // Every labeled response appears at least once.
  for (std::size_t k = 0; k < n_records || k + 1 < n_labeled; ++k) {
    std::size_t a = k + 1 < n_labeled ? k : rng.index(n_labeled);
    std::size_t b = k + 1 < n_labeled ? k + 1 : rng.index(n_labeled - 1);
    if (k + 1 >= n_labeled && b >= a) ++b;
    if (consistent ? a > b : rng.bernoulli(0.5)) std::swap(a, b);
    recs.push_back({labeled[a], labeled[b], 1 + rng.index(3)});
  }
  return PairwiseDataset(space, recs);
}

}  // namespace

PairwiseDataset random_pairwise(const SpacePtr& space, Rng& rng, std::size_t n_labeled, std::size_t n_records) {
  return pairwise(space, rng, n_labeled, n_records, false);
}

PairwiseDataset consistent_pairwise(const SpacePtr& space, Rng& rng, std::size_t n_labeled, std::size_t n_records) {
  return pairwise(space, rng, n_labeled, n_records, true);
}

BinaryDataset random_binary(const SpacePtr& space, Rng& rng, std::size_t n_labeled, std::size_t n_records) {
  const auto labeled = pick_labeled(space, rng, n_labeled);
  std::vector<BinaryRecord> recs;
  for (std::size_t k = 0; k < std::max(n_records, n_labeled); ++k) {
    const std::size_t y = k < n_labeled ? labeled[k] : labeled[rng.index(n_labeled)];
    recs.push_back({y, rng.bernoulli(0.5) ? Label::Desired : Label::Undesired, 1 + rng.index(3)});
  }
  return BinaryDataset(space, recs);
}

ScalarDataset random_scalar(const SpacePtr& space, Rng& rng, std::size_t n_labeled, std::size_t groups,
                            std::size_t group_size) {
  if (group_size > n_labeled) throw InvalidArgument("random_scalar: group larger than labeled set");
  const auto labeled = pick_labeled(space, rng, n_labeled);
  std::vector<ScalarRecord> recs;
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<std::size_t> order = labeled;
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);
    const std::uint64_t count = 1 + rng.index(2);
    for (std::size_t n = 0; n < group_size; ++n) recs.push_back({order[n], rng.normal(), count});
  }
  return ScalarDataset(space, recs, group_size);
}

LossSpec pro_spec(const Distribution& ref, const Dataset& data, double beta, double alpha, double eta) {
  LossSpec spec;
  spec.kind = LossKind::Pro;
  spec.beta = beta;
  spec.alpha = alpha;
  spec.eta = eta;
  spec.pin_hyper = false;
  spec.ref = ref;
  spec.data = data;
  const Distribution mu_hat = empirical_response_dist(data);
  spec.mu_hat = mu_hat;
  spec.score = empirical_score(data);
  HyperSpace hs = HyperSpace::unobserved(mu_hat);
  const Distribution mhc = hyper_mass(mu_hat, hs);
  spec.mu = mu_bar(mhc, HyperConfig::uniform_rho(eta, mhc));
  spec.hyper = std::move(hs);
  return spec;
}

LossSpec edpo_spec(const Distribution& ref, const Dataset& data, const Distribution& mu, double beta, double alpha) {
  LossSpec spec;
  spec.kind = LossKind::Edpo;
  spec.beta = beta;
  spec.alpha = alpha;
  spec.pin_hyper = false;
  spec.ref = ref;
  spec.data = data;
  spec.mu_hat = empirical_response_dist(data);
  spec.score = empirical_score(data);
  spec.mu = mu;
  return spec;
}

std::vector<SuiteInstance> standard_suite(std::size_t count, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "suite"));
  std::vector<SuiteInstance> out;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t n = 4 + rng.index(3);
    auto space = make_indexed_space(n);
    const std::size_t labeled = 2 + rng.index(n - 2);
    auto ref = random_distribution(space, rng, 0.7);
    auto data = consistent_pairwise(space, rng, labeled, labeled + rng.index(3));
    out.push_back({space, ref, data});
  }
  return out;
}

namespace {

LossSpec plain_spec(LossKind kind, const Distribution& ref, const Dataset& data, double beta) {
  LossSpec s;
  s.kind = kind;
  s.beta = beta;
  s.ref = ref;
  s.data = data;
  return s;
}

}  // namespace

std::vector<LossSpec> every_kind_specs(Rng& rng, const SpacePtr& space, const Distribution& ref) {
  const std::size_t n = space->size();
  std::vector<LossSpec> out;
  const double beta = 0.2 + rng.uniform();
  const double alpha = 0.5 + 3.0 * rng.uniform();
  const PairwiseDataset pw = random_pairwise(space, rng, n - 1, n + 2);
  out.push_back(plain_spec(LossKind::DpoSample, ref, pw, beta));
  {
    LossSpec s;
    s.kind = LossKind::DpoPopulation;
    s.beta = beta;
    s.ref = ref;
    s.pref = random_preference(space, rng);
    s.mu = random_distribution(space, rng);
    out.push_back(s);
  }
  out.push_back(edpo_spec(ref, pw, random_distribution(space, rng), beta, alpha));
  out.push_back(pro_spec(ref, pw, beta, alpha));
  for (bool pin : {true, false}) {
    LossSpec s = plain_spec(LossKind::ProP, ref, pw, beta);
    s.pin_hyper = pin;
    out.push_back(s);
  }
  {
    LossSpec s = pro_spec(ref, pw, beta, alpha);
    s.kind = LossKind::ProP;
    s.prop_form = ProPForm::Global;
    out.push_back(s);
  }
  for (bool pin : {true, false}) {
    LossSpec s;
    s.kind = LossKind::ProB;
    s.beta = beta;
    s.alpha = alpha;
    s.pin_hyper = pin;
    s.class_reweight = !pin;
    s.ref = ref;
    s.data = random_binary(space, rng, n - 1, n + 3);
    out.push_back(s);
    s.kind = LossKind::ProS;
    s.data = random_scalar(space, rng, n - 1, 3, 3);
    out.push_back(s);
  }
  for (auto mode : {KtoSignMode::AsPrinted, KtoSignMode::Utility}) {
    LossSpec s = plain_spec(LossKind::Kto, ref, pw, beta);
    s.kto.sign_mode = mode;
    s.kto.z0 = rng.uniform() * 0.2;
    s.kto.lambda_d = 0.5 + rng.uniform();
    out.push_back(s);
    s.data = random_binary(space, rng, n - 1, n + 3);
    out.push_back(s);
  }
  return out;
}

}  // namespace proalign
