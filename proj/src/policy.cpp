#include "proalign/policy.hpp"

#include <cmath>
#include <string>

#include "proalign/errors.hpp"
#include "proalign/numeric.hpp"

namespace proalign {

namespace {

void require_finite_params(std::span<const double> params, const char* who) {
  for (double v : params) {
    if (!std::isfinite(v)) throw InvalidArgument(std::string(who) + ": non-finite parameter");
  }
}

}  // namespace

TabularPolicy::TabularPolicy(SpacePtr space, std::vector<double> logits)
    : space_(std::move(space)), logits_(std::move(logits)) {
  if (!space_ || logits_.size() != space_->size()) {
    throw InvalidArgument("TabularPolicy: logits do not match space size");
  }
  require_finite_params(logits_, "TabularPolicy");
}

TabularPolicy TabularPolicy::from_distribution(const Distribution& dist) {
  if (!dist.strictly_positive()) {
    throw InvalidArgument("TabularPolicy: distribution must be strictly positive");
  }
  auto lp = dist.log_probs();
  return TabularPolicy(dist.space(), std::vector<double>(lp.begin(), lp.end()));
}

std::vector<double> TabularPolicy::log_probs() const {
  const double lse = log_sum_exp(logits_);
  std::vector<double> out(logits_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = logits_[i] - lse;
  return out;
}

std::vector<double> TabularPolicy::backward(std::span<const double> dlogp) const {
  if (dlogp.size() != logits_.size()) {
    throw InvalidArgument("TabularPolicy::backward: gradient size mismatch");
  }
  // d log p_y / d theta_k = [y == k] - p_k
  const auto lp = log_probs();
  double total = 0.0;
  for (double g : dlogp) total += g;
  std::vector<double> grad(logits_.size());
  for (std::size_t k = 0; k < grad.size(); ++k) {
    grad[k] = dlogp[k] - std::exp(lp[k]) * total;
  }
  return grad;
}

TabularPolicy TabularPolicy::with_params(std::span<const double> params) const {
  return TabularPolicy(space_, std::vector<double>(params.begin(), params.end()));
}

AutoregressivePolicy::AutoregressivePolicy(std::size_t vocab, std::size_t length,
                                           std::vector<double> params)
    : vocab_(vocab), length_(length), params_(std::move(params)) {
  if (vocab < 2 || vocab > kMaxVocab || length < 1 || length > kMaxLength) {
    throw InvalidArgument("AutoregressivePolicy: need 2 <= vocab <= 8 and 1 <= length <= 5");
  }
  if (params_.size() != param_count(vocab, length)) {
    throw InvalidArgument("AutoregressivePolicy: parameter count mismatch");
  }
  require_finite_params(params_, "AutoregressivePolicy");
  std::size_t n = 1;
  for (std::size_t t = 0; t < length; ++t) n *= vocab;
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::string id;
    for (std::size_t t = 0; t < length; ++t) id.push_back(static_cast<char>('0' + token(s, t)));
    ids.push_back(std::move(id));
  }
  space_ = make_space(std::move(ids));
}

AutoregressivePolicy AutoregressivePolicy::uniform(std::size_t vocab, std::size_t length) {
  return AutoregressivePolicy(vocab, length, std::vector<double>(param_count(vocab, length), 0.0));
}

std::size_t AutoregressivePolicy::param_count(std::size_t vocab, std::size_t length) {
  return vocab + (length - 1) * vocab * vocab;
}

std::size_t AutoregressivePolicy::token(std::size_t seq, std::size_t position) const {
  for (std::size_t t = length_ - 1; t > position; --t) seq /= vocab_;
  return seq % vocab_;
}

std::size_t AutoregressivePolicy::row_offset(std::size_t position, std::size_t prev) const {
  if (position == 0) return 0;
  return vocab_ + ((position - 1) * vocab_ + prev) * vocab_;
}

std::vector<double> AutoregressivePolicy::row_log_softmax() const {
  std::vector<double> out(params_.size());
  for (std::size_t start = 0; start < params_.size(); start += vocab_) {
    std::span<const double> row(params_.data() + start, vocab_);
    const double lse = log_sum_exp(row);
    for (std::size_t j = 0; j < vocab_; ++j) out[start + j] = row[j] - lse;
  }
  return out;
}

std::vector<double> AutoregressivePolicy::log_probs() const {
  const auto table = row_log_softmax();
  const std::size_t n = space_->size();
  std::vector<double> out(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t prev = 0;
    double lp = 0.0;
    for (std::size_t t = 0; t < length_; ++t) {
      const std::size_t tok = token(s, t);
      lp += table[row_offset(t, prev) + tok];
      prev = tok;
    }
    out[s] = lp;
  }
  return out;
}

std::vector<double> AutoregressivePolicy::backward(std::span<const double> dlogp) const {
  if (dlogp.size() != space_->size()) {
    throw InvalidArgument("AutoregressivePolicy::backward: gradient size mismatch");
  }
  const auto table = row_log_softmax();
  std::vector<double> grad(params_.size(), 0.0);
  // Accumulate upstream weight per (row, token), then subtract softmax * row total.
  std::vector<double> row_token(params_.size(), 0.0);
  for (std::size_t s = 0; s < dlogp.size(); ++s) {
    if (dlogp[s] == 0.0) continue;
    std::size_t prev = 0;
    for (std::size_t t = 0; t < length_; ++t) {
      const std::size_t tok = token(s, t);
      row_token[row_offset(t, prev) + tok] += dlogp[s];
      prev = tok;
    }
  }
  for (std::size_t start = 0; start < params_.size(); start += vocab_) {
    double total = 0.0;
    for (std::size_t j = 0; j < vocab_; ++j) total += row_token[start + j];
    for (std::size_t j = 0; j < vocab_; ++j) {
      grad[start + j] = row_token[start + j] - std::exp(table[start + j]) * total;
    }
  }
  return grad;
}

AutoregressivePolicy AutoregressivePolicy::with_params(std::span<const double> params) const {
  if (params.size() != params_.size()) {
    throw InvalidArgument("AutoregressivePolicy: parameter count mismatch");
  }
  require_finite_params(params, "AutoregressivePolicy");
  AutoregressivePolicy copy = *this;
  copy.params_.assign(params.begin(), params.end());
  return copy;
}

const SpacePtr& Policy::space() const {
  return std::visit([](const auto& p) -> const SpacePtr& { return p.space(); }, impl_);
}

std::span<const double> Policy::params() const {
  return std::visit([](const auto& p) { return p.params(); }, impl_);
}

std::vector<double> Policy::log_probs() const {
  return std::visit([](const auto& p) { return p.log_probs(); }, impl_);
}

std::vector<double> Policy::backward(std::span<const double> dlogp) const {
  return std::visit([&](const auto& p) { return p.backward(dlogp); }, impl_);
}

Policy Policy::with_params(std::span<const double> params) const {
  return std::visit([&](const auto& p) { return Policy(p.with_params(params)); }, impl_);
}

Distribution policy_distribution(const Policy& policy) {
  return Distribution::from_log_weights(policy.space(), policy.log_probs());
}

}  // namespace proalign
