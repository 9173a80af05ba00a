#include "proalign/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "proalign/errors.hpp"

namespace proalign {

namespace {

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw InvalidArgument(std::string(what) + ": non-finite input");
  }
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double delta) {
  require_finite(delta, "log_sigmoid");
  // log σ(δ) = -log(1 + e^{-δ}); for δ < 0 rewrite as δ - log(1 + e^{δ}).
  if (delta >= 0.0) {
    return -std::log1p(std::exp(-delta));
  }
  return delta - std::log1p(std::exp(delta));
}

double kl_bernoulli_half(double delta) {
  require_finite(delta, "kl_bernoulli_half");
  // Equals log cosh(δ/2). Near zero use log1p(2 sinh²(δ/4)) so small
  // arguments keep full relative precision; elsewhere the |δ| form avoids
  // overflow.
  const double a = std::abs(delta);
  if (a <= 1.0) {
    const double s = std::sinh(0.25 * a);
    return std::log1p(2.0 * s * s);
  }
  return 0.5 * a + std::log1p(std::exp(-a)) - std::log(2.0);
}

double kl_bernoulli_half_grad(double delta) {
  require_finite(delta, "kl_bernoulli_half_grad");
  // sigmoid(d) - 1/2, written so that it is exactly odd.
  return 0.5 * std::tanh(0.5 * delta);
}

double implicit_reward(double policy_logprob, double ref_logprob, double beta) {
  if (!(beta > 0.0)) {
    throw InvalidArgument("implicit_reward: beta must be positive");
  }
  require_finite(policy_logprob, "implicit_reward");
  require_finite(ref_logprob, "implicit_reward");
  return beta * (policy_logprob - ref_logprob);
}

double log_sum_exp(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

double log1m_exp(double x) {
  if (!(x < 0.0)) {
    throw NumericalError("log1m_exp: argument must be negative");
  }
  // Mächler's switch point.
  return x > -0.6931471805599453 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

}  // namespace proalign
