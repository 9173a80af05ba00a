#pragma once

#include <span>

namespace proalign {

/// Logistic function, evaluated without overflow for any finite input.
double sigmoid(double x);

/// log(sigmoid(delta)), accurate in both tails. Throws InvalidArgument for
/// non-finite input.
double log_sigmoid(double delta);

/// KL( Bernoulli(1/2) || Bernoulli(sigmoid(delta)) ).
///
/// Evaluated as -log 2 - log_sigmoid(delta)/2 - log_sigmoid(-delta)/2, which
/// is symmetric in delta, zero only at delta = 0 and grows like |delta|/2.
double kl_bernoulli_half(double delta);

/// d/d(delta) of kl_bernoulli_half: sigmoid(delta) - 1/2.
double kl_bernoulli_half_grad(double delta);

/// beta * (policy_logprob - ref_logprob). Throws for beta <= 0.
double implicit_reward(double policy_logprob, double ref_logprob, double beta);

/// log(sum(exp(x))) with max-shift; -inf for an empty span or all -inf.
double log_sum_exp(std::span<const double> x);

/// log(1 - exp(x)) for x < 0.
double log1m_exp(double x);

}  // namespace proalign
