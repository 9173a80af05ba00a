#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "proalign/feedback.hpp"
#include "proalign/hyper.hpp"
#include "proalign/policy.hpp"
#include "proalign/space.hpp"

namespace proalign {

enum class LossKind { DpoSample, DpoPopulation, Edpo, Pro, ProP, ProB, ProS, Kto };

std::string_view to_string(LossKind kind);
/// Accepts dpo, dpo_population, edpo, pro, pro_p, pro_b, pro_s, kto.
LossKind parse_loss_kind(std::string_view name);

/// PRO-P as the per-pair form used in practice (hyper response = everything
/// except the pair) or the global form over Y_H with augmented preference.
enum class ProPForm { PerPair, Global };
std::string_view to_string(ProPForm form);
ProPForm parse_prop_form(std::string_view name);

/// As printed: lambda_D s(b(r_w - z0)) + lambda_U s(b(z0 - r_l)).
/// Utility: lambda_D (1 - s(.)) + lambda_U (1 - s(.)), the form minimized by
/// the original KTO work.
enum class KtoSignMode { AsPrinted, Utility };
std::string_view to_string(KtoSignMode mode);
KtoSignMode parse_kto_sign_mode(std::string_view name);

struct KtoParams {
  double z0 = 0.0;
  double lambda_d = 1.0;
  double lambda_u = 1.0;
  /// Deliberately without default: neither form is the canonical one.
  std::optional<KtoSignMode> sign_mode;
};

/// A loss identifier, its hyperparameters and the data it closes over.
///
/// Required fields by kind:
///   DpoSample, ProP(per pair), Kto:  ref, data (pairwise; Kto also binary)
///   DpoPopulation:                   ref, pref, mu (on Y)
///   Edpo:                            ref, mu_hat, score, mu (on Y)
///   Pro:                             ref, mu_hat, score, hyper, mu (on Y_H)
///   ProP(global):                    ref, data (pairwise), hyper, mu (on Y_H)
///   ProB:                            ref, data (binary)
///   ProS:                            ref, data (scalar)
struct LossSpec {
  LossKind kind = LossKind::DpoSample;
  double beta = 0.1;
  double alpha = 2.5;
  /// Only the global PRO-P form reads eta (its 1/eta^2 prefactor).
  double eta = 2.0 / 3.0;
  /// r(H) := 0 in PRO-family losses.
  bool pin_hyper = true;
  /// PRO-B: multiply each record by total / class count.
  bool class_reweight = false;
  ProPForm prop_form = ProPForm::PerPair;
  KtoParams kto;

  std::optional<Distribution> ref;
  std::optional<Dataset> data;
  std::optional<PreferenceMatrix> pref;
  std::optional<Distribution> mu;
  std::optional<Distribution> mu_hat;
  std::optional<ScoreMap> score;
  std::optional<HyperSpace> hyper;

  /// Mutation-testing hook: negates every KL regularizer. Never set outside
  /// sanity tests.
  bool flip_regularizer = false;
};

struct LossValue {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Loss value and d(loss)/d(log pi(y)) for every response of the policy space.
/// `dlogp` may be null when only the value is wanted.
double evaluate_logp(const LossSpec& spec, std::span<const double> logp, std::vector<double>* dlogp);

/// Loss value with the analytic parameter gradient.
LossValue evaluate(const LossSpec& spec, const Policy& policy);
double loss_value(const LossSpec& spec, const Policy& policy);
std::vector<double> loss_gradient(const LossSpec& spec, const Policy& policy);

/// d/d(delta) of (alpha / (2 beta)) KL(B(1/2) || B(sigmoid(beta delta))):
/// (alpha / 2) (sigmoid(beta delta) - 1/2).
double regularizer_grad_profile(double alpha, double beta, double delta);

/// Spec for `kind` built from a dataset, the way the experiments use it:
/// mu-hat and s-hat from the data, H = unobserved responses and mu = mu-bar
/// (uniform rho) for Pro / global PRO-P, and mu = eta mu-hat + (1 - eta)
/// uniform for Edpo.
LossSpec spec_from_dataset(LossKind kind, const Distribution& ref, const Dataset& data, double beta, double alpha,
                           double eta = 2.0 / 3.0);

}  // namespace proalign
