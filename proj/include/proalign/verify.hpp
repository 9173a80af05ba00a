#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "proalign/oracle.hpp"

namespace proalign {

/// Theorem-suite checks on self-generated instances. Every check draws its
/// instances from `seed` through its own named sub-seed.
struct VerifyOptions {
  std::uint64_t seed = 0;
  /// Negates the KL regularizer of the eDPO / PRO side in the identity and
  /// probe checks. Test-only mutation switch.
  bool inject_bug = false;
};

/// Population DPO vs eDPO (s = true score, alpha = 1, mu-hat = mu): max abs
/// gradient difference over random instances with |Y| <= 8.
TheoremReport verify_population_identity(const VerifyOptions& opts, int trials = 20, double tol = 1e-9);

struct GlobalProPReports {
  TheoremReport gradient;
  /// L_PRO - L_PRO-P = -log 2 / (2 eta^2) - beta E_mu-hat[s-hat log pi_ref].
  TheoremReport corrected_constant;
  /// L_PRO - L_PRO-P = -((1 - eta^2) / (2 eta^2)) log 2, the constant as printed.
  TheoremReport printed_constant;
};
/// PRO(mu-bar, alpha = 1/eta^2) vs global PRO-P, eta alternating 1/2 and 2/3.
GlobalProPReports verify_global_prop(const VerifyOptions& opts, int trials = 20, double tol = 1e-9);

struct SolvedSuiteReports {
  TheoremReport stationarity;
  TheoremReport ordering;
};
/// Solves random PRO instances (|Y_H| <= 6, alpha = max(1, 2 alpha0)) and
/// checks the stationarity condition and the ratio ordering around C.
SolvedSuiteReports verify_solved_pro(const VerifyOptions& opts, int instances = 10, double stationarity_tol = 1e-5,
                                     double spread_tol = 1e-5, double margin = 1e-6);

/// eDPO over Y vs PRO over Y_H on instances with |Y| in [5, 8], |H| in [2, 3].
TheoremReport verify_hyper_correspondence(const VerifyOptions& opts, int instances = 5, double tol = 1e-5);

struct BoundaryReports {
  /// Failures to converge interior at alpha >= alpha0 over the standard suite.
  TheoremReport existence;
  /// Sample DPO solves that are not flagged degenerate although some s-hat < 0.
  TheoremReport dpo_degenerate;
};
BoundaryReports verify_existence(const VerifyOptions& opts, int instances = 8, double interior_floor = 1e-8);

/// Shift c of the labeled log-probs at pi = pi_ref (beta = 1): sample DPO must
/// move by < dpo_tol and PRO by > pro_min. Residual = worst shortfall.
TheoremReport verify_probe(const VerifyOptions& opts, int instances = 10, double c = -0.5, double dpo_tol = 1e-12,
                           double pro_min = 1e-3);

/// Max relative error of every loss kind's gradient against central
/// differences, `instances` random instances per kind.
TheoremReport verify_finite_differences(const VerifyOptions& opts, int instances = 20, double tol = 1e-6);

/// Check ids run by `verify`, in order.
const std::vector<std::string>& verify_check_ids();
/// Runs every check, or only `only`, with default sizes and tolerances.
/// t43 yields two reports (gradient and corrected constant).
/// Throws InvalidArgument for an unknown id.
std::vector<TheoremReport> run_verify(const VerifyOptions& opts, const std::optional<std::string>& only = {});

}  // namespace proalign
