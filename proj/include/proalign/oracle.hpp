#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "proalign/losses.hpp"
#include "proalign/policy.hpp"

namespace proalign {

struct SolveOptions {
  int restarts = 3;
  int max_iters = 20000;
  /// Gauge-projected gradient norm below which a solve counts as converged.
  double tol = 1e-8;
  std::uint64_t seed = 0;
  /// Std-dev of the Gaussian logit perturbation around log pi_ref per restart.
  double init_noise = 0.5;
  /// Degeneracy: some probability below `floor` for `window` accepted steps.
  double floor = 1e-10;
  int window = 100;
  /// Cap on the L2 logit displacement of a single step.
  double max_step = 2.0;
};

struct SolveReport {
  TabularPolicy policy;
  double loss = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  double min_prob = 0.0;
  bool converged = false;
  bool degenerate = false;
  std::uint64_t seed = 0;
  /// Final loss of every restart, in restart order.
  std::vector<double> restart_losses;
};

/// Full-batch gradient descent on the logits of a tabular policy over the
/// spec's response space, started from perturbed log pi_ref. Each step
/// starts from a Barzilai-Borwein length and backtracks until Armijo holds.
/// A small gradient counts as converged only if a unit move downhill no
/// longer lowers the loss, so slowly escaping solutions are not mistaken for
/// optima. Best restart wins by loss, then gradient norm, then seed.
SolveReport solve_optimal(const LossSpec& spec, const SolveOptions& opts = {});

struct TheoremReport {
  std::string id;
  std::string instance;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

/// One line: `check=<id> instance=<...> residual=<...> tolerance=<...> pass=<0|1> detail="..."`.
std::string to_text(const TheoremReport& report);
TheoremReport make_report(std::string id, std::string instance, double residual, double tolerance,
                          std::string detail = {});

/// Rewards, probabilities and weights of a solved eDPO / PRO instance on the
/// space its regularizer lives on (Y for eDPO, Y_H for PRO).
struct SolutionView {
  SpacePtr space;
  std::vector<double> pi;
  std::vector<double> ref;
  std::vector<double> reward;
  std::vector<double> mu;
  std::vector<double> mu_hat;
  std::vector<double> score;
};
SolutionView solution_view(const LossSpec& spec, const TabularPolicy& policy);

/// Per-response residual of
///   alpha E_{y'~mu}[sigmoid(r(y) - r(y')) - 1/2] = mu_hat(y) s_hat(y) / mu(y).
/// Requires a converged report and an unpinned Edpo / Pro spec.
TheoremReport check_stationarity(const SolveReport& report, const LossSpec& spec, double tol = 1e-5);

/// Ratio pi*/pi_ref equals a constant C on {mu_hat = 0 or s_hat = 0},
/// exceeds it where s_hat > 0 and falls below it where s_hat < 0.
/// C is the geometric mean over the constant set; when that set is empty the
/// check asks for any separating C instead.
TheoremReport check_ordering(const SolveReport& report, const LossSpec& spec, double spread_tol = 1e-5,
                             double margin = 1e-6);

/// eDPO over Y against PRO over Y_H: pointwise agreement off H and
/// pi_H*(H) = C pi_ref(H), where C is the eDPO ratio on H.
TheoremReport check_hyper_correspondence(const SolveReport& full, const LossSpec& full_spec,
                                         const SolveReport& hyper, const LossSpec& hyper_spec,
                                         double tol = 1e-5);

struct BoundaryPoint {
  double alpha = 0.0;
  bool interior = false;
  bool degenerate = false;
  double min_prob = 0.0;
};

struct BoundaryReport {
  TheoremReport report;
  double alpha0 = 0.0;
  std::vector<BoundaryPoint> points;
};

/// Solves `spec` at every alpha of the grid. Passes when every alpha >= alpha0
/// (the constructive threshold) gives a converged interior optimum.
BoundaryReport check_existence_boundary(const LossSpec& spec, const std::vector<double>& alpha_grid,
                                        const SolveOptions& opts = {}, double interior_floor = 1e-8);

/// Bisects [lo, hi] for the smallest alpha whose solve is a converged
/// interior optimum, assuming the transition is monotone. alpha0 is only a
/// sufficient threshold; this is the observed one. Throws InvalidArgument if
/// hi is not interior; returns lo if lo already is.
double observed_existence_boundary(const LossSpec& spec, double lo, double hi, int iters = 30,
                                   const SolveOptions& opts = {}, double interior_floor = 1e-8);

/// alpha0 of a Pro / Edpo spec on the space of its regularizer.
double spec_alpha_threshold(const LossSpec& spec);

/// Central differences of the loss with respect to the policy parameters.
std::vector<double> finite_diff_grad(const LossSpec& spec, const Policy& policy, double h = 1e-5);
/// Same for an arbitrary functional of the parameters.
std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& f,
                                     const std::vector<double>& x, double h = 1e-5);

struct GradientTrial {
  LossSpec a;
  LossSpec b;
  Policy policy;
};

/// Max over trials of the max abs gradient difference between two specs
/// evaluated on the same policy.
TheoremReport check_gradient_equivalence(const std::string& id,
                                         const std::function<GradientTrial(int)>& make_trial, int trials,
                                         double tol);

struct ProbeResult {
  double dpo_delta = 0.0;
  double pro_delta = 0.0;
};

/// Policy with log pi(y) + c on `labeled`, the rest rescaled uniformly so the
/// total stays 1. Throws when the shifted labeled mass reaches 1.
TabularPolicy shift_labeled(const TabularPolicy& policy, const std::vector<std::size_t>& labeled, double c);

/// Loss changes of a DPO and a PRO spec under shift_labeled.
ProbeResult probe_underdetermination(const TabularPolicy& policy, const std::vector<std::size_t>& labeled,
                                     double c, const LossSpec& dpo, const LossSpec& pro);

}  // namespace proalign
