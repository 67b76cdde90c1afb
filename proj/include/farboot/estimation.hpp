#pragma once

#include "farboot/far_process.hpp"
#include "farboot/hilbert.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace farboot {

/// Empirical eigensystem of a covariance operator, eigenvalues descending.
///
/// Each eigenvector is flipped so that its largest-magnitude coefficient is
/// positive (ties go to the lowest index). gaps[j] is
/// min(lambda_{j-1} - lambda_j, lambda_j - lambda_{j+1}) with the first entry
/// using only the right gap and lambda_{d+1} taken as 0.
struct EigenSystem {
  std::vector<double> lambdas;
  std::vector<FuncVec> vectors;
  std::vector<double> gaps;
  /// Some adjacent gap fell below 1e-10 * lambda_1.
  bool near_degenerate = false;

  std::size_t dim() const { return lambdas.size(); }
  /// Number of eigenvalues above the inversion floor 1e-12 * lambda_1.
  std::size_t invertible_count() const;
};

EigenSystem eigensystem(const HsOp& gamma_hat);

/// Relative eigenvalue floor below which a truncation level is rejected.
inline constexpr double kLambdaFloorRatio = 1e-12;
/// Relative gap below which a fit is flagged as near-degenerate.
inline constexpr double kDegenerateGapRatio = 1e-10;

/// Which growth condition the truncation rule follows. `bootstrap` uses the
/// stricter constants required for bootstrap consistency.
enum class RateRegime { estimation, bootstrap };

/// k_n <= (1/(c log(1/a)) - delta) log n, c = 4 (estimation) or 8 (bootstrap).
struct LogRule {
  double a = 0.5;
  double delta = 0.05;
  RateRegime regime = RateRegime::bootstrap;
};

/// k_n = n^(e - delta), e = 1/(4a) (estimation) or 1/(4(2a+1)) (bootstrap).
struct PolyRule {
  double a = 2.0;
  double delta = 0.01;
  RateRegime regime = RateRegime::bootstrap;
};

struct FixedK {
  std::size_t k = 1;
};

using KRule = std::variant<LogRule, PolyRule, FixedK>;

/// Parses "log:A:DELTA", "poly:A:DELTA", "fixed:K"; an optional trailing
/// ":estimation" selects the estimation-regime constants.
KRule parse_k_rule(std::string_view text);
std::string to_string(const KRule& rule);
void validate_k_rule(const KRule& rule);

/// floor of the rule's bound at sample size n, before clamping (may be <= 0).
long rule_bound(const KRule& rule, std::size_t n);

/// rule_bound clamped to [1, eigen.invertible_count()]. Throws if no
/// eigenvalue is strictly positive.
std::size_t select_k(const EigenSystem& eigen, std::size_t n, const KRule& rule);

FuncVec sample_mean(const Sample& s);
/// (1/n) sum_{j<n} X_j (x) X_j, not centered.
HsOp cov_est(const Sample& s);
/// (1/n) sum_{j<n} X_j (x) X_{j+1}, not centered.
HsOp autocov_est(const Sample& s);

/// sum_{j<=k} lambda_j^{-1} v_j (x) v_j. Throws if lambda_k is below the floor.
HsOp reg_inverse(const EigenSystem& eigen, std::size_t k);
/// sum_{j<=k} v_j (x) v_j; k = 0 gives the zero operator.
HsOp projection(const EigenSystem& eigen, std::size_t k);

HsOp estimate_psi(const HsOp& c_hat, const HsOp& gamma_dagger);

struct Residuals {
  Eigen::MatrixXd raw;       ///< d x n, columns eps_hat_1..eps_hat_n
  Eigen::MatrixXd centered;  ///< raw minus its column mean
};

Residuals residuals(const Sample& s, const HsOp& psi_hat);

/// sum_{t=1}^n X_{t-1} (x) eps_t for known true innovations (d x n).
HsOp s_n_operator(const Sample& s, const HsOp& true_psi, const Eigen::MatrixXd& true_eps);

struct FarFit {
  std::size_t n = 0;
  HsOp gamma_hat;
  HsOp c_hat;
  EigenSystem eigen;
  std::size_t k = 0;
  HsOp gamma_dagger;
  HsOp pi_hat_k;
  HsOp psi_hat;
  Eigen::MatrixXd raw_residuals;
  Eigen::MatrixXd centered_residuals;
  FuncVec sample_mean;
  FuncVec x0;
  FuncVec xn;
  std::vector<std::string> warnings;

  std::size_t dim() const { return gamma_hat.dim(); }
  /// The bootstrap-world centering of the lag-1 autocovariance, C_hat Pi_hat_k.
  HsOp c_hat_projected() const { return c_hat * pi_hat_k; }
};

FarFit fit(const Sample& s, const KRule& rule);
/// Same pipeline with an already chosen truncation level.
FarFit fit_with_k(const Sample& s, std::size_t k);

/// Exact algebraic identities that must hold on every fit; all in hs_norm.
struct FitDiagnostics {
  double projection_vs_gamma_dagger = 0.0;   ///< |Pi - Gamma Gamma^dagger|
  double projection_vs_dagger_gamma = 0.0;   ///< |Pi - Gamma^dagger Gamma|
  double psi_projection = 0.0;               ///< |Psi Pi - Psi|
  double residual_second_moment = 0.0;       ///< expanded residual covariance identity
  double centered_residual_sum = 0.0;        ///< norm of the centered residual sum
  double projection_idempotence = 0.0;       ///< |Pi Pi - Pi|
  double projection_symmetry = 0.0;          ///< |Pi - Pi^T|
  double psi_hat_op_norm = 0.0;

  double max_identity_error() const;
};

FitDiagnostics diagnose(const FarFit& f);

/// (1/n) sum eps_hat (x) eps_hat computed directly from the residuals.
HsOp residual_second_moment(const FarFit& f);
/// The same quantity via Gamma - C Psi^T - Psi C^T + Psi Gamma Psi^T + (X_n (x) X_n - X_0 (x) X_0)/n.
HsOp residual_second_moment_expanded(const FarFit& f);

}  // namespace farboot
