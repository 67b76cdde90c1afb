#pragma once

#include "farboot/estimation.hpp"
#include "farboot/far_process.hpp"
#include "farboot/hilbert.hpp"
#include "farboot/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace farboot {

/// Starting value of bootstrap paths: X_0* = 0 or X_0* = X_0.
enum class X0Policy { zero, copy_x0 };

std::string to_string(X0Policy policy);
X0Policy parse_x0_policy(const std::string& text);

struct BootstrapConfig {
  std::size_t replications = 1000;
  X0Policy x0_policy = X0Policy::zero;
  std::uint64_t seed = 0;
};

/// Raised when the fitted operator would produce non-stationary bootstrap paths.
class NonStationaryFit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-replication bootstrap statistics; every list has one entry per replication.
struct BootstrapStats {
  std::vector<FuncVec> means;           ///< (1/n) sum_{t<n} X_t*
  std::vector<HsOp> gammas;             ///< (1/n) sum_{t<n} X_t* (x) X_t*
  std::vector<HsOp> cs;                 ///< (1/n) sum_{t<n} X_t* (x) X_{t+1}*
  std::vector<HsOp> centered_gammas;    ///< gamma* - Gamma_hat
  std::vector<HsOp> centered_cs;        ///< C* - C_hat Pi_hat_k

  std::size_t size() const { return means.size(); }
};

/// n draws with replacement from the centered residuals (d x n matrix).
Eigen::MatrixXd draw_bootstrap_innovations(const FarFit& fit, std::size_t n, Rng& rng);

/// Throws NonStationaryFit unless op_norm(psi_hat) < 1.
void require_stationary(const FarFit& fit);

/// X_t* = psi_hat(X_{t-1}*) + eps_t* over the given innovations.
Sample bootstrap_path_from(const FarFit& fit, X0Policy policy, const Eigen::MatrixXd& innovations);

/// Draws innovations from `rng` and regenerates a path of n transitions.
Sample bootstrap_path(const FarFit& fit, std::size_t n, const BootstrapConfig& cfg, Rng& rng);

/// Seed of replication b: stable_hash(cfg.seed, b).
std::uint64_t replication_seed(const BootstrapConfig& cfg, std::size_t b);

/// Runs cfg.replications independent bootstrap paths of length fit.n.
BootstrapStats bootstrap_statistics(const FarFit& fit, const BootstrapConfig& cfg, std::size_t threads = 1);

/// Distribution summaries of a bootstrap run.
struct BootstrapSummary {
  FuncVec mean_of_means;
  HsOp mean_of_gammas;
  HsOp mean_of_cs;
  Eigen::MatrixXd covariance_of_means;   ///< d x d
  Eigen::MatrixXd covariance_of_gammas;  ///< d^2 x d^2, column-major flattening
  Eigen::MatrixXd covariance_of_cs;      ///< d^2 x d^2, column-major flattening
  /// Quantiles (probabilities in `quantile_levels`) of sqrt(n)*|mean*|,
  /// sqrt(n)*hs_norm(centered gamma*), sqrt(n)*hs_norm(centered C*).
  std::vector<double> quantile_levels;
  std::vector<double> mean_norm_quantiles;
  std::vector<double> gamma_norm_quantiles;
  std::vector<double> c_norm_quantiles;
  /// Standard error of mean_of_cs in hs_norm: sqrt(trace(cov(C*)) / B).
  double c_mean_standard_error = 0.0;
};

BootstrapSummary summarize(const BootstrapStats& stats, std::size_t n);

}  // namespace farboot
