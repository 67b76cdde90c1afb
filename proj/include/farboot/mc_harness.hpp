#pragma once

#include "farboot/bootstrap.hpp"
#include "farboot/estimation.hpp"
#include "farboot/far_process.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace farboot {

/// Declarative description of the true process; `build` validates it.
struct ModelSpec {
  std::size_t dim = 5;
  PsiKind psi = DiagonalExponentialPsi{0.9, 0.5};
  Spectrum spectrum = ExponentialSpectrum{1.0, 0.5};
  std::size_t burn_in = kDefaultBurnIn;

  FarModel build() const;
};

struct McConfig {
  ModelSpec model;
  std::vector<std::size_t> n_grid{100, 200, 400, 800};
  std::size_t outer_replications = 100;      ///< R
  std::size_t bootstrap_replications = 100;  ///< B
  KRule k_rule = LogRule{0.5, 0.05, RateRegime::bootstrap};
  X0Policy x0_policy = X0Policy::zero;
  std::uint64_t master_seed = 20240611;
  double beta_eq5 = 0.6;
  double beta_eq6 = 1.1;
  std::size_t threads = 1;

  /// n_grid strictly increasing with at least two entries, R and B >= 50,
  /// and R == B (equal-size clouds).
  void validate() const;
};

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

/// How a sequence of medians over n_grid is judged.
struct TrendRule {
  bool strict = false;                 ///< strictly decreasing vs nonincreasing
  std::size_t allowed_violations = 0;  ///< adjacent pairs allowed to break the order
  double floor_factor = 3.0;           ///< signal at the smallest n must exceed factor * floor
};

struct McRow {
  std::size_t n = 0;
  std::vector<double> values;       ///< target quantity, one per outer replication
  std::vector<double> null_values;  ///< same quantity under the null configuration
  std::vector<std::size_t> ks;      ///< truncation level used per replication
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double null_median = 0.0;
  double null_q1 = 0.0;
  double null_q3 = 0.0;
  /// Median of the null values: the distance seen when both clouds share one law.
  double noise_floor = 0.0;
};

struct McReport {
  std::string experiment;
  std::string quantity;
  std::string centering;
  TrendRule rule;
  std::vector<McRow> rows;
  bool trend_ok = false;
  std::size_t violations = 0;
  bool floor_ok = false;
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::string> warnings;
  double runtime_seconds = 0.0;  ///< informational; kept out of the deterministic report
};

/// Counts adjacent order violations of `medians` under `rule`.
std::size_t count_trend_violations(std::span<const double> medians, const TrendRule& rule);

/// Fills trend_ok, violations, floor_ok and verdict from the rows.
void apply_verdict(McReport& report);

/// Warnings when the truncation rule does not meet the rate conditions for the
/// model's spectrum family.
std::vector<std::string> rate_rule_warnings(const ModelSpec& model, const KRule& rule);

/// Seed of outer dataset r at sample size n.
std::uint64_t dataset_seed(std::uint64_t master_seed, std::size_t n, std::size_t r);

/// Oracle-hook fit for the null configuration: psi_hat = 0, Pi_hat = 0 and the
/// bootstrap resamples the (centered) true innovations.
FarFit null_fit(const Simulation& sim);

McReport check_theorem1(const McConfig& cfg);
McReport check_theorem2_mean(const McConfig& cfg);
McReport check_theorem3_gamma(const McConfig& cfg);

/// Which reference point centers the bootstrap lag-1 autocovariance.
enum class CCentering { projected, naive };
McReport check_theorem4_c(const McConfig& cfg, CCentering centering = CCentering::projected);

struct RateRow {
  std::size_t n = 0;
  std::size_t k = 0;
  double expr5 = 0.0;           ///< (k/n) sum_{j<=k} 1/a_j^2
  double inv_lambda_ratio = 0.0;///< (1/lambda_k) / (n^{1/4} / (log n)^beta5)
  double expr6 = 0.0;           ///< (1/lambda_k) sum_{j<=k} 1/a_j
  double expr6_ratio = 0.0;     ///< expr6 / (n^{1/4} / (log n)^beta6)
};

struct RateTable {
  std::string spectrum;
  std::string rule;
  double beta5 = 0.6;
  double beta6 = 1.1;
  std::vector<RateRow> rows;
  bool expr5_decreasing = false;  ///< strictly decreasing over the grid
  bool ratios_bounded = false;    ///< both ratios never exceed their value at the first n
  Verdict verdict = Verdict::inconclusive;
};

/// Evaluates the rate expressions on an analytically known spectrum of Gamma.
RateTable check_rate_conditions(const Spectrum& spectrum, std::span<const std::size_t> n_grid, const KRule& rule,
                                double beta5 = 0.6, double beta6 = 1.1);

}  // namespace farboot
