#include "farboot/mc_harness.hpp"

#include "farboot/detail/overloaded.hpp"
#include "farboot/mallows.hpp"
#include "farboot/parallel.hpp"
#include "farboot/stats.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace farboot {

namespace {

using detail::overloaded;

constexpr std::size_t kMinTrendReplications = 50;

// Sub-stream tags below a dataset seed.
constexpr std::uint64_t kProxyStream = 1;
constexpr std::uint64_t kNullDataStream = 2;
constexpr std::uint64_t kNullProxyStream = 3;
constexpr std::uint64_t kBootstrapStream = 4;
constexpr std::uint64_t kNullBootstrapStream = 5;

FarModel null_model(const FarModel& model) { return FarModel(HsOp(model.dim()), model.innovations()); }

void summarize_row(McRow& row) {
  row.median = median(row.values);
  row.q1 = quantile(row.values, 0.25);
  row.q3 = quantile(row.values, 0.75);
  row.null_median = median(row.null_values);
  row.null_q1 = quantile(row.null_values, 0.25);
  row.null_q3 = quantile(row.null_values, 0.75);
  row.noise_floor = row.null_median;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

FarModel ModelSpec::build() const {
  return FarModel(make_psi(psi, dim), InnovationSpec(dim, spectrum));
}

void McConfig::validate() const {
  if (n_grid.size() < 2) throw std::invalid_argument("mc config: n_grid needs at least two sample sizes");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 2) throw std::invalid_argument("mc config: sample sizes must be >= 2");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
      throw std::invalid_argument("mc config: n_grid must be strictly increasing");
    }
  }
  if (outer_replications < kMinTrendReplications || bootstrap_replications < kMinTrendReplications) {
    throw std::invalid_argument("mc config: R and B must be >= 50 for trend experiments");
  }
  if (outer_replications != bootstrap_replications) {
    throw std::invalid_argument("mc config: R and B must be equal (equal-size clouds)");
  }
  validate_k_rule(k_rule);
  if (!(beta_eq5 > 0.5)) throw std::invalid_argument("mc config: beta_eq5 must exceed 1/2");
  if (!(beta_eq6 > 1.0)) throw std::invalid_argument("mc config: beta_eq6 must exceed 1");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

std::size_t count_trend_violations(std::span<const double> medians, const TrendRule& rule) {
  std::size_t violations = 0;
  for (std::size_t i = 1; i < medians.size(); ++i) {
    const bool ok = rule.strict ? medians[i] < medians[i - 1] : medians[i] <= medians[i - 1];
    if (!ok) ++violations;
  }
  return violations;
}

void apply_verdict(McReport& report) {
  if (report.rows.empty()) throw std::invalid_argument("apply_verdict: empty report");
  std::vector<double> medians;
  for (const auto& row : report.rows) medians.push_back(row.median);
  report.violations = count_trend_violations(medians, report.rule);
  report.trend_ok = report.violations <= report.rule.allowed_violations;
  const McRow& first = report.rows.front();
  report.floor_ok = first.median > report.rule.floor_factor * first.noise_floor;
  if (!report.trend_ok) {
    report.verdict = Verdict::fail;
  } else {
    report.verdict = report.floor_ok ? Verdict::pass : Verdict::inconclusive;
  }
}

std::vector<std::string> rate_rule_warnings(const ModelSpec& model, const KRule& rule) {
  std::vector<std::string> warnings;
  std::visit(overloaded{
                 [&](const FixedK&) { warnings.emplace_back("fixed truncation level: k_n does not diverge"); },
                 [&](const LogRule& r) {
                   if (const auto* s = std::get_if<ExponentialSpectrum>(&model.spectrum); s && r.a > s->rho) {
                     warnings.emplace_back("log rule parameter a exceeds the spectrum decay rho; "
                                           "eigengap lower bound b*a^j does not hold");
                   }
                   if (r.regime == RateRegime::estimation) {
                     warnings.emplace_back("log rule uses estimation-regime constants; bootstrap consistency "
                                           "needs the stricter 1/(8 log(1/a)) bound");
                   }
                 },
                 [&](const PolyRule& r) {
                   if (std::holds_alternative<ExponentialSpectrum>(model.spectrum)) {
                     warnings.emplace_back("poly rule with exponentially decaying spectrum: polynomial "
                                           "eigengap lower bound does not hold");
                   } else if (const auto* s = std::get_if<PolynomialSpectrum>(&model.spectrum);
                              s && r.a < s->a + 2.0) {
                     warnings.emplace_back("poly rule parameter a is below the spectrum's gap exponent a+2");
                   }
                   if (r.regime == RateRegime::estimation) {
                     warnings.emplace_back("poly rule uses estimation-regime exponent; bootstrap consistency "
                                           "needs 1/(4(2a+1))");
                   }
                 },
             },
             rule);
  return warnings;
}

std::uint64_t dataset_seed(std::uint64_t master_seed, std::size_t n, std::size_t r) {
  return stable_hash(stable_hash(master_seed, n), r);
}

FarFit null_fit(const Simulation& sim) {
  const Sample& s = sim.sample;
  const std::size_t d = s.dim();
  FarFit f;
  f.n = s.n();
  f.gamma_hat = cov_est(s);
  f.c_hat = autocov_est(s);
  f.eigen = eigensystem(f.gamma_hat);
  f.k = 0;
  f.gamma_dagger = HsOp(d);
  f.pi_hat_k = HsOp(d);
  f.psi_hat = HsOp(d);
  f.raw_residuals = sim.innovations;
  f.centered_residuals = sim.innovations.colwise() - sim.innovations.rowwise().mean();
  f.sample_mean = sample_mean(s);
  f.x0 = s.at(0);
  f.xn = s.at(s.n());
  return f;
}

McReport check_theorem1(const McConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const FarModel model = cfg.model.build();
  const FarModel model0 = null_model(model);
  McReport report;
  report.experiment = "t1";
  report.quantity = "d2(centered residuals, innovation sample)";
  report.centering = "residual mean";
  report.rule = TrendRule{true, 0, 3.0};
  report.warnings = rate_rule_warnings(cfg.model, cfg.k_rule);

  const std::size_t R = cfg.outer_replications;
  for (std::size_t n : cfg.n_grid) {
    McRow row;
    row.n = n;
    row.values.assign(R, 0.0);
    row.null_values.assign(R, 0.0);
    row.ks.assign(R, 0);
    parallel_for(R, cfg.threads, [&](std::size_t r) {
      const std::uint64_t seed = dataset_seed(cfg.master_seed, n, r);
      const Sample s = simulate(model, n, cfg.model.burn_in, seed);
      const FarFit f = fit(s, cfg.k_rule);
      Rng proxy_rng(stable_hash(seed, kProxyStream));
      const PointCloud proxy(draw_innovations(model.innovations(), n, proxy_rng));
      row.values[r] = mallows_d2(PointCloud(f.centered_residuals), proxy);
      row.ks[r] = f.k;

      const Simulation sim0 = simulate_traced(model0, n, cfg.model.burn_in, stable_hash(seed, kNullDataStream));
      const FarFit f0 = null_fit(sim0);
      Rng null_proxy_rng(stable_hash(seed, kNullProxyStream));
      const PointCloud proxy0(draw_innovations(model0.innovations(), n, null_proxy_rng));
      row.null_values[r] = mallows_d2(PointCloud(f0.centered_residuals), proxy0);
    });
    summarize_row(row);
    report.rows.push_back(std::move(row));
  }
  apply_verdict(report);
  report.runtime_seconds = seconds_since(start);
  return report;
}

namespace {

/// Maps a dataset to its sqrt(n)-scaled statistic.
using OuterStatistic = std::function<Eigen::VectorXd(const FarFit&)>;
/// Maps a bootstrap run to its sqrt(n)-scaled cloud (columns).
using BootStatistic = std::function<Eigen::MatrixXd(const FarFit&, const BootstrapStats&)>;

Eigen::VectorXd flat(const HsOp& op) { return op.mat().reshaped(); }

McReport run_bootstrap_experiment(const McConfig& cfg, McReport report, const OuterStatistic& outer_real,
                                  const OuterStatistic& outer_null, const BootStatistic& boot_stat) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const FarModel model = cfg.model.build();
  const FarModel model0 = null_model(model);
  report.rule = TrendRule{false, 1, 3.0};
  report.warnings = rate_rule_warnings(cfg.model, cfg.k_rule);
  const std::size_t R = cfg.outer_replications;
  const std::size_t B = cfg.bootstrap_replications;

  for (std::size_t n : cfg.n_grid) {
    std::vector<FarFit> fits(R);
    std::vector<FarFit> null_fits(R);
    parallel_for(R, cfg.threads, [&](std::size_t r) {
      const std::uint64_t seed = dataset_seed(cfg.master_seed, n, r);
      fits[r] = fit(simulate(model, n, cfg.model.burn_in, seed), cfg.k_rule);
      null_fits[r] = null_fit(simulate_traced(model0, n, cfg.model.burn_in, stable_hash(seed, kNullDataStream)));
    });

    const auto build_outer = [&](const std::vector<FarFit>& fs, const OuterStatistic& stat) {
      Eigen::VectorXd first = stat(fs.front());
      Eigen::MatrixXd cloud(first.size(), static_cast<Eigen::Index>(R));
      cloud.col(0) = first;
      for (std::size_t r = 1; r < R; ++r) cloud.col(static_cast<Eigen::Index>(r)) = stat(fs[r]);
      return PointCloud(std::move(cloud));
    };
    const PointCloud outer = build_outer(fits, outer_real);
    const PointCloud outer0 = build_outer(null_fits, outer_null);

    McRow row;
    row.n = n;
    row.values.assign(R, 0.0);
    row.null_values.assign(R, 0.0);
    row.ks.assign(R, 0);
    parallel_for(R, cfg.threads, [&](std::size_t r) {
      const std::uint64_t seed = dataset_seed(cfg.master_seed, n, r);
      const BootstrapConfig bc{B, cfg.x0_policy, stable_hash(seed, kBootstrapStream)};
      const BootstrapStats stats = bootstrap_statistics(fits[r], bc);
      const double d = mallows_d2(outer, PointCloud(boot_stat(fits[r], stats)));
      row.values[r] = d * d;
      row.ks[r] = fits[r].k;

      const BootstrapConfig bc0{B, cfg.x0_policy, stable_hash(seed, kNullBootstrapStream)};
      const BootstrapStats stats0 = bootstrap_statistics(null_fits[r], bc0);
      const double d0 = mallows_d2(outer0, PointCloud(boot_stat(null_fits[r], stats0)));
      row.null_values[r] = d0 * d0;
    });
    summarize_row(row);
    report.rows.push_back(std::move(row));
  }
  apply_verdict(report);
  report.runtime_seconds = seconds_since(start);
  return report;
}

template <class Extract>
Eigen::MatrixXd stack_boot(const BootstrapStats& stats, double scale, Extract&& extract) {
  Eigen::VectorXd first = extract(0);
  Eigen::MatrixXd cloud(first.size(), static_cast<Eigen::Index>(stats.size()));
  cloud.col(0) = scale * first;
  for (std::size_t b = 1; b < stats.size(); ++b) cloud.col(static_cast<Eigen::Index>(b)) = scale * extract(b);
  return cloud;
}

}  // namespace

McReport check_theorem2_mean(const McConfig& cfg) {
  McReport report;
  report.experiment = "t2";
  report.quantity = "n * d2^2(sample mean, bootstrap sample mean)";
  report.centering = "none";
  const auto outer = [](const FarFit& f) -> Eigen::VectorXd {
    return std::sqrt(static_cast<double>(f.n)) * f.sample_mean.coeffs();
  };
  const auto boot = [](const FarFit& f, const BootstrapStats& s) {
    return stack_boot(s, std::sqrt(static_cast<double>(f.n)), [&](std::size_t b) { return s.means[b].coeffs(); });
  };
  return run_bootstrap_experiment(cfg, std::move(report), outer, outer, boot);
}

McReport check_theorem3_gamma(const McConfig& cfg) {
  const FarModel model = cfg.model.build();
  const HsOp gamma = stationary_cov(model).gamma;
  const HsOp gamma0 = model.innovations().covariance();
  McReport report;
  report.experiment = "t3";
  report.quantity = "n * d2^2(Gamma_hat - Gamma, Gamma_hat* - Gamma_hat)";
  report.centering = "Gamma_hat";
  const auto outer = [gamma](const FarFit& f) -> Eigen::VectorXd {
    return std::sqrt(static_cast<double>(f.n)) * flat(f.gamma_hat - gamma);
  };
  const auto outer0 = [gamma0](const FarFit& f) -> Eigen::VectorXd {
    return std::sqrt(static_cast<double>(f.n)) * flat(f.gamma_hat - gamma0);
  };
  const auto boot = [](const FarFit& f, const BootstrapStats& s) {
    return stack_boot(s, std::sqrt(static_cast<double>(f.n)), [&](std::size_t b) { return flat(s.centered_gammas[b]); });
  };
  return run_bootstrap_experiment(cfg, std::move(report), outer, outer0, boot);
}

McReport check_theorem4_c(const McConfig& cfg, CCentering centering) {
  const FarModel model = cfg.model.build();
  const HsOp c = stationary_cov(model).c;
  const HsOp c0(model.dim());
  McReport report;
  report.experiment = centering == CCentering::projected ? "t4" : "t4_naive";
  report.quantity = "n * d2^2(C_hat - C, C_hat* - center)";
  report.centering = centering == CCentering::projected ? "C_hat Pi_hat_k" : "C_hat";
  const auto outer = [c](const FarFit& f) -> Eigen::VectorXd {
    return std::sqrt(static_cast<double>(f.n)) * flat(f.c_hat - c);
  };
  const auto outer0 = [c0](const FarFit& f) -> Eigen::VectorXd {
    return std::sqrt(static_cast<double>(f.n)) * flat(f.c_hat - c0);
  };
  const auto boot = [centering](const FarFit& f, const BootstrapStats& s) {
    const double scale = std::sqrt(static_cast<double>(f.n));
    if (centering == CCentering::projected) {
      return stack_boot(s, scale, [&](std::size_t b) { return flat(s.centered_cs[b]); });
    }
    return stack_boot(s, scale, [&](std::size_t b) { return flat(s.cs[b] - f.c_hat); });
  };
  return run_bootstrap_experiment(cfg, std::move(report), outer, outer0, boot);
}

RateTable check_rate_conditions(const Spectrum& spectrum, std::span<const std::size_t> n_grid, const KRule& rule,
                                double beta5, double beta6) {
  validate_spectrum(spectrum);
  validate_k_rule(rule);
  if (n_grid.empty()) throw std::invalid_argument("check_rate_conditions: empty n grid");
  RateTable table;
  table.spectrum = describe(spectrum);
  table.rule = to_string(rule);
  table.beta5 = beta5;
  table.beta6 = beta6;

  const auto lambda = [&](std::size_t j) { return spectrum_value(spectrum, j); };
  const auto gap = [&](std::size_t j) {
    const double right = lambda(j) - lambda(j + 1);
    return j == 1 ? right : std::min(lambda(j - 1) - lambda(j), right);
  };

  for (std::size_t n : n_grid) {
    if (n < 2) throw std::invalid_argument("check_rate_conditions: n must be >= 2");
    RateRow row;
    row.n = n;
    const long bound = rule_bound(rule, n);
    row.k = bound < 1 ? 1 : static_cast<std::size_t>(bound);
    double inv_gap_sq = 0.0;
    double inv_gap = 0.0;
    for (std::size_t j = 1; j <= row.k; ++j) {
      const double a = gap(j);
      inv_gap_sq += 1.0 / (a * a);
      inv_gap += 1.0 / a;
    }
    const double nn = static_cast<double>(n);
    const double inv_lambda_k = 1.0 / lambda(row.k);
    row.expr5 = static_cast<double>(row.k) / nn * inv_gap_sq;
    row.inv_lambda_ratio = inv_lambda_k / (std::pow(nn, 0.25) / std::pow(std::log(nn), beta5));
    row.expr6 = inv_lambda_k * inv_gap;
    row.expr6_ratio = row.expr6 / (std::pow(nn, 0.25) / std::pow(std::log(nn), beta6));
    table.rows.push_back(row);
  }

  table.expr5_decreasing = true;
  table.ratios_bounded = true;
  const RateRow& first = table.rows.front();
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    if (!(table.rows[i].expr5 < table.rows[i - 1].expr5)) table.expr5_decreasing = false;
    if (table.rows[i].expr6_ratio > first.expr6_ratio || table.rows[i].inv_lambda_ratio > first.inv_lambda_ratio) {
      table.ratios_bounded = false;
    }
  }
  table.verdict = table.expr5_decreasing && table.ratios_bounded ? Verdict::pass : Verdict::fail;
  return table;
}

}  // namespace farboot
