#include "farboot/bootstrap.hpp"

#include "farboot/parallel.hpp"
#include "farboot/stats.hpp"

#include <cmath>
#include <sstream>

namespace farboot {

std::string to_string(X0Policy policy) { return policy == X0Policy::zero ? "zero" : "copy_x0"; }

X0Policy parse_x0_policy(const std::string& text) {
  if (text == "zero") return X0Policy::zero;
  if (text == "copy_x0") return X0Policy::copy_x0;
  throw std::invalid_argument("unknown x0 policy '" + text + "' (expected zero or copy_x0)");
}

Eigen::MatrixXd draw_bootstrap_innovations(const FarFit& fit, std::size_t n, Rng& rng) {
  const Eigen::MatrixXd& pool = fit.centered_residuals;
  if (pool.cols() == 0) throw std::invalid_argument("draw_bootstrap_innovations: empty residual list");
  const auto size = static_cast<std::size_t>(pool.cols());
  Eigen::MatrixXd eps(pool.rows(), static_cast<Eigen::Index>(n));
  for (Eigen::Index t = 0; t < eps.cols(); ++t) eps.col(t) = pool.col(static_cast<Eigen::Index>(rng.below(size)));
  return eps;
}

void require_stationary(const FarFit& fit) {
  const double norm_psi = op_norm(fit.psi_hat);
  if (!(norm_psi < 1.0)) {
    std::ostringstream os;
    os << "bootstrap refused: op_norm(psi_hat) = " << norm_psi
       << " >= 1, bootstrap paths would not be stationary (n = " << fit.n << ", k = " << fit.k << ")";
    throw NonStationaryFit(os.str());
  }
}

namespace {

Eigen::VectorXd start_value(const FarFit& fit, X0Policy policy) {
  if (policy == X0Policy::copy_x0) return fit.x0.coeffs();
  return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fit.dim()));
}

}  // namespace

Sample bootstrap_path_from(const FarFit& fit, X0Policy policy, const Eigen::MatrixXd& innovations) {
  return Sample(run_recursion(fit.psi_hat.mat(), start_value(fit, policy), innovations), 0, "bootstrap");
}

Sample bootstrap_path(const FarFit& fit, std::size_t n, const BootstrapConfig& cfg, Rng& rng) {
  require_stationary(fit);
  return bootstrap_path_from(fit, cfg.x0_policy, draw_bootstrap_innovations(fit, n, rng));
}

std::uint64_t replication_seed(const BootstrapConfig& cfg, std::size_t b) { return stable_hash(cfg.seed, b); }

BootstrapStats bootstrap_statistics(const FarFit& fit, const BootstrapConfig& cfg, std::size_t threads) {
  if (cfg.replications < 1) throw std::invalid_argument("bootstrap: need at least one replication");
  require_stationary(fit);
  const std::size_t B = cfg.replications;
  const auto n = static_cast<Eigen::Index>(fit.n);
  const double inv_n = 1.0 / static_cast<double>(fit.n);
  const HsOp c_center = fit.c_hat_projected();

  BootstrapStats stats;
  stats.means.resize(B);
  stats.gammas.resize(B);
  stats.cs.resize(B);
  stats.centered_gammas.resize(B);
  stats.centered_cs.resize(B);

  parallel_for(B, threads, [&](std::size_t b) {
    Rng rng(replication_seed(cfg, b));
    const Eigen::MatrixXd eps = draw_bootstrap_innovations(fit, fit.n, rng);
    const Eigen::MatrixXd path = run_recursion(fit.psi_hat.mat(), start_value(fit, cfg.x0_policy), eps);
    const auto head = path.leftCols(n);
    Eigen::MatrixXd gamma = head * head.transpose() * inv_n;
    gamma = (0.5 * (gamma + gamma.transpose())).eval();
    stats.means[b] = FuncVec(Eigen::VectorXd(head.rowwise().mean()));
    stats.gammas[b] = HsOp(std::move(gamma));
    stats.cs[b] = HsOp(Eigen::MatrixXd(path.rightCols(n) * head.transpose() * inv_n));
    stats.centered_gammas[b] = stats.gammas[b] - fit.gamma_hat;
    stats.centered_cs[b] = stats.cs[b] - c_center;
  });
  return stats;
}

namespace {

Eigen::MatrixXd flatten(const std::vector<HsOp>& ops) {
  const auto d = static_cast<Eigen::Index>(ops.front().dim());
  Eigen::MatrixXd m(d * d, static_cast<Eigen::Index>(ops.size()));
  for (std::size_t b = 0; b < ops.size(); ++b) m.col(static_cast<Eigen::Index>(b)) = ops[b].mat().reshaped();
  return m;
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& cols) {
  const Eigen::MatrixXd centered = cols.colwise() - cols.rowwise().mean();
  const double denom = cols.cols() > 1 ? static_cast<double>(cols.cols() - 1) : 1.0;
  return centered * centered.transpose() / denom;
}

}  // namespace

BootstrapSummary summarize(const BootstrapStats& stats, std::size_t n) {
  if (stats.size() == 0) throw std::invalid_argument("summarize: empty bootstrap run");
  const std::size_t B = stats.size();
  const double root_n = std::sqrt(static_cast<double>(n));
  BootstrapSummary s;

  Eigen::MatrixXd means(static_cast<Eigen::Index>(stats.means.front().dim()), static_cast<Eigen::Index>(B));
  for (std::size_t b = 0; b < B; ++b) means.col(static_cast<Eigen::Index>(b)) = stats.means[b].coeffs();
  const Eigen::MatrixXd gammas = flatten(stats.gammas);
  const Eigen::MatrixXd cs = flatten(stats.cs);
  const auto d = static_cast<Eigen::Index>(stats.gammas.front().dim());

  s.mean_of_means = FuncVec(Eigen::VectorXd(means.rowwise().mean()));
  s.mean_of_gammas = HsOp(Eigen::MatrixXd(gammas.rowwise().mean().reshaped(d, d)));
  s.mean_of_cs = HsOp(Eigen::MatrixXd(cs.rowwise().mean().reshaped(d, d)));
  s.covariance_of_means = covariance(means);
  s.covariance_of_gammas = covariance(gammas);
  s.covariance_of_cs = covariance(cs);
  s.c_mean_standard_error = std::sqrt(s.covariance_of_cs.trace() / static_cast<double>(B));

  s.quantile_levels = {0.05, 0.25, 0.5, 0.75, 0.95};
  std::vector<double> mean_norms(B), gamma_norms(B), c_norms(B);
  for (std::size_t b = 0; b < B; ++b) {
    mean_norms[b] = root_n * norm(stats.means[b]);
    gamma_norms[b] = root_n * hs_norm(stats.centered_gammas[b]);
    c_norms[b] = root_n * hs_norm(stats.centered_cs[b]);
  }
  for (double p : s.quantile_levels) {
    s.mean_norm_quantiles.push_back(quantile(mean_norms, p));
    s.gamma_norm_quantiles.push_back(quantile(gamma_norms, p));
    s.c_norm_quantiles.push_back(quantile(c_norms, p));
  }
  return s;
}

}  // namespace farboot
