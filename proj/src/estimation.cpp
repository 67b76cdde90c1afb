#include "farboot/estimation.hpp"

#include "farboot/detail/overloaded.hpp"
#include "farboot/detail/shortest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace farboot {

namespace {

using detail::overloaded;

double inverse_log_constant(RateRegime regime) { return regime == RateRegime::bootstrap ? 8.0 : 4.0; }

double poly_exponent(double a, RateRegime regime) {
  return regime == RateRegime::bootstrap ? 1.0 / (4.0 * (2.0 * a + 1.0)) : 1.0 / (4.0 * a);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view s, std::string_view context) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("k rule '" + std::string(context) + "': bad number '" + std::string(s) + "'");
  }
}

Eigen::MatrixXd lagged_outer(const Sample& s, Eigen::Index lag) {
  const auto n = static_cast<Eigen::Index>(s.n());
  const auto& x = s.states();
  return x.middleCols(lag, n) * x.leftCols(n).transpose() / static_cast<double>(n);
}

}  // namespace

std::size_t EigenSystem::invertible_count() const {
  if (lambdas.empty() || !(lambdas.front() > 0.0)) return 0;
  const double floor = kLambdaFloorRatio * lambdas.front();
  return static_cast<std::size_t>(
      std::count_if(lambdas.begin(), lambdas.end(), [floor](double l) { return l > floor; }));
}

EigenSystem eigensystem(const HsOp& gamma_hat) {
  const Eigen::MatrixXd sym = 0.5 * (gamma_hat.mat() + gamma_hat.mat().transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensystem: decomposition failed");
  const auto d = static_cast<std::size_t>(sym.rows());
  EigenSystem es;
  es.lambdas.resize(d);
  es.vectors.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto src = static_cast<Eigen::Index>(d - 1 - j);
    es.lambdas[j] = solver.eigenvalues()(src);
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
      if (std::abs(v(i)) > std::abs(v(pivot))) pivot = i;
    }
    if (v(pivot) < 0.0) v = -v;
    es.vectors.emplace_back(std::move(v));
  }
  es.gaps.resize(d);
  const double scale = d > 0 ? std::abs(es.lambdas.front()) : 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double right = es.lambdas[j] - (j + 1 < d ? es.lambdas[j + 1] : 0.0);
    es.gaps[j] = j == 0 ? right : std::min(es.lambdas[j - 1] - es.lambdas[j], right);
    if (j + 1 < d && es.lambdas[j] - es.lambdas[j + 1] < kDegenerateGapRatio * scale) {
      es.near_degenerate = true;
    }
  }
  return es;
}

void validate_k_rule(const KRule& rule) {
  std::visit(overloaded{
                 [](const LogRule& r) {
                   if (!(r.a > 0.0 && r.a < 1.0)) throw std::invalid_argument("log rule: need 0 < a < 1");
                   const double limit = 1.0 / (inverse_log_constant(r.regime) * std::log(1.0 / r.a));
                   if (!(r.delta > 0.0 && r.delta < limit)) {
                     throw std::invalid_argument("log rule: need 0 < delta < " + std::to_string(limit));
                   }
                 },
                 [](const PolyRule& r) {
                   if (!(r.a > 1.0)) throw std::invalid_argument("poly rule: need a > 1");
                   const double limit = poly_exponent(r.a, r.regime);
                   if (!(r.delta > 0.0 && r.delta < limit)) {
                     throw std::invalid_argument("poly rule: need 0 < delta < " + std::to_string(limit));
                   }
                 },
                 [](const FixedK& r) {
                   if (r.k < 1) throw std::invalid_argument("fixed rule: need k >= 1");
                 },
             },
             rule);
}

KRule parse_k_rule(std::string_view text) {
  auto parts = split(text, ':');
  RateRegime regime = RateRegime::bootstrap;
  if (parts.size() >= 2 && (parts.back() == "estimation" || parts.back() == "bootstrap")) {
    regime = parts.back() == "estimation" ? RateRegime::estimation : RateRegime::bootstrap;
    parts.pop_back();
  }
  KRule rule;
  if (parts.size() == 3 && parts[0] == "log") {
    rule = LogRule{parse_double(parts[1], text), parse_double(parts[2], text), regime};
  } else if (parts.size() == 3 && parts[0] == "poly") {
    rule = PolyRule{parse_double(parts[1], text), parse_double(parts[2], text), regime};
  } else if (parts.size() == 2 && parts[0] == "fixed") {
    std::size_t k = 0;
    const auto* end = parts[1].data() + parts[1].size();
    const auto [ptr, ec] = std::from_chars(parts[1].data(), end, k);
    if (ec != std::errc() || ptr != end) {
      throw std::invalid_argument("k rule '" + std::string(text) + "': bad integer");
    }
    rule = FixedK{k};
  } else {
    throw std::invalid_argument("unrecognized k rule '" + std::string(text) +
                                "' (expected log:A:DELTA, poly:A:DELTA or fixed:K)");
  }
  validate_k_rule(rule);
  return rule;
}

std::string to_string(const KRule& rule) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&os](const LogRule& r) {
                   os << "log:" << detail::shortest(r.a) << ':' << detail::shortest(r.delta);
                   if (r.regime == RateRegime::estimation) os << ":estimation";
                 },
                 [&os](const PolyRule& r) {
                   os << "poly:" << detail::shortest(r.a) << ':' << detail::shortest(r.delta);
                   if (r.regime == RateRegime::estimation) os << ":estimation";
                 },
                 [&os](const FixedK& r) { os << "fixed:" << r.k; },
             },
             rule);
  return os.str();
}

long rule_bound(const KRule& rule, std::size_t n) {
  validate_k_rule(rule);
  const double nn = static_cast<double>(n);
  return std::visit(overloaded{
                        [nn](const LogRule& r) {
                          const double coef = 1.0 / (inverse_log_constant(r.regime) * std::log(1.0 / r.a)) - r.delta;
                          return static_cast<long>(std::floor(coef * std::log(nn)));
                        },
                        [nn](const PolyRule& r) {
                          return static_cast<long>(std::floor(std::pow(nn, poly_exponent(r.a, r.regime) - r.delta)));
                        },
                        [](const FixedK& r) { return static_cast<long>(r.k); },
                    },
                    rule);
}

std::size_t select_k(const EigenSystem& eigen, std::size_t n, const KRule& rule) {
  const std::size_t positive = eigen.invertible_count();
  if (positive == 0) throw std::domain_error("select_k: no strictly positive eigenvalue");
  const long bound = rule_bound(rule, n);
  return std::clamp<std::size_t>(bound < 1 ? 1 : static_cast<std::size_t>(bound), 1, positive);
}

FuncVec sample_mean(const Sample& s) {
  const auto n = static_cast<Eigen::Index>(s.n());
  return FuncVec(Eigen::VectorXd(s.states().leftCols(n).rowwise().mean()));
}

HsOp cov_est(const Sample& s) {
  Eigen::MatrixXd g = lagged_outer(s, 0);
  g = (0.5 * (g + g.transpose())).eval();
  return HsOp(std::move(g));
}

HsOp autocov_est(const Sample& s) { return HsOp(lagged_outer(s, 1)); }

namespace {

void check_truncation(const EigenSystem& eigen, std::size_t k, const char* what) {
  if (k > eigen.dim()) throw std::invalid_argument(std::string(what) + ": k exceeds dimension");
}

Eigen::MatrixXd basis_block(const EigenSystem& eigen, std::size_t k) {
  const auto d = static_cast<Eigen::Index>(eigen.dim());
  Eigen::MatrixXd v(d, static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) v.col(static_cast<Eigen::Index>(j)) = eigen.vectors[j].coeffs();
  return v;
}

}  // namespace

HsOp reg_inverse(const EigenSystem& eigen, std::size_t k) {
  check_truncation(eigen, k, "reg_inverse");
  if (k < 1) throw std::invalid_argument("reg_inverse: k must be >= 1");
  const double floor = kLambdaFloorRatio * eigen.lambdas.front();
  if (!(eigen.lambdas[k - 1] > floor) || !(eigen.lambdas.front() > 0.0)) {
    throw std::domain_error("reg_inverse: lambda_" + std::to_string(k) +
                            " is below the floor 1e-12 * lambda_1; truncation level is ill-conditioned");
  }
  const Eigen::MatrixXd v = basis_block(eigen, k);
  Eigen::VectorXd inv(static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) inv(static_cast<Eigen::Index>(j)) = 1.0 / eigen.lambdas[j];
  Eigen::MatrixXd m = v * inv.asDiagonal() * v.transpose();
  return HsOp(Eigen::MatrixXd(0.5 * (m + m.transpose())));
}

HsOp projection(const EigenSystem& eigen, std::size_t k) {
  check_truncation(eigen, k, "projection");
  const Eigen::MatrixXd v = basis_block(eigen, k);
  Eigen::MatrixXd m = v * v.transpose();
  return HsOp(Eigen::MatrixXd(0.5 * (m + m.transpose())));
}

HsOp estimate_psi(const HsOp& c_hat, const HsOp& gamma_dagger) { return c_hat * gamma_dagger; }

Residuals residuals(const Sample& s, const HsOp& psi_hat) {
  require_same_dim(s.dim(), psi_hat.dim(), "residuals");
  const auto n = static_cast<Eigen::Index>(s.n());
  const auto& x = s.states();
  Residuals r;
  r.raw = x.rightCols(n);
  r.raw.noalias() -= psi_hat.mat() * x.leftCols(n);
  r.centered = r.raw.colwise() - r.raw.rowwise().mean();
  return r;
}

HsOp s_n_operator(const Sample& s, const HsOp& true_psi, const Eigen::MatrixXd& true_eps) {
  require_same_dim(s.dim(), true_psi.dim(), "s_n_operator");
  if (true_eps.cols() != static_cast<Eigen::Index>(s.n()) || true_eps.rows() != static_cast<Eigen::Index>(s.dim())) {
    throw DimensionError("s_n_operator: need one innovation per transition");
  }
  const auto n = static_cast<Eigen::Index>(s.n());
  return HsOp(Eigen::MatrixXd(true_eps * s.states().leftCols(n).transpose()));
}

FarFit fit_with_k(const Sample& s, std::size_t k) {
  FarFit f;
  f.n = s.n();
  f.gamma_hat = cov_est(s);
  f.c_hat = autocov_est(s);
  f.eigen = eigensystem(f.gamma_hat);
  if (k < 1 || k > f.eigen.invertible_count()) {
    throw std::domain_error("fit: truncation level " + std::to_string(k) + " outside [1, " +
                            std::to_string(f.eigen.invertible_count()) + "]");
  }
  f.k = k;
  f.gamma_dagger = reg_inverse(f.eigen, k);
  f.pi_hat_k = projection(f.eigen, k);
  f.psi_hat = estimate_psi(f.c_hat, f.gamma_dagger);
  Residuals r = residuals(s, f.psi_hat);
  f.raw_residuals = std::move(r.raw);
  f.centered_residuals = std::move(r.centered);
  f.sample_mean = sample_mean(s);
  f.x0 = s.at(0);
  f.xn = s.at(s.n());
  if (f.eigen.near_degenerate) {
    f.warnings.emplace_back("near-degenerate empirical eigenvalues (gap < 1e-10 * lambda_1)");
  }
  return f;
}

FarFit fit(const Sample& s, const KRule& rule) {
  if (s.n() < 2) throw std::invalid_argument("fit: need n >= 2");
  const EigenSystem es = eigensystem(cov_est(s));
  return fit_with_k(s, select_k(es, s.n(), rule));
}

HsOp residual_second_moment(const FarFit& f) {
  const Eigen::MatrixXd& r = f.raw_residuals;
  return HsOp(Eigen::MatrixXd(r * r.transpose() / static_cast<double>(r.cols())));
}

HsOp residual_second_moment_expanded(const FarFit& f) {
  const HsOp& psi = f.psi_hat;
  const double n = static_cast<double>(f.n);
  return f.gamma_hat - f.c_hat * adjoint(psi) - psi * adjoint(f.c_hat) + psi * f.gamma_hat * adjoint(psi) +
         (1.0 / n) * (kron(f.xn, f.xn) - kron(f.x0, f.x0));
}

FitDiagnostics diagnose(const FarFit& f) {
  FitDiagnostics d;
  d.projection_vs_gamma_dagger = hs_norm(f.pi_hat_k - f.gamma_hat * f.gamma_dagger);
  d.projection_vs_dagger_gamma = hs_norm(f.pi_hat_k - f.gamma_dagger * f.gamma_hat);
  d.psi_projection = hs_norm(f.psi_hat * f.pi_hat_k - f.psi_hat);
  d.residual_second_moment = hs_norm(residual_second_moment(f) - residual_second_moment_expanded(f));
  d.centered_residual_sum = f.centered_residuals.rowwise().sum().norm();
  d.projection_idempotence = hs_norm(f.pi_hat_k * f.pi_hat_k - f.pi_hat_k);
  d.projection_symmetry = hs_norm(f.pi_hat_k - adjoint(f.pi_hat_k));
  d.psi_hat_op_norm = op_norm(f.psi_hat);
  return d;
}

double FitDiagnostics::max_identity_error() const {
  return std::max({projection_vs_gamma_dagger, projection_vs_dagger_gamma, psi_projection, residual_second_moment,
                   centered_residual_sum, projection_idempotence, projection_symmetry});
}

}  // namespace farboot
