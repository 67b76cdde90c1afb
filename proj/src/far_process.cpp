#include "farboot/far_process.hpp"

#include "farboot/detail/overloaded.hpp"
#include "farboot/detail/shortest.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace farboot {

namespace {

using detail::overloaded;

constexpr double kSeriesTolerance = 1e-14;
constexpr std::size_t kSeriesMaxTerms = 100000;

}  // namespace

void validate_spectrum(const Spectrum& spectrum) {
  std::visit(overloaded{
                 [](const ExponentialSpectrum& s) {
                   if (!(s.c > 0.0)) throw std::invalid_argument("exponential spectrum: c must be > 0");
                   if (!(s.rho > 0.0 && s.rho < 1.0)) {
                     throw std::invalid_argument("exponential spectrum: rho must lie in (0, 1)");
                   }
                 },
                 [](const PolynomialSpectrum& s) {
                   if (!(s.c > 0.0)) throw std::invalid_argument("polynomial spectrum: c must be > 0");
                   if (!(s.a > 1.0)) throw std::invalid_argument("polynomial spectrum: a must be > 1");
                 },
             },
             spectrum);
}

double spectrum_value(const Spectrum& spectrum, std::size_t j) {
  if (j == 0) throw std::out_of_range("spectrum_value: index starts at 1");
  const auto jj = static_cast<double>(j);
  return std::visit(overloaded{
                        [jj](const ExponentialSpectrum& s) { return s.c * std::pow(s.rho, jj); },
                        [jj](const PolynomialSpectrum& s) { return s.c * std::pow(jj, -s.a - 1.0); },
                    },
                    spectrum);
}

InnovationSpec::InnovationSpec(std::size_t dim, Spectrum spectrum)
    : dim_(dim), spectrum_(std::move(spectrum)) {
  if (dim_ == 0) throw std::invalid_argument("InnovationSpec: dimension must be positive");
  validate_spectrum(spectrum_);
  variances_.reserve(dim_);
  std_devs_.reserve(dim_);
  for (std::size_t j = 1; j <= dim_; ++j) {
    variances_.push_back(spectrum_value(spectrum_, j));
    std_devs_.push_back(std::sqrt(variances_.back()));
  }
}

HsOp InnovationSpec::covariance() const { return HsOp::diagonal(variances_); }

HsOp make_psi(const PsiKind& kind, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("make_psi: dimension must be positive");
  return std::visit(
      overloaded{
          [dim](const DiagonalExponentialPsi& p) {
            if (!(p.gamma > 0.0 && p.rho > 0.0) || !(p.gamma * p.rho < 1.0)) {
              throw std::invalid_argument("make_psi: diagonal_exponential needs 0 < gamma*rho < 1");
            }
            std::vector<double> entries(dim);
            for (std::size_t j = 0; j < dim; ++j) {
              entries[j] = p.gamma * std::pow(p.rho, static_cast<double>(j + 1));
            }
            return HsOp::diagonal(entries);
          },
          [dim](const DenseRandomPsi& p) {
            if (!(p.target_norm > 0.0 && p.target_norm < 1.0)) {
              throw std::invalid_argument("make_psi: dense_random needs 0 < target_norm < 1");
            }
            Rng rng(p.seed);
            const auto d = static_cast<Eigen::Index>(dim);
            Eigen::MatrixXd m(d, d);
            for (Eigen::Index j = 0; j < d; ++j) {
              for (Eigen::Index i = 0; i < d; ++i) m(i, j) = rng.normal();
            }
            HsOp raw{std::move(m)};
            const double scale = p.target_norm / op_norm(raw);
            return scale * raw;
          },
      },
      kind);
}

FarModel::FarModel(HsOp psi, InnovationSpec innovations)
    : psi_(std::move(psi)), innovations_(std::move(innovations)) {
  require_same_dim(psi_.dim(), innovations_.dim(), "FarModel");
  const double norm_psi = op_norm(psi_);
  if (!(norm_psi < 1.0)) {
    throw std::invalid_argument("FarModel: op_norm(psi) = " + std::to_string(norm_psi) +
                                " is not < 1; no stationary solution guaranteed");
  }
}

Sample::Sample(Eigen::MatrixXd states, std::uint64_t seed, std::string model_tag)
    : states_(std::move(states)), seed_(seed), model_tag_(std::move(model_tag)) {
  if (states_.cols() < 2) throw std::invalid_argument("Sample: need at least two states X_0, X_1");
  if (states_.rows() < 1) throw std::invalid_argument("Sample: dimension must be positive");
  if (!states_.allFinite()) throw std::invalid_argument("Sample: non-finite state");
}

namespace {

Eigen::MatrixXd stack(const std::vector<FuncVec>& xs) {
  if (xs.empty()) throw std::invalid_argument("Sample: empty state list");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.front().dim()), static_cast<Eigen::Index>(xs.size()));
  for (std::size_t t = 0; t < xs.size(); ++t) {
    require_same_dim(xs.front().dim(), xs[t].dim(), "Sample");
    m.col(static_cast<Eigen::Index>(t)) = xs[t].coeffs();
  }
  return m;
}

}  // namespace

Sample::Sample(const std::vector<FuncVec>& xs, std::uint64_t seed, std::string model_tag)
    : Sample(stack(xs), seed, std::move(model_tag)) {}

FuncVec Sample::at(std::size_t t) const {
  if (t > n()) throw std::out_of_range("Sample::at: index beyond X_n");
  return FuncVec(Eigen::VectorXd(states_.col(static_cast<Eigen::Index>(t))));
}

FuncVec draw_innovation(const InnovationSpec& spec, Rng& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(spec.dim_));
  for (std::size_t j = 0; j < spec.dim_; ++j) v(static_cast<Eigen::Index>(j)) = spec.std_devs_[j] * rng.normal();
  return FuncVec(std::move(v));
}

Eigen::MatrixXd draw_innovations(const InnovationSpec& spec, std::size_t count, Rng& rng) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(spec.dim_), static_cast<Eigen::Index>(count));
  for (Eigen::Index t = 0; t < m.cols(); ++t) {
    for (std::size_t j = 0; j < spec.dim_; ++j) {
      m(static_cast<Eigen::Index>(j), t) = spec.std_devs_[j] * rng.normal();
    }
  }
  return m;
}

Eigen::MatrixXd run_recursion(const Eigen::MatrixXd& psi, const Eigen::VectorXd& x0,
                              const Eigen::MatrixXd& innovations) {
  if (psi.rows() != x0.size() || innovations.rows() != x0.size()) {
    throw DimensionError("run_recursion: dimension mismatch");
  }
  Eigen::MatrixXd states(x0.size(), innovations.cols() + 1);
  states.col(0) = x0;
  for (Eigen::Index t = 1; t < states.cols(); ++t) {
    states.col(t).noalias() = psi * states.col(t - 1);
    states.col(t) += innovations.col(t - 1);
  }
  return states;
}

Simulation simulate_traced(const FarModel& model, std::size_t n, std::size_t burn_in,
                           std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  Rng rng(seed);
  const auto& psi = model.psi().mat();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.dim()));
  Eigen::VectorXd next(x.size());
  for (std::size_t t = 0; t < burn_in; ++t) {
    next.noalias() = psi * x;
    x = next + draw_innovation(model.innovations(), rng).coeffs();
  }
  Eigen::MatrixXd eps = draw_innovations(model.innovations(), n, rng);
  Eigen::MatrixXd states = run_recursion(psi, x, eps);
  std::ostringstream tag;
  tag << "far1(d=" << model.dim() << ", burn_in=" << burn_in << ")";
  return Simulation{Sample(std::move(states), seed, tag.str()), std::move(eps)};
}

Sample simulate(const FarModel& model, std::size_t n, std::size_t burn_in, std::uint64_t seed) {
  return simulate_traced(model, n, burn_in, seed).sample;
}

StationaryCov stationary_cov(const FarModel& model) {
  const Eigen::MatrixXd& psi = model.psi().mat();
  Eigen::MatrixXd term = model.innovations().covariance().mat();
  Eigen::MatrixXd gamma = term;
  std::size_t terms = 1;
  while (term.norm() >= kSeriesTolerance) {
    if (terms >= kSeriesMaxTerms) {
      throw std::runtime_error("stationary_cov: series did not converge; op_norm(psi) >= 1?");
    }
    term = psi * term * psi.transpose();
    gamma += term;
    ++terms;
  }
  gamma = (0.5 * (gamma + gamma.transpose())).eval();
  Eigen::MatrixXd c = psi * gamma;
  return StationaryCov{HsOp(std::move(gamma)), HsOp(std::move(c))};
}

std::string describe(const PsiKind& kind) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&os](const DiagonalExponentialPsi& p) {
                   os << "diagonal_exponential(gamma=" << detail::shortest(p.gamma) << ", rho=" << detail::shortest(p.rho) << ")";
                 },
                 [&os](const DenseRandomPsi& p) {
                   os << "dense_random(target_norm=" << detail::shortest(p.target_norm) << ", seed=" << p.seed << ")";
                 },
             },
             kind);
  return os.str();
}

std::string describe(const Spectrum& spectrum) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&os](const ExponentialSpectrum& s) { os << "exponential(c=" << detail::shortest(s.c) << ", rho=" << detail::shortest(s.rho) << ")"; },
                 [&os](const PolynomialSpectrum& s) { os << "polynomial(c=" << detail::shortest(s.c) << ", a=" << detail::shortest(s.a) << ")"; },
             },
             spectrum);
  return os.str();
}

}  // namespace farboot
