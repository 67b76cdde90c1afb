#pragma once

#include "farboot/hilbert.hpp"
#include "farboot/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace farboot {

/// lambda_j = c * rho^j, j = 1, 2, ...
struct ExponentialSpectrum {
  double c = 1.0;
  double rho = 0.5;
};

/// lambda_j = c * j^(-a-1), j = 1, 2, ...
struct PolynomialSpectrum {
  double c = 1.0;
  double a = 2.0;
};

using Spectrum = std::variant<ExponentialSpectrum, PolynomialSpectrum>;

/// Throws std::invalid_argument on c <= 0, rho outside (0,1), or a <= 1.
void validate_spectrum(const Spectrum& spectrum);

/// j-th value of the spectrum, j >= 1.
double spectrum_value(const Spectrum& spectrum, std::size_t j);

/// Gaussian innovation law with diagonal covariance diag(lambda_1..lambda_d).
class InnovationSpec {
 public:
  InnovationSpec(std::size_t dim, Spectrum spectrum);

  std::size_t dim() const { return dim_; }
  const Spectrum& spectrum() const { return spectrum_; }
  const std::vector<double>& variances() const { return variances_; }
  HsOp covariance() const;

 private:
  std::size_t dim_;
  Spectrum spectrum_;
  std::vector<double> variances_;
  std::vector<double> std_devs_;

  friend FuncVec draw_innovation(const InnovationSpec&, Rng&);
  friend Eigen::MatrixXd draw_innovations(const InnovationSpec&, std::size_t, Rng&);
};

/// Diagonal operator with entries gamma * rho^j, j = 1..d.
struct DiagonalExponentialPsi {
  double gamma = 0.9;
  double rho = 0.5;
};

/// Seeded Gaussian matrix rescaled to the given spectral norm.
struct DenseRandomPsi {
  double target_norm = 0.5;
  std::uint64_t seed = 0;
};

using PsiKind = std::variant<DiagonalExponentialPsi, DenseRandomPsi>;

HsOp make_psi(const PsiKind& kind, std::size_t dim);

/// The true process X_{t+1} = psi(X_t) + eps_{t+1}. Construction checks that
/// op_norm(psi) < 1 and that the dimensions agree.
class FarModel {
 public:
  FarModel(HsOp psi, InnovationSpec innovations);

  const HsOp& psi() const { return psi_; }
  const InnovationSpec& innovations() const { return innovations_; }
  std::size_t dim() const { return psi_.dim(); }

 private:
  HsOp psi_;
  InnovationSpec innovations_;
};

/// Observed states X_0..X_n stored column-wise in a d x (n+1) matrix.
class Sample {
 public:
  Sample(Eigen::MatrixXd states, std::uint64_t seed = 0, std::string model_tag = {});
  explicit Sample(const std::vector<FuncVec>& xs, std::uint64_t seed = 0, std::string model_tag = {});

  /// Number of transitions n; the sample holds n + 1 states.
  std::size_t n() const { return static_cast<std::size_t>(states_.cols()) - 1; }
  std::size_t dim() const { return static_cast<std::size_t>(states_.rows()); }
  FuncVec at(std::size_t t) const;
  const Eigen::MatrixXd& states() const { return states_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& model_tag() const { return model_tag_; }

 private:
  Eigen::MatrixXd states_;
  std::uint64_t seed_;
  std::string model_tag_;
};

/// A simulated sample together with the innovations eps_1..eps_n that produced
/// it (columns of a d x n matrix).
struct Simulation {
  Sample sample;
  Eigen::MatrixXd innovations;
};

FuncVec draw_innovation(const InnovationSpec& spec, Rng& rng);
/// `count` independent innovations as the columns of a d x count matrix.
Eigen::MatrixXd draw_innovations(const InnovationSpec& spec, std::size_t count, Rng& rng);

/// Runs X_t = psi(X_{t-1}) + eps_t from x0 over the columns of `innovations`;
/// returns the d x (n+1) state matrix.
Eigen::MatrixXd run_recursion(const Eigen::MatrixXd& psi, const Eigen::VectorXd& x0,
                              const Eigen::MatrixXd& innovations);

inline constexpr std::size_t kDefaultBurnIn = 500;

/// Starts at X = 0, runs burn_in steps, then records n + 1 states.
Sample simulate(const FarModel& model, std::size_t n, std::size_t burn_in, std::uint64_t seed);
Simulation simulate_traced(const FarModel& model, std::size_t n, std::size_t burn_in,
                           std::uint64_t seed);

struct StationaryCov {
  HsOp gamma;
  HsOp c;
};

/// Gamma = sum_k psi^k Gamma_eps (psi^k)^T, C = psi Gamma.
StationaryCov stationary_cov(const FarModel& model);

std::string describe(const PsiKind& kind);
std::string describe(const Spectrum& spectrum);

}  // namespace farboot
