// Acceptance gate: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes.

#include "farboot/bootstrap.hpp"
#include "farboot/cli.hpp"
#include "farboot/estimation.hpp"
#include "farboot/io.hpp"
#include "farboot/mallows.hpp"
#include "farboot/mc_harness.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace farboot;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Eigen::VectorXd gaussian_vector(std::size_t d, Rng& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  return v;
}

Eigen::MatrixXd gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j) = gaussian_vector(rows, rng);
  return m;
}

// ---------------------------------------------------------------------------
// 1. Exact algebraic identities on seeded fits.

double moving_average_error(const Simulation& sim, const HsOp& psi) {
  const std::size_t n = sim.sample.n();
  const Eigen::MatrixXd& x = sim.sample.states();
  std::vector<Eigen::MatrixXd> powers{Eigen::MatrixXd::Identity(psi.mat().rows(), psi.mat().cols())};
  for (std::size_t j = 1; j <= n; ++j) powers.push_back(psi.mat() * powers.back());
  double worst = 0.0;
  for (std::size_t t = 0; t <= n; ++t) {
    Eigen::VectorXd ma = powers[t] * x.col(0);
    for (std::size_t k = 1; k <= t; ++k) ma += powers[t - k] * sim.innovations.col(static_cast<Eigen::Index>(k - 1));
    worst = std::max(worst, (ma - x.col(static_cast<Eigen::Index>(t))).norm());
  }
  return worst;
}

Outcome criterion_identities() {
  const std::size_t dims[] = {3, 5, 10};
  const std::size_t ns[] = {50, 200, 1000};
  double worst = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const std::size_t d = dims[i % 3];
    const std::size_t n = ns[(i / 3) % 3];
    const FarModel model(make_psi(DenseRandomPsi{0.8, 700 + i}, d), InnovationSpec(d, ExponentialSpectrum{1.0, 0.6}));
    const Simulation sim = simulate_traced(model, n, 200, 9000 + i);
    const FarFit f = fit_with_k(sim.sample, 1 + i % d);
    const double nn = static_cast<double>(n);

    const HsOp sn = s_n_operator(sim.sample, model.psi(), sim.innovations);
    const double errors[] = {
        diagnose(f).max_identity_error(),
        hs_norm(sn - nn * (f.c_hat - model.psi() * f.gamma_hat)),
        hs_norm(f.psi_hat - model.psi() * f.pi_hat_k - (1.0 / nn) * sn * f.gamma_dagger),
        hs_norm(residual_second_moment(f) - residual_second_moment_expanded(f)),
        moving_average_error(sim, model.psi()),
    };
    worst = std::max(worst, *std::max_element(std::begin(errors), std::end(errors)));
  }
  return {worst <= 1e-9, "100 fits, max identity error " + fmt(worst)};
}

// ---------------------------------------------------------------------------
// 2. Norm calculus on random instances.

Outcome criterion_norms() {
  Rng rng(2024);
  double worst = 0.0;
  auto slack = [&worst](double excess, double scale) { worst = std::max(worst, excess / (1.0 + scale)); };
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t d = 1 + rng.below(10);
    const FuncVec x(gaussian_vector(d, rng)), y(gaussian_vector(d, rng)), z(gaussian_vector(d, rng));
    const HsOp a(gaussian_matrix(d, d, rng)), b(gaussian_matrix(d, d, rng)), s(gaussian_matrix(d, d, rng));

    const HsOp yz = kron(y, z);
    slack(hs_norm(adjoint(yz) - kron(z, y)), hs_norm(yz));
    slack(norm(yz(x) - inner(y, x) * z), norm(z) * std::abs(inner(y, x)));
    const HsOp lhs = compose(b, compose(yz, adjoint(a)));
    slack(hs_norm(lhs - kron(a(y), b(z))), hs_norm(lhs));
    slack(std::abs(hs_norm(yz) - norm(y) * norm(z)), norm(y) * norm(z));
    const double bound = op_norm(a) * hs_norm(s) * op_norm(b);
    slack(std::max(0.0, hs_norm(a * s * b) - bound), bound);
    slack(std::max(0.0, op_norm(s) - hs_norm(s)), hs_norm(s));

    const Eigen::MatrixXd g = gaussian_matrix(d, d + 2, rng);
    const Eigen::MatrixXd e = 0.1 * gaussian_matrix(d, d, rng);
    const HsOp gamma(g * g.transpose());
    const HsOp gamma_hat(gamma.mat() + 0.5 * (e + e.transpose()));
    const EigenSystem truth = eigensystem(gamma);
    const EigenSystem est = eigensystem(gamma_hat);
    const double dev = op_norm(gamma_hat - gamma);
    for (std::size_t j = 0; j < d; ++j) {
      slack(std::max(0.0, std::abs(est.lambdas[j] - truth.lambdas[j]) - dev), truth.lambdas[0]);
    }
  }
  return {worst <= 1e-10, "500 instances, max relative slack " + fmt(worst)};
}

// ---------------------------------------------------------------------------
// 3. Exact assignment against the permutation oracle, plus metric axioms.

PointCloud random_cloud(std::size_t d, std::size_t m, Rng& rng) { return PointCloud(gaussian_matrix(d, m, rng)); }

Outcome criterion_mallows() {
  Rng rng(3033);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t m = 1 + rng.below(7);
    if (rep % 2 == 0) {
      const std::size_t d = 1 + rng.below(5);
      const PointCloud xs = random_cloud(d, m, rng), ys = random_cloud(d, m, rng);
      worst = std::max(worst, std::abs(mallows_d2(xs, ys) - mallows_bruteforce(xs, ys)));
    } else {
      const std::size_t d = 1 + rng.below(3);
      std::vector<HsOp> as, bs;
      for (std::size_t i = 0; i < m; ++i) {
        as.emplace_back(gaussian_matrix(d, d, rng));
        bs.emplace_back(gaussian_matrix(d, d, rng));
      }
      worst = std::max(worst, std::abs(mallows_operator_d2(as, bs) -
                                       mallows_bruteforce(PointCloud::from_operators(as), PointCloud::from_operators(bs))));
    }
  }
  std::size_t axiom_failures = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t m = 1 + rng.below(20);
    const std::size_t d = 1 + rng.below(5);
    const PointCloud x = random_cloud(d, m, rng), y = random_cloud(d, m, rng), z = random_cloud(d, m, rng);
    const double xy = mallows_d2(x, y), yx = mallows_d2(y, x);
    const bool ok = mallows_d2(x, x) == 0.0 && xy > 0.0 && std::abs(xy - yx) <= 1e-10 &&
                    mallows_d2(x, z) <= xy + mallows_d2(y, z) + 1e-10;
    if (!ok) ++axiom_failures;
  }
  return {worst <= 1e-10 && axiom_failures == 0,
          "max |solver - brute force| " + fmt(worst) + ", metric axiom failures " + std::to_string(axiom_failures)};
}

// ---------------------------------------------------------------------------
// 4. Bootstrap expectation of the lag-1 autocovariance sits at C_hat Pi_hat.

Outcome criterion_centering() {
  const FarModel model(make_psi(DiagonalExponentialPsi{0.9, 0.5}, 5), InnovationSpec(5, ExponentialSpectrum{1.0, 0.5}));
  const std::size_t n = 200, B = 5000, wanted = 100, max_tries = 300;
  std::size_t eligible = 0, closer = 0, tried = 0;
  for (std::uint64_t seed = 0; eligible < wanted && tried < max_tries; ++seed, ++tried) {
    const FarFit f = fit_with_k(simulate(model, n, kDefaultBurnIn, 40000 + seed), 2);
    const BootstrapStats stats = bootstrap_statistics(f, BootstrapConfig{B, X0Policy::zero, 50000 + seed});
    const BootstrapSummary s = summarize(stats, n);
    const HsOp projected = f.c_hat_projected();
    if (!(hs_norm(f.c_hat - projected) > 10.0 * s.c_mean_standard_error)) continue;
    ++eligible;
    if (hs_norm(s.mean_of_cs - projected) < hs_norm(s.mean_of_cs - f.c_hat)) ++closer;
  }
  return {eligible == wanted && closer >= 95, std::to_string(closer) + "/" + std::to_string(eligible) +
                                                  " eligible datasets closer to C_hat Pi_hat (" +
                                                  std::to_string(tried) + " tried)"};
}

// ---------------------------------------------------------------------------
// 5 and 6. Monte Carlo trend experiments at the default configuration.

std::string medians(const McReport& r) {
  std::string s;
  for (const auto& row : r.rows) s += (s.empty() ? "" : " ") + fmt(row.median);
  return s;
}

std::string describe_report(const McReport& r) {
  return r.experiment + " " + to_string(r.verdict) + " (medians " + medians(r) + "; floor at n=" +
         std::to_string(r.rows.front().n) + " " + fmt(r.rows.front().noise_floor) + "; violations " +
         std::to_string(r.violations) + ")";
}

Outcome criterion_innovation_trend() {
  const McReport r = check_theorem1(McConfig{});
  return {r.verdict == Verdict::pass, describe_report(r)};
}

Outcome criterion_bootstrap_trends() {
  const McConfig cfg;
  const McReport reports[] = {check_theorem2_mean(cfg), check_theorem3_gamma(cfg),
                              check_theorem4_c(cfg, CCentering::projected)};
  const McReport naive = check_theorem4_c(cfg, CCentering::naive);
  bool ok = true;
  std::string detail;
  for (const auto& r : reports) {
    ok = ok && r.verdict == Verdict::pass;
    detail += describe_report(r) + "; ";
  }
  const auto at200 = [](const McReport& r) {
    for (const auto& row : r.rows) {
      if (row.n == 200) return row.median;
    }
    return std::nan("");
  };
  const double correct = at200(reports[2]), wrong = at200(naive);
  const bool contrast = wrong > correct;
  detail += "naive vs correct at n=200: " + fmt(wrong) + " vs " + fmt(correct);
  return {ok && contrast, detail};
}

// ---------------------------------------------------------------------------
// 7. Rate-condition tables and hand-computed spot values.

Outcome criterion_rates() {
  const std::vector<std::size_t> grid{1000, 10000, 100000, 1000000};
  const RateTable expo = check_rate_conditions(ExponentialSpectrum{1.0, 0.5}, grid, LogRule{0.5, 0.05, RateRegime::bootstrap});
  const RateTable poly = check_rate_conditions(PolynomialSpectrum{1.0, 2.0}, grid, PolyRule{2.0, 0.01, RateRegime::bootstrap});
  bool spots = true;
  for (const auto& row : expo.rows) {
    // lambda = (1/2, 1/4, ...): a_1 = 1/4, so expr5 = 16/n and expr6 = 2 * 4.
    spots = spots && row.k == 1 && std::abs(row.expr5 * static_cast<double>(row.n) - 16.0) <= 1e-12 &&
            std::abs(row.expr6 - 8.0) <= 1e-12;
  }
  for (const auto& row : poly.rows) {
    // lambda = (1, 1/8, ...): a_1 = 7/8, so expr5 = (64/49)/n and expr6 = 8/7.
    spots = spots && row.k == 1 && std::abs(row.expr5 * static_cast<double>(row.n) - 64.0 / 49.0) <= 1e-12 &&
            std::abs(row.expr6 - 8.0 / 7.0) <= 1e-12;
  }
  const std::vector<double> five{5, 4, 3, 2, 1};
  const EigenSystem es = eigensystem(HsOp::diagonal(five));
  spots = spots && rule_bound(LogRule{0.5, 0.05, RateRegime::bootstrap}, 1000) == 0 &&
          select_k(es, 1000, LogRule{0.5, 0.05, RateRegime::bootstrap}) == 1 &&
          rule_bound(PolyRule{2.0, 0.01, RateRegime::bootstrap}, 10000) == 1 &&
          select_k(es, 10000, PolyRule{2.0, 0.01, RateRegime::bootstrap}) == 1;
  const bool ok = expo.verdict == Verdict::pass && poly.verdict == Verdict::pass && spots;
  return {ok, "exponential " + to_string(expo.verdict) + ", polynomial " + to_string(poly.verdict) +
                  ", spot values " + (spots ? "match" : "differ")};
}

// ---------------------------------------------------------------------------
// 8. Byte-identical reruns of the validate subcommand.

int run_validate(const std::string& experiment, const fs::path& dir, std::string& out) {
  const std::string dir_s = dir.string();
  const char* argv[] = {"farboot", "validate", "--experiment", experiment.c_str(), "--out-dir", dir_s.c_str()};
  std::ostringstream os, es;
  const int code = run_cli(6, argv, os, es);
  out = os.str();
  return code;
}

Outcome criterion_reproducible() {
  const fs::path root = fs::temp_directory_path() / ("farboot_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  bool identical = true;
  std::string detail;
  for (const std::string experiment : {"t2", "rates"}) {
    std::string out_a, out_b;
    const int ca = run_validate(experiment, root / (experiment + "_a"), out_a);
    const int cb = run_validate(experiment, root / (experiment + "_b"), out_b);
    bool same = ca == cb && ca != kExitError && out_a == out_b;
    for (const std::string prefix : {"report_", "raw_", "long_"}) {
      const std::string ext = prefix == "report_" ? ".json" : ".csv";
      const fs::path fa = root / (experiment + "_a") / (prefix + experiment + ext);
      const fs::path fb = root / (experiment + "_b") / (prefix + experiment + ext);
      if (experiment == "rates" && prefix != "report_") continue;
      same = same && fs::exists(fa) && read_text_file(fa.string()) == read_text_file(fb.string());
    }
    identical = identical && same;
    detail += experiment + (same ? " identical" : " differs") + "; ";
  }
  fs::remove_all(root);
  return {identical, detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"1 algebraic identities", criterion_identities},
      {"2 norm calculus", criterion_norms},
      {"3 mallows exactness", criterion_mallows},
      {"4 bootstrap centering discrimination", criterion_centering},
      {"5 innovation law trend", criterion_innovation_trend},
      {"6 bootstrap trends and naive centering contrast", criterion_bootstrap_trends},
      {"7 rate-condition tables", criterion_rates},
      {"8 validate reproducibility", criterion_reproducible},
  };
  bool all = true;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.name << "] " << o.detail << " (" << fmt(secs) << " s)"
              << std::endl;
  }
  return all ? 0 : 1;
}
