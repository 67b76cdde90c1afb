#include "farboot/hilbert.hpp"
#include "farboot/mallows.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace farboot;
using farboot::testing::random_funcvec;
using farboot::testing::random_op;

TEST_CASE("inner product examples") {
  CHECK(inner(FuncVec::basis(3, 0), FuncVec::basis(3, 0)) == 1.0);
  CHECK(inner(FuncVec::basis(3, 0), FuncVec::basis(3, 1)) == 0.0);
  CHECK(inner(FuncVec{1, 2}, FuncVec{3, 4}) == 11.0);
  CHECK(norm(FuncVec{3, 4}) == doctest::Approx(5.0));
  CHECK_THROWS_AS(inner(FuncVec{1, 2}, FuncVec{1, 2, 3}), DimensionError);
}

TEST_CASE("construction rejects non-finite and non-square input") {
  CHECK_THROWS(FuncVec{1.0, std::nan("")});
  CHECK_THROWS(HsOp(Eigen::MatrixXd::Zero(2, 3)));
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
  m(0, 1) = INFINITY;
  CHECK_THROWS(HsOp(m));
}

TEST_CASE("kron applies <y,x> z") {
  const auto e1 = FuncVec::basis(2, 0);
  const auto e2 = FuncVec::basis(2, 1);
  CHECK(kron(e1, e2)(e1) == e2);
  CHECK(kron(e1, e2)(e2) == FuncVec(2));
  CHECK(kron(FuncVec{1, 1}, FuncVec{2, 0})(FuncVec{1, 0}) == FuncVec{2, 0});

  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto y = random_funcvec(4, rng);
    const auto z = random_funcvec(4, rng);
    const auto x = random_funcvec(4, rng);
    const FuncVec lhs = kron(y, z)(x);
    double yx = 0.0;
    for (std::size_t i = 0; i < 4; ++i) yx += y[i] * x[i];
    for (std::size_t i = 0; i < 4; ++i) CHECK(lhs[i] == doctest::Approx(yx * z[i]).epsilon(1e-12));
  }
}

TEST_CASE("adjoint") {
  CHECK(adjoint(HsOp::identity(3)) == HsOp::identity(3));
  Rng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = random_op(4, rng);
    const auto y = random_funcvec(4, rng);
    const auto z = random_funcvec(4, rng);
    CHECK(adjoint(adjoint(a)) == a);
    CHECK(std::abs(inner(a(y), z) - inner(y, adjoint(a)(z))) <= 1e-12);
    CHECK(hs_norm(adjoint(kron(y, z)) - kron(z, y)) <= 1e-14);
  }
}

TEST_CASE("operator norm examples") {
  CHECK(op_norm(HsOp::identity(4)) == doctest::Approx(1.0));
  const std::vector<double> diag{0.5, 0.2};
  CHECK(op_norm(HsOp::diagonal(diag)) == doctest::Approx(0.5));
  Rng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const auto y = random_funcvec(5, rng);
    const auto z = random_funcvec(5, rng);
    CHECK(op_norm(kron(y, z)) == doctest::Approx(norm(y) * norm(z)).epsilon(1e-12));
    const auto a = random_op(5, rng);
    CHECK(op_norm(a) == doctest::Approx(testing::power_iteration_norm(a.mat())).epsilon(1e-9));
  }
}

TEST_CASE("Hilbert-Schmidt norm and inner product") {
  CHECK(hs_norm(HsOp::identity(4)) == doctest::Approx(2.0));
  const std::vector<double> diag{1.0, 2.0};
  CHECK(hs_inner(HsOp::diagonal(diag), HsOp::diagonal(diag)) == doctest::Approx(5.0));
  Rng rng(14);
  for (int rep = 0; rep < 50; ++rep) {
    const auto y = random_funcvec(3, rng);
    const auto z = random_funcvec(3, rng);
    CHECK(hs_norm(kron(y, z)) == doctest::Approx(norm(y) * norm(z)).epsilon(1e-12));
    const auto a = random_op(3, rng);
    double sum_sq = 0.0;
    for (std::size_t j = 0; j < 3; ++j) sum_sq += std::pow(norm(a(FuncVec::basis(3, j))), 2);
    CHECK(hs_norm(a) * hs_norm(a) == doctest::Approx(sum_sq).epsilon(1e-12));
    CHECK(hs_inner(a, a) == doctest::Approx(sum_sq).epsilon(1e-12));
    CHECK(op_norm(a) <= hs_norm(a) + 1e-12);
  }
}

TEST_CASE("Kronecker composition rule A(y) (x) B(z) = B (y (x) z) A^T") {
  Rng rng(15);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = 1 + rng.below(6);
    const auto a = random_op(d, rng);
    const auto b = random_op(d, rng);
    const auto y = random_funcvec(d, rng);
    const auto z = random_funcvec(d, rng);
    const HsOp lhs = compose(b, compose(kron(y, z), adjoint(a)));
    CHECK(hs_norm(lhs - kron(a(y), b(z))) <= 1e-12 * (1.0 + hs_norm(lhs)));
  }
}

TEST_CASE("norm inequalities on random operators") {
  Rng rng(16);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = 1 + rng.below(8);
    const auto a = random_op(d, rng);
    const auto s = random_op(d, rng);
    const auto b = random_op(d, rng);
    CHECK(hs_norm(a * s * b) <= op_norm(a) * hs_norm(s) * op_norm(b) * (1 + 1e-12));
    CHECK(op_norm(a * b) <= op_norm(a) * op_norm(b) * (1 + 1e-12));
  }
}

TEST_CASE("power and composition") {
  Rng rng(17);
  const auto a = random_op(3, rng);
  CHECK(power(a, 0) == HsOp::identity(3));
  CHECK(hs_norm(power(a, 3) - a * a * a) <= 1e-12 * hs_norm(a * a * a));
  const auto x = random_funcvec(3, rng);
  CHECK(norm((a * a)(x) - a(a(x))) <= 1e-12 * (1 + norm(x)));
}

// For an empirical pair law with optimal coupling (u_i, u*_i), the expectation
// over an independent copy (V, V*) is the average over all index pairs.
TEST_CASE("Kronecker-Mallows bound on empirical pair laws") {
  Rng rng(18);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t m = 3 + rng.below(10);
    const std::size_t d = 1 + rng.below(4);
    Eigen::MatrixXd us(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m));
    Eigen::MatrixXd vs = us;
    for (Eigen::Index j = 0; j < us.cols(); ++j) {
      us.col(j) = testing::random_vector(d, rng);
      vs.col(j) = 0.7 * testing::random_vector(d, rng) + Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), 0.3);
    }
    const MallowsResult match = mallows_match(PointCloud(us), PointCloud(vs));
    std::vector<FuncVec> u, ustar;
    for (std::size_t i = 0; i < m; ++i) {
      u.emplace_back(Eigen::VectorXd(us.col(static_cast<Eigen::Index>(i))));
      ustar.emplace_back(Eigen::VectorXd(vs.col(static_cast<Eigen::Index>(match.matching[i]))));
    }
    double lhs_op = 0.0, lhs_hs = 0.0, eu = 0.0, eustar = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      eu += std::pow(norm(u[i]), 2) / static_cast<double>(m);
      eustar += std::pow(norm(ustar[i]), 2) / static_cast<double>(m);
      for (std::size_t j = 0; j < m; ++j) {
        const HsOp diff = kron(u[i], u[j]) - kron(ustar[i], ustar[j]);
        lhs_op += std::pow(op_norm(diff), 2);
        lhs_hs += std::pow(hs_norm(diff), 2);
      }
    }
    lhs_op /= static_cast<double>(m * m);
    lhs_hs /= static_cast<double>(m * m);
    const double bound = 2.0 * (eu + eustar) * match.distance * match.distance;
    CHECK(lhs_op <= bound + 1e-10);
    CHECK(lhs_hs <= bound + 1e-10);
  }
}
