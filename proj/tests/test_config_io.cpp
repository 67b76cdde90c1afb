#include "farboot/config.hpp"
#include "farboot/io.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <sstream>

using namespace farboot;

TEST_CASE("config parsing") {
  const ConfigDoc doc = ConfigDoc::parse(R"(
# comment line
[model]
dim = 7            # trailing comment
spectrum.kind = "polynomial"
spectrum.params = [2.0, 3.0]

[mc]
n_grid = [100, 200, 400]
master_seed = 18446744073709551615
beta_eq5 = 0.75
)");
  CHECK(doc.get_u64("model", "dim", 0) == 7);
  CHECK(doc.get_string("model", "spectrum.kind", "") == "polynomial");
  CHECK(doc.get_doubles("model", "spectrum.params") == std::vector<double>{2.0, 3.0});
  CHECK(doc.get_u64s("mc", "n_grid") == std::vector<std::uint64_t>{100, 200, 400});
  CHECK(doc.get_u64("mc", "master_seed", 0) == 18446744073709551615ull);
  CHECK(doc.get_double("mc", "beta_eq5", 0.0) == 0.75);
  CHECK(doc.get_double("mc", "beta_eq6", 1.5) == 1.5);
  CHECK_FALSE(doc.has("fit", "k_rule"));

  const ResolvedConfig cfg = resolve(doc);
  CHECK(cfg.model.dim == 7);
  CHECK(cfg.mc.n_grid == std::vector<std::size_t>{100, 200, 400});
  CHECK(cfg.mc.model.dim == 7);
  CHECK(std::holds_alternative<PolynomialSpectrum>(cfg.model.spectrum));
}

TEST_CASE("config parse errors") {
  CHECK_THROWS_AS(ConfigDoc::parse("dim = 3"), ConfigError);
  CHECK_THROWS_AS(ConfigDoc::parse("[model]\ndim = 3\ndim = 4"), ConfigError);
  CHECK_THROWS_AS(ConfigDoc::parse("[model\n"), ConfigError);
  CHECK_THROWS_AS(ConfigDoc::parse("[model]\nname = \"open"), ConfigError);
  CHECK_THROWS_AS(ConfigDoc::parse("[model]\ndim"), ConfigError);
  CHECK_THROWS_AS(ConfigDoc::parse("[model]\ndim = [1, 2"), ConfigError);
  CHECK_THROWS_AS(ConfigDoc::parse("[model]\ndim = what"), ConfigError);
  CHECK_THROWS_AS(ConfigDoc::parse("[model]\ndim = \"3\"").get_u64("model", "dim", 0), ConfigError);
  CHECK_THROWS_AS(ConfigDoc::parse("[model]\ndim = -3").get_u64("model", "dim", 0), ConfigError);
}

TEST_CASE("resolve rejects unknown or invalid settings") {
  CHECK_THROWS_AS(resolve(ConfigDoc::parse("[modle]\ndim = 3")), ConfigError);
  CHECK_THROWS_AS(resolve(ConfigDoc::parse("[model]\ndims = 3")), ConfigError);
  CHECK_THROWS_AS(resolve(ConfigDoc::parse("[fit]\nk_rule = \"log:2:0.05\"")), ConfigError);
  CHECK_THROWS_AS(resolve(ConfigDoc::parse("[model]\npsi.kind = \"other\"")), ConfigError);
  CHECK_THROWS_AS(resolve(ConfigDoc::parse("[model]\npsi.params = [1.5, 0.9]")), ConfigError);
  CHECK_THROWS_AS(resolve(ConfigDoc::parse("[mc]\nR = 10\nB = 10")), ConfigError);
  CHECK_THROWS_AS(resolve(ConfigDoc::parse("[bootstrap]\nx0_policy = \"mean\"")), ConfigError);
}

TEST_CASE("config text round trip") {
  const std::vector<std::string> inputs{
      "",
      "[model]\ndim = 4\npsi.kind = \"dense_random\"\npsi.params = [0.6, 12345678901234]\n"
      "spectrum.kind = \"polynomial\"\nspectrum.params = [1.5, 2.5]\n"
      "[fit]\nk_rule = \"poly:2:0.01\"\n[bootstrap]\nB = 77\nx0_policy = \"copy_x0\"\n"
      "[mc]\nn_grid = [60, 120]\nR = 55\nB = 55\nmaster_seed = 9\nbeta_eq5 = 0.75\n",
      "[fit]\nk_rule = \"log:0.3:0.02:estimation\"\n",
  };
  for (const auto& input : inputs) {
    const std::string text = to_config_text(resolve(ConfigDoc::parse(input)));
    CHECK(to_config_text(resolve(ConfigDoc::parse(text))) == text);
  }
  const ResolvedConfig cfg = resolve(ConfigDoc::parse(inputs[1]));
  CHECK(cfg.bootstrap.replications == 77);
  CHECK(cfg.bootstrap.x0_policy == X0Policy::copy_x0);
  CHECK(cfg.mc.x0_policy == X0Policy::copy_x0);
  CHECK(std::get<DenseRandomPsi>(cfg.model.psi).seed == 12345678901234ull);
  CHECK(to_string(cfg.mc.k_rule) == "poly:2:0.01");
}

TEST_CASE("sample csv round trip is exact") {
  const Sample s = simulate(testing::default_model(), 40, 100, 3);
  std::stringstream ss;
  write_sample_csv(ss, s);
  const std::string text = ss.str();
  CHECK(text.rfind("t,c1,c2,c3,c4,c5\n", 0) == 0);
  const Sample back = read_sample_csv(ss);
  CHECK(back.states() == s.states());

  std::stringstream bad1("t,c1\n0,1\n2,3\n");
  CHECK_THROWS_AS(read_sample_csv(bad1), IoError);
  std::stringstream bad2("t,c1\n0,1\n");
  CHECK_THROWS_AS(read_sample_csv(bad2), IoError);
  std::stringstream bad3("t,c1,c2\n0,1\n1,2,3\n");
  CHECK_THROWS_AS(read_sample_csv(bad3), IoError);
  std::stringstream bad4("t,c1\n0,x\n1,2\n");
  CHECK_THROWS_AS(read_sample_csv(bad4), IoError);
}

TEST_CASE("point cloud csv") {
  std::stringstream with_header("a,b\n1,2\n3,4\n5,6\n");
  const PointCloud p = read_point_cloud_csv(with_header);
  CHECK(p.size() == 3);
  CHECK(p.dim() == 2);
  CHECK(p.atoms()(1, 2) == 6.0);
  std::stringstream plain("1,2\n3,4\n");
  CHECK(read_point_cloud_csv(plain).size() == 2);
  std::stringstream empty("a,b\n");
  CHECK_THROWS_AS(read_point_cloud_csv(empty), IoError);
}

TEST_CASE("fit json round trip") {
  const FarFit f = fit(simulate(testing::default_model(), 120, 100, 5), FixedK{3});
  const Json j = fit_to_json(f);
  CHECK(j["k"] == 3);
  CHECK(j["diagnostics"]["max_identity_error"].get<double>() <= 1e-10);
  const FarFit g = fit_from_json(Json::parse(j.dump()));
  CHECK(g.n == f.n);
  CHECK(g.k == f.k);
  CHECK(g.psi_hat == f.psi_hat);
  CHECK(g.gamma_hat == f.gamma_hat);
  CHECK(g.c_hat == f.c_hat);
  CHECK(g.pi_hat_k == f.pi_hat_k);
  CHECK(g.centered_residuals == f.centered_residuals);
  CHECK(g.x0 == f.x0);
  for (std::size_t i = 0; i < f.eigen.dim(); ++i) CHECK(g.eigen.lambdas[i] == f.eigen.lambdas[i]);

  Json broken = j;
  broken["psi_hat"] = matrix_to_json(Eigen::MatrixXd::Zero(2, 2));
  CHECK_THROWS(fit_from_json(broken));
}

TEST_CASE("double formatting is exact") {
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(20)) - 10.0);
    CHECK(std::stod(format_double(v)) == v);
  }
}
