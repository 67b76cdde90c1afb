#include "farboot/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace farboot {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::vector<std::vector<double>> read_numeric_rows(std::istream& is, bool& had_header,
                                                   std::vector<std::string>& header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  had_header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) numeric = numeric && parse_number(fields[i], row[i]);
    if (!numeric) {
      if (rows.empty() && !had_header) {
        had_header = true;
        header = fields;
        continue;
      }
      throw IoError("csv line " + std::to_string(line_no) + ": non-numeric field");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("csv line " + std::to_string(line_no) + ": inconsistent column count");
    }
    if (had_header && row.size() != header.size()) {
      throw IoError("csv line " + std::to_string(line_no) + ": column count differs from header");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_header(std::ostream& os, Eigen::Index d) {
  os << "t";
  for (Eigen::Index i = 1; i <= d; ++i) os << ",c" << i;
  os << "\n";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write '" + path + "'");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  return is;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  return v;
}

Json doubles(const std::vector<double>& xs) { return Json(xs); }

}  // namespace

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_sample_csv(std::ostream& os, const Sample& s) {
  const Eigen::MatrixXd& x = s.states();
  write_header(os, x.rows());
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    os << t;
    for (Eigen::Index i = 0; i < x.rows(); ++i) os << ',' << format_double(x(i, t));
    os << '\n';
  }
}

Sample read_sample_csv(std::istream& is) {
  bool had_header = false;
  std::vector<std::string> header;
  const auto rows = read_numeric_rows(is, had_header, header);
  if (rows.size() < 2) throw IoError("sample csv: need at least two rows (X_0 and X_1)");
  if (rows.front().size() < 2) throw IoError("sample csv: expected columns t,c1,...,cd");
  const auto d = static_cast<Eigen::Index>(rows.front().size() - 1);
  Eigen::MatrixXd states(d, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t][0] != static_cast<double>(t)) {
      throw IoError("sample csv: t column must count 0,1,2,... (row " + std::to_string(t) + ")");
    }
    for (Eigen::Index i = 0; i < d; ++i) states(i, static_cast<Eigen::Index>(t)) = rows[t][static_cast<std::size_t>(i) + 1];
  }
  return Sample(std::move(states));
}

void save_sample_csv(const std::string& path, const Sample& s) {
  auto os = open_out(path);
  write_sample_csv(os, s);
}

Sample load_sample_csv(const std::string& path) {
  auto is = open_in(path);
  return read_sample_csv(is);
}

PointCloud read_point_cloud_csv(std::istream& is) {
  bool had_header = false;
  std::vector<std::string> header;
  const auto rows = read_numeric_rows(is, had_header, header);
  if (rows.empty()) throw IoError("point cloud csv: no atoms");
  Eigen::MatrixXd atoms(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c) {
    for (std::size_t i = 0; i < rows[c].size(); ++i) {
      atoms(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[c][i];
    }
  }
  return PointCloud(std::move(atoms));
}

PointCloud load_point_cloud_csv(const std::string& path) {
  auto is = open_in(path);
  return read_point_cloud_csv(is);
}

void write_residual_csv(std::ostream& os, const Eigen::MatrixXd& residuals) {
  write_header(os, residuals.rows());
  for (Eigen::Index t = 0; t < residuals.cols(); ++t) {
    os << t + 1;
    for (Eigen::Index i = 0; i < residuals.rows(); ++i) os << ',' << format_double(residuals(i, t));
    os << '\n';
  }
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json(m.row(r).transpose()));
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array()) throw IoError("expected a matrix as an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j.at(0).size() : 0;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (j.at(r).size() != cols) throw IoError("ragged matrix in json");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j.at(r).at(c).get<double>();
    }
  }
  return m;
}

Json fit_to_json(const FarFit& f) {
  const FitDiagnostics diag = diagnose(f);
  Json j;
  j["n"] = f.n;
  j["dim"] = f.dim();
  j["k"] = f.k;
  j["eigenvalues"] = doubles(f.eigen.lambdas);
  j["eigengaps"] = doubles(f.eigen.gaps);
  j["near_degenerate"] = f.eigen.near_degenerate;
  j["diagnostics"] = {
      {"psi_hat_op_norm", diag.psi_hat_op_norm},
      {"psi_hat_hs_norm", hs_norm(f.psi_hat)},
      {"projection_vs_gamma_dagger", diag.projection_vs_gamma_dagger},
      {"projection_vs_dagger_gamma", diag.projection_vs_dagger_gamma},
      {"psi_projection", diag.psi_projection},
      {"residual_second_moment", diag.residual_second_moment},
      {"centered_residual_sum", diag.centered_residual_sum},
      {"projection_idempotence", diag.projection_idempotence},
      {"projection_symmetry", diag.projection_symmetry},
      {"max_identity_error", diag.max_identity_error()},
  };
  const Eigen::VectorXd raw_mean = f.raw_residuals.rowwise().mean();
  std::vector<double> residual_norms;
  for (Eigen::Index t = 0; t < f.centered_residuals.cols(); ++t) {
    residual_norms.push_back(f.centered_residuals.col(t).norm());
  }
  const double ms = f.centered_residuals.squaredNorm() / static_cast<double>(f.centered_residuals.cols());
  j["residual_summary"] = {
      {"count", f.centered_residuals.cols()},
      {"raw_mean", vector_to_json(raw_mean)},
      {"raw_mean_norm", raw_mean.norm()},
      {"centered_mean_square_norm", ms},
      {"max_centered_norm", *std::max_element(residual_norms.begin(), residual_norms.end())},
  };
  j["warnings"] = f.warnings;
  j["sample_mean"] = vector_to_json(f.sample_mean.coeffs());
  j["x0"] = vector_to_json(f.x0.coeffs());
  j["xn"] = vector_to_json(f.xn.coeffs());
  j["gamma_hat"] = matrix_to_json(f.gamma_hat.mat());
  j["c_hat"] = matrix_to_json(f.c_hat.mat());
  j["gamma_dagger"] = matrix_to_json(f.gamma_dagger.mat());
  j["pi_hat_k"] = matrix_to_json(f.pi_hat_k.mat());
  j["psi_hat"] = matrix_to_json(f.psi_hat.mat());
  j["raw_residuals"] = matrix_to_json(f.raw_residuals);
  j["centered_residuals"] = matrix_to_json(f.centered_residuals);
  return j;
}

FarFit fit_from_json(const Json& j) {
  try {
    FarFit f;
    f.n = j.at("n").get<std::size_t>();
    f.k = j.at("k").get<std::size_t>();
    f.gamma_hat = HsOp(matrix_from_json(j.at("gamma_hat")));
    f.c_hat = HsOp(matrix_from_json(j.at("c_hat")));
    f.eigen = eigensystem(f.gamma_hat);
    f.gamma_dagger = HsOp(matrix_from_json(j.at("gamma_dagger")));
    f.pi_hat_k = HsOp(matrix_from_json(j.at("pi_hat_k")));
    f.psi_hat = HsOp(matrix_from_json(j.at("psi_hat")));
    f.raw_residuals = matrix_from_json(j.at("raw_residuals"));
    f.centered_residuals = matrix_from_json(j.at("centered_residuals"));
    f.sample_mean = FuncVec(vector_from_json(j.at("sample_mean")));
    f.x0 = FuncVec(vector_from_json(j.at("x0")));
    f.xn = FuncVec(vector_from_json(j.at("xn")));
    if (j.contains("warnings")) f.warnings = j.at("warnings").get<std::vector<std::string>>();
    const auto d = static_cast<Eigen::Index>(f.gamma_hat.dim());
    if (f.c_hat.dim() != f.gamma_hat.dim() || f.psi_hat.dim() != f.gamma_hat.dim() ||
        f.centered_residuals.rows() != d || f.centered_residuals.cols() != static_cast<Eigen::Index>(f.n) ||
        f.x0.dim() != f.gamma_hat.dim()) {
      throw IoError("fit json: inconsistent dimensions");
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("fit json: ") + e.what());
  }
}

Json summary_to_json(const BootstrapSummary& s, std::size_t n, const BootstrapConfig& cfg) {
  Json j;
  j["n"] = n;
  j["replications"] = cfg.replications;
  j["x0_policy"] = to_string(cfg.x0_policy);
  j["seed"] = cfg.seed;
  j["mean_of_means"] = vector_to_json(s.mean_of_means.coeffs());
  j["mean_of_gammas"] = matrix_to_json(s.mean_of_gammas.mat());
  j["mean_of_cs"] = matrix_to_json(s.mean_of_cs.mat());
  j["c_mean_standard_error"] = s.c_mean_standard_error;
  j["covariance_of_means"] = matrix_to_json(s.covariance_of_means);
  j["covariance_of_gammas"] = matrix_to_json(s.covariance_of_gammas);
  j["covariance_of_cs"] = matrix_to_json(s.covariance_of_cs);
  j["quantile_levels"] = doubles(s.quantile_levels);
  j["norm_quantiles"] = {
      {"root_n_mean", doubles(s.mean_norm_quantiles)},
      {"root_n_centered_gamma", doubles(s.gamma_norm_quantiles)},
      {"root_n_centered_c", doubles(s.c_norm_quantiles)},
  };
  return j;
}

void write_bootstrap_draws_csv(std::ostream& os, const BootstrapStats& stats, std::size_t n) {
  const double root_n = std::sqrt(static_cast<double>(n));
  const std::size_t d = stats.size() ? stats.means.front().dim() : 0;
  os << "replication,root_n_mean_norm,root_n_centered_gamma_hs,root_n_centered_c_hs";
  for (std::size_t i = 1; i <= d; ++i) os << ",m" << i;
  os << '\n';
  for (std::size_t b = 0; b < stats.size(); ++b) {
    os << b << ',' << format_double(root_n * norm(stats.means[b])) << ','
       << format_double(root_n * hs_norm(stats.centered_gammas[b])) << ','
       << format_double(root_n * hs_norm(stats.centered_cs[b]));
    for (std::size_t i = 0; i < d; ++i) os << ',' << format_double(stats.means[b].coeffs()(static_cast<Eigen::Index>(i)));
    os << '\n';
  }
}

Json mallows_to_json(const MallowsResult& r) {
  Json j;
  j["distance"] = r.distance;
  j["squared_distance"] = r.distance * r.distance;
  j["matching"] = r.matching;
  return j;
}

Json report_to_json(const McReport& r) {
  Json j;
  j["experiment"] = r.experiment;
  j["quantity"] = r.quantity;
  j["centering"] = r.centering;
  j["trend_rule"] = {
      {"strictly_decreasing", r.rule.strict},
      {"allowed_violations", r.rule.allowed_violations},
      {"floor_factor", r.rule.floor_factor},
  };
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    std::size_t k_min = row.ks.empty() ? 0 : *std::min_element(row.ks.begin(), row.ks.end());
    std::size_t k_max = row.ks.empty() ? 0 : *std::max_element(row.ks.begin(), row.ks.end());
    rows.push_back({
        {"n", row.n},
        {"replications", row.values.size()},
        {"median", row.median},
        {"q1", row.q1},
        {"q3", row.q3},
        {"iqr", row.q3 - row.q1},
        {"null_median", row.null_median},
        {"null_q1", row.null_q1},
        {"null_q3", row.null_q3},
        {"noise_floor", row.noise_floor},
        {"k_min", k_min},
        {"k_max", k_max},
    });
  }
  j["rows"] = rows;
  j["violations"] = r.violations;
  j["trend_ok"] = r.trend_ok;
  j["floor_ok"] = r.floor_ok;
  j["verdict"] = to_string(r.verdict);
  j["warnings"] = r.warnings;
  return j;
}

Json rate_table_to_json(const RateTable& t) {
  Json j;
  j["experiment"] = "rates";
  j["spectrum"] = t.spectrum;
  j["rule"] = t.rule;
  j["beta5"] = t.beta5;
  j["beta6"] = t.beta6;
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    rows.push_back({
        {"n", row.n},
        {"k", row.k},
        {"expr5", row.expr5},
        {"inv_lambda_ratio", row.inv_lambda_ratio},
        {"expr6", row.expr6},
        {"expr6_ratio", row.expr6_ratio},
    });
  }
  j["rows"] = rows;
  j["expr5_decreasing"] = t.expr5_decreasing;
  j["ratios_bounded"] = t.ratios_bounded;
  j["verdict"] = to_string(t.verdict);
  return j;
}

void write_raw_csv(std::ostream& os, const McReport& r) {
  os << "experiment,n,replication,value,null_value,k\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.values.size(); ++i) {
      os << r.experiment << ',' << row.n << ',' << i << ',' << format_double(row.values[i]) << ','
         << (i < row.null_values.size() ? format_double(row.null_values[i]) : std::string()) << ','
         << (i < row.ks.size() ? std::to_string(row.ks[i]) : std::string()) << '\n';
    }
  }
}

void write_long_csv(std::ostream& os, const McReport& r) {
  os << "experiment,n,replication,value\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.values.size(); ++i) {
      os << r.experiment << ',' << row.n << ',' << i << ',' << format_double(row.values[i]) << '\n';
    }
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  auto os = open_out(path);
  os << text;
  if (!os) throw IoError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  auto is = open_in(path);
  std::stringstream buffer;
  buffer << is.rdbuf();
  return buffer.str();
}

}  // namespace farboot
