#pragma once

#include "farboot/bootstrap.hpp"
#include "farboot/estimation.hpp"
#include "farboot/far_process.hpp"
#include "farboot/mallows.hpp"
#include "farboot/mc_harness.hpp"

#include <json.hpp>

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace farboot {

using Json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Formats a double with 17 significant digits.
std::string format_double(double v);

/// Header `t,c1,...,cd`, one row per state.
void write_sample_csv(std::ostream& os, const Sample& s);
Sample read_sample_csv(std::istream& is);
void save_sample_csv(const std::string& path, const Sample& s);
Sample load_sample_csv(const std::string& path);

/// Point cloud CSV: one atom per row. A first row that does not parse as
/// numbers is treated as a header; a leading `t` or index column is not
/// assumed.
PointCloud read_point_cloud_csv(std::istream& is);
PointCloud load_point_cloud_csv(const std::string& path);

/// Residuals eps_hat_1..eps_hat_n with header `t,c1,...,cd`.
void write_residual_csv(std::ostream& os, const Eigen::MatrixXd& residuals);

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);

/// Full fit record: diagnostics, spectrum and every matrix needed to rebuild
/// the fit for bootstrapping.
Json fit_to_json(const FarFit& f);
FarFit fit_from_json(const Json& j);

Json summary_to_json(const BootstrapSummary& s, std::size_t n, const BootstrapConfig& cfg);
/// replication, sqrt(n)-scaled norms of the three centered statistics, then
/// the mean draw m1..md.
void write_bootstrap_draws_csv(std::ostream& os, const BootstrapStats& stats, std::size_t n);

Json mallows_to_json(const MallowsResult& r);

/// Deterministic report: all numeric fields except the wall-clock runtime.
Json report_to_json(const McReport& r);
Json rate_table_to_json(const RateTable& t);

/// experiment,n,replication,value,null_value,k
void write_raw_csv(std::ostream& os, const McReport& r);
/// experiment,n,replication,value
void write_long_csv(std::ostream& os, const McReport& r);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace farboot
