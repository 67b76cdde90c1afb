#include "farboot/cli.hpp"

#include "farboot/config.hpp"
#include "farboot/io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

namespace farboot {

namespace {

namespace fs = std::filesystem;

/// Usage errors detected after CLI11 parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ResolvedConfig load_config(const std::string& path) {
  if (path.empty()) return resolve(ConfigDoc{});
  return resolve(ConfigDoc::load(path));
}

/// Records a run. The file is written once before the work starts and again
/// with the wall-clock time and final status when it ends.
class Manifest {
 public:
  Manifest(std::string path, std::string subcommand, std::string config_path, std::uint64_t seed,
           const ResolvedConfig& cfg, std::vector<std::string> outputs)
      : path_(std::move(path)), start_(std::chrono::steady_clock::now()) {
    doc_["subcommand"] = std::move(subcommand);
    doc_["config_path"] = std::move(config_path);
    doc_["master_seed"] = seed;
    doc_["version"] = kVersion;
    doc_["outputs"] = std::move(outputs);
    doc_["resolved_config"] = to_config_text(cfg);
    doc_["status"] = "running";
    doc_["wall_clock_seconds"] = nullptr;
    write();
  }

  void finish(const std::string& status) {
    doc_["status"] = status;
    doc_["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write();
  }

  const std::string& path() const { return path_; }

 private:
  void write() const { write_text_file(path_, doc_.dump(2) + "\n"); }

  std::string path_;
  std::chrono::steady_clock::time_point start_;
  Json doc_;
};

std::string manifest_name_for(const std::string& output) { return output + ".manifest.json"; }

struct SimulateArgs {
  std::string config;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> burn_in;
  std::string out;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  ResolvedConfig cfg = load_config(a.config);
  if (a.seed) cfg.model_seed = *a.seed;
  if (a.burn_in) cfg.model.burn_in = *a.burn_in;
  if (a.n < 1) throw UsageError("--n must be at least 1");
  Manifest manifest(manifest_name_for(a.out), "simulate", a.config, cfg.model_seed, cfg, {a.out});
  const FarModel model = cfg.model.build();
  const Sample s = simulate(model, a.n, cfg.model.burn_in, cfg.model_seed);
  save_sample_csv(a.out, s);
  manifest.finish("complete");
  Json j;
  j["out"] = a.out;
  j["manifest"] = manifest.path();
  j["n"] = s.n();
  j["rows"] = s.n() + 1;
  j["dim"] = s.dim();
  j["seed"] = cfg.model_seed;
  j["burn_in"] = cfg.model.burn_in;
  out << j.dump(2) << "\n";
  return kExitOk;
}

struct FitArgs {
  std::string config;
  std::string in;
  std::string k_rule;
  std::string out;
  std::string residuals_out;
};

int run_fit(const FitArgs& a, std::ostream& out) {
  ResolvedConfig cfg = load_config(a.config);
  if (!a.k_rule.empty()) cfg.k_rule = parse_k_rule(a.k_rule);
  std::vector<std::string> outputs{a.out};
  if (!a.residuals_out.empty()) outputs.push_back(a.residuals_out);
  Manifest manifest(manifest_name_for(a.out), "fit", a.config, cfg.model_seed, cfg, outputs);
  const Sample s = load_sample_csv(a.in);
  const FarFit f = fit(s, cfg.k_rule);
  Json j = fit_to_json(f);
  j["k_rule"] = to_string(cfg.k_rule);
  j["input"] = a.in;
  j["manifest"] = manifest.path();
  write_text_file(a.out, j.dump(2) + "\n");
  if (!a.residuals_out.empty()) {
    std::ostringstream os;
    write_residual_csv(os, f.centered_residuals);
    write_text_file(a.residuals_out, os.str());
  }
  manifest.finish("complete");
  Json brief;
  brief["out"] = a.out;
  brief["manifest"] = manifest.path();
  brief["n"] = f.n;
  brief["k"] = f.k;
  brief["k_rule"] = to_string(cfg.k_rule);
  brief["diagnostics"] = j["diagnostics"];
  brief["warnings"] = f.warnings;
  out << brief.dump(2) << "\n";
  return kExitOk;
}

struct BootstrapArgs {
  std::string config;
  std::string fit;
  std::optional<std::size_t> replications;
  std::optional<std::uint64_t> seed;
  std::string x0_policy;
  std::size_t threads = 1;
  std::string out;
  std::string draws_out;
};

int run_bootstrap(const BootstrapArgs& a, std::ostream& out) {
  ResolvedConfig cfg = load_config(a.config);
  if (a.replications) cfg.bootstrap.replications = *a.replications;
  if (a.seed) cfg.bootstrap.seed = *a.seed;
  if (!a.x0_policy.empty()) cfg.bootstrap.x0_policy = parse_x0_policy(a.x0_policy);
  if (cfg.bootstrap.replications < 1) throw UsageError("--B must be at least 1");
  std::vector<std::string> outputs{a.out};
  if (!a.draws_out.empty()) outputs.push_back(a.draws_out);
  Manifest manifest(manifest_name_for(a.out), "bootstrap", a.config, cfg.bootstrap.seed, cfg, outputs);
  const FarFit f = fit_from_json(Json::parse(read_text_file(a.fit)));
  const BootstrapStats stats = bootstrap_statistics(f, cfg.bootstrap, a.threads);
  Json j = summary_to_json(summarize(stats, f.n), f.n, cfg.bootstrap);
  j["fit"] = a.fit;
  j["manifest"] = manifest.path();
  const std::string text = j.dump(2) + "\n";
  write_text_file(a.out, text);
  if (!a.draws_out.empty()) {
    std::ostringstream os;
    write_bootstrap_draws_csv(os, stats, f.n);
    write_text_file(a.draws_out, os.str());
  }
  manifest.finish("complete");
  out << text;
  return kExitOk;
}

struct MallowsArgs {
  std::string a;
  std::string b;
  std::string out;
};

int run_mallows(const MallowsArgs& a, std::ostream& out) {
  std::optional<Manifest> manifest;
  if (!a.out.empty()) manifest.emplace(manifest_name_for(a.out), "mallows", "", 0, resolve(ConfigDoc{}),
                                       std::vector<std::string>{a.out});
  const PointCloud xs = load_point_cloud_csv(a.a);
  const PointCloud ys = load_point_cloud_csv(a.b);
  Json j = mallows_to_json(mallows_match(xs, ys));
  j["first"] = a.a;
  j["second"] = a.b;
  j["atoms"] = xs.size();
  if (manifest) j["manifest"] = manifest->path();
  const std::string text = j.dump(2) + "\n";
  if (!a.out.empty()) write_text_file(a.out, text);
  if (manifest) manifest->finish("complete");
  out << text;
  return kExitOk;
}

struct ValidateArgs {
  std::string experiment;
  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
  std::size_t threads = 1;
};

const std::vector<std::size_t> kRateGrid{1000, 10000, 100000, 1000000};

int run_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
  ResolvedConfig cfg = load_config(a.config);
  McConfig& mc = cfg.mc;
  if (a.seed) mc.master_seed = *a.seed;
  if (a.replications) {
    mc.outer_replications = *a.replications;
    mc.bootstrap_replications = *a.replications;
  }
  mc.threads = a.threads;
  if (a.experiment != "rates") mc.validate();

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  const std::string tag = a.experiment;
  const std::string report_path = (dir / ("report_" + tag + ".json")).string();
  const std::string raw_path = (dir / ("raw_" + tag + ".csv")).string();
  const std::string long_path = (dir / ("long_" + tag + ".csv")).string();
  const std::string manifest_path = (dir / ("manifest_" + tag + ".json")).string();
  std::vector<std::string> outputs{report_path};
  if (tag != "rates") {
    outputs.push_back(raw_path);
    outputs.push_back(long_path);
  }
  Manifest manifest(manifest_path, "validate", a.config, mc.master_seed, cfg, outputs);

  Json j;
  Verdict verdict = Verdict::inconclusive;
  if (tag == "rates") {
    const RateTable table = check_rate_conditions(cfg.model.spectrum, kRateGrid, cfg.k_rule, mc.beta_eq5, mc.beta_eq6);
    j = rate_table_to_json(table);
    verdict = table.verdict;
  } else {
    McReport report;
    if (tag == "t1") {
      report = check_theorem1(mc);
    } else if (tag == "t2") {
      report = check_theorem2_mean(mc);
    } else if (tag == "t3") {
      report = check_theorem3_gamma(mc);
    } else if (tag == "t4") {
      report = check_theorem4_c(mc, CCentering::projected);
    } else {
      report = check_theorem4_c(mc, CCentering::naive);
    }
    j = report_to_json(report);
    verdict = report.verdict;
    std::ostringstream raw, longf;
    write_raw_csv(raw, report);
    write_long_csv(longf, report);
    write_text_file(raw_path, raw.str());
    write_text_file(long_path, longf.str());
    for (const auto& w : report.warnings) err << "warning: " << w << "\n";
  }
  j["master_seed"] = mc.master_seed;
  j["resolved_config"] = to_config_text(cfg);
  j["manifest"] = fs::path(manifest_path).filename().string();
  const std::string text = j.dump(2) + "\n";
  write_text_file(report_path, text);
  manifest.finish(to_string(verdict));
  out << text;
  if (verdict != Verdict::pass) {
    err << "validate " << tag << ": verdict " << to_string(verdict) << "\n";
    return kExitVerdictFailure;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bootstrap and Monte Carlo validation for functional autoregressive models", "farboot"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a sample path from the configured model");
  sim_cmd->add_option("--config", sim.config, "Config file")->check(CLI::ExistingFile);
  sim_cmd->add_option("--n", sim.n, "Number of transitions (the CSV has n+1 rows)")->required();
  sim_cmd->add_option("--seed", sim.seed, "Overrides [model] seed");
  sim_cmd->add_option("--burn-in", sim.burn_in, "Overrides [model] burn_in");
  sim_cmd->add_option("--out", sim.out, "Output CSV")->required();

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Estimate the autoregressive operator from a sample CSV");
  fit_cmd->add_option("--config", fa.config, "Config file")->check(CLI::ExistingFile);
  fit_cmd->add_option("--in", fa.in, "Sample CSV")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--k-rule", fa.k_rule, "log:A:DELTA, poly:A:DELTA or fixed:K");
  fit_cmd->add_option("--out", fa.out, "Output fit JSON")->required();
  fit_cmd->add_option("--residuals-out", fa.residuals_out, "Centered residual CSV");

  BootstrapArgs ba;
  auto* boot_cmd = app.add_subcommand("bootstrap", "Residual bootstrap from a fit JSON");
  boot_cmd->add_option("--config", ba.config, "Config file")->check(CLI::ExistingFile);
  boot_cmd->add_option("--fit", ba.fit, "Fit JSON written by `fit`")->required()->check(CLI::ExistingFile);
  boot_cmd->add_option("--B", ba.replications, "Overrides [bootstrap] B");
  boot_cmd->add_option("--seed", ba.seed, "Overrides [bootstrap] seed");
  boot_cmd->add_option("--x0-policy", ba.x0_policy, "zero or copy_x0");
  boot_cmd->add_option("--threads", ba.threads, "Worker threads")->check(CLI::PositiveNumber);
  boot_cmd->add_option("--out", ba.out, "Output summary JSON")->required();
  boot_cmd->add_option("--draws-out", ba.draws_out, "Per-replication CSV");

  MallowsArgs ma;
  auto* mal_cmd = app.add_subcommand("mallows", "Mallows distance between two equal-size CSV point clouds");
  mal_cmd->add_option("--a", ma.a, "First cloud, one atom per row")->required()->check(CLI::ExistingFile);
  mal_cmd->add_option("--b", ma.b, "Second cloud")->required()->check(CLI::ExistingFile);
  mal_cmd->add_option("--out", ma.out, "Also write the JSON here");

  ValidateArgs va;
  auto* val_cmd = app.add_subcommand("validate", "Run a Monte Carlo validation experiment");
  val_cmd->add_option("--experiment", va.experiment, "Experiment")
      ->required()
      ->check(CLI::IsMember({"t1", "t2", "t3", "t4", "t4_naive", "rates"}));
  val_cmd->add_option("--config", va.config, "Config file")->check(CLI::ExistingFile);
  val_cmd->add_option("--out-dir", va.out_dir, "Output directory");
  val_cmd->add_option("--seed", va.seed, "Overrides [mc] master_seed");
  val_cmd->add_option("--replications", va.replications, "Overrides [mc] R and B");
  val_cmd->add_option("--threads", va.threads, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (*sim_cmd) return run_simulate(sim, out);
    if (*fit_cmd) return run_fit(fa, out);
    if (*boot_cmd) return run_bootstrap(ba, out);
    if (*mal_cmd) return run_mallows(ma, out);
    if (*val_cmd) return run_validate(va, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  err << "error: no subcommand\n";
  return kExitError;
}

}  // namespace farboot
