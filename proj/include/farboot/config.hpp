#pragma once

#include "farboot/bootstrap.hpp"
#include "farboot/estimation.hpp"
#include "farboot/mc_harness.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace farboot {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A number is kept as its source token so 64-bit seeds survive unchanged.
struct ConfigNumber {
  std::string token;
};

using ConfigScalar = std::variant<std::string, bool, ConfigNumber>;
using ConfigValue = std::variant<std::string, bool, ConfigNumber, std::vector<ConfigScalar>>;

/// Parsed key/value pairs per [section]. Supports the TOML subset used by the
/// tool: bare or dotted keys, basic strings, booleans, numbers, flat arrays,
/// and '#' comments.
class ConfigDoc {
 public:
  static ConfigDoc parse(std::string_view text);
  static ConfigDoc load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  const ConfigValue& at(const std::string& section, const std::string& key) const;

  double get_double(const std::string& section, const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const;
  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
  std::vector<std::uint64_t> get_u64s(const std::string& section, const std::string& key) const;

  const std::map<std::string, std::map<std::string, ConfigValue>>& sections() const { return sections_; }

 private:
  std::map<std::string, std::map<std::string, ConfigValue>> sections_;
};

/// Every setting the tool can take from a config file, with defaults filled in.
struct ResolvedConfig {
  ModelSpec model;
  std::uint64_t model_seed = 1;
  KRule k_rule = LogRule{0.5, 0.05, RateRegime::bootstrap};
  BootstrapConfig bootstrap{1000, X0Policy::zero, 1};
  McConfig mc;
};

/// Applies defaults and rejects unknown sections/keys and invalid values.
ResolvedConfig resolve(const ConfigDoc& doc);

/// Serializes a resolved config in the same format; resolve(parse(text)) is
/// equal to the input.
std::string to_config_text(const ResolvedConfig& cfg);

}  // namespace farboot
