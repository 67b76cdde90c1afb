#include "farboot/config.hpp"

#include "farboot/detail/overloaded.hpp"
#include "farboot/detail/shortest.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace farboot {

namespace {

using detail::overloaded;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw ConfigError("config line " + std::to_string(line) + ": " + message);
}

// Removes a trailing '#' comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  }
  return key.front() != '.' && key.back() != '.';
}

ConfigScalar parse_scalar(std::string_view token, std::size_t line) {
  token = trim(token);
  if (token.empty()) fail(line, "missing value");
  if (token.front() == '"') {
    if (token.size() < 2 || token.back() != '"') fail(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < token.size(); ++i) {
      if (token[i] == '\\' && i + 2 < token.size()) {
        ++i;
        out.push_back(token[i] == 'n' ? '\n' : token[i]);
      } else {
        out.push_back(token[i]);
      }
    }
    return out;
  }
  if (token == "true") return true;
  if (token == "false") return false;
  std::string cleaned;
  for (char c : token) {
    if (c != '_') cleaned.push_back(c);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cleaned.data(), cleaned.data() + cleaned.size(), value);
  if (ec != std::errc() || ptr != cleaned.data() + cleaned.size() || !std::isfinite(value)) {
    fail(line, "cannot parse value '" + std::string(token) + "'");
  }
  return ConfigNumber{cleaned};
}

ConfigValue parse_value(std::string_view token, std::size_t line) {
  token = trim(token);
  if (!token.empty() && token.front() == '[') {
    if (token.back() != ']') fail(line, "unterminated array");
    std::vector<ConfigScalar> items;
    std::string_view body = trim(token.substr(1, token.size() - 2));
    while (!body.empty()) {
      std::size_t end = 0;
      bool in_string = false;
      while (end < body.size() && (in_string || body[end] != ',')) {
        if (body[end] == '"') in_string = !in_string;
        ++end;
      }
      items.push_back(parse_scalar(body.substr(0, end), line));
      body = end < body.size() ? trim(body.substr(end + 1)) : std::string_view{};
    }
    return items;
  }
  return std::visit([](auto&& v) -> ConfigValue { return v; }, parse_scalar(token, line));
}

double number_of(const ConfigScalar& v, const std::string& where) {
  if (const auto* n = std::get_if<ConfigNumber>(&v)) {
    double out = 0.0;
    std::from_chars(n->token.data(), n->token.data() + n->token.size(), out);
    return out;
  }
  throw ConfigError(where + ": expected a number");
}

std::uint64_t u64_of(const ConfigScalar& v, const std::string& where) {
  const auto* n = std::get_if<ConfigNumber>(&v);
  if (!n) throw ConfigError(where + ": expected a non-negative integer");
  std::uint64_t out = 0;
  const auto& t = n->token;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(where + ": expected a non-negative integer, got '" + t + "'");
  }
  return out;
}

ConfigScalar as_scalar(const ConfigValue& v, const std::string& where) {
  return std::visit(overloaded{
                        [&](const std::vector<ConfigScalar>&) -> ConfigScalar {
                          throw ConfigError(where + ": expected a scalar, got an array");
                        },
                        [](const auto& s) -> ConfigScalar { return s; },
                    },
                    v);
}

std::string fmt_double(double v) { return detail::shortest(v); }

}  // namespace

ConfigDoc ConfigDoc::parse(std::string_view text) {
  ConfigDoc doc;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!valid_key(section)) fail(line_no, "invalid section name");
      doc.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (!valid_key(key)) fail(line_no, "invalid key '" + key + "'");
    if (section.empty()) fail(line_no, "key outside of a [section]");
    auto& table = doc.sections_[section];
    if (table.count(key)) fail(line_no, "duplicate key '" + key + "'");
    table.emplace(key, parse_value(line.substr(eq + 1), line_no));
  }
  return doc;
}

ConfigDoc ConfigDoc::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

bool ConfigDoc::has(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) > 0;
}

const ConfigValue& ConfigDoc::at(const std::string& section, const std::string& key) const {
  if (!has(section, key)) throw ConfigError("missing config key [" + section + "] " + key);
  return sections_.at(section).at(key);
}

double ConfigDoc::get_double(const std::string& section, const std::string& key, double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string where = "[" + section + "] " + key;
  return number_of(as_scalar(at(section, key), where), where);
}

std::uint64_t ConfigDoc::get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  const std::string where = "[" + section + "] " + key;
  return u64_of(as_scalar(at(section, key), where), where);
}

std::string ConfigDoc::get_string(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
  if (!has(section, key)) return fallback;
  const std::string where = "[" + section + "] " + key;
  const ConfigScalar s = as_scalar(at(section, key), where);
  if (const auto* str = std::get_if<std::string>(&s)) return *str;
  throw ConfigError(where + ": expected a string");
}

std::vector<double> ConfigDoc::get_doubles(const std::string& section, const std::string& key) const {
  const std::string where = "[" + section + "] " + key;
  const auto* items = std::get_if<std::vector<ConfigScalar>>(&at(section, key));
  if (!items) throw ConfigError(where + ": expected an array");
  std::vector<double> out;
  for (const auto& item : *items) out.push_back(number_of(item, where));
  return out;
}

std::vector<std::uint64_t> ConfigDoc::get_u64s(const std::string& section, const std::string& key) const {
  const std::string where = "[" + section + "] " + key;
  const auto* items = std::get_if<std::vector<ConfigScalar>>(&at(section, key));
  if (!items) throw ConfigError(where + ": expected an array");
  std::vector<std::uint64_t> out;
  for (const auto& item : *items) out.push_back(u64_of(item, where));
  return out;
}

ResolvedConfig resolve(const ConfigDoc& doc) {
  static const std::map<std::string, std::set<std::string>> known = {
      {"model", {"dim", "psi.kind", "psi.params", "spectrum.kind", "spectrum.params", "burn_in", "seed"}},
      {"fit", {"k_rule"}},
      {"bootstrap", {"B", "x0_policy", "seed"}},
      {"mc", {"n_grid", "R", "B", "master_seed", "beta_eq5", "beta_eq6"}},
  };
  for (const auto& [section, table] : doc.sections()) {
    const auto it = known.find(section);
    if (it == known.end()) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, value] : table) {
      if (!it->second.count(key)) throw ConfigError("unknown config key [" + section + "] " + key);
    }
  }

  ResolvedConfig cfg;
  try {
    ModelSpec& m = cfg.model;
    m.dim = doc.get_u64("model", "dim", m.dim);
    m.burn_in = doc.get_u64("model", "burn_in", m.burn_in);
    cfg.model_seed = doc.get_u64("model", "seed", cfg.model_seed);

    const std::string psi_kind = doc.get_string("model", "psi.kind", "diagonal_exponential");
    if (psi_kind == "diagonal_exponential") {
      DiagonalExponentialPsi p;
      if (doc.has("model", "psi.params")) {
        const auto v = doc.get_doubles("model", "psi.params");
        if (v.size() != 2) throw ConfigError("[model] psi.params: diagonal_exponential needs [gamma, rho]");
        p = {v[0], v[1]};
      }
      m.psi = p;
    } else if (psi_kind == "dense_random") {
      DenseRandomPsi p;
      if (doc.has("model", "psi.params")) {
        const auto* items = std::get_if<std::vector<ConfigScalar>>(&doc.at("model", "psi.params"));
        if (!items || items->size() != 2) {
          throw ConfigError("[model] psi.params: dense_random needs [target_norm, seed]");
        }
        p = {number_of((*items)[0], "[model] psi.params"), u64_of((*items)[1], "[model] psi.params")};
      }
      m.psi = p;
    } else {
      throw ConfigError("[model] psi.kind: unknown kind '" + psi_kind + "'");
    }

    const std::string spectrum_kind = doc.get_string("model", "spectrum.kind", "exponential");
    std::vector<double> sp;
    if (doc.has("model", "spectrum.params")) {
      sp = doc.get_doubles("model", "spectrum.params");
      if (sp.size() != 2) throw ConfigError("[model] spectrum.params: expected [c, rho] or [c, a]");
    }
    if (spectrum_kind == "exponential") {
      m.spectrum = sp.empty() ? ExponentialSpectrum{} : ExponentialSpectrum{sp[0], sp[1]};
    } else if (spectrum_kind == "polynomial") {
      m.spectrum = sp.empty() ? PolynomialSpectrum{} : PolynomialSpectrum{sp[0], sp[1]};
    } else {
      throw ConfigError("[model] spectrum.kind: unknown kind '" + spectrum_kind + "'");
    }
    m.build();

    if (doc.has("fit", "k_rule")) cfg.k_rule = parse_k_rule(doc.get_string("fit", "k_rule", ""));

    cfg.bootstrap.replications = doc.get_u64("bootstrap", "B", cfg.bootstrap.replications);
    cfg.bootstrap.x0_policy = parse_x0_policy(doc.get_string("bootstrap", "x0_policy", "zero"));
    cfg.bootstrap.seed = doc.get_u64("bootstrap", "seed", cfg.bootstrap.seed);
    if (cfg.bootstrap.replications < 1) throw ConfigError("[bootstrap] B must be >= 1");

    McConfig& mc = cfg.mc;
    mc.model = m;
    mc.k_rule = cfg.k_rule;
    mc.x0_policy = cfg.bootstrap.x0_policy;
    if (doc.has("mc", "n_grid")) {
      mc.n_grid.clear();
      for (auto n : doc.get_u64s("mc", "n_grid")) mc.n_grid.push_back(static_cast<std::size_t>(n));
    }
    mc.outer_replications = doc.get_u64("mc", "R", mc.outer_replications);
    mc.bootstrap_replications = doc.get_u64("mc", "B", mc.bootstrap_replications);
    mc.master_seed = doc.get_u64("mc", "master_seed", mc.master_seed);
    mc.beta_eq5 = doc.get_double("mc", "beta_eq5", mc.beta_eq5);
    mc.beta_eq6 = doc.get_double("mc", "beta_eq6", mc.beta_eq6);
    mc.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

std::string to_config_text(const ResolvedConfig& cfg) {
  std::ostringstream os;
  const ModelSpec& m = cfg.model;
  os << "[model]\n";
  os << "dim = " << m.dim << "\n";
  std::visit(overloaded{
                 [&](const DiagonalExponentialPsi& p) {
                   os << "psi.kind = \"diagonal_exponential\"\n";
                   os << "psi.params = [" << fmt_double(p.gamma) << ", " << fmt_double(p.rho) << "]\n";
                 },
                 [&](const DenseRandomPsi& p) {
                   os << "psi.kind = \"dense_random\"\n";
                   os << "psi.params = [" << fmt_double(p.target_norm) << ", " << p.seed << "]\n";
                 },
             },
             m.psi);
  std::visit(overloaded{
                 [&](const ExponentialSpectrum& s) {
                   os << "spectrum.kind = \"exponential\"\n";
                   os << "spectrum.params = [" << fmt_double(s.c) << ", " << fmt_double(s.rho) << "]\n";
                 },
                 [&](const PolynomialSpectrum& s) {
                   os << "spectrum.kind = \"polynomial\"\n";
                   os << "spectrum.params = [" << fmt_double(s.c) << ", " << fmt_double(s.a) << "]\n";
                 },
             },
             m.spectrum);
  os << "burn_in = " << m.burn_in << "\n";
  os << "seed = " << cfg.model_seed << "\n\n";
  os << "[fit]\n";
  os << "k_rule = \"" << to_string(cfg.k_rule) << "\"\n\n";
  os << "[bootstrap]\n";
  os << "B = " << cfg.bootstrap.replications << "\n";
  os << "x0_policy = \"" << to_string(cfg.bootstrap.x0_policy) << "\"\n";
  os << "seed = " << cfg.bootstrap.seed << "\n\n";
  os << "[mc]\n";
  os << "n_grid = [";
  for (std::size_t i = 0; i < cfg.mc.n_grid.size(); ++i) os << (i ? ", " : "") << cfg.mc.n_grid[i];
  os << "]\n";
  os << "R = " << cfg.mc.outer_replications << "\n";
  os << "B = " << cfg.mc.bootstrap_replications << "\n";
  os << "master_seed = " << cfg.mc.master_seed << "\n";
  os << "beta_eq5 = " << fmt_double(cfg.mc.beta_eq5) << "\n";
  os << "beta_eq6 = " << fmt_double(cfg.mc.beta_eq6) << "\n";
  return os.str();
}

}  // namespace farboot
