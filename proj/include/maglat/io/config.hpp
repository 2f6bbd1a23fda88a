#pragma once

// Run configuration: a flat "key = value" file with '#' comments. Unknown
// keys, duplicates and malformed numbers are errors reported with the line.

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "maglat/field_model.hpp"
#include "maglat/io/csv.hpp"
#include "maglat/lattice_config.hpp"

namespace maglat {

struct RunConfig {
  LatticeSpec lattice{};
  BiasField bias{1e-4, 0.0, 0.0};
  AtomSpec atom{};
  FieldModelKind model = FieldModelKind::magnetostatic;
  double kappa = 0.0;
  std::string output_dir = "out";
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view v, const std::string& where) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out))
    throw ConfigError(where + ": invalid number '" + std::string(v) + "'");
  return out;
}

inline int parse_int(std::string_view v, const std::string& where) {
  int out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(where + ": invalid integer '" + std::string(v) + "'");
  return out;
}

}  // namespace detail

/// Key order used for echoing.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "n_holes", "m_blocks", "alpha_m",  "tau_m",  "m_z_A_per_m",   "film_half_extent_m",
      "bias_x_T",            "bias_y_T",   "bias_z_T", "atom_mass_kg", "atom_gf",   "atom_mf",
      "atom_as_m",               "model",    "kappa",  "output_dir"};
  return keys;
}

/// Assembles and validates configs; keys can be set from a file and overrides.
class ConfigBuilder {
 public:
  void set(std::string_view key, std::string_view value, const std::string& where) {
    const std::string k(key);
    bool known = false;
    for (const auto& c : config_keys()) known = known || c == k;
    if (!known) throw ConfigError(where + ": unknown key '" + k + "'");
    if (value.empty()) throw ConfigError(where + ": empty value for '" + k + "'");
    values_[k] = {std::string(value), where};
  }

  void parse(std::istream& in, const std::string& source) {
    std::string line;
    std::map<std::string, int> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string_view v(line);
      if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
      v = detail::trim(v);
      if (v.empty()) continue;
      const std::string where = source + ":" + std::to_string(lineno);
      const auto eq = v.find('=');
      if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
      const auto key = detail::trim(v.substr(0, eq));
      const auto value = detail::trim(v.substr(eq + 1));
      if (key.empty()) throw ConfigError(where + ": missing key");
      if (auto it = seen.find(std::string(key)); it != seen.end())
        throw ConfigError(where + ": duplicate key '" + std::string(key) + "' (first set on line " +
                          std::to_string(it->second) + ")");
      seen[std::string(key)] = lineno;
      set(key, value, where);
    }
  }

  void parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    parse(in, path);
  }

  /// Applies "key=value" override strings.
  void apply_override(std::string_view kv) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw ConfigError("--set '" + std::string(kv) + "': expected key=value");
    set(detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)), "--set " + std::string(kv));
  }

  RunConfig build() const {
    RunConfig c;
    const auto num = [&](const char* k, double& dst) {
      if (auto it = values_.find(k); it != values_.end())
        dst = detail::parse_double(it->second.first, it->second.second);
    };
    const auto integer = [&](const char* k, int& dst) {
      if (auto it = values_.find(k); it != values_.end())
        dst = detail::parse_int(it->second.first, it->second.second);
    };
    integer("n_holes", c.lattice.n_holes_per_block);
    integer("m_blocks", c.lattice.m_blocks);
    num("alpha_m", c.lattice.alpha);
    num("tau_m", c.lattice.tau);
    num("m_z_A_per_m", c.lattice.m_z);
    c.lattice.film_half_extent = default_film_half_extent(c.lattice);
    num("film_half_extent_m", c.lattice.film_half_extent);
    num("bias_x_T", c.bias.bx);
    num("bias_y_T", c.bias.by);
    num("bias_z_T", c.bias.bz);
    num("atom_mass_kg", c.atom.mass);
    num("atom_gf", c.atom.g_f);
    num("atom_mf", c.atom.m_f);
    num("atom_as_m", c.atom.a_s);
    num("kappa", c.kappa);
    if (auto it = values_.find("model"); it != values_.end()) {
      try {
        c.model = parse_field_model(it->second.first);
      } catch (const ConfigError& e) {
        throw ConfigError(it->second.second + ": " + e.what());
      }
    }
    if (auto it = values_.find("output_dir"); it != values_.end()) c.output_dir = it->second.first;

    std::vector<std::string> errs;
    const auto collect = [&](auto&& fn) {
      try {
        fn();
      } catch (const ValidationError& e) {
        errs.insert(errs.end(), e.violations().begin(), e.violations().end());
      }
    };
    collect([&] { validate_spec(c.lattice); });
    collect([&] { validate_atom(c.atom); });
    collect([&] { validate_bias(c.bias); });
    if (!(c.kappa >= 0.0)) errs.emplace_back("kappa must be >= 0");
    if (!errs.empty()) throw ValidationError(std::move(errs));
    return c;
  }

 private:
  std::map<std::string, std::pair<std::string, std::string>> values_;
};

inline RunConfig parse_config(const std::string& text, const std::string& source = "config") {
  ConfigBuilder b;
  std::istringstream in(text);
  b.parse(in, source);
  return b.build();
}

/// Effective configuration as "key = value" lines, re-parseable.
inline std::string echo_config(const RunConfig& c) {
  std::ostringstream o;
  o << "n_holes = " << c.lattice.n_holes_per_block << "\n"
    << "m_blocks = " << c.lattice.m_blocks << "\n"
    << "alpha_m = " << format_double(c.lattice.alpha) << "\n"
    << "tau_m = " << format_double(c.lattice.tau) << "\n"
    << "m_z_A_per_m = " << format_double(c.lattice.m_z) << "\n"
    << "film_half_extent_m = " << format_double(c.lattice.film_half_extent) << "\n"
    << "bias_x_T = " << format_double(c.bias.bx) << "\n"
    << "bias_y_T = " << format_double(c.bias.by) << "\n"
    << "bias_z_T = " << format_double(c.bias.bz) << "\n"
    << "atom_mass_kg = " << format_double(c.atom.mass) << "\n"
    << "atom_gf = " << format_double(c.atom.g_f) << "\n"
    << "atom_mf = " << format_double(c.atom.m_f) << "\n"
    << "atom_as_m = " << format_double(c.atom.a_s) << "\n"
    << "model = " << to_string(c.model) << "\n"
    << "kappa = " << format_double(c.kappa) << "\n"
    << "output_dir = " << c.output_dir << "\n";
  return o.str();
}

}  // namespace maglat
