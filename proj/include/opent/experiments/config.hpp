#pragma once

#include "opent/circuits.hpp"
#include "opent/entropy.hpp"
#include "opent/randmat.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace opent::experiments {

enum class ExperimentKind { fig2_left, fig2_right, fig4_loe, thm_sweep, randmat_sweep };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::fig2_left: return "fig2_left";
    case ExperimentKind::fig2_right: return "fig2_right";
    case ExperimentKind::fig4_loe: return "fig4_loe";
    case ExperimentKind::thm_sweep: return "thm_sweep";
    case ExperimentKind::randmat_sweep: return "randmat_sweep";
  }
  return "?";
}

inline ExperimentKind parse_experiment_kind(const std::string& s) {
  for (auto k : {ExperimentKind::fig2_left, ExperimentKind::fig2_right, ExperimentKind::fig4_loe,
                 ExperimentKind::thm_sweep, ExperimentKind::randmat_sweep}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown experiment '" + s + "'");
}

/// A synthetic Schmidt spectrum for the random-matrix sweep:
/// "geometric:<r>" or "flat".
struct SpectrumSpec {
  std::string kind = "geometric";
  double ratio = 0.5;

  std::string label() const {
    if (kind == "flat") return "flat";
    std::ostringstream os;
    os << "geometric:" << ratio;
    return os.str();
  }

  RVector lambdas(Eigen::Index length) const {
    return kind == "flat" ? flat_spectrum(length) : geometric_spectrum(length, ratio);
  }

  static SpectrumSpec parse(const std::string& s) {
    if (s == "flat") return {"flat", 1.0};
    const std::string prefix = "geometric:";
    if (s.rfind(prefix, 0) == 0) {
      try {
        const double r = std::stod(s.substr(prefix.size()));
        if (!(r > 0.0 && r < 1.0)) throw ConfigError("geometric ratio must lie in (0,1)");
        return {"geometric", r};
      } catch (const std::logic_error&) {
        throw ConfigError("bad spectrum '" + s + "'");
      }
    }
    throw ConfigError("bad spectrum '" + s + "' (expected flat or geometric:<r>)");
  }
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::fig2_left;
  std::vector<ModelSpec> models{ModelSpec::xxz(), ModelSpec::kim()};
  std::vector<int> n_sites_list{8};
  int max_layers = 20;
  double cutoff = 0.02;
  std::vector<double> alpha_grid{0.5, 0.7, 2.0, kInfinity};
  std::vector<int> chi_grid{1, 2, 4, 8, 16};
  std::uint64_t seed = 1234;
  std::string output_dir = "out";

  // Circuit.
  int initial_site = 0;  // 0: N/2 + 1
  char initial_pauli = 'Z';
  bool first_layer_odd = true;

  // Bounds.
  std::vector<int> otoc_orders{2, 3};
  bool n_minus_one = false;

  // Random-matrix sweep.
  std::vector<SpectrumSpec> spectra{{"geometric", 0.5}, {"flat", 1.0}};
  int randmat_n_sites = 6;
  int samples = 100;
  double l_bound = 0.0;  // 0: measured from the base factors
  ConjugationMode conjugation = ConjugationMode::shared_haar_signed;

  // Fig. 4 control series: TFIM evolved from sigma_x.
  bool tfim_sigma_x = true;

  // Runner.
  int workers = 0;  // 0: hardware concurrency
  bool heavy = false;
  bool svg = false;

  int resolved_workers() const {
    if (workers > 0) return workers;
    return std::max(1u, std::thread::hardware_concurrency());
  }

  int site_for(int n) const { return initial_site > 0 ? initial_site : default_initial_site(n); }

  /// Throws ConfigError on the first invalid field.
  void validate() const {
    if (models.empty() && experiment != ExperimentKind::randmat_sweep) throw ConfigError("models: empty list");
    if (max_layers < 0) throw ConfigError("max_layers must be >= 0");
    if (!(cutoff > 0.0)) throw ConfigError("cutoff must be > 0");
    for (int n : n_sites_list) {
      if (n < 2 || n % 2 != 0) throw ConfigError("n_sites must be even and >= 2, got " + std::to_string(n));
      if (n > 12) throw ConfigError("n_sites above 12 is outside the dense desk-scale range");
      if (n > 8 && !heavy) throw ConfigError("n_sites " + std::to_string(n) + " requires --heavy");
      if (initial_site > n) throw ConfigError("initial_site outside the chain");
    }
    for (double a : alpha_grid) {
      if (!(a > 0.0) || a == 1.0) throw ConfigError("alpha_grid entries must be positive and != 1");
    }
    for (int c : chi_grid) {
      if (c < 1) throw ConfigError("chi_grid entries must be >= 1");
    }
    for (int k : otoc_orders) {
      if (k < 2) throw ConfigError("otoc_orders entries must be >= 2");
    }
    if (initial_pauli != 'X' && initial_pauli != 'Y' && initial_pauli != 'Z') {
      throw ConfigError("initial_pauli must be X, Y or Z");
    }
    if (samples <= 0) throw ConfigError("samples must be positive");
    if (randmat_n_sites < 2 || randmat_n_sites % 2 != 0 || randmat_n_sites > 8) {
      throw ConfigError("randmat_n_sites must be even in 2..8");
    }
    if (l_bound != 0.0 && !(l_bound >= 1.0)) throw ConfigError("l_bound must be 0 (measured) or >= 1");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "infinity" || v == "Inf") return kInfinity;
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::logic_error&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::logic_error&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

inline ModelSpec& model_slot(ExperimentConfig& cfg, ModelFamily f) {
  for (auto& m : cfg.models) {
    if (m.family == f) return m;
  }
  throw ConfigError("parameter given for model " + to_string(f) + " which is not listed in models");
}

}  // namespace detail

/// Parses `key = value` lines. Blank lines and lines starting with '#' are
/// ignored; duplicate keys keep the last value.
inline std::map<std::string, std::string> parse_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = detail::trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = detail::trim(t.substr(eq + 1));
  }
  return kv;
}

/// Applies one key. Model parameters (xxz.J, kim.hx, ...) address entries of
/// the current model list, so `models` is applied first.
inline void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "experiment") {
    cfg.experiment = parse_experiment_kind(value);
  } else if (key == "models") {
    cfg.models.clear();
    for (const auto& m : split_list(value)) cfg.models.push_back(ModelSpec::defaults(parse_model_family(m)));
  } else if (key == "n_sites") {
    cfg.n_sites_list.clear();
    for (const auto& s : split_list(value)) cfg.n_sites_list.push_back(static_cast<int>(parse_int(key, s)));
  } else if (key == "max_layers") {
    cfg.max_layers = static_cast<int>(parse_int(key, value));
  } else if (key == "cutoff") {
    cfg.cutoff = parse_double(key, value);
  } else if (key == "alpha_grid") {
    cfg.alpha_grid.clear();
    for (const auto& s : split_list(value)) cfg.alpha_grid.push_back(parse_double(key, s));
  } else if (key == "chi_grid") {
    cfg.chi_grid.clear();
    for (const auto& s : split_list(value)) cfg.chi_grid.push_back(static_cast<int>(parse_int(key, s)));
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else if (key == "initial_site") {
    cfg.initial_site = static_cast<int>(parse_int(key, value));
  } else if (key == "initial_pauli") {
    if (value.size() != 1) throw ConfigError("initial_pauli: expected one of X, Y, Z");
    cfg.initial_pauli = value[0];
  } else if (key == "first_layer_odd") {
    cfg.first_layer_odd = parse_bool(key, value);
  } else if (key == "otoc_orders") {
    cfg.otoc_orders.clear();
    for (const auto& s : split_list(value)) cfg.otoc_orders.push_back(static_cast<int>(parse_int(key, s)));
  } else if (key == "n_minus_one") {
    cfg.n_minus_one = parse_bool(key, value);
  } else if (key == "spectra") {
    cfg.spectra.clear();
    for (const auto& s : split_list(value)) cfg.spectra.push_back(SpectrumSpec::parse(s));
  } else if (key == "randmat_n_sites") {
    cfg.randmat_n_sites = static_cast<int>(parse_int(key, value));
  } else if (key == "samples") {
    cfg.samples = static_cast<int>(parse_int(key, value));
  } else if (key == "l_bound") {
    cfg.l_bound = value == "measured" ? 0.0 : parse_double(key, value);
  } else if (key == "conjugation") {
    if (value == "shared_haar_signed") {
      cfg.conjugation = ConjugationMode::shared_haar_signed;
    } else if (value == "independent_haar") {
      cfg.conjugation = ConjugationMode::independent_haar;
    } else {
      throw ConfigError("conjugation: expected shared_haar_signed or independent_haar");
    }
  } else if (key == "tfim_sigma_x") {
    cfg.tfim_sigma_x = parse_bool(key, value);
  } else if (key == "workers") {
    cfg.workers = static_cast<int>(parse_int(key, value));
  } else if (key == "heavy") {
    cfg.heavy = parse_bool(key, value);
  } else if (key == "svg") {
    cfg.svg = parse_bool(key, value);
  } else if (key == "xxz.J") {
    model_slot(cfg, ModelFamily::XXZ).J = parse_double(key, value);
  } else if (key == "xxz.Delta") {
    model_slot(cfg, ModelFamily::XXZ).Delta = parse_double(key, value);
  } else if (key == "kim.J") {
    model_slot(cfg, ModelFamily::KIM).J = parse_double(key, value);
  } else if (key == "kim.hx") {
    model_slot(cfg, ModelFamily::KIM).hx = parse_double(key, value);
  } else if (key == "kim.hz") {
    model_slot(cfg, ModelFamily::KIM).hz = parse_double(key, value);
  } else if (key == "tfim.J") {
    model_slot(cfg, ModelFamily::TFIM).J = parse_double(key, value);
  } else if (key == "tfim.hx") {
    model_slot(cfg, ModelFamily::TFIM).hx = parse_double(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

/// Per-experiment defaults, then keys in file order of precedence.
inline ExperimentConfig defaults_for(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.experiment = kind;
  switch (kind) {
    case ExperimentKind::fig2_left:
    case ExperimentKind::fig2_right:
      cfg.n_sites_list = {8};
      cfg.max_layers = 20;
      break;
    case ExperimentKind::fig4_loe:
      cfg.models = {ModelSpec::xxz(), ModelSpec::kim(), ModelSpec::tfim()};
      cfg.n_sites_list = {8};
      cfg.max_layers = 20;
      break;
    case ExperimentKind::thm_sweep:
      cfg.n_sites_list = {6, 8};
      cfg.max_layers = 12;
      break;
    case ExperimentKind::randmat_sweep:
      cfg.max_layers = 0;
      break;
  }
  return cfg;
}

/// Builds a config from parsed keys. `experiment` and `models` are applied
/// before all other keys so model parameters find their slot.
inline ExperimentConfig config_from_keys(const std::map<std::string, std::string>& kv,
                                         std::optional<ExperimentKind> fallback = std::nullopt) {
  ExperimentKind kind = fallback.value_or(ExperimentKind::fig2_left);
  if (auto it = kv.find("experiment"); it != kv.end()) kind = parse_experiment_kind(it->second);
  ExperimentConfig cfg = defaults_for(kind);
  if (auto it = kv.find("models"); it != kv.end()) apply_key(cfg, "models", it->second);
  for (const auto& [k, v] : kv) {
    if (k == "experiment" || k == "models") continue;
    apply_key(cfg, k, v);
  }
  return cfg;
}

inline std::map<std::string, std::string> read_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_key_values(in);
}

}  // namespace opent::experiments
