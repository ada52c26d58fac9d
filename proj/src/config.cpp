#include "spurlab/config.hpp"

#include <fstream>
#include <sstream>

namespace spurlab::config {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for " + key + ": " + v);
  }
  if (pos != v.size())
    throw ConfigError("config: trailing characters in " + key + ": " + v);
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  const int i = static_cast<int>(d);
  if (d != i) throw ConfigError("config: expected integer for " + key);
  return i;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& v,
                          T (*one)(const std::string&, const std::string&)) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(one(key, item));
  }
  if (out.empty()) throw ConfigError("config: empty list for " + key);
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError("config: bad seed value for " + key + ": " + v);
  }
}

trainer::Variant parse_variant(const std::string& v) {
  if (v == "entropy_min") return trainer::Variant::entropy_min;
  if (v == "pseudo_step") return trainer::Variant::pseudo_step;
  if (v == "pseudo_rounds") return trainer::Variant::pseudo_rounds;
  if (v == "noisy_gd") return trainer::Variant::noisy_gd;
  throw ConfigError("config: unknown trainer variant: " + v);
}

trainer::GradientSource parse_source(const std::string& v) {
  if (v == "population") return trainer::GradientSource::population;
  if (v == "empirical") return trainer::GradientSource::empirical;
  throw ConfigError("config: unknown gradient_source: " + v);
}

}  // namespace

ScenarioConfig ScenarioConfig::parse_text(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: malformed section at line " +
                          std::to_string(lineno));
      section = line.substr(1, line.size() - 2);
      if (section != "distribution" && section != "trainer" &&
          section != "experiment" && section != "concentration")
        throw ConfigError("config: unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at line " +
                        std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("config: key outside any section: " + key);

    if (section == "distribution") {
      if (key == "kind") {
        if (value != "toy_gaussian" && value != "gaussian")
          throw ConfigError("config: unknown distribution kind: " + value);
        cfg.kind = value;
      } else if (key == "gamma_radius")
        cfg.gamma_radius = parse_double(key, value);
      else if (key == "corr_prob")
        cfg.corr_prob = parse_double(key, value);
      else if (key == "d1")
        cfg.d1 = parse_int(key, value);
      else if (key == "d2")
        cfg.d2 = parse_int(key, value);
      else if (key == "sigma1")
        cfg.sigma1 = parse_double(key, value);
      else if (key == "gamma_scalar")
        cfg.gamma_scalar = parse_double(key, value);
      else if (key == "sigma2_scale")
        cfg.sigma2_scale = parse_double(key, value);
      else
        throw ConfigError("config: unknown key in [distribution]: " + key);
    } else if (section == "trainer") {
      if (key == "variant")
        cfg.trainer.variant = parse_variant(value);
      else if (key == "eta") {
        if (value == "auto")
          cfg.eta_auto = true;
        else
          cfg.trainer.eta = parse_double(key, value);
      } else if (key == "R")
        cfg.trainer.R = parse_double(key, value);
      else if (key == "max_steps")
        cfg.trainer.max_steps = parse_int(key, value);
      else if (key == "conf_threshold")
        cfg.trainer.conf_threshold = parse_double(key, value);
      else if (key == "epochs_per_round")
        cfg.trainer.epochs_per_round = parse_int(key, value);
      else if (key == "noise_scale")
        cfg.trainer.noise_scale = parse_double(key, value);
      else if (key == "gradient_source")
        cfg.trainer.gradient_source = parse_source(value);
      else if (key == "stop_tol")
        cfg.trainer.stop_tol = parse_double(key, value);
      else
        throw ConfigError("config: unknown key in [trainer]: " + key);
    } else if (section == "experiment") {
      if (key == "n_samples")
        cfg.n_samples = parse_int(key, value);
      else if (key == "n_test")
        cfg.n_test = parse_int(key, value);
      else if (key == "seeds")
        cfg.seeds = parse_list<std::uint64_t>(key, value, parse_u64);
      else if (key == "out_dir")
        cfg.out_dir = value;
      else
        throw ConfigError("config: unknown key in [experiment]: " + key);
    } else {  // concentration
      if (key == "n_list")
        cfg.n_list = parse_list<int>(key, value, parse_int);
      else if (key == "trials")
        cfg.trials = parse_int(key, value);
      else if (key == "w_grid_size")
        cfg.w_grid_size = parse_int(key, value);
      else
        throw ConfigError("config: unknown key in [concentration]: " + key);
    }
  }

  // Range validation.
  if (cfg.trainer.eta <= 0.0) throw ConfigError("config: eta must be > 0");
  if (cfg.trainer.R <= 0.0) throw ConfigError("config: R must be > 0");
  if (cfg.trainer.max_steps < 0)
    throw ConfigError("config: max_steps must be >= 0");
  if (cfg.trainer.conf_threshold < 0.0)
    throw ConfigError("config: conf_threshold must be >= 0");
  if (cfg.trainer.epochs_per_round < 1)
    throw ConfigError("config: epochs_per_round must be >= 1");
  if (cfg.trainer.noise_scale < 0.0)
    throw ConfigError("config: noise_scale must be >= 0");
  if (cfg.corr_prob < 0.0 || cfg.corr_prob > 1.0)
    throw ConfigError("config: corr_prob must be in [0, 1]");
  if (cfg.n_samples < 1 || cfg.n_test < 1)
    throw ConfigError("config: sample counts must be >= 1");
  if (cfg.sigma1 <= 0.0) throw ConfigError("config: sigma1 must be > 0");
  if (cfg.sigma2_scale <= 0.0)
    throw ConfigError("config: sigma2_scale must be > 0");
  if (cfg.d1 < 1 || cfg.d2 < 1) throw ConfigError("config: d1, d2 must be >= 1");
  if (cfg.trials < 1) throw ConfigError("config: trials must be >= 1");
  if (cfg.w_grid_size < 1)
    throw ConfigError("config: w_grid_size must be >= 1");
  for (int n : cfg.n_list)
    if (n < 1) throw ConfigError("config: n_list entries must be >= 1");
  return cfg;
}

ScenarioConfig ScenarioConfig::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_text(buf.str());
}

}  // namespace spurlab::config
