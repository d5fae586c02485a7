#include "spmamba/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace spm {

namespace {

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ValueError("config: value for '" + key + "' is not a number: " + v);
  }
}

int64_t to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const int64_t i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ValueError("config: value for '" + key + "' is not an integer: " + v);
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void Config::apply_preset(const std::string& name) {
  if (name == "paper-shape") {
    geometry = ModelGeometry{};
    batch_size = 16;
  } else if (name == "toy") {
    geometry.input_size = 64;
    geometry.stem_channels = 16;
    geometry.enc_widths = {32, 64, 128};
    geometry.fused_channels = 64;
    geometry.dec_widths = {128, 64, 32, 32};
    geometry.dec_depths = {1, 1, 1, 1};
    geometry.state_dim = 4;
    batch_size = 8;
  } else if (name == "micro") {
    geometry.input_size = 64;
    geometry.stem_channels = 3;
    geometry.enc_widths = {4, 6, 8};
    geometry.fused_channels = 6;
    geometry.dec_widths = {8, 6, 4, 4};
    geometry.dec_depths = {1, 1, 1, 1};
    geometry.state_dim = 2;
    batch_size = 2;
    prototypes = 2;
  } else {
    throw ValueError("config: unknown preset '" + name + "' (expected paper-shape, toy or micro)");
  }
  preset = name;
}

void Config::set(const std::string& key, const std::string& value) {
  if (key == "preset") {
    apply_preset(value);
  } else if (key == "seed") {
    seed = static_cast<uint64_t>(to_int(key, value));
  } else if (key == "precision") {
    const int64_t p = to_int(key, value);
    if (p != 32 && p != 64) throw ValueError("config: precision must be 32 or 64, got " + value);
    precision = static_cast<int>(p);
  } else if (key == "learning_rate") {
    learning_rate = to_double(key, value);
    if (learning_rate <= 0) throw ValueError("config: learning_rate must be > 0");
  } else if (key == "weight_decay") {
    weight_decay = to_double(key, value);
  } else if (key == "epsilon") {
    epsilon = to_double(key, value);
    if (epsilon < 0) throw ValueError("config: epsilon must be >= 0");
  } else if (key == "batch_size") {
    batch_size = static_cast<int>(to_int(key, value));
    if (batch_size < 1) throw ValueError("config: batch_size must be >= 1");
  } else if (key == "epochs") {
    epochs = static_cast<int>(to_int(key, value));
    if (epochs < 1) throw ValueError("config: epochs must be >= 1");
  } else if (key == "prototypes") {
    prototypes = static_cast<int>(to_int(key, value));
    if (prototypes < 1) throw ValueError("config: prototypes must be >= 1");
  } else if (key == "window") {
    window = static_cast<int>(to_int(key, value));
    if (window < 1 || window % 2 == 0) throw ValueError("config: window must be odd and positive");
  } else if (key == "alpha") {
    alpha = to_double(key, value);
  } else if (key == "beta") {
    beta = to_double(key, value);
  } else if (key == "gamma") {
    gamma = to_double(key, value);
  } else if (key == "sigma") {
    sigma = to_double(key, value);
  } else if (key == "k_sigma") {
    k_sigma = to_double(key, value);
  } else if (key == "smooth_sigma") {
    smooth_sigma = to_double(key, value);
  } else if (key == "directions") {
    const int64_t d = to_int(key, value);
    if (d < 1 || d > 8) throw ValueError("config: directions must be in [1,8], got " + value);
    directions = static_cast<int>(d);
  } else if (key == "synth_noise_std") {
    synth_noise_std = to_double(key, value);
  } else if (key == "synth_warp") {
    synth_warp = to_double(key, value);
  } else if (key == "input_size") {
    const int64_t s = to_int(key, value);
    if (s < 32 || s % 32 != 0)
      throw ValueError("config: input_size must be a positive multiple of 32, got " + value);
    geometry.input_size = s;
  } else {
    throw ValueError("config: unknown key '" + key + "'");
  }
}

std::string Config::snapshot() const {
  std::map<std::string, std::string> kv;
  kv["preset"] = preset;
  kv["seed"] = std::to_string(seed);
  kv["precision"] = std::to_string(precision);
  kv["learning_rate"] = fmt(learning_rate);
  kv["weight_decay"] = fmt(weight_decay);
  kv["epsilon"] = fmt(epsilon);
  kv["batch_size"] = std::to_string(batch_size);
  kv["epochs"] = std::to_string(epochs);
  kv["prototypes"] = std::to_string(prototypes);
  kv["window"] = std::to_string(window);
  kv["alpha"] = fmt(alpha);
  kv["beta"] = fmt(beta);
  kv["gamma"] = fmt(gamma);
  kv["sigma"] = fmt(sigma);
  kv["k_sigma"] = fmt(k_sigma);
  kv["smooth_sigma"] = fmt(smooth_sigma);
  kv["directions"] = std::to_string(directions);
  kv["synth_noise_std"] = fmt(synth_noise_std);
  kv["synth_warp"] = fmt(synth_warp);
  kv["input_size"] = std::to_string(geometry.input_size);
  kv["state_dim"] = std::to_string(geometry.state_dim);
  kv["expansion"] = std::to_string(geometry.expansion);
  kv["conv_kernel"] = std::to_string(geometry.conv_kernel);
  std::ostringstream os;
  for (const auto& [k, v] : kv) os << k << " = " << v << '\n';
  return os.str();
}

uint64_t fnv1a64(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x00000100000001b3ULL;
  }
  return h;
}

std::string Config::hash() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(snapshot())));
  return buf;
}

std::vector<int> Config::direction_set() const {
  std::vector<int> out;
  for (int i = 0; i < directions; ++i) out.push_back(i);
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("config: cannot open file " + path);
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValueError("config: line " + std::to_string(line_no) + " in " + path +
                       " is not key = value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    pairs.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return pairs;
}

Config resolve_config(const std::string& config_path,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
  Config cfg;
  std::vector<std::pair<std::string, std::string>> pairs;
  if (!config_path.empty()) pairs = parse_config_file(config_path);
  pairs.insert(pairs.end(), overrides.begin(), overrides.end());
  for (const auto& [k, v] : pairs)
    if (k == "preset") cfg.apply_preset(v);
  for (const auto& [k, v] : pairs)
    if (k != "preset") cfg.set(k, v);
  return cfg;
}

}  // namespace spm
