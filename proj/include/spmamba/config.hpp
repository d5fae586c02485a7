#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spmamba/common.hpp"

namespace spm {

// Model geometry bundle selected by preset.
struct ModelGeometry {
  int64_t input_size = 256;
  int stem_channels = 32;
  std::array<int, 3> enc_widths = {64, 128, 256};
  int fused_channels = 128;
  std::array<int, 4> dec_widths = {256, 128, 64, 64};
  std::array<int, 4> dec_depths = {3, 4, 6, 3};
  int state_dim = 16;
  int expansion = 2;
  int conv_kernel = 4;

  int64_t fused_side() const { return input_size / 8; }
};

// Resolved run configuration. Defaults correspond to the full-size
// ("paper-shape") preset.
struct Config {
  std::string preset = "paper-shape";
  uint64_t seed = 42;
  int precision = 32;

  // training
  double learning_rate = 0.005;
  double weight_decay = 1e-4;
  double epsilon = 25.0;  // weight of the prototype-distance loss term
  int batch_size = 16;
  int epochs = 10;

  // prototype matching
  int prototypes = 10;  // K
  int window = 3;       // p

  // scoring
  double alpha = 1.0;
  double beta = -0.025;
  double gamma = 400.0;
  double sigma = 0.6;
  double k_sigma = 1.2;
  double smooth_sigma = 4.0;

  // scan directions used by every SPSS block (first N of the 8)
  int directions = 8;

  // synthetic data
  double synth_noise_std = 0.02;
  double synth_warp = 0.05;

  ModelGeometry geometry;

  // Applies a named preset ("paper-shape", "toy" or "micro") to the geometry
  // and the geometry-coupled fields.
  void apply_preset(const std::string& name);

  // Sets one key=value pair; throws ValueError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);

  // All effective settings as sorted key=value lines.
  std::string snapshot() const;
  std::string hash() const;

  std::vector<int> direction_set() const;
};

// Parses a key=value file ('#' comments, blank lines ignored) into pairs.
std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path);

// Builds a config from optional file plus override pairs; the preset key is
// applied before everything else.
Config resolve_config(const std::string& config_path,
                      const std::vector<std::pair<std::string, std::string>>& overrides);

uint64_t fnv1a64(const std::string& text);

}  // namespace spm
