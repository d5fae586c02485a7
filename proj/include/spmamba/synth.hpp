#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spmamba/image_io.hpp"
#include "spmamba/rng.hpp"

namespace spm {

// Generator settings for the synthetic pseudo-radiograph benchmark: a fixed
// anatomy template (two dark elliptical lung fields, a bright central spine
// band) warped per sample by a smooth displacement field plus pixel noise.
struct SynthConfig {
  int64_t size = 64;
  uint64_t seed = 0;

  double background = 0.55;
  double lung_intensity = 0.25;
  double spine_intensity = 0.82;
  double warp_fraction = 0.05;   // max displacement as a fraction of size
  double noise_std = 0.02;
  double lesion_area_lo = 0.04;  // mask area fraction bounds
  double lesion_area_hi = 0.12;
  double lesion_delta_lo = 0.15;  // |intensity shift| bounds
  double lesion_delta_hi = 0.40;

  void validate() const;
};

struct LabeledSample {
  GrayImage image;
  int label = 0;                 // 0 normal, 1 abnormal
  std::vector<uint8_t> mask;     // size*size, all zero when label == 0
};

// Deterministic in (config.seed, index).
LabeledSample generate_normal(const SynthConfig& config, uint64_t index);

// Adds one elliptical lesion (smooth or textured) fully inside a lung field;
// pixels outside the mask are untouched.
LabeledSample inject_anomaly(const LabeledSample& sample, const SynthConfig& config,
                             uint64_t index);

struct ManifestEntry {
  std::string path;
  int label = 0;
  std::string mask_path;  // "-" when absent
  uint64_t seed = 0;
  uint64_t index = 0;
};

struct DatasetManifest {
  std::vector<ManifestEntry> train;
  std::vector<ManifestEntry> test;
};

// Writes train/ (normals only), test/ (mixed) and masks/ under out_dir, plus
// manifest.tsv. Regeneration with the same config is bit-identical.
DatasetManifest build_dataset(const SynthConfig& config, const std::string& out_dir,
                              int64_t n_train, int64_t n_test_normal, int64_t n_test_abnormal);

DatasetManifest read_manifest(const std::string& manifest_path);
void write_manifest(const std::string& manifest_path, const DatasetManifest& manifest);

}  // namespace spm
