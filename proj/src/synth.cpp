#include "spmamba/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace spm {

namespace fs = std::filesystem;

void SynthConfig::validate() const {
  require(size >= 16, "synth-config", "image size must be >= 16");
  require(lesion_area_lo > 0 && lesion_area_hi > lesion_area_lo, "synth-config",
          "lesion area range must be non-empty");
  require(lesion_delta_hi > lesion_delta_lo && lesion_delta_lo > 0, "synth-config",
          "lesion delta range must be non-empty");
  require(warp_fraction >= 0 && warp_fraction < 0.25, "synth-config",
          "warp amplitude must keep displacements in bounds");
}

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp01(double v) { return v < 0 ? 0 : (v > 1 ? 1 : v); }

// Intensity of the undeformed anatomy template at normalized coords (u,v)
// in [0,1]^2: soft background vignette, two dark lung ellipses, bright
// central spine band.
double template_intensity(const SynthConfig& cfg, double u, double v) {
  double value = cfg.background - 0.08 * ((u - 0.5) * (u - 0.5) + (v - 0.5) * (v - 0.5)) * 4.0;

  auto lung = [&](double cu, double cv, double ru, double rv) {
    const double du = (u - cu) / ru;
    const double dv = (v - cv) / rv;
    const double q = du * du + dv * dv;
    if (q >= 1.0) return 0.0;
    const double edge = 1.0 - q;
    return edge * edge;  // smooth falloff toward the boundary
  };
  const double left = lung(0.30, 0.52, 0.17, 0.30);
  const double right = lung(0.70, 0.52, 0.17, 0.30);
  value += (cfg.lung_intensity - cfg.background) * std::min(1.0, left + right);

  const double spine = std::exp(-std::pow((u - 0.5) / 0.045, 2.0));
  value += (cfg.spine_intensity - cfg.background) * spine;

  // faint horizontal rib bands inside the thorax
  if (v > 0.2 && v < 0.85) value += 0.03 * std::sin(v * 9.0 * kPi) * std::min(1.0, left + right);
  return value;
}

struct WarpField {
  // smooth per-axis displacement built from 3 sinusoidal components
  double ax[3], bx[3], px[3];
  double ay[3], by[3], py[3];
  double amp;

  static WarpField sample(Rng& rng, double max_disp) {
    WarpField w{};
    for (int i = 0; i < 3; ++i) {
      w.ax[i] = rng.uniform(0.5, 2.5);
      w.bx[i] = rng.uniform(0.5, 2.5);
      w.px[i] = rng.uniform(0.0, 2.0 * kPi);
      w.ay[i] = rng.uniform(0.5, 2.5);
      w.by[i] = rng.uniform(0.5, 2.5);
      w.py[i] = rng.uniform(0.0, 2.0 * kPi);
    }
    w.amp = max_disp;
    return w;
  }

  void displace(double u, double v, double& du, double& dv) const {
    du = 0;
    dv = 0;
    for (int i = 0; i < 3; ++i) {
      du += std::sin(ax[i] * kPi * u + bx[i] * kPi * v + px[i]);
      dv += std::sin(ay[i] * kPi * v + by[i] * kPi * u + py[i]);
    }
    du *= amp / 3.0;
    dv *= amp / 3.0;
  }
};

}  // namespace

LabeledSample generate_normal(const SynthConfig& config, uint64_t index) {
  config.validate();
  Rng rng = Rng::stream(config.seed, streams::kSample, index);
  const int64_t n = config.size;

  const WarpField warp = WarpField::sample(rng, config.warp_fraction);
  // global shift/tilt component on top of the sinusoidal field
  const double shift_u = rng.uniform(-config.warp_fraction, config.warp_fraction);
  const double shift_v = rng.uniform(-config.warp_fraction, config.warp_fraction);

  LabeledSample out;
  out.label = 0;
  out.image = GrayImage::zeros(n, n);
  out.mask.assign(static_cast<size_t>(n * n), 0);
  for (int64_t r = 0; r < n; ++r)
    for (int64_t c = 0; c < n; ++c) {
      const double v = (static_cast<double>(r) + 0.5) / static_cast<double>(n);
      const double u = (static_cast<double>(c) + 0.5) / static_cast<double>(n);
      double du, dv;
      warp.displace(u, v, du, dv);
      const double value =
          template_intensity(config, u + du + shift_u, v + dv + shift_v) +
          rng.normal(0.0, config.noise_std);
      out.image.at(r, c) = static_cast<float>(clamp01(value));
    }
  return out;
}

LabeledSample inject_anomaly(const LabeledSample& sample, const SynthConfig& config,
                             uint64_t index) {
  config.validate();
  require(sample.label == 0, "inject-anomaly", "input sample must be normal");
  Rng rng = Rng::stream(config.seed, streams::kLesion, index);
  const int64_t n = config.size;

  // target area fraction, then an ellipse with that area
  const double frac = rng.uniform(config.lesion_area_lo, config.lesion_area_hi);
  const double area = frac * static_cast<double>(n * n);
  const double aspect = rng.uniform(0.7, 1.4);
  const double r_minor = std::sqrt(area / (kPi * aspect));
  const double r_major = r_minor * aspect;

  // center inside one of the lung fields, with margin so the whole blob stays
  // inside the field
  const bool left_lung = rng.below(2) == 0;
  const double cu0 = left_lung ? 0.30 : 0.70;
  const double margin_u = (r_major + 1.0) / static_cast<double>(n);
  const double margin_v = (r_major + 1.0) / static_cast<double>(n);
  const double cu = cu0 + rng.uniform(-(0.10 - margin_u), 0.10 - margin_u);
  const double cv = 0.52 + rng.uniform(-(0.20 - margin_v), 0.20 - margin_v);
  const double theta = rng.uniform(0.0, kPi);
  const bool textured = rng.below(2) == 1;
  const double tex_freq = rng.uniform(2.0, 5.0);

  // brighten dark regions, darken bright ones, so the lesion never saturates
  // into invisibility
  const double mag = rng.uniform(config.lesion_delta_lo, config.lesion_delta_hi);
  const double center_val = sample.image.at(static_cast<int64_t>(cv * n), static_cast<int64_t>(cu * n));
  const double delta = center_val < 0.5 ? mag : -mag;

  LabeledSample out = sample;
  out.label = 1;
  const double cx = cu * static_cast<double>(n);
  const double cy = cv * static_cast<double>(n);
  const double ct = std::cos(theta), st = std::sin(theta);
  for (int64_t r = 0; r < n; ++r)
    for (int64_t c = 0; c < n; ++c) {
      const double dx = static_cast<double>(c) + 0.5 - cx;
      const double dy = static_cast<double>(r) + 0.5 - cy;
      const double xr = (ct * dx + st * dy) / r_major;
      const double yr = (-st * dx + ct * dy) / r_minor;
      const double q = xr * xr + yr * yr;
      if (q > 1.0) continue;
      double local = delta * (0.6 + 0.4 * (1.0 - q));
      if (textured) local *= 0.75 + 0.25 * std::sin(tex_freq * (dx + dy) * 2.0 * kPi / r_major);
      out.image.at(r, c) = static_cast<float>(clamp01(sample.image.at(r, c) + local));
      out.mask[static_cast<size_t>(r * n + c)] = 1;
    }
  return out;
}

void write_manifest(const std::string& manifest_path, const DatasetManifest& manifest) {
  std::ofstream f(manifest_path);
  if (!f) throw IoError("write-manifest: cannot open " + manifest_path);
  f << "split\tpath\tlabel\tmask_path\tseed\tindex\n";
  auto dump = [&](const char* split, const std::vector<ManifestEntry>& entries) {
    for (const auto& e : entries)
      f << split << '\t' << e.path << '\t' << e.label << '\t' << e.mask_path << '\t' << e.seed
        << '\t' << e.index << '\n';
  };
  dump("train", manifest.train);
  dump("test", manifest.test);
  if (!f) throw IoError("write-manifest: failed writing " + manifest_path);
}

DatasetManifest read_manifest(const std::string& manifest_path) {
  std::ifstream f(manifest_path);
  if (!f) throw IoError("read-manifest: cannot open " + manifest_path);
  DatasetManifest m;
  std::string line;
  if (!std::getline(f, line)) throw IoError("read-manifest: empty manifest " + manifest_path);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string split;
    ManifestEntry e;
    if (!(ss >> split >> e.path >> e.label >> e.mask_path >> e.seed >> e.index))
      throw IoError("read-manifest: malformed line in " + manifest_path + ": " + line);
    if (split == "train")
      m.train.push_back(std::move(e));
    else if (split == "test")
      m.test.push_back(std::move(e));
    else
      throw IoError("read-manifest: unknown split '" + split + "' in " + manifest_path);
  }
  return m;
}

DatasetManifest build_dataset(const SynthConfig& config, const std::string& out_dir,
                              int64_t n_train, int64_t n_test_normal, int64_t n_test_abnormal) {
  config.validate();
  require(n_train >= 1 && n_test_normal >= 1 && n_test_abnormal >= 1, "build-dataset",
          "all split counts must be >= 1");
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "train", ec);
  fs::create_directories(fs::path(out_dir) / "test", ec);
  fs::create_directories(fs::path(out_dir) / "masks", ec);
  if (ec) throw IoError("build-dataset: cannot create directories under " + out_dir);

  DatasetManifest manifest;
  uint64_t index = 0;
  char name[64];

  for (int64_t i = 0; i < n_train; ++i, ++index) {
    LabeledSample s = generate_normal(config, index);
    std::snprintf(name, sizeof(name), "train/normal_%04lld.png", static_cast<long long>(i));
    write_png_gray8((fs::path(out_dir) / name).string(), s.image);
    manifest.train.push_back({name, 0, "-", config.seed, index});
  }
  for (int64_t i = 0; i < n_test_normal; ++i, ++index) {
    LabeledSample s = generate_normal(config, index);
    std::snprintf(name, sizeof(name), "test/normal_%04lld.png", static_cast<long long>(i));
    write_png_gray8((fs::path(out_dir) / name).string(), s.image);
    manifest.test.push_back({name, 0, "-", config.seed, index});
  }
  for (int64_t i = 0; i < n_test_abnormal; ++i, ++index) {
    LabeledSample s = inject_anomaly(generate_normal(config, index), config, index);
    std::snprintf(name, sizeof(name), "test/abnormal_%04lld.png", static_cast<long long>(i));
    write_png_gray8((fs::path(out_dir) / name).string(), s.image);
    char mask_name[64];
    std::snprintf(mask_name, sizeof(mask_name), "masks/abnormal_%04lld.png",
                  static_cast<long long>(i));
    GrayImage mask = GrayImage::zeros(config.size, config.size);
    for (size_t j = 0; j < s.mask.size(); ++j)
      mask.pixels[j] = s.mask[j] ? 1.0f : 0.0f;
    write_png_gray8((fs::path(out_dir) / mask_name).string(), mask);
    manifest.test.push_back({name, 1, mask_name, config.seed, index});
  }
  write_manifest((fs::path(out_dir) / "manifest.tsv").string(), manifest);
  return manifest;
}

}  // namespace spm
