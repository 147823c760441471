#include "rpd/synth.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rpd/image_io.hpp"

namespace rpd {
namespace {

// Bilinearly upsampled random lattice; one octave of value noise.
GrayImage value_noise(int width, int height, int spacing, std::mt19937& rng) {
  const int nu = width / spacing + 2;
  const int nv = height / spacing + 2;
  Raster<float> lattice(nv, nu);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  for (int j = 0; j < nv; ++j)
    for (int i = 0; i < nu; ++i) lattice(j, i) = uni(rng);

  GrayImage out(height, width);
  for (int v = 0; v < height; ++v) {
    const double y = static_cast<double>(v) / spacing;
    const int j = static_cast<int>(y);
    const double ty = y - j;
    for (int u = 0; u < width; ++u) {
      const double x = static_cast<double>(u) / spacing;
      const int i = static_cast<int>(x);
      const double tx = x - i;
      out(v, u) = static_cast<float>(
          (1 - ty) * ((1 - tx) * lattice(j, i) + tx * lattice(j, i + 1)) +
          ty * ((1 - tx) * lattice(j + 1, i) + tx * lattice(j + 1, i + 1)));
    }
  }
  return out;
}

GrayImage binomial_smooth_5x5(const GrayImage& img) {
  static const double k[5] = {1, 4, 6, 4, 1};
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  GrayImage tmp(h, w), out(h, w);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      double s = 0;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * img(v, std::clamp(u + i, 0, w - 1));
      tmp(v, u) = static_cast<float>(s / 16.0);
    }
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      double s = 0;
      for (int i = -2; i <= 2; ++i) s += k[i + 2] * tmp(std::clamp(v + i, 0, h - 1), u);
      out(v, u) = static_cast<float>(s / 16.0);
    }
  return out;
}

GrayImage make_texture(int width, int height, std::uint32_t seed) {
  std::mt19937 rng(seed);
  GrayImage tex = GrayImage::Zero(height, width);
  const int spacings[3] = {64, 16, 4};
  const float amps[3] = {1.0f, 0.5f, 0.25f};
  for (int o = 0; o < 3; ++o) tex += amps[o] * value_noise(width, height, spacings[o], rng);
  tex = binomial_smooth_5x5(tex);
  const float lo = tex.minCoeff(), hi = tex.maxCoeff();
  if (hi > lo) tex = 30.0f + (tex - lo) * (190.0f / (hi - lo));
  else tex.setConstant(125.0f);
  return tex;
}

float sample_row(const GrayImage& img, int v, double s) {
  const int w = static_cast<int>(img.cols());
  s = std::clamp(s, 0.0, static_cast<double>(w - 1));
  const int s0 = static_cast<int>(s);
  const int s1 = std::min(s0 + 1, w - 1);
  const double t = s - s0;
  return static_cast<float>((1 - t) * img(v, s0) + t * img(v, s1));
}

double sample_disparity_row(const DisparityMap& map, int v, double s) {
  const int w = static_cast<int>(map.cols());
  s = std::clamp(s, 0.0, static_cast<double>(w - 1));
  const int s0 = static_cast<int>(s);
  const int s1 = std::min(s0 + 1, w - 1);
  const double t = s - s0;
  return (1 - t) * map(v, s0) + t * map(v, s1);
}

}  // namespace

SceneTruth generate_scene(const SceneSpec& spec) {
  const int w = spec.width, h = spec.height;
  for (const auto& p : spec.potholes) {
    if (p.depth <= 0 || p.ru < 4 || p.rv < 4)
      throw std::invalid_argument("generate_scene: bad pothole spec");
  }

  SceneTruth scene;
  scene.spec = spec;
  RoadModel plane{spec.a0, spec.a1, spec.phi_true};

  scene.gt_disparity = DisparityMap(h, w);
  scene.gt_mask = LabelMap::Zero(h, w);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      double d = road_disparity_at(plane, u, v);
      for (std::size_t i = 0; i < spec.potholes.size(); ++i) {
        const auto& p = spec.potholes[i];
        const double ru = (u - p.cu) / p.ru;
        const double rv = (v - p.cv) / p.rv;
        const double r2 = ru * ru + rv * rv;
        if (r2 < 1.0) {
          d -= p.depth * (1.0 - r2);
          scene.gt_mask(v, u) = static_cast<int>(i) + 1;
        }
      }
      if (d < 0)
        throw std::runtime_error("generate_scene: pothole depth drives disparity negative");
      scene.gt_disparity(v, u) = static_cast<float>(d);
    }

  scene.left = make_texture(w, h, spec.texture_seed);
  scene.right = GrayImage(h, w);
  // Disparity is referenced to the left image: left(u) corresponds to
  // right(u - d(u)). Each right pixel x therefore samples the left image at
  // the fixed point of u = x + d(u), found by iteration (the dip slope is
  // well below 1, so it contracts).
  for (int v = 0; v < h; ++v)
    for (int x = 0; x < w; ++x) {
      double u = x + sample_disparity_row(scene.gt_disparity, v, x);
      for (int it = 0; it < 8; ++it)
        u = x + sample_disparity_row(scene.gt_disparity, v, u);
      scene.right(v, x) = sample_row(scene.left, v, u);
    }

  if (spec.noise_sigma > 0) {
    std::mt19937 rng(spec.texture_seed ^ 0x9e3779b9u);
    std::normal_distribution<double> gauss(0.0, spec.noise_sigma);
    for (int v = 0; v < h; ++v)
      for (int u = 0; u < w; ++u) {
        scene.left(v, u) = std::clamp(scene.left(v, u) + static_cast<float>(gauss(rng)), 0.0f, 255.0f);
        scene.right(v, u) = std::clamp(scene.right(v, u) + static_cast<float>(gauss(rng)), 0.0f, 255.0f);
      }
  }
  return scene;
}

std::vector<SceneTruth> scene_batch(int count, std::uint32_t base_seed,
                                    const BatchRanges& ranges) {
  if (count < 1) throw std::invalid_argument("scene_batch: count must be >= 1");
  std::vector<SceneTruth> scenes;
  scenes.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const std::uint32_t seed = base_seed + static_cast<std::uint32_t>(i);
    std::mt19937 rng(seed * 2654435761u + 12345u);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    SceneSpec spec;
    spec.texture_seed = seed;
    spec.noise_sigma = ranges.noise_sigma;
    spec.a0 = ranges.a0_min + (ranges.a0_max - ranges.a0_min) * uni(rng);
    spec.a1 = ranges.a1_min + (ranges.a1_max - ranges.a1_min) * uni(rng);
    spec.phi_true = ranges.phi_abs_max * (2.0 * uni(rng) - 1.0);
    spec.rig.cu = spec.width / 2.0;
    spec.rig.cv = spec.height / 2.0;

    const int n_potholes = 1 + static_cast<int>(uni(rng) * 3.0) % 3;
    for (int k = 0; k < n_potholes; ++k) {
      for (int attempt = 0; attempt < 100; ++attempt) {
        PotholeSpec p;
        p.ru = ranges.radius_min + (ranges.radius_max - ranges.radius_min) * uni(rng);
        p.rv = ranges.radius_min + (ranges.radius_max - ranges.radius_min) * uni(rng);
        p.depth = ranges.depth_min + (ranges.depth_max - ranges.depth_min) * uni(rng);
        const double mu = ranges.margin + p.ru;
        const double mv = ranges.margin + p.rv;
        p.cu = mu + (spec.width - 2 * mu) * uni(rng);
        p.cv = mv + (spec.height - 2 * mv) * uni(rng);
        bool overlaps = false;
        for (const auto& q : spec.potholes) {
          const double dx = p.cu - q.cu, dy = p.cv - q.cv;
          const double sep = std::max(p.ru + q.ru, p.rv + q.rv) + 10.0;
          if (dx * dx + dy * dy < sep * sep) overlaps = true;
        }
        if (!overlaps) {
          spec.potholes.push_back(p);
          break;
        }
      }
    }
    scenes.push_back(generate_scene(spec));
  }
  return scenes;
}

void write_scene(const SceneTruth& scene, const std::string& dir) {
  std::filesystem::create_directories(dir);
  save_gray_image(scene.left, dir + "/left.png");
  save_gray_image(scene.right, dir + "/right.png");
  save_disparity(scene.gt_disparity, dir + "/disp_gt.png");
  save_labels(scene.gt_mask, dir + "/mask_gt.png");

  std::ofstream out(dir + "/spec.txt");
  if (!out) throw std::runtime_error("cannot write: " + dir + "/spec.txt");
  const auto& s = scene.spec;
  out << "width=" << s.width << "\nheight=" << s.height << "\na0=" << s.a0
      << "\na1=" << s.a1 << "\nphi=" << s.phi_true << "\nseed=" << s.texture_seed
      << "\nnoise_sigma=" << s.noise_sigma << "\nfocal=" << s.rig.focal
      << "\nbaseline=" << s.rig.baseline << "\ncu=" << s.rig.cu << "\ncv=" << s.rig.cv
      << "\npotholes=" << s.potholes.size() << "\n";
  for (std::size_t i = 0; i < s.potholes.size(); ++i) {
    const auto& p = s.potholes[i];
    out << "pothole" << i << "=" << p.cu << "," << p.cv << "," << p.ru << "," << p.rv << ","
        << p.depth << "\n";
  }
}

SceneTruth load_scene(const std::string& dir) {
  SceneTruth scene;
  scene.left = load_gray_image(dir + "/left.png");
  scene.right = load_gray_image(dir + "/right.png");
  scene.gt_disparity = load_disparity(dir + "/disp_gt.png");
  scene.gt_mask = load_labels(dir + "/mask_gt.png");

  std::ifstream in(dir + "/spec.txt");
  if (!in) throw std::runtime_error("not found: " + dir + "/spec.txt");
  std::string line;
  std::size_t n_potholes = 0;
  auto& s = scene.spec;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "width") s.width = std::stoi(value);
    else if (key == "height") s.height = std::stoi(value);
    else if (key == "a0") s.a0 = std::stod(value);
    else if (key == "a1") s.a1 = std::stod(value);
    else if (key == "phi") s.phi_true = std::stod(value);
    else if (key == "seed") s.texture_seed = static_cast<std::uint32_t>(std::stoul(value));
    else if (key == "noise_sigma") s.noise_sigma = std::stod(value);
    else if (key == "focal") s.rig.focal = std::stod(value);
    else if (key == "baseline") s.rig.baseline = std::stod(value);
    else if (key == "cu") s.rig.cu = std::stod(value);
    else if (key == "cv") s.rig.cv = std::stod(value);
    else if (key == "potholes") n_potholes = std::stoul(value);
    else if (key.rfind("pothole", 0) == 0) {
      PotholeSpec p;
      std::istringstream ss(value);
      char comma;
      ss >> p.cu >> comma >> p.cv >> comma >> p.ru >> comma >> p.rv >> comma >> p.depth;
      s.potholes.push_back(p);
    }
  }
  if (s.potholes.size() != n_potholes)
    throw std::runtime_error("corrupt spec.txt in " + dir);
  return scene;
}

}  // namespace rpd
