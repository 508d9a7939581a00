#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "gst/env/rng.hpp"
#include "gst/error.hpp"

namespace gst {

// Pixel bounding box: top-left corner plus extent.
struct BBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  double CenterX() const { return x + w / 2; }
  double CenterY() const { return y + h / 2; }
  bool operator==(const BBox&) const = default;
};

struct SceneObject {
  int category = 0;
  BBox box;
  std::vector<int> attributes;  // sorted attribute ids

  bool HasAttribute(int a) const {
    return std::binary_search(attributes.begin(), attributes.end(), a);
  }
  bool operator==(const SceneObject&) const = default;
};

struct Scene {
  int width = 640;
  int height = 480;
  std::vector<SceneObject> objects;

  std::size_t size() const { return objects.size(); }
  bool operator==(const Scene&) const = default;
};

enum class SizeClass { kSmall = 0, kMedium = 1, kLarge = 2 };
inline constexpr int kNumSizeClasses = 3;

// Attribute id layout: colors occupy [0, num_colors), then the three size
// classes.
struct SceneConfig {
  int min_objects = 3;
  int max_objects = 10;
  int num_categories = 8;
  int num_colors = 4;
  double color_probability = 0.85;  // uncolored objects answer NA to color questions
  int width = 640;
  int height = 480;
  int grid = 4;  // objects occupy distinct cells of a grid x grid layout

  int NumAttributes() const { return num_colors + kNumSizeClasses; }
  int SizeAttribute(SizeClass s) const { return num_colors + static_cast<int>(s); }
  bool IsColorAttribute(int a) const { return a >= 0 && a < num_colors; }

  void Validate() const {
    if (min_objects < 3 || max_objects > 20 || min_objects > max_objects) {
      throw ConfigError("object count range must satisfy 3 <= min <= max <= 20, got [" +
                        std::to_string(min_objects) + ", " + std::to_string(max_objects) + "]");
    }
    if (grid < 1 || max_objects > grid * grid) {
      throw ConfigError("max_objects " + std::to_string(max_objects) +
                        " exceeds grid capacity " + std::to_string(grid * grid));
    }
    if (num_categories < 1 || num_colors < 0) throw ConfigError("bad category/color counts");
    if (width < 2 * grid || height < 2 * grid) throw ConfigError("image too small for grid");
    if (color_probability < 0 || color_probability > 1) {
      throw ConfigError("color_probability must lie in [0, 1]");
    }
  }
};

// Size class from the box extent relative to a grid cell.
inline SizeClass ClassifySize(const BBox& box, const SceneConfig& cfg) {
  const double cell_w = static_cast<double>(cfg.width) / cfg.grid;
  const double cell_h = static_cast<double>(cfg.height) / cfg.grid;
  const double rel = 0.5 * (box.w / cell_w + box.h / cell_h);
  if (rel < 0.45) return SizeClass::kSmall;
  if (rel < 0.70) return SizeClass::kMedium;
  return SizeClass::kLarge;
}

// Deterministic in (seed, config).
inline Scene GenerateScene(std::uint64_t seed, const SceneConfig& cfg) {
  cfg.Validate();
  Rng rng(MixSeed(seed));
  Scene scene;
  scene.width = cfg.width;
  scene.height = cfg.height;
  const int m = rng.IntIn(cfg.min_objects, cfg.max_objects);

  std::vector<int> cells(static_cast<std::size_t>(cfg.grid * cfg.grid));
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = static_cast<int>(i);
  for (int i = 0; i < m; ++i) {  // partial Fisher-Yates
    const auto j = static_cast<std::size_t>(i) + rng.Below(cells.size() - i);
    std::swap(cells[i], cells[j]);
  }

  static constexpr double kFracLo[kNumSizeClasses] = {0.25, 0.50, 0.75};
  static constexpr double kFracHi[kNumSizeClasses] = {0.40, 0.65, 0.95};
  const double cell_w = static_cast<double>(cfg.width) / cfg.grid;
  const double cell_h = static_cast<double>(cfg.height) / cfg.grid;
  for (int i = 0; i < m; ++i) {
    const int cx = cells[i] % cfg.grid;
    const int cy = cells[i] / cfg.grid;
    const auto size = static_cast<int>(rng.Below(kNumSizeClasses));
    const double frac = rng.Uniform(kFracLo[size], kFracHi[size]);
    SceneObject obj;
    obj.category = static_cast<int>(rng.Below(static_cast<std::uint64_t>(cfg.num_categories)));
    obj.box.w = cell_w * frac;
    obj.box.h = cell_h * frac;
    obj.box.x = cx * cell_w + rng.Uniform(0, cell_w - obj.box.w);
    obj.box.y = cy * cell_h + rng.Uniform(0, cell_h - obj.box.h);
    if (cfg.num_colors > 0 && rng.Uniform() < cfg.color_probability) {
      obj.attributes.push_back(static_cast<int>(rng.Below(static_cast<std::uint64_t>(cfg.num_colors))));
    }
    obj.attributes.push_back(cfg.SizeAttribute(ClassifySize(obj.box, cfg)));
    std::sort(obj.attributes.begin(), obj.attributes.end());
    scene.objects.push_back(std::move(obj));
  }
  return scene;
}

inline bool HasCategoryCollision(const Scene& scene) {
  for (std::size_t i = 0; i < scene.size(); ++i) {
    for (std::size_t j = i + 1; j < scene.size(); ++j) {
      if (scene.objects[i].category == scene.objects[j].category) return true;
    }
  }
  return false;
}

// Scene invariants: boxes non-degenerate and inside the image.
inline void ValidateScene(const Scene& scene) {
  if (scene.objects.empty()) throw ContractError("scene has no objects");
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const BBox& b = scene.objects[i].box;
    if (!(b.w > 0 && b.h > 0) || b.x < 0 || b.y < 0 || b.x + b.w > scene.width + 1e-9 ||
        b.y + b.h > scene.height + 1e-9) {
      throw ContractError("object " + std::to_string(i) + " has an invalid bounding box");
    }
  }
}

}  // namespace gst
