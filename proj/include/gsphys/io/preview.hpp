#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gsphys/core/gaussian.hpp"
#include "gsphys/io/anim.hpp"

namespace gsphys::io {

/// Pinhole camera, OpenCV convention (x right, y down, z forward).
struct Camera {
  Mat3 world_to_camera = Mat3::Identity();
  Vec3 translation = Vec3::Zero();  // x_cam = world_to_camera * x + translation
  double fx = 500.0, fy = 500.0, cx = 256.0, cy = 256.0;
  int width = 512, height = 512;

  static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fov_y_deg, int width,
                        int height);
  bool valid() const;
};

/// Reads {"eye":[..], "target":[..], "up":[..], "fov_y_deg":f, "width":w, "height":h}.
Camera load_camera(const std::filesystem::path& path);

struct Image {
  int width = 0, height = 0;
  std::vector<std::uint8_t> rgb;
};

struct PreviewOptions {
  Vec3 background = Vec3::Zero();
  Vec3 fallback_rgb{0.7, 0.7, 0.7};  // when no base set is available
  double fallback_opacity = 0.9;
};

/// Headless splat preview: Gaussians sorted by view depth and composited
/// front to back as projected ellipses cut off at 3 sigma. `base` supplies
/// DC color and opacity and may be empty.
Image render_preview(const AnimFrame& frame, const GaussianSet& base, const Camera& camera,
                     const PreviewOptions& options = {});

void write_png(const Image& image, const std::filesystem::path& path);

}  // namespace gsphys::io
