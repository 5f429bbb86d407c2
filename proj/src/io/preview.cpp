#include "gsphys/io/preview.hpp"

#include <png.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>

#include <json.hpp>

#include "gsphys/core/error.hpp"

namespace gsphys::io {

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fov_y_deg, int width,
                       int height) {
  const Vec3 forward = (target - eye).normalized();
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 down = forward.cross(right);
  Camera cam;
  cam.world_to_camera.row(0) = right.transpose();
  cam.world_to_camera.row(1) = down.transpose();
  cam.world_to_camera.row(2) = forward.transpose();
  cam.translation = -cam.world_to_camera * eye;
  cam.width = width;
  cam.height = height;
  cam.fy = 0.5 * height / std::tan(0.5 * fov_y_deg * M_PI / 180.0);
  cam.fx = cam.fy;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  return cam;
}

bool Camera::valid() const {
  return width > 0 && height > 0 && fx > 0 && fy > 0 && world_to_camera.allFinite() && translation.allFinite() &&
         std::abs(world_to_camera.determinant() - 1.0) < 1e-6;
}

Camera load_camera(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open camera file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
    auto vec = [&](const char* key) {
      const auto& a = j.at(key);
      return Vec3(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>());
    };
    Camera cam = Camera::look_at(vec("eye"), vec("target"), j.contains("up") ? vec("up") : Vec3(0, 0, 1),
                                 j.value("fov_y_deg", 50.0), j.value("width", 512), j.value("height", 512));
    if (!cam.valid()) throw Error(Errc::invalid_input, "camera parameters are degenerate");
    return cam;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::schema, "camera file '" + path.string() + "': " + e.what());
  }
}

namespace {

struct Splat {
  double depth;
  double u, v;
  double ia, ib, ic;  // inverse 2D covariance [ia ib; ib ic]
  int x0, x1, y0, y1;
  Vec3 rgb;
  double alpha;
};

bool project(const Camera& cam, const Vec3& center, const SymCov& cov, const Vec3& rgb, double alpha, Splat& s) {
  const Vec3 t = cam.world_to_camera * center + cam.translation;
  if (t.z() <= 0.01) return false;
  const double z = t.z();
  Eigen::Matrix<double, 2, 3> jac;
  jac << cam.fx / z, 0.0, -cam.fx * t.x() / (z * z),
         0.0, cam.fy / z, -cam.fy * t.y() / (z * z);
  const Eigen::Matrix<double, 2, 3> jw = jac * cam.world_to_camera;
  Eigen::Matrix2d c2 = jw * cov.matrix() * jw.transpose();
  c2(0, 0) += 0.3;
  c2(1, 1) += 0.3;
  const double det = c2.determinant();
  if (!(det > 0.0)) return false;
  s.depth = z;
  s.u = cam.fx * t.x() / z + cam.cx;
  s.v = cam.fy * t.y() / z + cam.cy;
  s.ia = c2(1, 1) / det;
  s.ib = -c2(0, 1) / det;
  s.ic = c2(0, 0) / det;
  const double rx = 3.0 * std::sqrt(c2(0, 0));
  const double ry = 3.0 * std::sqrt(c2(1, 1));
  s.x0 = std::max(0, static_cast<int>(std::floor(s.u - rx)));
  s.x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(s.u + rx)));
  s.y0 = std::max(0, static_cast<int>(std::floor(s.v - ry)));
  s.y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(s.v + ry)));
  if (s.x0 > s.x1 || s.y0 > s.y1) return false;
  s.rgb = rgb;
  s.alpha = alpha;
  return true;
}

}  // namespace

Image render_preview(const AnimFrame& frame, const GaussianSet& base, const Camera& camera,
                     const PreviewOptions& options) {
  if (!camera.valid()) throw Error(Errc::invalid_input, "invalid camera");
  const bool has_base = base.size() == frame.size() && !base.empty();

  std::vector<Splat> splats;
  splats.reserve(frame.size() + frame.spawned.size());
  Splat s;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (!frame.alive.empty() && !frame.alive[i]) continue;
    const Vec3 rgb = has_base ? base.gaussians[i].dc_rgb() : options.fallback_rgb;
    const double a = has_base ? base.gaussians[i].opacity() : options.fallback_opacity;
    if (project(camera, frame.centers[i], frame.covariances[i], rgb, a, s)) splats.push_back(s);
  }
  for (const SpawnedGaussian& g : frame.spawned) {
    const Vec3 rgb(g.rgb[0] / 255.0, g.rgb[1] / 255.0, g.rgb[2] / 255.0);
    if (project(camera, g.center, g.covariance, rgb, sigmoid(g.opacity_logit), s)) splats.push_back(s);
  }
  std::stable_sort(splats.begin(), splats.end(), [](const Splat& a, const Splat& b) { return a.depth < b.depth; });

  const std::size_t pixels = static_cast<std::size_t>(camera.width) * camera.height;
  std::vector<Vec3> color(pixels, Vec3::Zero());
  std::vector<double> transmittance(pixels, 1.0);
  for (const Splat& sp : splats) {
    for (int y = sp.y0; y <= sp.y1; ++y) {
      for (int x = sp.x0; x <= sp.x1; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * camera.width + x;
        if (transmittance[p] < 1e-4) continue;
        const double dx = x + 0.5 - sp.u, dy = y + 0.5 - sp.v;
        const double power = 0.5 * (sp.ia * dx * dx + 2.0 * sp.ib * dx * dy + sp.ic * dy * dy);
        if (power > 4.5) continue;  // beyond 3 sigma
        const double a = std::min(0.99, sp.alpha * std::exp(-power));
        if (a < 1.0 / 255.0) continue;
        color[p] += transmittance[p] * a * sp.rgb;
        transmittance[p] *= 1.0 - a;
      }
    }
  }

  Image img;
  img.width = camera.width;
  img.height = camera.height;
  img.rgb.resize(pixels * 3);
  for (std::size_t p = 0; p < pixels; ++p) {
    const Vec3 c = color[p] + transmittance[p] * options.background;
    for (int k = 0; k < 3; ++k) {
      img.rgb[3 * p + k] = static_cast<std::uint8_t>(std::lround(std::clamp(c[k], 0.0, 1.0) * 255.0));
    }
  }
  return img;
}

void write_png(const Image& image, const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw Error(Errc::io, "cannot write '" + path.string() + "'");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::io, "libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(Errc::io, "libpng failed writing '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, image.rgb.data() + static_cast<std::size_t>(y) * image.width * 3);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace gsphys::io
