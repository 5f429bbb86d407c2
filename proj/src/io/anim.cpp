#include "gsphys/io/anim.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "gsphys/core/error.hpp"
#include "le_bytes.hpp"

namespace gsphys::io {
namespace {

constexpr char kMagic[4] = {'G', 'S', 'A', 'N'};

void need(std::span<const std::uint8_t> bytes, std::size_t offset, std::size_t n, const char* what) {
  if (offset + n > bytes.size()) {
    throw Error(Errc::length_mismatch, std::string(".gsanim ended early while reading ") + what);
  }
}

}  // namespace

AnimFrame rest_frame(const GaussianSet& base, double timestamp) {
  AnimFrame f;
  f.timestamp = timestamp;
  f.centers.reserve(base.size());
  f.covariances.reserve(base.size());
  for (const Gaussian& g : base.gaussians) {
    f.centers.push_back(g.center);
    f.covariances.push_back(covariance_from_params(g.rotation, g.log_scale));
  }
  f.alive.assign(base.size(), 1);
  return f;
}

void encode_frame(const AnimFrame& frame, std::size_t n, std::vector<std::uint8_t>& out) {
  if (frame.centers.size() != n || frame.covariances.size() != n || frame.alive.size() != n) {
    throw Error(Errc::length_mismatch, "frame arrays do not match the Gaussian count " + std::to_string(n));
  }
  out.reserve(out.size() + 4 + n * kRecordBytes + (n + 7) / 8 + 4 + frame.spawned.size() * kSpawnedRecordBytes);
  le::append_f32(out, static_cast<float>(frame.timestamp));
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) le::append_f32(out, static_cast<float>(frame.centers[i][a]));
    for (double c : frame.covariances[i].v) le::append_f32(out, static_cast<float>(c));
  }
  const std::size_t mask_at = out.size();
  out.resize(mask_at + (n + 7) / 8, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (frame.alive[i]) out[mask_at + i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  le::append_u32(out, static_cast<std::uint32_t>(frame.spawned.size()));
  for (const SpawnedGaussian& s : frame.spawned) {
    for (int a = 0; a < 3; ++a) le::append_f32(out, static_cast<float>(s.center[a]));
    for (double c : s.covariance.v) le::append_f32(out, static_cast<float>(c));
    out.insert(out.end(), s.rgb.begin(), s.rgb.end());
    le::append_f32(out, static_cast<float>(s.opacity_logit));
  }
}

AnimFrame decode_frame(std::span<const std::uint8_t> bytes, std::size_t n, std::size_t& off) {
  AnimFrame f;
  need(bytes, off, 4 + n * kRecordBytes, "frame records");
  f.timestamp = le::get_f32(&bytes[off]);
  off += 4;
  f.centers.resize(n);
  f.covariances.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a, off += 4) f.centers[i][a] = le::get_f32(&bytes[off]);
    for (double& c : f.covariances[i].v) {
      c = le::get_f32(&bytes[off]);
      off += 4;
    }
  }
  const std::size_t mask_bytes = (n + 7) / 8;
  need(bytes, off, mask_bytes + 4, "alive mask");
  f.alive.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.alive[i] = (bytes[off + i / 8] >> (i % 8)) & 1u;
  off += mask_bytes;
  const std::uint32_t spawned = le::get_u32(&bytes[off]);
  off += 4;
  need(bytes, off, static_cast<std::size_t>(spawned) * kSpawnedRecordBytes, "spawned records");
  f.spawned.resize(spawned);
  for (SpawnedGaussian& s : f.spawned) {
    for (int a = 0; a < 3; ++a, off += 4) s.center[a] = le::get_f32(&bytes[off]);
    for (double& c : s.covariance.v) {
      c = le::get_f32(&bytes[off]);
      off += 4;
    }
    for (auto& ch : s.rgb) ch = bytes[off++];
    s.opacity_logit = le::get_f32(&bytes[off]);
    off += 4;
  }
  return f;
}

std::vector<std::uint8_t> encode_anim(const AnimSequence& seq) {
  if (seq.frames.empty()) throw Error(Errc::length_mismatch, "animation has no frames");
  if (!(seq.fps > 0.0)) throw Error(Errc::invalid_input, "animation fps must be positive");
  const std::size_t n = seq.gaussian_count();
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  le::append_u32(out, kAnimVersion);
  le::append_u32(out, static_cast<std::uint32_t>(n));
  le::append_u32(out, static_cast<std::uint32_t>(seq.frames.size()));
  le::append_f32(out, static_cast<float>(seq.fps));
  for (const AnimFrame& f : seq.frames) encode_frame(f, n, out);
  return out;
}

AnimSequence decode_anim(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw Error(Errc::magic_mismatch, "not a .gsanim file (bad magic)");
  }
  std::size_t off = 4;
  need(bytes, off, 16, "header");
  const std::uint32_t version = le::get_u32(&bytes[off]);
  if (version != kAnimVersion) {
    throw Error(Errc::version_mismatch, ".gsanim version " + std::to_string(version) + " is not supported");
  }
  const std::uint32_t n = le::get_u32(&bytes[off + 4]);
  const std::uint32_t frame_count = le::get_u32(&bytes[off + 8]);
  AnimSequence seq;
  seq.fps = le::get_f32(&bytes[off + 12]);
  off += 16;
  seq.frames.reserve(frame_count);
  for (std::uint32_t k = 0; k < frame_count; ++k) seq.frames.push_back(decode_frame(bytes, n, off));
  if (off != bytes.size()) {
    throw Error(Errc::length_mismatch, ".gsanim has " + std::to_string(bytes.size() - off) + " trailing bytes");
  }
  return seq;
}

void write_anim(const AnimSequence& seq, const std::filesystem::path& path) {
  const auto bytes = encode_anim(seq);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "failed writing '" + path.string() + "'");
}

AnimSequence read_anim(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_anim(bytes);
}

namespace {

// Rotation quaternion (w,x,y,z) and log-scales reproducing a covariance.
void fit_params(const SymCov& cov, QuatWXYZ& q, Vec3& log_scale) {
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov.matrix());
  Mat3 r = eig.eigenvectors();
  if (r.determinant() < 0) r.col(0) *= -1.0;
  const Eigen::Quaterniond quat(r);
  q = QuatWXYZ(quat.w(), quat.x(), quat.y(), quat.z());
  for (int a = 0; a < 3; ++a) log_scale[a] = 0.5 * std::log(std::max(eig.eigenvalues()[a], 1e-20));
}

}  // namespace

GaussianSet materialize_frame(const GaussianSet& base, const AnimFrame& frame) {
  if (frame.size() != base.size()) {
    throw Error(Errc::length_mismatch, "frame size does not match the base Gaussian set");
  }
  GaussianSet out;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (!frame.alive[i]) continue;
    Gaussian g = base.gaussians[i];
    g.center = frame.centers[i];
    fit_params(frame.covariances[i], g.rotation, g.log_scale);
    out.gaussians.push_back(g);
  }
  for (const SpawnedGaussian& s : frame.spawned) {
    Gaussian g;
    g.center = s.center;
    fit_params(s.covariance, g.rotation, g.log_scale);
    g.opacity_logit = s.opacity_logit;
    for (int c = 0; c < 3; ++c) g.color[c] = static_cast<float>((s.rgb[c] / 255.0 - 0.5) / kShC0);
    out.gaussians.push_back(g);
  }
  out.select_all();
  return out;
}

}  // namespace gsphys::io
