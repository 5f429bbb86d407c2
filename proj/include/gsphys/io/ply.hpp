#pragma once

#include <filesystem>

#include "gsphys/core/gaussian.hpp"

namespace gsphys::io {

/// Reads a binary little-endian 3DGS PLY. Scales stay as stored log-values,
/// opacity stays a logit, quaternions are kept raw. Missing f_rest_* are
/// zero-filled. Every Gaussian is selected as object.
///
/// Errors: Errc::io (unreadable), Errc::unsupported_format (ascii, big
/// endian, list properties), Errc::schema (missing required property, the
/// message names it), Errc::truncated (short payload).
GaussianSet load_ply(const std::filesystem::path& path);

/// Writes the standard 3DGS property layout (x y z nx ny nz f_dc_0..2
/// f_rest_0..44 opacity scale_0..2 rot_0..3) as float32.
void save_ply(const GaussianSet& set, const std::filesystem::path& path);

}  // namespace gsphys::io
