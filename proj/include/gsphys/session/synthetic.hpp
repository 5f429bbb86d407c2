#pragma once

#include <cstdint>
#include <string_view>

#include "gsphys/core/gaussian.hpp"

namespace gsphys::session {

enum class SyntheticShape { cube, vase };

SyntheticShape parse_shape(std::string_view name);

/// Small test object of `count` Gaussians: a 0.2 m cube or a 0.3 m vase
/// standing on z = 0. Deterministic in `seed`.
GaussianSet synthetic_scene(SyntheticShape shape, std::size_t count, std::uint64_t seed = 0);

}  // namespace gsphys::session
