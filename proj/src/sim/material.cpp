#include "gsphys/sim/material.hpp"

#include <cmath>
#include <string>

#include "gsphys/core/error.hpp"

namespace gsphys::sim {

std::string_view to_string(MaterialKind kind) {
  switch (kind) {
    case MaterialKind::rigid: return "rigid";
    case MaterialKind::elastic: return "elastic";
    case MaterialKind::fluid: return "fluid";
  }
  return "unknown";
}

double Material::sound_speed() const { return std::sqrt(eos_stiffness * eos_exponent / density); }

void Material::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::config, what); };
  if (!(density > 0.0) || !std::isfinite(density)) fail("density must be positive");
  if (kind == MaterialKind::elastic) {
    if (!(youngs_modulus > 0.0) || !std::isfinite(youngs_modulus)) fail("Young's modulus must be positive");
    if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5)) fail("Poisson ratio must lie in [0, 0.5)");
  }
  if (kind == MaterialKind::fluid) {
    if (!(eos_stiffness > 0.0)) fail("fluid stiffness must be positive");
    if (!(eos_exponent >= 1.0)) fail("fluid equation-of-state exponent must be >= 1");
    if (!(surface_tension >= 0.0)) fail("surface tension must be non-negative");
    if (!(viscosity >= 0.0)) fail("viscosity must be non-negative");
  }
  if (!(restitution >= 0.0 && restitution <= 1.0)) fail("restitution must lie in [0, 1]");
  if (!(friction >= 0.0)) fail("friction must be non-negative");
}

Material default_material(MaterialKind kind) {
  Material m;
  m.kind = kind;
  return m;
}

}  // namespace gsphys::sim
