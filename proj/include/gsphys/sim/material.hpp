#pragma once

#include <string_view>

namespace gsphys::sim {

enum class MaterialKind { rigid, elastic, fluid };

std::string_view to_string(MaterialKind kind);

/// Physical parameters of one material region. Which fields matter depends
/// on `kind`; unused ones keep their defaults.
struct Material {
  MaterialKind kind = MaterialKind::elastic;
  double density = 1000.0;  // kg/m^3

  // elastic
  double youngs_modulus = 1e5;  // Pa
  double poisson_ratio = 0.3;

  // fluid (Tait equation of state, pairwise cohesion)
  double eos_stiffness = 5e4;  // Pa
  double eos_exponent = 7.0;
  double surface_tension = 0.0;
  double viscosity = 0.1;  // artificial viscosity coefficient

  // rigid contact
  double restitution = 0.3;
  double friction = 0.5;

  double lame_mu() const { return youngs_modulus / (2.0 * (1.0 + poisson_ratio)); }
  double lame_lambda() const {
    return youngs_modulus * poisson_ratio / ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio));
  }
  /// Speed of sound of the fluid equation of state.
  double sound_speed() const;

  /// Throws Errc::config when an invariant is broken.
  void validate() const;

  friend bool operator==(const Material&, const Material&) = default;
};

Material default_material(MaterialKind kind);

}  // namespace gsphys::sim
