#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "gsphys/core/gaussian.hpp"
#include "gsphys/io/anim.hpp"
#include "gsphys/proxy/particles.hpp"
#include "gsphys/sim/simulator.hpp"
#include "gsphys/skinning/binding.hpp"
#include "gsphys/skinning/hole_fill.hpp"
#include "gsphys/spec/spec.hpp"

namespace gsphys::session {

/// Loads the PLY named by `path` (or the spec's scene.ply) and applies the
/// spec's object box. Stage "load".
GaussianSet load_scene(const spec::SimSpec& spec, const std::optional<std::filesystem::path>& path = std::nullopt);

/// Proxy, simulator, binding and hole filler of one object, ready to step.
/// Object Gaussians are lifted by spec.lift before anything else.
class Animator {
 public:
  Animator(spec::SimSpec spec, GaussianSet scene);

  const spec::SimSpec& spec() const { return spec_; }
  const GaussianSet& base() const { return base_; }
  const proxy::ParticleSeed& particles() const { return seed_; }
  const skinning::Binding& binding() const { return binding_; }
  const io::AnimFrame& rest() const { return rest_; }
  sim::Simulator& sim() { return *sim_; }
  const sim::Simulator& sim() const { return *sim_; }
  std::size_t gaussian_count() const { return base_.size(); }

  /// One frame forward with the spec's scheduled forces. Stage "simulate".
  void step();
  /// Skinned (and hole-filled) frame of the current state. Stage "skin".
  io::AnimFrame frame();
  /// Back to the initial state; the binding is kept.
  void reset();

 private:
  void start_sim();

  spec::SimSpec spec_;
  GaussianSet base_;
  proxy::ParticleSeed seed_;
  skinning::Binding binding_;
  io::AnimFrame rest_;
  std::unique_ptr<sim::Simulator> sim_;
  std::optional<skinning::HoleFiller> filler_;
  bool all_fluid_ = false;
};

struct RunStats {
  int frames = 0;
  std::size_t gaussians = 0;
  std::size_t particles = 0;
  int substeps = 0;
  double setup_s = 0.0;
  double simulate_s = 0.0;
  double skin_s = 0.0;
  double write_s = 0.0;
};

/// Full offline pipeline. Frame 0 is the initial state; each further frame
/// is one simulator step. Writes `out` when given. Deterministic for a
/// fixed spec and scene.
io::AnimSequence run_offline(const spec::SimSpec& spec, GaussianSet scene,
                             const std::optional<std::filesystem::path>& out = std::nullopt,
                             RunStats* stats = nullptr);

/// Same, loading the scene from the spec.
io::AnimSequence run_offline(const spec::SimSpec& spec, const std::filesystem::path& out);

}  // namespace gsphys::session
