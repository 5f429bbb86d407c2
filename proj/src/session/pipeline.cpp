#include "gsphys/session/pipeline.hpp"

#include <chrono>

#include "gsphys/io/ply.hpp"
#include "gsphys/proxy/hull.hpp"
#include "gsphys/proxy/prune.hpp"
#include "gsphys/skinning/skin.hpp"

namespace gsphys::session {
namespace {

template <class F>
auto staged(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.code(), e.what());
  } catch (const std::bad_alloc&) {
    throw StageError(stage, Errc::config, "out of memory");
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

GaussianSet load_scene(const spec::SimSpec& spec, const std::optional<std::filesystem::path>& path) {
  return staged("load", [&] {
    std::filesystem::path file = path ? *path : std::filesystem::path(spec.scene.ply);
    if (file.empty()) throw Error(Errc::config, "no scene file given (pass one or set scene.ply in the spec)");
    GaussianSet set = io::load_ply(file);
    if (spec.scene.object) {
      const auto& box = *spec.scene.object;
      set.object_mask.clear();
      for (std::size_t i = 0; i < set.size(); ++i) {
        const Vec3& c = set.gaussians[i].center;
        if ((c.array() >= box.min.array()).all() && (c.array() <= box.max.array()).all()) set.object_mask.push_back(i);
      }
      if (set.object_mask.empty()) throw Error(Errc::degenerate_object, "no Gaussian lies inside the object box");
    }
    return set;
  });
}

Animator::Animator(spec::SimSpec spec, GaussianSet scene) : spec_(std::move(spec)), base_(std::move(scene)) {
  staged("load", [&] {
    base_.validate_mask();
    if (base_.object_mask.empty()) throw Error(Errc::degenerate_object, "the object selection is empty");
    for (auto i : base_.object_mask) base_.gaussians[i].center.z() += spec_.lift;
  });

  const auto kept = staged("prune", [&] {
    const auto params = proxy::default_prune_params(base_);
    return proxy::prune_outliers(base_, params.radius, params.min_neighbors);
  });
  const proxy::ConvexHull hull = staged("hull", [&] {
    std::vector<Vec3> centers;
    centers.reserve(kept.size());
    for (auto i : kept) centers.push_back(base_.gaussians[i].center);
    return proxy::build_hull(centers);
  });
  seed_ = staged("sample", [&] {
    const double spacing = spec_.particle_spacing.value_or(proxy::spacing_for_count(hull, spec_.particle_count));
    const auto predicates = spec_.predicates();
    return proxy::assign_regions(proxy::sample_particles(hull, spacing, spec_.seed), predicates);
  });
  start_sim();
  binding_ = staged("bind", [&] { return skinning::bind(base_, seed_.positions); });
  rest_ = io::rest_frame(base_);

  all_fluid_ = std::all_of(spec_.regions.begin(), spec_.regions.end(),
                           [](const spec::Region& r) { return r.material.kind == sim::MaterialKind::fluid; });
  if (spec_.hole_fill) {
    filler_.emplace(staged("bind", [&] { return skinning::HoleFiller(base_, binding_, *spec_.hole_fill); }));
  }
}

void Animator::start_sim() {
  sim_ = staged("init", [&] { return std::make_unique<sim::Simulator>(seed_, spec_.materials(), spec_.world()); });
}

void Animator::step() {
  staged("simulate", [&] { sim_->step(spec_.forces); });
}

io::AnimFrame Animator::frame() {
  io::AnimFrame out = staged("skin", [&] {
    const sim::Snapshot snap = sim_->snapshot();
    // Fluid particles carry F = I, so the general path reduces to the
    // fluid rule in mixed objects; pure fluids skip the gradient work.
    return all_fluid_ ? skinning::skin_fluid_frame(binding_, rest_, snap.displacements)
                      : skinning::skin_frame(binding_, rest_, snap.displacements, snap.gradients);
  });
  out.timestamp = sim_->time();
  if (filler_) staged("fill", [&] { filler_->fill(out, sim_->state().positions); });
  return out;
}

void Animator::reset() {
  start_sim();
  if (filler_) filler_->reset();
}

io::AnimSequence run_offline(const spec::SimSpec& spec, GaussianSet scene, const std::optional<std::filesystem::path>& out,
                             RunStats* stats) {
  using clock = std::chrono::steady_clock;
  RunStats local;
  RunStats& s = stats ? *stats : local;
  s = RunStats{};

  auto t0 = clock::now();
  Animator animator(spec, std::move(scene));
  s.setup_s = seconds_since(t0);
  s.gaussians = animator.gaussian_count();
  s.particles = animator.particles().size();
  s.substeps = animator.sim().substeps();

  io::AnimSequence seq;
  seq.fps = spec.fps;
  const int frames = spec.frame_count();
  seq.frames.reserve(static_cast<std::size_t>(frames));
  for (int k = 0; k < frames; ++k) {
    if (k > 0) {
      t0 = clock::now();
      animator.step();
      s.simulate_s += seconds_since(t0);
    }
    t0 = clock::now();
    seq.frames.push_back(animator.frame());
    s.skin_s += seconds_since(t0);
  }
  s.frames = frames;
  seq.base = animator.base();
  if (out) {
    t0 = clock::now();
    staged("write", [&] { io::write_anim(seq, *out); });
    s.write_s = seconds_since(t0);
  }
  return seq;
}

io::AnimSequence run_offline(const spec::SimSpec& spec, const std::filesystem::path& out) {
  return run_offline(spec, load_scene(spec), out);
}

}  // namespace gsphys::session
