#include <algorithm>
#include <cctype>
#include <limits>

#include "gsphys/spec/translate.hpp"

namespace gsphys::spec {
namespace {

using sim::MaterialKind;

// Lowercase words separated by single spaces, padded with one space on
// each side so phrases can be matched with " word ".
std::string normalize(std::string_view prompt) {
  std::string out = " ";
  for (char c : prompt) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '-') {
      out += static_cast<char>(std::tolower(u));
    } else if (out.back() != ' ') {
      out += ' ';
    }
  }
  if (out.back() != ' ') out += ' ';
  return out;
}

// Position of the earliest listed word or phrase, npos when none occurs.
std::size_t first_of(const std::string& text, std::initializer_list<std::string_view> words) {
  std::size_t best = std::string::npos;
  for (auto w : words) {
    const auto at = text.find(" " + std::string(w) + " ");
    if (at != std::string::npos) best = std::min(best, at);
  }
  return best;
}

bool any_of(const std::string& text, std::initializer_list<std::string_view> words) {
  return first_of(text, words) != std::string::npos;
}

SimSpec exemplar(std::string_view name) {
  const Exemplar* ex = builtin_bundle().find(name);
  if (!ex) throw Error(Errc::config, "built-in exemplar missing: " + std::string(name));
  return parse_spec(ex->text);
}

struct Direction {
  std::initializer_list<std::string_view> words;
  Vec3 dir;
};

// +z up, +y forward, +x right.
const Direction kDirections[] = {
    {{"forward", "forwards", "ahead", "away"}, Vec3(0, 1, 0)},
    {{"backward", "backwards", "back", "toward me", "towards me"}, Vec3(0, -1, 0)},
    {{"left", "leftward", "leftwards"}, Vec3(-1, 0, 0)},
    {{"right", "rightward", "rightwards", "sideways", "aside"}, Vec3(1, 0, 0)},
    {{"up", "upward", "upwards", "into the air", "skyward"}, Vec3(0, 0, 1)},
    {{"down", "downward", "downwards"}, Vec3(0, 0, -1)},
};

Vec3 push_direction(const std::string& text, const Vec3& fallback) {
  std::size_t best = std::string::npos;
  Vec3 dir = fallback;
  for (const auto& d : kDirections) {
    const auto at = first_of(text, d.words);
    if (at < best) {
      best = at;
      dir = d.dir;
    }
  }
  return dir;
}

}  // namespace

SimSpec offline_translate(std::string_view prompt) {
  const std::string text = normalize(prompt);

  const bool fluid = any_of(text, {"water", "liquid", "lava", "melt", "melts", "melting", "fluid", "goo", "slime",
                                   "honey", "molten", "liquefy", "liquify", "puddle"});
  const bool multi = any_of(text, {"multi-material", "multimaterial", "two materials", "half", "top half",
                                   "bottom half", "soft top", "hard base"});
  const bool jump = any_of(text, {"jump", "jumps", "jumping", "hop", "hops", "leap", "leaps", "spring up",
                                  "bounce up"});
  const bool rigid = any_of(text, {"rigid", "stone", "rock", "metal", "steel", "iron", "wood", "wooden", "solid",
                                   "marble", "ceramic", "glass"});
  const bool soft = any_of(text, {"jelly", "jello", "rubber", "rubbery", "soft", "squishy", "elastic", "bouncy",
                                  "wobbly", "wobble", "jiggle"});
  const bool drop = any_of(text, {"drop", "drops", "dropped", "fall", "falls", "falling", "dropping"});
  const bool push = any_of(text, {"push", "pushes", "pushed", "shove", "nudge", "hit", "knock", "kick", "poke",
                                  "tap", "throw", "toss"});

  SimSpec spec;
  if (fluid) {
    spec = exemplar("fluid_conversion");
  } else if (multi) {
    spec = exemplar("multi_material");
  } else if (jump) {
    spec = exemplar("elastic_jump");
  } else if (rigid && !soft) {
    spec = exemplar("rigid_drop");
  } else {
    spec = default_spec();
  }

  if (fluid) {
    auto& m = spec.regions.back().material;
    if (any_of(text, {"lava", "molten", "honey", "thick", "viscous", "syrup"})) m.viscosity = 1.0;
    if (any_of(text, {"sticky", "surface tension", "cohesive", "beads", "droplets"})) m.surface_tension = 0.5;
  }
  if (soft && !fluid) {
    for (auto& r : spec.regions) {
      if (r.material.kind != MaterialKind::elastic) continue;
      if (any_of(text, {"jelly", "jello", "squishy", "wobbly", "wobble", "jiggle"})) r.material.youngs_modulus = 2e4;
      if (any_of(text, {"rubber", "rubbery"})) r.material.youngs_modulus = 1e6;
    }
  }
  if (any_of(text, {"bouncy", "bounces", "bounce"})) {
    for (auto& r : spec.regions) r.material.restitution = 0.8;
  }

  if (any_of(text, {"moon", "lunar"})) {
    spec.gravity = Vec3(0, 0, -1.62);
  } else if (any_of(text, {"mars", "martian"})) {
    spec.gravity = Vec3(0, 0, -3.71);
  } else if (any_of(text, {"jupiter"})) {
    spec.gravity = Vec3(0, 0, -24.79);
  } else if (any_of(text, {"zero gravity", "zero-g", "no gravity", "weightless", "in space", "float", "floats"})) {
    spec.gravity = Vec3::Zero();
  }

  if (drop && spec.lift < 0.5) spec.lift = 0.5;

  if (push) {
    double strength = 1.5;  // m/s
    if (any_of(text, {"gently", "gentle", "lightly", "softly", "slightly", "little"})) strength *= 0.5;
    if (any_of(text, {"hard", "strongly", "strong", "violently", "powerful", "forcefully"})) strength *= 2.0;
    sim::ExternalForce f;
    f.kind = sim::ExternalForce::Kind::impulse;
    f.direction = push_direction(text, Vec3(0, 1, 0));
    f.magnitude = strength;
    f.per_unit_mass = true;
    f.start = 0.1;
    spec.forces.push_back(f);
  }
  return spec;
}

}  // namespace gsphys::spec
