// phystalk: command-line front end (simulate, prompt, serve, render, synth).
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <pthread.h>

#include "gsphys/io/anim.hpp"
#include "gsphys/io/ply.hpp"
#include "gsphys/io/preview.hpp"
#include "gsphys/session/pipeline.hpp"
#include "gsphys/session/server.hpp"
#include "gsphys/session/synthetic.hpp"
#include "gsphys/spec/spec.hpp"
#include "gsphys/spec/translate.hpp"

#include <CLI11.hpp>

namespace fs = std::filesystem;
using namespace gsphys;

namespace {

template <class F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.code(), e.what());
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

spec::SimSpec load_spec(const fs::path& path) {
  return stage("spec", [&] { return spec::parse_spec(read_text(path)); });
}

struct SimulateArgs {
  fs::path scene, spec, out;
  std::optional<int> frames;
  std::optional<double> fps;
  std::optional<std::uint64_t> seed;
};

int simulate(const SimulateArgs& a) {
  spec::SimSpec s = load_spec(a.spec);
  if (a.fps) s.fps = *a.fps;
  if (a.frames) s.duration = (*a.frames - 0.5) / s.fps;  // frame_count() rounds up to exactly *frames
  if (a.seed) s.seed = *a.seed;
  if (a.fps || a.frames) {
    // Overrides go through the same validation as a spec file.
    s = stage("spec", [&] { return spec::parse_spec(spec::serialize(s)); });
  }
  const GaussianSet scene = session::load_scene(s, a.scene);
  session::RunStats st;
  session::run_offline(s, scene, a.out, &st);
  std::printf("wrote %s: %d frames, %zu gaussians, %zu particles, %d substeps/frame\n", a.out.c_str(), st.frames,
              st.gaussians, st.particles, st.substeps);
  std::printf("setup %.2f s, simulate %.2f s, skin %.2f s, write %.2f s\n", st.setup_s, st.simulate_s, st.skin_s,
              st.write_s);
  return 0;
}

struct PromptArgs {
  fs::path scene, out_spec;
  std::string prompt;
  bool offline = false;
  std::optional<fs::path> llm_config;
};

int prompt(const PromptArgs& a) {
  spec::SimSpec s;
  if (a.offline) {
    s = spec::offline_translate(a.prompt);
  } else {
    const GaussianSet scene = stage("load", [&] { return io::load_ply(a.scene); });
    spec::SceneSummary summary;
    summary.gaussian_count = scene.size();
    const auto centers = scene.object_centers();
    if (!centers.empty()) {
      summary.bbox_min = summary.bbox_max = centers.front();
      for (const auto& c : centers) {
        summary.bbox_min = summary.bbox_min.cwiseMin(c);
        summary.bbox_max = summary.bbox_max.cwiseMax(c);
      }
    }
    const auto config = stage("translate", [&] { return spec::load_llm_config(a.llm_config); });
    spec::HttpLlmClient client(config);
    const auto result = stage("translate", [&] {
      return spec::translate(a.prompt, summary, spec::builtin_bundle(), client);
    });
    std::fprintf(stderr, "translated in %d attempt(s)\n", result.attempts);
    s = result.spec;
  }
  s.scene.ply = a.scene.string();
  stage("write", [&] {
    std::ofstream out(a.out_spec, std::ios::binary);
    if (!out) throw Error(Errc::io, "cannot write '" + a.out_spec.string() + "'");
    out << spec::serialize(s);
  });
  std::printf("wrote %s\n", a.out_spec.c_str());
  return 0;
}

struct ServeArgs {
  fs::path scene, spec;
  unsigned short port = 8765;
  std::string address = "127.0.0.1";
};

int serve(const ServeArgs& a) {
  // Block the stop signals before any thread starts so only sigwait sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const spec::SimSpec s = load_spec(a.spec);
  GaussianSet scene = session::load_scene(s, a.scene);
  session::SessionServer server(s, std::move(scene), {a.address, a.port});
  stage("serve", [&] { server.start(); });
  std::printf("serving ws://%s:%u at %.0f fps (Ctrl-C to stop)\n", a.address.c_str(), server.port(), s.fps);
  std::fflush(stdout);
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  const auto st = server.stats();
  if (st.frames > 0) {
    std::printf("%llu frames, %.1f ms per frame of work\n", static_cast<unsigned long long>(st.frames),
                1e3 * st.busy_s / static_cast<double>(st.frames));
  }
  return 0;
}

struct RenderArgs {
  fs::path anim, camera, out_dir;
  std::optional<fs::path> scene;
  int every = 1;
};

int render(const RenderArgs& a) {
  const io::AnimSequence seq = stage("load", [&] { return io::read_anim(a.anim); });
  const io::Camera cam = stage("load", [&] { return io::load_camera(a.camera); });
  GaussianSet base;
  if (a.scene) {
    base = stage("load", [&] { return io::load_ply(*a.scene); });
    if (base.size() != seq.gaussian_count()) {
      throw StageError("load", Errc::length_mismatch,
                       "scene has " + std::to_string(base.size()) + " Gaussians, animation has " +
                           std::to_string(seq.gaussian_count()));
    }
  } else {
    // No colors available: flat gray, mostly opaque.
    base.gaussians.resize(seq.gaussian_count());
    for (auto& g : base.gaussians) {
      g.opacity_logit = 2.0;
      for (int k = 0; k < 3; ++k) g.color[k] = static_cast<float>(0.2 / kShC0);
    }
  }
  stage("render", [&] {
    fs::create_directories(a.out_dir);
    int written = 0;
    for (std::size_t k = 0; k < seq.frames.size(); k += static_cast<std::size_t>(a.every)) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%05zu.png", k);
      io::write_png(io::render_preview(seq.frames[k], base, cam), a.out_dir / name);
      ++written;
    }
    std::printf("wrote %d images to %s\n", written, a.out_dir.c_str());
  });
  return 0;
}

struct SynthArgs {
  std::string shape = "cube";
  fs::path out;
  std::size_t count = 20000;
  std::uint64_t seed = 0;
};

int synth(const SynthArgs& a) {
  const auto set = stage("synth", [&] { return session::synthetic_scene(session::parse_shape(a.shape), a.count, a.seed); });
  stage("write", [&] { io::save_ply(set, a.out); });
  std::printf("wrote %s: %zu gaussians (%zu object)\n", a.out.c_str(), set.size(), set.object_mask.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics animation of Gaussian splat objects"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Run a spec offline and write a .gsanim");
  sim->add_option("--scene", sim_args.scene, "Input PLY")->required();
  sim->add_option("--spec", sim_args.spec, "Simulation spec (YAML)")->required();
  sim->add_option("--out", sim_args.out, "Output .gsanim")->required();
  sim->add_option("--frames", sim_args.frames, "Override the frame count")->check(CLI::Range(1, 100000));
  sim->add_option("--fps", sim_args.fps, "Override the frame rate")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_args.seed, "Override the sampling seed");

  PromptArgs prompt_args;
  auto* pr = app.add_subcommand("prompt", "Translate a prompt into a spec");
  pr->add_option("--scene", prompt_args.scene, "Input PLY")->required();
  pr->add_option("--prompt", prompt_args.prompt, "What should happen")->required();
  pr->add_flag("--offline", prompt_args.offline, "Use the built-in keyword translator instead of an LLM");
  pr->add_option("--out-spec", prompt_args.out_spec, "Where to write the spec")->required();
  pr->add_option("--llm-config", prompt_args.llm_config, "JSON file with url, model, api_key, timeout_s");

  ServeArgs serve_args;
  auto* sv = app.add_subcommand("serve", "Run an interactive websocket session");
  sv->add_option("--scene", serve_args.scene, "Input PLY")->required();
  sv->add_option("--spec", serve_args.spec, "Simulation spec (YAML)")->required();
  sv->add_option("--port", serve_args.port, "TCP port (0 picks one)")->capture_default_str();
  sv->add_option("--address", serve_args.address, "Listen address")->capture_default_str();

  RenderArgs render_args;
  auto* rd = app.add_subcommand("render", "Render .gsanim frames to PNG previews");
  rd->add_option("--anim", render_args.anim, "Input .gsanim")->required();
  rd->add_option("--camera", render_args.camera, "Camera JSON")->required();
  rd->add_option("--out-dir", render_args.out_dir, "Output directory")->required();
  rd->add_option("--scene", render_args.scene, "PLY the animation was made from (for colors)");
  rd->add_option("--every", render_args.every, "Render every n-th frame")->check(CLI::PositiveNumber);

  SynthArgs synth_args;
  auto* sy = app.add_subcommand("synth", "Write a synthetic test scene");
  sy->add_option("--shape", synth_args.shape, "cube or vase")->capture_default_str();
  sy->add_option("--out", synth_args.out, "Output PLY")->required();
  sy->add_option("--count", synth_args.count, "Object Gaussians")->capture_default_str();
  sy->add_option("--seed", synth_args.seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) return simulate(sim_args);
    if (*pr) return prompt(prompt_args);
    if (*sv) return serve(serve_args);
    if (*rd) return render(render_args);
    if (*sy) return synth(synth_args);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
