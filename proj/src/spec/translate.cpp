#include <sstream>

#include "gsphys/spec/translate.hpp"

namespace gsphys::spec {
namespace {

std::string attempts_summary(const std::vector<std::vector<Diagnostic>>& attempts) {
  std::ostringstream out;
  out << "translation failed after " << attempts.size() << " attempt(s)";
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    out << "\nattempt " << i + 1 << ":";
    for (const auto& d : attempts[i]) out << "\n  " << d.format();
  }
  return out.str();
}

}  // namespace

TranslationFailed::TranslationFailed(std::vector<std::vector<Diagnostic>> attempts)
    : Error(Errc::translation_failed, attempts_summary(attempts)), attempts_(std::move(attempts)) {}

std::vector<ChatMessage> build_messages(std::string_view prompt, const SceneSummary& scene,
                                        const GroundingBundle& bundle, const std::vector<Diagnostic>& previous) {
  std::ostringstream sys;
  sys << bundle.instructions << "\n\n" << bundle.api_reference;
  for (const auto& ex : bundle.exemplars) sys << "\n\nExample (" << ex.name << "):\n```spec\n" << ex.text << "```";

  std::ostringstream user;
  user << "Prompt: " << prompt << "\n\nScene: " << scene.gaussian_count << " Gaussians, bounding box min ["
       << scene.bbox_min.x() << ", " << scene.bbox_min.y() << ", " << scene.bbox_min.z() << "] max ["
       << scene.bbox_max.x() << ", " << scene.bbox_max.y() << ", " << scene.bbox_max.z() << "] (meters, +z up).";
  if (!previous.empty()) {
    // Only the diagnostics go back, never the rejected spec itself.
    user << "\n\nYour previous reply was invalid:\n" << format_diagnostics(previous)
         << "\nReply with a corrected, complete ```spec block.";
  }
  return {{"system", sys.str()}, {"user", user.str()}};
}

std::optional<std::string> extract_spec_block(std::string_view reply) {
  for (std::string_view tag : {"```spec", "```yaml", "```yml"}) {
    const auto open = reply.find(tag);
    if (open == std::string_view::npos) continue;
    const auto body = reply.find('\n', open);
    if (body == std::string_view::npos) return std::nullopt;
    const auto close = reply.find("```", body + 1);
    if (close == std::string_view::npos) return std::nullopt;
    return std::string(reply.substr(body + 1, close - body - 1));
  }
  return std::nullopt;
}

Translation translate(std::string_view prompt, const SceneSummary& scene, const GroundingBundle& bundle,
                      LlmClient& llm, const TranslateOptions& options) {
  if (options.max_attempts < 1) throw Error(Errc::config, "max_attempts must be at least 1");
  std::vector<std::vector<Diagnostic>> failures;
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    const auto messages =
        build_messages(prompt, scene, bundle, failures.empty() ? std::vector<Diagnostic>{} : failures.back());
    const std::string reply = llm.complete(messages);
    const auto block = extract_spec_block(reply);
    if (!block) {
      Diagnostic d;
      d.code = DiagCode::syntax;
      d.message = "reply contains no ```spec fenced block";
      failures.push_back({d});
      continue;
    }
    ParseResult parsed = try_parse_spec(*block, options.parse);
    if (parsed.ok()) return Translation{std::move(*parsed.spec), *block, attempt};
    failures.push_back(std::move(parsed.diagnostics));
  }
  throw TranslationFailed(std::move(failures));
}

}  // namespace gsphys::spec
