#include "diffstitch/mock_backend.hpp"

#include <cmath>
#include <fstream>

namespace diffstitch::backends {

using nlohmann::json;

MockBackend::MockBackend(Role role, json scenario)
    : Backend(role), scenario_(std::move(scenario)) {
  if (!scenario_.is_object()) {
    throw Error(ErrorKind::Scenario, "scenario must be a JSON object");
  }
  if (scenario_.value("version", 1) != 1) {
    throw Error(ErrorKind::Scenario, "unsupported scenario version");
  }
  if (scenario_.contains("responses") && !scenario_["responses"].is_object()) {
    throw Error(ErrorKind::Scenario, "scenario responses must be an object");
  }
  if (scenario_.value("mode", "per-iteration") == "whole-generation") {
    mode_ = PredictorMode::WholeGeneration;
  }
}

std::shared_ptr<MockBackend> MockBackend::load(Role role, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open scenario file: " + path);
  }
  json scenario;
  try {
    in >> scenario;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Scenario, "scenario parse failure in " + path + ": " + e.what());
  }
  return std::make_shared<MockBackend>(role, std::move(scenario));
}

const json* MockBackend::find(const Fingerprint& fp) const {
  if (scenario_.contains("responses")) {
    const json& resp = scenario_["responses"];
    std::string base = std::string(role_name(fp.role)) + "|" + fp.problem;
    const std::string keys[] = {
        base + "|" + std::to_string(fp.trace) + "|" + std::to_string(fp.iteration),
        base + "|" + std::to_string(fp.trace) + "|*",
        base + "|*|*",
        std::string(role_name(fp.role)) + "|*|*|*",
    };
    for (const std::string& k : keys) {
      if (auto it = resp.find(k); it != resp.end()) return &*it;
    }
  }
  if (auto it = scenario_.find("default"); it != scenario_.end()) return &*it;
  throw Error(ErrorKind::Scenario,
              "no scenario response for fingerprint " + fp.key() + " and no default");
}

diffusion::Distribution scripted_distribution(const std::string& token, double conf) {
  if (conf <= 0.0 || conf > 1.0) {
    throw Error(ErrorKind::Scenario, "scripted confidence must be in (0,1]");
  }
  diffusion::Distribution d;
  d.tokens.push_back(token);
  d.probs.push_back(conf);
  if (conf < 1.0) {
    double rest = 1.0 - conf;
    int fillers = std::max(2, static_cast<int>(std::ceil(rest / conf)));
    for (int i = 0; i < fillers; ++i) {
      d.tokens.push_back("\xC2\xB7" + std::to_string(i));  // middle-dot filler
      d.probs.push_back(rest / fillers);
    }
  }
  return d;
}

namespace {

diffusion::Distribution parse_position(const json& pos, double tau) {
  if (pos.contains("token")) {
    return scripted_distribution(pos["token"].get<std::string>(), pos.value("conf", 1.0));
  }
  diffusion::Distribution d;
  if (!pos.contains("tokens")) {
    throw Error(ErrorKind::Scenario, "position entry needs 'token' or 'tokens'");
  }
  d.tokens = pos["tokens"].get<std::vector<std::string>>();
  if (pos.contains("probs")) {
    d.probs = pos["probs"].get<std::vector<double>>();
  } else if (pos.contains("logits")) {
    d.probs = diffusion::apply_temperature(pos["logits"].get<std::vector<double>>(), tau);
  } else {
    throw Error(ErrorKind::Scenario, "position entry needs 'probs' or 'logits'");
  }
  if (d.tokens.size() != d.probs.size() || d.tokens.empty()) {
    throw Error(ErrorKind::Scenario, "position tokens/probs length mismatch");
  }
  return d;
}

}  // namespace

std::vector<diffusion::Distribution> MockBackend::predict(const Fingerprint& fp,
                                                          const diffusion::MaskedSequence& seq,
                                                          const diffusion::DecodeConfig& cfg) {
  require(Role::Predictor, "predict");
  const json& resp = *find(fp);
  if (!resp.contains("positions") || !resp["positions"].is_array() ||
      resp["positions"].empty()) {
    throw Error(ErrorKind::Scenario, "predictor response needs a non-empty 'positions' array");
  }
  const json& positions = resp["positions"];
  std::vector<diffusion::Distribution> out;
  for (std::size_t abs : seq.masked_positions()) {
    std::size_t rel = abs - seq.prompt_len();
    const json& pos = positions[std::min(rel, positions.size() - 1)];
    out.push_back(parse_position(pos, cfg.temperature));
  }
  return out;
}

GenerateResponse MockBackend::generate(const Fingerprint& fp, const GenerateRequest&) {
  require(Role::Predictor, "generate");
  const json& resp = *find(fp);
  if (!resp.contains("text")) {
    throw Error(ErrorKind::Scenario, "whole-generation response needs 'text'");
  }
  return GenerateResponse{resp["text"].get<std::string>(), resp.value("steps", 1)};
}

std::vector<double> MockBackend::score(const Fingerprint& fp, const prm::ScoreRequest&) {
  require(Role::Scorer, "score");
  const json& resp = *find(fp);
  if (!resp.contains("scores") || !resp["scores"].is_array()) {
    throw Error(ErrorKind::Scenario, "scorer response needs a 'scores' array");
  }
  return resp["scores"].get<std::vector<double>>();
}

solver::CompleteResponse MockBackend::complete(const Fingerprint& fp,
                                               const solver::CompleteRequest&) {
  require(Role::Completer, "complete");
  const json& resp = *find(fp);
  solver::CompleteResponse out;
  if (resp.contains("chunks")) {
    out.chunks = resp["chunks"].get<std::vector<std::string>>();
    out.token_count = static_cast<int>(out.chunks.size());
  } else if (resp.contains("text")) {
    out.chunks.push_back(resp["text"].get<std::string>());
    out.token_count = resp.value("tokens", 1);
  } else {
    throw Error(ErrorKind::Scenario, "completer response needs 'chunks' or 'text'");
  }
  return out;
}

}  // namespace diffstitch::backends
