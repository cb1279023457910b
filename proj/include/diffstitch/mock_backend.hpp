#pragma once

/// Scripted backends for tests and offline runs. A scenario is pure data:
/// responses keyed by request fingerprint, with wildcard fallbacks, so the
/// same fingerprint always yields the same response in any process.
///
/// Scenario schema (version 1):
///   {
///     "version": 1,
///     "mode": "per-iteration" | "whole-generation",   // predictor only
///     "responses": { "<role>|<problem>|<trace>|<iter>": <response>, ... },
///     "default": <response>                            // optional
///   }
/// '*' may replace iteration, trace and problem fields (in that nesting
/// order) for wildcard lookup. Response payloads by role:
///   predictor: {"positions": [<pos>, ...]} where <pos> is one of
///              {"token": t, "conf": c}            scripted token, max-prob c
///              {"tokens": [...], "probs": [...]}  explicit distribution
///              {"tokens": [...], "logits": [...]} softmaxed at request tau
///              positions index the generation region; the last entry
///              broadcasts to every later position
///   predictor (whole-generation): {"text": "...", "steps": n}
///   scorer:    {"scores": [r1, r2, ...]}
///   completer: {"chunks": ["...", ...]} or {"text": "...", "tokens": n}

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "diffstitch/backends.hpp"

namespace diffstitch::backends {

class MockBackend : public Backend {
 public:
  MockBackend(Role role, nlohmann::json scenario);

  static std::shared_ptr<MockBackend> load(Role role, const std::string& path);

  PredictorMode predictor_mode() const override { return mode_; }

  std::vector<diffusion::Distribution> predict(const Fingerprint& fp,
                                               const diffusion::MaskedSequence& seq,
                                               const diffusion::DecodeConfig& cfg) override;
  GenerateResponse generate(const Fingerprint& fp, const GenerateRequest& req) override;
  std::vector<double> score(const Fingerprint& fp, const prm::ScoreRequest& req) override;
  solver::CompleteResponse complete(const Fingerprint& fp,
                                    const solver::CompleteRequest& req) override;

 private:
  const nlohmann::json* find(const Fingerprint& fp) const;

  nlohmann::json scenario_;
  PredictorMode mode_ = PredictorMode::PerIteration;
};

/// Builds a distribution whose max probability is exactly `conf`, with the
/// scripted token carrying that max. conf = 1 yields a point mass; lower
/// values spread the remainder over filler tokens, each below conf.
diffusion::Distribution scripted_distribution(const std::string& token, double conf);

}  // namespace diffstitch::backends
