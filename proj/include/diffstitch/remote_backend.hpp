#pragma once

/// HTTP client for OpenAI-style completion servers (http URLs; TLS
/// termination is expected in front of the endpoint).
///
/// Wire contract per role, all POSTs with JSON bodies:
///   completer  -> /v1/chat/completions {model, messages, max_tokens,
///                 temperature}; reads choices[0].message.content plus
///                 usage.completion_tokens; per-token chunks are taken from
///                 choices[0].logprobs.content when the server returns them.
///   scorer     -> /v1/chat/completions with logprobs=true and the marker-
///                 interleaved steps as an assistant message. The marker
///                 probabilities are exp(logprob) of each token equal to the
///                 marker; a server with a dedicated scoring path may instead
///                 answer {"scores": [...]} directly.
///   predictor  -> whole-generation mode posts /v1/chat/completions and reads
///                 content plus the server-reported "diffusion_steps"
///                 (falling back to usage.completion_tokens); per-iteration
///                 mode posts /v1/diffusion/step with the sequence state and
///                 expects {"distributions": [{"tokens": [...],
///                 "probs": [...]}, ...]} for the masked positions.
///
/// Transient failures (connect errors, 5xx) are retried up to max_retries;
/// 4xx responses fail immediately.

#include "diffstitch/backends.hpp"

namespace diffstitch::backends {

class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(BackendDescriptor desc);

  PredictorMode predictor_mode() const override { return desc_.mode; }

  std::vector<diffusion::Distribution> predict(const Fingerprint& fp,
                                               const diffusion::MaskedSequence& seq,
                                               const diffusion::DecodeConfig& cfg) override;
  GenerateResponse generate(const Fingerprint& fp, const GenerateRequest& req) override;
  std::vector<double> score(const Fingerprint& fp, const prm::ScoreRequest& req) override;
  solver::CompleteResponse complete(const Fingerprint& fp,
                                    const solver::CompleteRequest& req) override;

 private:
  std::string post_json(const std::string& path, const std::string& body) const;

  BackendDescriptor desc_;
  std::string bearer_;
};

}  // namespace diffstitch::backends
