#pragma once

/// Backend abstraction for the three model roles. A Backend serves exactly
/// one role; calling it with another role's request is a protocol error.
/// Every call carries a Fingerprint (role, problem, trace, iteration) that
/// keys mock scenarios and record/replay cassettes.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "diffstitch/diffusion.hpp"
#include "diffstitch/errors.hpp"
#include "diffstitch/prm.hpp"
#include "diffstitch/solver.hpp"

namespace diffstitch::backends {

enum class Role { Predictor, Scorer, Completer };
enum class Kind { Mock, Remote };

/// Remote predictors either run the refine/remask loop server-side and
/// return text plus a step count, or expose one denoising iteration per
/// request for research servers.
enum class PredictorMode { PerIteration, WholeGeneration };

Role parse_role(std::string_view name);
std::string_view role_name(Role r);

struct Fingerprint {
  Role role = Role::Predictor;
  std::string problem;  // problem id; must not contain '|'
  int trace = -1;       // -1 for calls not tied to a trace (solver)
  int iteration = 0;

  std::string key() const;  // "role|problem|trace|iteration"
};

struct GenerateRequest {
  std::string system;
  std::string user;
  int gen_len = 512;
  int max_iters = 512;
  double temperature = 1.0;
  double gamma = 0.7;
  std::uint64_t seed = 0;
};

struct GenerateResponse {
  std::string text;
  int steps = 0;
};

class Backend {
 public:
  explicit Backend(Role role) : role_(role) {}
  virtual ~Backend() = default;

  Role role() const { return role_; }
  virtual PredictorMode predictor_mode() const { return PredictorMode::PerIteration; }

  /// Predictor role, per-iteration form: one distribution per masked
  /// position of seq.
  virtual std::vector<diffusion::Distribution> predict(const Fingerprint& fp,
                                                       const diffusion::MaskedSequence& seq,
                                                       const diffusion::DecodeConfig& cfg);

  /// Predictor role, whole-generation form.
  virtual GenerateResponse generate(const Fingerprint& fp, const GenerateRequest& req);

  /// Scorer role: marker probabilities in step order.
  virtual std::vector<double> score(const Fingerprint& fp, const prm::ScoreRequest& req);

  /// Completer role.
  virtual solver::CompleteResponse complete(const Fingerprint& fp,
                                            const solver::CompleteRequest& req);

 protected:
  /// Throws a protocol error unless this backend serves `needed`.
  void require(Role needed, std::string_view op) const;

 private:
  Role role_;
};

using BackendPtr = std::shared_ptr<Backend>;

struct BackendDescriptor {
  Role role = Role::Predictor;
  Kind kind = Kind::Mock;
  std::string target;  // scenario path (mock) or base URL (remote)
  PredictorMode mode = PredictorMode::PerIteration;
  int timeout_ms = 30000;
  int max_retries = 2;
  std::string model;       // remote model name, optional
  std::string token_env;   // env var holding the bearer token, optional
};

/// Parses a CLI backend flag "role=mock:path" or "role=remote:url".
BackendDescriptor parse_backend_flag(std::string_view flag);

/// Instantiates a backend from its descriptor.
BackendPtr make_backend(const BackendDescriptor& desc);

/// The three roles the pipeline needs.
struct BackendSet {
  BackendPtr predictor;
  BackendPtr scorer;
  BackendPtr completer;
};

}  // namespace diffstitch::backends
