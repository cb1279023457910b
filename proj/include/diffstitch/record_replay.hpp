#pragma once

/// Record/replay wrapper around any backend. Record mode forwards each call
/// and appends a cassette line; replay mode serves exclusively from the
/// cassette and never touches a live backend.
///
/// Cassette format: one JSON object per line,
///   {"fp": "<fingerprint key>", "op": "<predict|generate|score|complete>",
///    "request": {...}, "response": {...}}
/// Lines appear in call order. A replayed fingerprint+op consumes matching
/// lines FIFO, so repeated fingerprints (if any) replay in recorded order.

#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "diffstitch/backends.hpp"

namespace diffstitch::backends {

/// Shared append-only cassette writer; one per --record path, wrapped around
/// every role so calls from all roles interleave into a single file.
class CassetteWriter {
 public:
  explicit CassetteWriter(const std::string& path);
  ~CassetteWriter();

  void append(const nlohmann::json& line);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Parsed cassette for replay, shared across roles.
class Cassette {
 public:
  static std::shared_ptr<Cassette> load(const std::string& path);

  /// Pops the next recorded response for (fingerprint, op). Throws a backend
  /// error naming the fingerprint on a miss.
  nlohmann::json take(const std::string& fp_key, const std::string& op);

  /// True when any recorded line used the op (used to sniff predictor mode).
  bool has_op(const std::string& op) const;

 private:
  std::map<std::string, std::deque<nlohmann::json>> lines_;
  std::set<std::string> ops_;
  std::mutex mu_;
};

class RecordingBackend : public Backend {
 public:
  RecordingBackend(BackendPtr inner, std::shared_ptr<CassetteWriter> writer);

  PredictorMode predictor_mode() const override { return inner_->predictor_mode(); }
  std::vector<diffusion::Distribution> predict(const Fingerprint& fp,
                                               const diffusion::MaskedSequence& seq,
                                               const diffusion::DecodeConfig& cfg) override;
  GenerateResponse generate(const Fingerprint& fp, const GenerateRequest& req) override;
  std::vector<double> score(const Fingerprint& fp, const prm::ScoreRequest& req) override;
  solver::CompleteResponse complete(const Fingerprint& fp,
                                    const solver::CompleteRequest& req) override;

 private:
  BackendPtr inner_;
  std::shared_ptr<CassetteWriter> writer_;
};

class ReplayBackend : public Backend {
 public:
  ReplayBackend(Role role, PredictorMode mode, std::shared_ptr<Cassette> cassette);

  PredictorMode predictor_mode() const override { return mode_; }
  std::vector<diffusion::Distribution> predict(const Fingerprint& fp,
                                               const diffusion::MaskedSequence& seq,
                                               const diffusion::DecodeConfig& cfg) override;
  GenerateResponse generate(const Fingerprint& fp, const GenerateRequest& req) override;
  std::vector<double> score(const Fingerprint& fp, const prm::ScoreRequest& req) override;
  solver::CompleteResponse complete(const Fingerprint& fp,
                                    const solver::CompleteRequest& req) override;

 private:
  PredictorMode mode_;
  std::shared_ptr<Cassette> cassette_;
};

/// Wraps all three roles with one recording cassette.
BackendSet wrap_recording(const BackendSet& inner, const std::string& cassette_path);

/// Backend set that replays all three roles from one cassette. The predictor
/// mode is sniffed from the recorded ops.
BackendSet make_replay_set(const std::string& cassette_path);

}  // namespace diffstitch::backends
