#pragma once

/**
 * Iterative refine/remask decoding over an abstract mask-predictor backend.
 *
 * A generation starts as [prompt, MASK, ..., MASK]. Each iteration the
 * predictor proposes one distribution per masked position; a token is sampled
 * per position, its confidence is the max probability of the distribution it
 * was sampled from, and positions whose confidence clears the threshold are
 * committed while the rest stay masked for the next round. Committed tokens
 * never change. The loop always commits at least one position per iteration,
 * so it terminates in at most gen_len rounds.
 */

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "diffstitch/errors.hpp"

namespace diffstitch::diffusion {

/// How the per-iteration commit set is chosen.
enum class RemaskPolicy {
  Threshold,   // commit every position with confidence >= gamma
  MaskBudget,  // commit the top-k confidence positions each round
};

struct DecodeConfig {
  double temperature = 1.0;  // tau > 0
  double gamma = 0.7;        // confidence threshold in [0, 1]
  int max_iters = 512;       // K >= 1
  int gen_len = 512;         // masked positions appended after the prompt
  std::uint64_t seed = 0;
  RemaskPolicy policy = RemaskPolicy::Threshold;
  int budget_per_step = 0;   // MaskBudget only; 0 = ceil(gen_len / max_iters)

  void validate() const;
};

/// Token buffer with mask slots. A position is MASK iff not committed.
class MaskedSequence {
 public:
  MaskedSequence(std::vector<std::string> prompt_tokens, int gen_len);

  std::size_t size() const { return tokens_.size(); }
  std::size_t prompt_len() const { return prompt_len_; }
  bool is_committed(std::size_t i) const { return committed_[i]; }
  const std::string& token(std::size_t i) const { return tokens_[i]; }

  std::vector<std::size_t> masked_positions() const;
  std::size_t mask_count() const;

  /// Commits `token` at a masked position. Throws on recommit.
  void commit(std::size_t i, std::string token);

  /// Concatenation of the committed generation-region tokens.
  std::string generated_text() const;

 private:
  std::vector<std::string> tokens_;
  std::vector<bool> committed_;
  std::size_t prompt_len_;
};

/// One categorical distribution over candidate token strings.
struct Distribution {
  std::vector<std::string> tokens;
  std::vector<double> probs;
};

/// Proposal for one masked position: sampled token plus its confidence
/// (max probability of the distribution it was sampled from).
struct Proposal {
  std::size_t position = 0;
  std::string token;
  double confidence = 0.0;
  std::string argmax_token;  // used for greedy finalization at K exhaustion
};

struct ProposalSet {
  std::vector<Proposal> proposals;  // ascending position order
};

/// softmax(logits / tau), computed with max-subtraction.
std::vector<double> apply_temperature(const std::vector<double>& logits, double tau);

/// Max entry of a distribution.
double position_confidence(const std::vector<double>& p);

/// Applies one commit/remask round and returns the updated sequence. Under
/// Threshold, positions with confidence >= gamma commit; if none qualify the
/// single highest-confidence position commits anyway (ties to lowest index).
MaskedSequence remask_step(const MaskedSequence& seq, const ProposalSet& props, double gamma);

/// MaskBudget variant of remask_step: commits the `budget` highest-confidence
/// positions (at least one).
MaskedSequence remask_step_budget(const MaskedSequence& seq, const ProposalSet& props, int budget);

class MaskPredictorFn {
 public:
  /// One distribution per masked position of `seq`, in ascending position
  /// order. Invoked once per decode iteration.
  using Fn = std::function<std::vector<Distribution>(const MaskedSequence& seq, int iteration)>;

  MaskPredictorFn(Fn fn) : fn_(std::move(fn)) {}
  std::vector<Distribution> operator()(const MaskedSequence& seq, int iteration) const {
    return fn_(seq, iteration);
  }

 private:
  Fn fn_;
};

struct DecodeResult {
  std::string text;
  int steps = 0;  // number of predictor invocations
};

struct DecodeHooks {
  /// Called after each remask round with the updated sequence.
  std::function<void(const MaskedSequence&, int iteration)> on_step;
};

/// Runs predict -> sample -> remask until no masks remain or max_iters is
/// reached; leftover masks are then committed to their argmax tokens.
/// Deterministic in (predictor, prompt, cfg) including cfg.seed.
DecodeResult decode(const MaskPredictorFn& predictor,
                    const std::vector<std::string>& prompt_tokens,
                    const DecodeConfig& cfg,
                    const DecodeHooks& hooks = {});

/// Portable uniform double in [0, 1) from a 64-bit generator draw.
inline double uniform_unit(std::uint64_t raw) {
  return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

/// Inverse-CDF sample from a distribution; u in [0, 1).
std::size_t sample_index(const std::vector<double>& probs, double u);

}  // namespace diffstitch::diffusion
