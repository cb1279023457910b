#include "diffstitch/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace diffstitch::diffusion {

void DecodeConfig::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorKind::InvalidConfig, "temperature must be a positive finite real");
  }
  if (gamma < 0.0 || gamma > 1.0) {
    throw Error(ErrorKind::InvalidConfig, "gamma must lie in [0, 1]");
  }
  if (max_iters < 1) {
    throw Error(ErrorKind::InvalidConfig, "max_iters must be >= 1");
  }
  if (gen_len < 1) {
    throw Error(ErrorKind::InvalidConfig, "gen_len must be >= 1");
  }
  if (policy == RemaskPolicy::MaskBudget && budget_per_step < 0) {
    throw Error(ErrorKind::InvalidConfig, "budget_per_step must be >= 0");
  }
}

MaskedSequence::MaskedSequence(std::vector<std::string> prompt_tokens, int gen_len)
    : tokens_(std::move(prompt_tokens)), prompt_len_(tokens_.size()) {
  if (gen_len < 1) {
    throw Error(ErrorKind::InvalidInput, "gen_len must be >= 1");
  }
  tokens_.resize(prompt_len_ + static_cast<std::size_t>(gen_len));
  committed_.assign(tokens_.size(), false);
  for (std::size_t i = 0; i < prompt_len_; ++i) committed_[i] = true;
}

std::vector<std::size_t> MaskedSequence::masked_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t i = prompt_len_; i < tokens_.size(); ++i) {
    if (!committed_[i]) out.push_back(i);
  }
  return out;
}

std::size_t MaskedSequence::mask_count() const {
  std::size_t n = 0;
  for (std::size_t i = prompt_len_; i < committed_.size(); ++i) {
    if (!committed_[i]) ++n;
  }
  return n;
}

void MaskedSequence::commit(std::size_t i, std::string token) {
  if (i >= tokens_.size()) {
    throw Error(ErrorKind::InvalidInput, "commit position out of range");
  }
  if (committed_[i]) {
    throw Error(ErrorKind::Protocol, "position " + std::to_string(i) + " is already committed");
  }
  tokens_[i] = std::move(token);
  committed_[i] = true;
}

std::string MaskedSequence::generated_text() const {
  std::string out;
  for (std::size_t i = prompt_len_; i < tokens_.size(); ++i) {
    if (committed_[i]) out += tokens_[i];
  }
  return out;
}

std::vector<double> apply_temperature(const std::vector<double>& logits, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorKind::InvalidConfig, "temperature must be a positive finite real");
  }
  if (logits.empty()) {
    throw Error(ErrorKind::InvalidInput, "empty logit vector");
  }
  for (double v : logits) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::InvalidInput, "non-finite logit");
    }
  }
  double hi = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp((logits[i] - hi) / tau);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double position_confidence(const std::vector<double>& p) {
  if (p.empty()) {
    throw Error(ErrorKind::InvalidInput, "empty probability vector");
  }
  return *std::max_element(p.begin(), p.end());
}

namespace {

void check_proposals_cover_masks(const MaskedSequence& seq, const ProposalSet& props) {
  auto masked = seq.masked_positions();
  if (props.proposals.size() != masked.size()) {
    throw Error(ErrorKind::Protocol, "proposal set does not cover the masked positions");
  }
  for (std::size_t i = 0; i < masked.size(); ++i) {
    if (props.proposals[i].position != masked[i]) {
      if (seq.is_committed(props.proposals[i].position)) {
        throw Error(ErrorKind::Protocol, "proposal for a committed position");
      }
      throw Error(ErrorKind::Protocol, "proposal positions out of order");
    }
  }
}

}  // namespace

MaskedSequence remask_step(const MaskedSequence& seq, const ProposalSet& props, double gamma) {
  check_proposals_cover_masks(seq, props);
  MaskedSequence next = seq;
  bool any = false;
  for (const Proposal& p : props.proposals) {
    if (p.confidence >= gamma) {
      next.commit(p.position, p.token);
      any = true;
    }
  }
  if (!any && !props.proposals.empty()) {
    // Forced progress: commit the single best proposal, ties to lowest index.
    const Proposal* best = &props.proposals.front();
    for (const Proposal& p : props.proposals) {
      if (p.confidence > best->confidence) best = &p;
    }
    next.commit(best->position, best->token);
  }
  return next;
}

MaskedSequence remask_step_budget(const MaskedSequence& seq, const ProposalSet& props, int budget) {
  check_proposals_cover_masks(seq, props);
  MaskedSequence next = seq;
  if (props.proposals.empty()) return next;
  std::vector<std::size_t> order(props.proposals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return props.proposals[a].confidence > props.proposals[b].confidence;
  });
  std::size_t take = std::min<std::size_t>(std::max(budget, 1), order.size());
  std::vector<std::size_t> chosen(order.begin(), order.begin() + take);
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t idx : chosen) {
    next.commit(props.proposals[idx].position, props.proposals[idx].token);
  }
  return next;
}

std::size_t sample_index(const std::vector<double>& probs, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;  // numeric slack at the tail
}

DecodeResult decode(const MaskPredictorFn& predictor,
                    const std::vector<std::string>& prompt_tokens,
                    const DecodeConfig& cfg,
                    const DecodeHooks& hooks) {
  cfg.validate();
  MaskedSequence seq(prompt_tokens, cfg.gen_len);
  std::mt19937_64 rng(cfg.seed);

  int default_budget = cfg.budget_per_step > 0
                           ? cfg.budget_per_step
                           : (cfg.gen_len + cfg.max_iters - 1) / cfg.max_iters;

  int steps = 0;
  std::vector<Distribution> last_dists;
  std::vector<std::size_t> last_masked;
  while (seq.mask_count() > 0 && steps < cfg.max_iters) {
    std::vector<Distribution> dists;
    try {
      dists = predictor(seq, steps);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw BackendError("mask predictor failed: " + std::string(e.what()), steps);
    }
    auto masked = seq.masked_positions();
    if (dists.size() != masked.size()) {
      throw Error(ErrorKind::Protocol,
                  "predictor returned " + std::to_string(dists.size()) + " distributions for " +
                      std::to_string(masked.size()) + " masked positions");
    }

    ProposalSet props;
    props.proposals.reserve(masked.size());
    for (std::size_t i = 0; i < masked.size(); ++i) {
      const Distribution& d = dists[i];
      if (d.tokens.empty() || d.tokens.size() != d.probs.size()) {
        throw Error(ErrorKind::Protocol, "malformed distribution from predictor");
      }
      double u = uniform_unit(rng());
      std::size_t pick = sample_index(d.probs, u);
      std::size_t top = static_cast<std::size_t>(
          std::max_element(d.probs.begin(), d.probs.end()) - d.probs.begin());
      props.proposals.push_back(Proposal{masked[i], d.tokens[pick], d.probs[top], d.tokens[top]});
    }

    seq = cfg.policy == RemaskPolicy::Threshold
              ? remask_step(seq, props, cfg.gamma)
              : remask_step_budget(seq, props, default_budget);
    ++steps;
    last_dists = std::move(dists);
    last_masked = std::move(masked);
    if (hooks.on_step) hooks.on_step(seq, steps);
  }

  if (seq.mask_count() > 0) {
    // K exhausted: greedy-commit every leftover mask to its argmax token from
    // the final round of distributions.
    for (std::size_t i = 0; i < last_masked.size(); ++i) {
      if (!seq.is_committed(last_masked[i])) {
        const Distribution& d = last_dists[i];
        std::size_t top = static_cast<std::size_t>(
            std::max_element(d.probs.begin(), d.probs.end()) - d.probs.begin());
        seq.commit(last_masked[i], d.tokens[top]);
      }
    }
    if (hooks.on_step) hooks.on_step(seq, steps);
  }

  return DecodeResult{seq.generated_text(), steps};
}

}  // namespace diffstitch::diffusion
