#include "diffstitch/record_replay.hpp"

#include <fstream>

namespace diffstitch::backends {

using nlohmann::json;

namespace {

json distributions_to_json(const std::vector<diffusion::Distribution>& dists) {
  json arr = json::array();
  for (const diffusion::Distribution& d : dists) {
    arr.push_back({{"tokens", d.tokens}, {"probs", d.probs}});
  }
  return arr;
}

std::vector<diffusion::Distribution> distributions_from_json(const json& arr) {
  std::vector<diffusion::Distribution> out;
  for (const json& d : arr) {
    out.push_back(diffusion::Distribution{d.at("tokens").get<std::vector<std::string>>(),
                                          d.at("probs").get<std::vector<double>>()});
  }
  return out;
}

}  // namespace

struct CassetteWriter::Impl {
  std::ofstream out;
  std::mutex mu;
};

CassetteWriter::CassetteWriter(const std::string& path) : impl_(new Impl) {
  impl_->out.open(path, std::ios::trunc);
  if (!impl_->out) {
    throw Error(ErrorKind::Io, "cannot open cassette for writing: " + path);
  }
}

CassetteWriter::~CassetteWriter() = default;

void CassetteWriter::append(const json& line) {
  std::lock_guard lock(impl_->mu);
  impl_->out << line.dump() << '\n';
  impl_->out.flush();
}

std::shared_ptr<Cassette> Cassette::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open cassette: " + path);
  }
  auto cassette = std::make_shared<Cassette>();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Io,
                  "cassette parse failure at line " + std::to_string(lineno) + ": " + e.what());
    }
    std::string op = rec.at("op").get<std::string>();
    cassette->lines_[rec.at("fp").get<std::string>() + "#" + op].push_back(rec.at("response"));
    cassette->ops_.insert(op);
  }
  return cassette;
}

bool Cassette::has_op(const std::string& op) const { return ops_.count(op) > 0; }

json Cassette::take(const std::string& fp_key, const std::string& op) {
  std::lock_guard lock(mu_);
  auto it = lines_.find(fp_key + "#" + op);
  if (it == lines_.end() || it->second.empty()) {
    throw BackendError("replay miss for fingerprint " + fp_key + " op " + op, 0);
  }
  json resp = std::move(it->second.front());
  it->second.pop_front();
  return resp;
}

RecordingBackend::RecordingBackend(BackendPtr inner, std::shared_ptr<CassetteWriter> writer)
    : Backend(inner->role()), inner_(std::move(inner)), writer_(std::move(writer)) {}

std::vector<diffusion::Distribution> RecordingBackend::predict(
    const Fingerprint& fp, const diffusion::MaskedSequence& seq,
    const diffusion::DecodeConfig& cfg) {
  auto dists = inner_->predict(fp, seq, cfg);
  writer_->append({{"fp", fp.key()},
                   {"op", "predict"},
                   {"request",
                    {{"masked", seq.masked_positions()},
                     {"generated", seq.generated_text()},
                     {"temperature", cfg.temperature},
                     {"gamma", cfg.gamma}}},
                   {"response", distributions_to_json(dists)}});
  return dists;
}

GenerateResponse RecordingBackend::generate(const Fingerprint& fp, const GenerateRequest& req) {
  GenerateResponse resp = inner_->generate(fp, req);
  writer_->append({{"fp", fp.key()},
                   {"op", "generate"},
                   {"request",
                    {{"system", req.system},
                     {"user", req.user},
                     {"gen_len", req.gen_len},
                     {"max_iters", req.max_iters},
                     {"temperature", req.temperature},
                     {"gamma", req.gamma},
                     {"seed", req.seed}}},
                   {"response", {{"text", resp.text}, {"steps", resp.steps}}}});
  return resp;
}

std::vector<double> RecordingBackend::score(const Fingerprint& fp, const prm::ScoreRequest& req) {
  auto scores = inner_->score(fp, req);
  writer_->append({{"fp", fp.key()},
                   {"op", "score"},
                   {"request",
                    {{"system", req.system},
                     {"problem", req.problem},
                     {"body", req.body},
                     {"marker", req.marker}}},
                   {"response", {{"scores", scores}}}});
  return scores;
}

solver::CompleteResponse RecordingBackend::complete(const Fingerprint& fp,
                                                    const solver::CompleteRequest& req) {
  solver::CompleteResponse resp = inner_->complete(fp, req);
  writer_->append({{"fp", fp.key()},
                   {"op", "complete"},
                   {"request",
                    {{"system", req.system},
                     {"user", req.user},
                     {"assistant_prefix", req.assistant_prefix},
                     {"max_tokens", req.max_tokens},
                     {"temperature", req.temperature}}},
                   {"response", {{"chunks", resp.chunks}, {"tokens", resp.token_count}}}});
  return resp;
}

ReplayBackend::ReplayBackend(Role role, PredictorMode mode, std::shared_ptr<Cassette> cassette)
    : Backend(role), mode_(mode), cassette_(std::move(cassette)) {}

std::vector<diffusion::Distribution> ReplayBackend::predict(const Fingerprint& fp,
                                                            const diffusion::MaskedSequence&,
                                                            const diffusion::DecodeConfig&) {
  require(Role::Predictor, "predict");
  return distributions_from_json(cassette_->take(fp.key(), "predict"));
}

GenerateResponse ReplayBackend::generate(const Fingerprint& fp, const GenerateRequest&) {
  require(Role::Predictor, "generate");
  json resp = cassette_->take(fp.key(), "generate");
  return GenerateResponse{resp.at("text").get<std::string>(), resp.at("steps").get<int>()};
}

std::vector<double> ReplayBackend::score(const Fingerprint& fp, const prm::ScoreRequest&) {
  require(Role::Scorer, "score");
  return cassette_->take(fp.key(), "score").at("scores").get<std::vector<double>>();
}

solver::CompleteResponse ReplayBackend::complete(const Fingerprint& fp,
                                                 const solver::CompleteRequest&) {
  require(Role::Completer, "complete");
  json resp = cassette_->take(fp.key(), "complete");
  return solver::CompleteResponse{resp.at("chunks").get<std::vector<std::string>>(),
                                  resp.at("tokens").get<int>()};
}

BackendSet wrap_recording(const BackendSet& inner, const std::string& cassette_path) {
  auto writer = std::make_shared<CassetteWriter>(cassette_path);
  return BackendSet{std::make_shared<RecordingBackend>(inner.predictor, writer),
                    std::make_shared<RecordingBackend>(inner.scorer, writer),
                    std::make_shared<RecordingBackend>(inner.completer, writer)};
}

BackendSet make_replay_set(const std::string& cassette_path) {
  auto cassette = Cassette::load(cassette_path);
  PredictorMode mode = cassette->has_op("generate") ? PredictorMode::WholeGeneration
                                                    : PredictorMode::PerIteration;
  return BackendSet{std::make_shared<ReplayBackend>(Role::Predictor, mode, cassette),
                    std::make_shared<ReplayBackend>(Role::Scorer, mode, cassette),
                    std::make_shared<ReplayBackend>(Role::Completer, mode, cassette)};
}

}  // namespace diffstitch::backends
