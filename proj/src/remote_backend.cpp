#include "diffstitch/remote_backend.hpp"

#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace diffstitch::backends {

using nlohmann::json;

RemoteBackend::RemoteBackend(BackendDescriptor desc) : Backend(desc.role), desc_(std::move(desc)) {
  if (!desc_.token_env.empty()) {
    if (const char* tok = std::getenv(desc_.token_env.c_str())) bearer_ = tok;
  }
}

std::string RemoteBackend::post_json(const std::string& path, const std::string& body) const {
  std::string last_error;
  for (int attempt = 0; attempt <= desc_.max_retries; ++attempt) {
    httplib::Client cli(desc_.target);
    cli.set_connection_timeout(0, desc_.timeout_ms * 1000LL);
    cli.set_read_timeout(0, desc_.timeout_ms * 1000LL);
    httplib::Headers headers;
    if (!bearer_.empty()) headers.emplace("Authorization", "Bearer " + bearer_);
    auto res = cli.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(ErrorKind::Backend,
                  "HTTP " + std::to_string(res->status) + " from " + desc_.target + path);
    }
    return res->body;
  }
  throw Error(ErrorKind::Backend, "request to " + desc_.target + path + " failed after " +
                                      std::to_string(desc_.max_retries + 1) +
                                      " attempts: " + last_error);
}

namespace {

json parse_body(const std::string& body, const std::string& where) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Backend, "malformed response from " + where + ": " + e.what());
  }
}

json chat_body(const std::string& model, const std::string& system, const std::string& user,
               const std::string& assistant, int max_tokens, double temperature,
               bool logprobs) {
  json messages = json::array();
  if (!system.empty()) messages.push_back({{"role", "system"}, {"content", system}});
  messages.push_back({{"role", "user"}, {"content", user}});
  if (!assistant.empty()) messages.push_back({{"role", "assistant"}, {"content", assistant}});
  json body = {{"model", model.empty() ? "default" : model},
               {"messages", messages},
               {"max_tokens", max_tokens},
               {"temperature", temperature}};
  if (logprobs) body["logprobs"] = true;
  return body;
}

const json* find_logprob_content(const json& resp) {
  if (!resp.contains("choices") || resp["choices"].empty()) return nullptr;
  const json& choice = resp["choices"][0];
  if (!choice.contains("logprobs") || !choice["logprobs"].is_object()) return nullptr;
  const json& lp = choice["logprobs"];
  if (!lp.contains("content") || !lp["content"].is_array()) return nullptr;
  return &lp["content"];
}

}  // namespace

std::vector<diffusion::Distribution> RemoteBackend::predict(const Fingerprint& fp,
                                                            const diffusion::MaskedSequence& seq,
                                                            const diffusion::DecodeConfig& cfg) {
  require(Role::Predictor, "predict");
  std::vector<std::size_t> rel;
  for (std::size_t abs : seq.masked_positions()) rel.push_back(abs - seq.prompt_len());
  json body = {{"problem", fp.problem},     {"trace", fp.trace},
               {"iteration", fp.iteration}, {"generated", seq.generated_text()},
               {"masked", rel},             {"gen_len", cfg.gen_len},
               {"temperature", cfg.temperature}, {"gamma", cfg.gamma}};
  json resp = parse_body(post_json("/v1/diffusion/step", body.dump()), desc_.target);
  if (!resp.contains("distributions") || !resp["distributions"].is_array()) {
    throw Error(ErrorKind::Backend, "diffusion step response missing 'distributions'");
  }
  std::vector<diffusion::Distribution> out;
  for (const json& d : resp["distributions"]) {
    out.push_back(diffusion::Distribution{d.at("tokens").get<std::vector<std::string>>(),
                                          d.at("probs").get<std::vector<double>>()});
  }
  return out;
}

GenerateResponse RemoteBackend::generate(const Fingerprint&, const GenerateRequest& req) {
  require(Role::Predictor, "generate");
  json body = chat_body(desc_.model, req.system, req.user, "", req.gen_len, req.temperature,
                        false);
  body["gamma"] = req.gamma;
  body["seed"] = req.seed;
  json resp = parse_body(post_json("/v1/chat/completions", body.dump()), desc_.target);
  GenerateResponse out;
  out.text = resp.at("choices").at(0).at("message").at("content").get<std::string>();
  if (resp.contains("diffusion_steps")) {
    out.steps = resp["diffusion_steps"].get<int>();
  } else if (resp.contains("usage") && resp["usage"].contains("completion_tokens")) {
    out.steps = resp["usage"]["completion_tokens"].get<int>();
  } else {
    out.steps = 1;
  }
  return out;
}

std::vector<double> RemoteBackend::score(const Fingerprint&, const prm::ScoreRequest& req) {
  require(Role::Scorer, "score");
  json body = chat_body(desc_.model, req.system, req.problem, req.body, 1, 0.0, true);
  body["marker"] = req.marker;
  json resp = parse_body(post_json("/v1/chat/completions", body.dump()), desc_.target);
  if (resp.contains("scores") && resp["scores"].is_array()) {
    return resp["scores"].get<std::vector<double>>();
  }
  const json* content = find_logprob_content(resp);
  if (content == nullptr) {
    throw Error(ErrorKind::Backend,
                "scorer response carries neither 'scores' nor token logprobs");
  }
  std::vector<double> probs;
  for (const json& entry : *content) {
    if (entry.value("token", "") == req.marker) {
      probs.push_back(std::exp(entry.at("logprob").get<double>()));
    }
  }
  return probs;
}

solver::CompleteResponse RemoteBackend::complete(const Fingerprint&,
                                                 const solver::CompleteRequest& req) {
  require(Role::Completer, "complete");
  json body = chat_body(desc_.model, req.system, req.user, req.assistant_prefix, req.max_tokens,
                        req.temperature, true);
  json resp = parse_body(post_json("/v1/chat/completions", body.dump()), desc_.target);
  solver::CompleteResponse out;
  if (const json* content = find_logprob_content(resp); content != nullptr && !content->empty()) {
    for (const json& entry : *content) {
      out.chunks.push_back(entry.value("token", ""));
    }
    out.token_count = static_cast<int>(out.chunks.size());
    return out;
  }
  out.chunks.push_back(resp.at("choices").at(0).at("message").at("content").get<std::string>());
  out.token_count = 1;
  if (resp.contains("usage") && resp["usage"].contains("completion_tokens")) {
    out.token_count = resp["usage"]["completion_tokens"].get<int>();
  }
  return out;
}

}  // namespace diffstitch::backends
