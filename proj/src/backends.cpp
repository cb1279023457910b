#include "diffstitch/backends.hpp"

#include "diffstitch/mock_backend.hpp"
#include "diffstitch/remote_backend.hpp"

namespace diffstitch::backends {

Role parse_role(std::string_view name) {
  if (name == "predictor") return Role::Predictor;
  if (name == "scorer") return Role::Scorer;
  if (name == "completer") return Role::Completer;
  throw Error(ErrorKind::InvalidConfig, "unknown backend role: " + std::string(name));
}

std::string_view role_name(Role r) {
  switch (r) {
    case Role::Predictor: return "predictor";
    case Role::Scorer: return "scorer";
    case Role::Completer: return "completer";
  }
  return "predictor";
}

std::string Fingerprint::key() const {
  return std::string(role_name(role)) + "|" + problem + "|" + std::to_string(trace) + "|" +
         std::to_string(iteration);
}

void Backend::require(Role needed, std::string_view op) const {
  if (role_ != needed) {
    throw Error(ErrorKind::Protocol,
                std::string(role_name(role_)) + "-role backend received a " +
                    std::string(op) + " request (role isolation)");
  }
}

std::vector<diffusion::Distribution> Backend::predict(const Fingerprint&,
                                                      const diffusion::MaskedSequence&,
                                                      const diffusion::DecodeConfig&) {
  require(Role::Predictor, "predict");
  throw Error(ErrorKind::Protocol, "backend does not implement per-iteration prediction");
}

GenerateResponse Backend::generate(const Fingerprint&, const GenerateRequest&) {
  require(Role::Predictor, "generate");
  throw Error(ErrorKind::Protocol, "backend does not implement whole-generation requests");
}

std::vector<double> Backend::score(const Fingerprint&, const prm::ScoreRequest&) {
  require(Role::Scorer, "score");
  throw Error(ErrorKind::Protocol, "backend does not implement scoring");
}

solver::CompleteResponse Backend::complete(const Fingerprint&, const solver::CompleteRequest&) {
  require(Role::Completer, "complete");
  throw Error(ErrorKind::Protocol, "backend does not implement completion");
}

BackendDescriptor parse_backend_flag(std::string_view flag) {
  std::size_t eq = flag.find('=');
  if (eq == std::string_view::npos) {
    throw Error(ErrorKind::InvalidConfig,
                "backend flag must look like role=mock:path or role=remote:url");
  }
  BackendDescriptor desc;
  desc.role = parse_role(flag.substr(0, eq));
  std::string_view rest = flag.substr(eq + 1);
  std::size_t colon = rest.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorKind::InvalidConfig, "backend flag missing kind: " + std::string(flag));
  }
  std::string_view kind = rest.substr(0, colon);
  desc.target = std::string(rest.substr(colon + 1));
  if (kind == "mock") {
    desc.kind = Kind::Mock;
  } else if (kind == "remote") {
    desc.kind = Kind::Remote;
  } else if (kind == "remote-gen") {
    desc.kind = Kind::Remote;
    desc.mode = PredictorMode::WholeGeneration;
  } else {
    throw Error(ErrorKind::InvalidConfig, "unknown backend kind: " + std::string(kind));
  }
  if (desc.target.empty()) {
    throw Error(ErrorKind::InvalidConfig, "backend target is empty: " + std::string(flag));
  }
  return desc;
}

BackendPtr make_backend(const BackendDescriptor& desc) {
  if (desc.kind == Kind::Mock) {
    return MockBackend::load(desc.role, desc.target);
  }
  return std::make_shared<RemoteBackend>(desc);
}

}  // namespace diffstitch::backends
