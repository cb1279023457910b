// Python bindings for the stitching pipeline: the pure core operations
// (segmentation, scoring pool, stitch, answer parsing) plus dataset
// evaluation against mock or replayed backends.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "diffstitch/eval.hpp"
#include "diffstitch/record_replay.hpp"
#include "diffstitch/solver.hpp"

namespace py = pybind11;
namespace ds = diffstitch;

namespace {

ds::prm::StepPool pool_from_scores(const std::vector<std::vector<double>>& scores,
                                   const std::vector<std::vector<std::string>>& texts) {
  std::vector<ds::segmenter::StepList> traces;
  for (std::size_t n = 0; n < scores.size(); ++n) {
    ds::segmenter::StepList steps;
    for (std::size_t t = 0; t < scores[n].size(); ++t) {
      std::string text = n < texts.size() && t < texts[n].size()
                             ? texts[n][t]
                             : "s" + std::to_string(n) + "." + std::to_string(t);
      steps.push_back(ds::segmenter::Step{text, t, t + 1});
    }
    traces.push_back(std::move(steps));
  }
  return ds::prm::build_step_pool(traces, scores);
}

ds::backends::BackendSet backend_set_from_spec(const std::string& predictor,
                                               const std::string& scorer,
                                               const std::string& completer,
                                               const std::string& replay) {
  if (!replay.empty()) {
    return ds::backends::make_replay_set(replay);
  }
  ds::backends::BackendSet set;
  set.predictor = ds::backends::make_backend(
      ds::backends::parse_backend_flag("predictor=" + predictor));
  set.scorer = ds::backends::make_backend(ds::backends::parse_backend_flag("scorer=" + scorer));
  set.completer = ds::backends::make_backend(
      ds::backends::parse_backend_flag("completer=" + completer));
  return set;
}

}  // namespace

PYBIND11_MODULE(_diffstitch, m) {
  m.doc() = "Step-level stitching of diffusion reasoning traces";

  m.def(
      "segment_sentences",
      [](const std::string& text) {
        std::vector<std::string> out;
        for (const auto& s : ds::segmenter::segment_sentences(text)) out.push_back(s.text);
        return out;
      },
      py::arg("text"), "Sentence-level step segmentation for math rationales.");
  m.def(
      "segment_lines",
      [](const std::string& text) {
        std::vector<std::string> out;
        for (const auto& s : ds::segmenter::segment_lines(text)) out.push_back(s.text);
        return out;
      },
      py::arg("text"), "Line-level step segmentation for code.");
  m.def("extract_rationale",
        [](const std::string& text) { return ds::segmenter::extract_rationale(text); });

  m.def("geometric_mean", &ds::stitcher::geometric_mean, py::arg("scores"));
  m.def(
      "select_anchor_trace",
      [](const std::vector<std::vector<double>>& scores) {
        return ds::stitcher::select_anchor_trace(pool_from_scores(scores, {}));
      },
      py::arg("scores"), "Anchor trace index for per-trace score lists.");
  m.def(
      "stitch",
      [](const std::vector<std::vector<double>>& scores,
         const std::vector<std::vector<std::string>>& texts, double delta) {
        ds::prm::StepPool pool = pool_from_scores(scores, texts);
        std::size_t anchor = ds::stitcher::select_anchor_trace(pool);
        ds::stitcher::EvidenceList ev = ds::stitcher::stitch(pool, delta, anchor);
        py::list items;
        for (const auto& item : ev.items) {
          items.append(py::make_tuple(item.position, item.score, item.text, item.trace));
        }
        return py::make_tuple(anchor, items, ds::stitcher::render_evidence(ev));
      },
      py::arg("scores"), py::arg("texts"), py::arg("delta"),
      "Stitches scored steps; returns (anchor, items, rendered evidence).");

  m.def("extract_boxed", [](const std::string& text) -> py::object {
    auto v = ds::solver::extract_boxed(text);
    if (!v) return py::none();
    return py::cast(*v);
  });
  m.def("normalize_answer",
        [](const std::string& a) { return ds::solver::normalize_answer(a); });
  m.def("verify_strict", [](const std::string& pred, const std::string& gold) {
    return ds::solver::verify_strict(pred, gold);
  });
  m.def("verify_exact", [](const std::string& pred, const std::string& gold) {
    return ds::solver::verify_exact(pred, gold);
  });

  m.def(
      "run_eval",
      [](const std::string& dataset_path, const std::string& mode, int n_traces, double gamma,
         double delta, double tau, int gen_len, int max_iters, std::uint64_t seed, int workers,
         const std::string& family, const std::string& predictor, const std::string& scorer,
         const std::string& completer, const std::string& record, const std::string& replay) {
        ds::orchestrator::PipelineConfig cfg;
        cfg.mode = ds::stitcher::parse_mode(mode);
        cfg.n_traces = n_traces;
        cfg.gamma = gamma;
        cfg.delta = delta;
        cfg.tau = tau;
        cfg.gen_len = gen_len;
        cfg.max_iters = max_iters;
        cfg.seed = seed;
        cfg.workers = workers;
        cfg.family = ds::prompts::parse_family(family);
        auto dataset = ds::eval::load_dataset(dataset_path, cfg.family);
        ds::backends::BackendSet set =
            backend_set_from_spec(predictor, scorer, completer, replay);
        if (!record.empty()) set = ds::backends::wrap_recording(set, record);
        ds::eval::EvalSummary summary = ds::eval::run_eval(dataset, cfg, set, mode);
        return py::module_::import("json").attr("loads")(
            ds::eval::summary_to_json(summary, true).dump());
      },
      py::arg("dataset"), py::arg("mode") = "stitch+best", py::arg("n_traces") = 4,
      py::arg("gamma") = 0.7, py::arg("delta") = 0.8, py::arg("tau") = 1.0,
      py::arg("gen_len") = 512, py::arg("max_iters") = 512, py::arg("seed") = 0,
      py::arg("workers") = 1, py::arg("family") = "math", py::arg("predictor") = "",
      py::arg("scorer") = "", py::arg("completer") = "", py::arg("record") = "",
      py::arg("replay") = "",
      "Evaluates a JSONL dataset; backends are 'mock:path', 'remote:url' or a replay "
      "cassette. Returns the summary as a dict.");
}
