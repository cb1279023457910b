"""End-to-end checks for the Python bindings against the demo assets."""

import math
from pathlib import Path

import pytest

import diffstitch

REPO = Path(__file__).resolve().parents[2]
DEMO = REPO / "assets" / "demo"


def test_segmentation():
    assert diffstitch.segment_sentences("A is 2. So B is 3.") == ["A is 2.", "So B is 3."]
    assert diffstitch.segment_lines("x = 1\n\ny = 2\n") == ["x = 1", "y = 2"]


def test_rationale_extraction():
    text = "<reasoning>\nFirst 2. Then 3.\n</reasoning>\n<answer>\n\\boxed{5}\n</answer>"
    assert diffstitch.extract_rationale(text) == "First 2. Then 3."


def test_geometric_mean():
    assert math.isclose(diffstitch.geometric_mean([0.9, 0.4, 0.6]), 0.6, abs_tol=1e-9)
    assert diffstitch.geometric_mean([]) == 1.0
    assert diffstitch.geometric_mean([0.5, 0.0]) == 0.0


def test_anchor_selection():
    assert diffstitch.select_anchor_trace([[0.9, 0.2], [0.5, 0.95]]) == 1
    # Ties resolve to the lowest trace index.
    assert diffstitch.select_anchor_trace([[0.4], [0.4]]) == 0


def test_stitch():
    anchor, items, rendered = diffstitch.stitch(
        [[0.9, 0.2], [0.5, 0.95]], [["A", "B"], ["C", "D"]], 0.8
    )
    assert anchor == 1
    assert items == [(0, 0.9, "A", 0), (0, 0.5, "C", 1), (1, 0.95, "D", 1)]
    assert rendered == "[c=0.90] A\n[c=0.50] C\n[c=0.95] D"


def test_answer_parsing():
    assert diffstitch.extract_boxed("the \\boxed{42} wins") == "42"
    assert diffstitch.extract_boxed("\\boxed{\\frac{1}{2}}") == "\\frac{1}{2}"
    assert diffstitch.extract_boxed("no box here") is None
    assert diffstitch.normalize_answer(" $ \\left( 1, 2 \\right) $ ") == "( 1, 2 )"
    assert diffstitch.normalize_answer("East  Side") == "east side"
    assert diffstitch.verify_strict("0.50", "1/2")
    assert not diffstitch.verify_strict("0.5", "0.6")
    assert diffstitch.verify_exact(" 42 ", "42")
    assert not diffstitch.verify_exact("AB", "ab")


def test_run_eval_demo_dataset(tmp_path):
    kwargs = dict(
        predictor=f"mock:{DEMO / 'predictor.json'}",
        scorer=f"mock:{DEMO / 'scorer.json'}",
        completer=f"mock:{DEMO / 'completer.json'}",
        n_traces=3,
        gen_len=8,
        max_iters=8,
    )
    cassette = tmp_path / "demo.jsonl"
    summary = diffstitch.run_eval(
        str(DEMO / "dataset.jsonl"), mode="stitch+best", record=str(cassette), **kwargs
    )
    assert summary["accuracy"] == 1.0
    assert summary["error_count"] == 0
    assert summary["label"] == "stitch+best"
    assert [r["answer"] for r in summary["reports"]] == ["36", "7", "8", "45"]
    assert all(r["scorer_passes"] == 3 for r in summary["reports"])
    assert "wall_clock_ms" in summary

    # Majority vote never invokes the solver.
    majority = diffstitch.run_eval(str(DEMO / "dataset.jsonl"), mode="majority", **kwargs)
    assert majority["accuracy"] == 1.0
    assert majority["mean_solver_steps"] == 0.0

    # Replaying the recorded session reproduces every report without backends.
    replayed = diffstitch.run_eval(
        str(DEMO / "dataset.jsonl"),
        mode="stitch+best",
        n_traces=3,
        gen_len=8,
        max_iters=8,
        replay=str(cassette),
    )
    fields = ["problem_id", "answer", "correct", "total_diffusion_steps", "solver_steps"]
    for before, after in zip(summary["reports"], replayed["reports"]):
        assert {k: before[k] for k in fields} == {k: after[k] for k in fields}


def test_run_eval_rejects_unknown_mode():
    with pytest.raises(RuntimeError, match="unknown aggregation mode"):
        diffstitch.run_eval(str(DEMO / "dataset.jsonl"), mode="telepathy")
