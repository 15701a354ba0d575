"""Smoke tests for the pathnav Python module against independent references."""

import json
import struct
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

import pathnav
import make_preprocess_golden as golden

REPO = Path(__file__).resolve().parents[2]
FIXTURES = REPO / "tests" / "data" / "preprocess"


def test_decision_round_trip():
    text = pathnav.format_decision(0.1234, 0.9876, level=2, justification="Dense stripes.")
    d = pathnav.parse_decision(text)
    assert (round(d["x"], 4), round(d["y"], 4), d["level"], d["terminate"]) == (0.1234, 0.9876, 2, False)
    assert pathnav.parse_decision("TERMINATE")["terminate"]


def test_grammar_error_carries_code():
    with pytest.raises(pathnav.PathnavError) as info:
        pathnav.parse_decision("no coordinates here")
    assert info.value.code == "grammar"


@pytest.mark.parametrize("name", ["square224", "wide300x260", "tall384x512"])
def test_preprocess_matches_goldens(name):
    rgb = np.asarray(Image.open(FIXTURES / f"{name}.png").convert("RGB"))
    got = pathnav.preprocess(rgb)
    assert got.shape == (3, 224, 224) and got.dtype == np.float32
    frozen = np.fromfile(FIXTURES / f"{name}.f32", dtype="<f4").reshape(3, 224, 224)
    np.testing.assert_allclose(got, frozen, atol=1e-5, rtol=0)
    np.testing.assert_allclose(got, golden.preprocess(rgb), atol=1e-5, rtol=0)


def test_preprocess_rejects_small_input():
    with pytest.raises(pathnav.PathnavError):
        pathnav.preprocess(np.zeros((100, 300, 3), np.uint8))


def pack_emb1(records):
    """EMB1 writer from the format description, independent of the module."""
    out = b"EMB1" + struct.pack("<II", len(records), pathnav.EMBEDDING_DIM)
    for case_id, vec in records:
        raw = case_id.encode()
        out += struct.pack("<I", len(raw)) + raw + np.asarray(vec, "<f4").tobytes()
    return out


def test_emb1_both_directions(tmp_path):
    rng = np.random.default_rng(4)
    records = [(f"case-{i}", rng.standard_normal(pathnav.EMBEDDING_DIM).astype(np.float32)) for i in range(3)]
    blob = pack_emb1(records)
    assert pathnav.encode_emb1(records) == blob
    back = pathnav.decode_emb1(blob)
    assert [r[0] for r in back] == [r[0] for r in records]
    for (_, a), (_, b) in zip(back, records):
        assert a.tobytes() == b.tobytes()
    (tmp_path / "x.emb").write_bytes(blob)
    assert pathnav.read_embeddings(tmp_path / "x.emb")[1][0] == "case-1"
    with pytest.raises(pathnav.PathnavError) as info:
        pathnav.decode_emb1(blob[:-1])
    assert info.value.code == "corrupt-header"


def test_toy_encoder_is_unit_norm_and_deterministic():
    rng = np.random.default_rng(5)
    rgb = rng.integers(0, 256, (300, 260, 3), dtype=np.uint8)
    a = pathnav.toy_encode(rgb)
    assert a.shape == (pathnav.EMBEDDING_DIM,)
    assert abs(float(np.linalg.norm(a)) - 1.0) < 1e-5
    assert np.array_equal(a, pathnav.toy_encode(rgb))


def test_metrics_agree_with_sklearn():
    metrics = pytest.importorskip("sklearn.metrics")
    rng = np.random.default_rng(6)
    classes = ["A", "B", "C"]
    y = [classes[i] for i in rng.integers(0, 3, 120)]
    p = [c if rng.random() < 0.6 else classes[rng.integers(0, 3)] for c in y]
    assert pathnav.accuracy(p, y) == pytest.approx(metrics.accuracy_score(y, p), abs=1e-12)
    assert pathnav.macro_f1(p, y, classes) == pytest.approx(
        metrics.f1_score(y, p, labels=classes, average="macro", zero_division=0), abs=1e-12
    )
    scores = rng.random((120, 3))
    scores /= scores.sum(axis=1, keepdims=True)
    assert pathnav.auroc_ovr_macro(scores.tolist(), y, classes) == pytest.approx(
        metrics.roc_auc_score(y, scores, multi_class="ovr", average="macro", labels=classes), abs=1e-9
    )
    assert pathnav.checklist_accuracy([["y", "n"], ["x"] * 10], [["y", "y"], ["x"] * 10]) == 0.75


def test_survival_and_paired_t():
    km = pathnav.km_estimate([1, 2, 3], [True, False, True])
    assert km["times"] == [1, 3]
    assert km["survival"][0] == pytest.approx(2 / 3, abs=1e-12)
    lr = pathnav.logrank_test([1, 2, 3, 10, 11, 12], [True] * 6, [0, 0, 0, 1, 1, 1])
    assert lr["df"] == 1 and lr["p_value"] < 0.05
    stats = pytest.importorskip("scipy.stats")
    a = [0.81, 0.74, 0.92, 0.66, 0.79]
    b = [0.72, 0.75, 0.80, 0.61, 0.70]
    r = pathnav.paired_t_test(a, b)
    ref = stats.ttest_rel(a, b)
    assert r["t"] == pytest.approx(ref.statistic, rel=1e-10)
    assert r["p_value"] == pytest.approx(ref.pvalue, rel=1e-8)


def test_heads_score_separable_embeddings():
    rng = np.random.default_rng(7)
    centers = rng.standard_normal((2, pathnav.EMBEDDING_DIM))
    def make(n, prefix):
        recs, labels = [], []
        for i in range(n):
            c = i % 2
            v = (centers[c] + 0.05 * rng.standard_normal(pathnav.EMBEDDING_DIM)).astype(np.float32)
            recs.append((f"{prefix}{i}", v))
            labels.append("AB"[c])
        return recs, labels
    train, train_y = make(30, "tr")
    test, test_y = make(10, "te")
    s = pathnav.score_heads(train, train_y, test, test_y, k=5)
    assert s["classes"] == ["A", "B"]
    assert pathnav.auroc_ovr_macro(s["knn"], test_y, s["classes"]) == 1.0
    assert pathnav.auroc_ovr_macro(s["lr"], test_y, s["classes"]) == 1.0


def test_navigate_with_oracle(tmp_path):
    pathnav.generate_slides(tmp_path / "slides", 2, 3, width=8192, height=6144,
                            subtypes=REPO / "data" / "synthetic_subtypes.txt")
    config = {"slide_store": str(tmp_path / "slides"), "output": str(tmp_path / "out"), "seed": 3,
              "policy": "oracle"}
    report = pathnav.navigate(json.dumps(config))
    assert report["exit_code"] == 0
    assert [s["slide_id"] for s in report["slides"]] == ["slide_000", "slide_001"]
    for s in report["slides"]:
        assert 1 <= s["rounds"] <= 10
        lines = (tmp_path / "out" / s["trajectory"]).read_text().splitlines()
        assert json.loads(lines[0])["type"] == "run"
        assert len(lines) == 1 + s["rounds"]
    again = pathnav.navigate(json.dumps({**config, "output": str(tmp_path / "again")}))
    assert [s["trajectory_sha256"] for s in again["slides"]] == [s["trajectory_sha256"] for s in report["slides"]]
