"""Bundle I/O: manifests, CSV tables, diagnostics, the round trip."""

import json
import math

import pytest

from logifold.bundle import Bundle, inspect_bundle, load_bundle, save_bundle
from logifold.ensemble import total_entropy
from logifold.errors import DomainError, ValidationError
from logifold.model import model_truth_cross_entropy

from conftest import AB, ABC, make_model, make_space


def write_bundle(tmp_path, manifest, files):
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    for name, text in files.items():
        (tmp_path / name).write_text(text)
    return tmp_path


GOOD_MANIFEST = {
    "label_universe": ["a", "b"],
    "dataset": "dataset.csv",
    "models": [
        {"id": "m1", "target": ["a", "b"], "predictions": "m1.csv"},
        {"id": "m2", "target": ["a", "b"], "predictions": "m2.csv"},
    ],
}

GOOD_FILES = {
    "dataset.csv": ("sample_id,weight,label\n"
                    "x1,1.0,a\n"
                    "x2,2.0,b\n"),
    "m1.csv": ("sample_id,p_a,p_b\n"
               "x1,0.6,0.4\n"
               "x2,0.95,0.05\n"),
    "m2.csv": ("sample_id,p_a,p_b\n"
               "x1,0.6,0.4\n"),
}


class TestLoadGood:
    def test_full_load(self, tmp_path):
        d = write_bundle(tmp_path, GOOD_MANIFEST, GOOD_FILES)
        b = load_bundle(d)
        assert b.has_truth
        assert b.space.sample_ids == ("x1", "x2")
        assert b.space.weight("x2") == 2.0
        m1 = b.model_by_id("m1")
        assert m1.predict("x1")["a"] == 0.6
        # missing row means out of domain
        assert not b.model_by_id("m2").covers("x2")

    def test_ensemble_view(self, tmp_path):
        d = write_bundle(tmp_path, GOOD_MANIFEST, GOOD_FILES)
        e = load_bundle(d).ensemble("demo")
        assert e.name == "demo"
        assert math.isfinite(total_entropy(e))

    def test_no_dataset_uniform_weights(self, tmp_path):
        manifest = {k: v for k, v in GOOD_MANIFEST.items() if k != "dataset"}
        files = {k: v for k, v in GOOD_FILES.items() if k != "dataset.csv"}
        b = load_bundle(write_bundle(tmp_path, manifest, files))
        assert not b.has_truth
        assert b.space.sample_ids == ("x1", "x2")
        assert b.space.weight("x1") == pytest.approx(0.5)

    def test_unlabeled_dataset(self, tmp_path):
        files = dict(GOOD_FILES)
        files["dataset.csv"] = "sample_id,weight\nx1,1.0\nx2,2.0\n"
        b = load_bundle(write_bundle(tmp_path, GOOD_MANIFEST, files))
        assert not b.has_truth

    def test_unknown_model_lookup(self, tmp_path):
        b = load_bundle(write_bundle(tmp_path, GOOD_MANIFEST, GOOD_FILES))
        with pytest.raises(DomainError):
            b.model_by_id("nope")


class TestProblems:
    def load_problems(self, tmp_path, manifest, files):
        bundle, problems, _ = inspect_bundle(
            write_bundle(tmp_path, manifest, files))
        assert bundle is None
        return problems

    def test_bad_json(self, tmp_path):
        (tmp_path / "manifest.json").write_text("{nope")
        bundle, problems, _ = inspect_bundle(tmp_path)
        assert bundle is None
        assert "not valid JSON" in problems[0]

    def test_missing_universe(self, tmp_path):
        manifest = {"models": GOOD_MANIFEST["models"]}
        problems = self.load_problems(tmp_path, manifest, GOOD_FILES)
        assert any("label_universe" in p for p in problems)

    def test_bad_dataset_rows_carry_line_numbers(self, tmp_path):
        files = dict(GOOD_FILES)
        files["dataset.csv"] = ("sample_id,weight,label\n"
                                "x1,1.0,a\n"
                                "x2,-3.0,b\n"
                                "x1,1.0,a\n")
        problems = self.load_problems(tmp_path, GOOD_MANIFEST, files)
        assert any(":3:" in p and "positive" in p for p in problems)
        assert any(":4:" in p and "duplicate" in p for p in problems)

    def test_bad_prediction_header(self, tmp_path):
        files = dict(GOOD_FILES)
        files["m1.csv"] = "sample_id,p_b,p_a\nx1,0.4,0.6\n"
        problems = self.load_problems(tmp_path, GOOD_MANIFEST, files)
        assert any("m1.csv:1" in p for p in problems)

    def test_row_not_summing_to_one(self, tmp_path):
        files = dict(GOOD_FILES)
        files["m1.csv"] = "sample_id,p_a,p_b\nx1,0.6,0.6\nx2,0.95,0.05\n"
        problems = self.load_problems(tmp_path, GOOD_MANIFEST, files)
        assert any("m1.csv:2" in p for p in problems)

    def test_prediction_for_unknown_sample(self, tmp_path):
        files = dict(GOOD_FILES)
        files["m2.csv"] = "sample_id,p_a,p_b\nghost,0.5,0.5\n"
        problems = self.load_problems(tmp_path, GOOD_MANIFEST, files)
        assert any("ghost" in p for p in problems)

    def test_label_outside_universe(self, tmp_path):
        files = dict(GOOD_FILES)
        files["dataset.csv"] = "sample_id,weight,label\nx1,1.0,z\nx2,1.0,b\n"
        problems = self.load_problems(tmp_path, GOOD_MANIFEST, files)
        assert any(":2:" in p and "'z'" in p for p in problems)

    def test_load_bundle_raises_with_joined_problems(self, tmp_path):
        files = dict(GOOD_FILES)
        files["m1.csv"] = "sample_id,p_a,p_b\nx1,oops,0.4\nx2,0.95,0.05\n"
        with pytest.raises(ValidationError, match="m1.csv:2"):
            load_bundle(write_bundle(tmp_path, GOOD_MANIFEST, files))


class TestDiagnostics:
    def test_truth_outside_target_reported_not_fatal(self, tmp_path):
        manifest = {
            "label_universe": ["a", "b", "c"],
            "dataset": "dataset.csv",
            "models": [{"id": "m1", "target": ["a", "b"],
                        "predictions": "m1.csv"}],
        }
        files = {
            "dataset.csv": "sample_id,weight,label\nx1,1.0,c\n",
            "m1.csv": "sample_id,p_a,p_b\nx1,0.5,0.5\n",
        }
        bundle, problems, diagnostics = inspect_bundle(
            write_bundle(tmp_path, manifest, files))
        assert bundle is not None and not problems
        assert len(diagnostics) == 1
        assert "outside the model target" in diagnostics[0]
        assert model_truth_cross_entropy(bundle.models[0]) == math.inf


class TestEpsilonFloor:
    def test_floors_hard_zeros(self, tmp_path):
        files = dict(GOOD_FILES)
        files["m1.csv"] = "sample_id,p_a,p_b\nx1,1,0\nx2,0.95,0.05\n"
        d = write_bundle(tmp_path, GOOD_MANIFEST, files)
        raw = load_bundle(d)
        assert not raw.model_by_id("m1").is_interior()
        floored = load_bundle(d, epsilon_floor=1e-9)
        m1 = floored.model_by_id("m1")
        assert m1.is_interior()
        assert m1.predict("x1")["b"] > 0.0


class TestRoundTrip:
    def build(self):
        sp = make_space({"x1": 0.25, "x2": 1.75}, universe=ABC,
                        truth={"x1": "a", "x2": "c"})
        m1 = make_model("m1", sp, ABC,
                        {"x1": (0.2, 0.3, 0.5), "x2": (1 / 3, 1 / 3, 1 / 3)})
        m2 = make_model("m2", sp, AB, {"x1": (0.123456789012345,
                                              0.876543210987655)})
        return Bundle(sp, (m1, m2), name="fixture")

    def test_save_load_identity(self, tmp_path):
        original = self.build()
        reloaded = load_bundle(save_bundle(original, tmp_path / "out"))
        assert reloaded.name == "fixture"
        assert reloaded.space.samples == original.space.samples
        assert reloaded.space.truth == original.space.truth
        for m in original.models:
            r = reloaded.model_by_id(m.model_id)
            assert r.domain.members == m.domain.members
            assert r.target == m.target
            for sid in m.space.ordered(m.domain):
                assert r.predict(sid).probs == m.predict(sid).probs

    def test_second_generation_byte_identical(self, tmp_path):
        b = self.build()
        p1 = save_bundle(b, tmp_path / "one")
        p2 = save_bundle(load_bundle(p1), tmp_path / "two")
        for name in ("manifest.json", "dataset.csv", "m1.csv", "m2.csv"):
            assert (p1 / name).read_bytes() == (p2 / name).read_bytes()
