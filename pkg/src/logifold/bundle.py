"""On-disk bundles: a JSON manifest, one CSV prediction table per model,
and an optional dataset file.

Prediction tables have header `sample_id,p_<label>,...` with the labels in
the model target's canonical order; a missing row means the sample is out
of that model's domain.  Probabilities are written with 17 significant
digits so that load -> save -> load is an identity on the float values.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from .ensemble import Ensemble
from .errors import DomainError, ValidationError
from .model import Model
from .simplex import Dist, LabelSet
from .space import SampleSpace, SampleSubset

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class Bundle:
    space: SampleSpace
    models: tuple[Model, ...]
    name: str = ""

    @property
    def has_truth(self) -> bool:
        return self.space.truth is not None

    def ensemble(self, name: str = "") -> Ensemble:
        return Ensemble(self.models, name=name or self.name)

    def model_by_id(self, model_id: str) -> Model:
        for m in self.models:
            if m.model_id == model_id:
                return m
        raise DomainError(f"no model {model_id!r} in bundle")


def _label_text_map(labels: Sequence) -> dict[str, object]:
    out: dict[str, object] = {}
    for lab in labels:
        key = str(lab)
        if key in out:
            raise ValidationError(
                f"labels {out[key]!r} and {lab!r} collide as text {key!r}")
        out[key] = lab
    return out


def _read_manifest(path: Path, problems: list[str]) -> Optional[dict]:
    # an unreadable file is a finding, not a crash: this loader's callers
    # promise accumulated problem lists
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        problems.append(f"{path}: cannot read manifest ({exc})")
        return None
    except json.JSONDecodeError as exc:
        problems.append(f"{path}: manifest is not valid JSON ({exc})")
        return None
    if not isinstance(raw, dict):
        problems.append(f"{path}: manifest must be a JSON object")
        return None
    return raw


def _load_dataset(path: Path, universe_text: dict[str, object],
                  problems: list[str]):
    samples: list[tuple[str, float]] = []
    truth: dict = {}
    has_labels = False
    seen: set[str] = set()
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        problems.append(f"{path}: cannot read dataset ({exc})")
        return [], None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            problems.append(f"{path}:1: empty dataset file")
            return [], None
        header = [h.strip() for h in header]
        if header[:2] != ["sample_id", "weight"] or len(header) > 3 or (
                len(header) == 3 and header[2] != "label"):
            problems.append(
                f"{path}:1: header must be sample_id,weight[,label], "
                f"got {','.join(header)!r}")
            return [], None
        has_labels = len(header) == 3
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                problems.append(f"{path}:{lineno}: expected {len(header)} "
                                f"fields, got {len(row)}")
                continue
            sid = row[0]
            if sid in seen:
                problems.append(f"{path}:{lineno}: duplicate sample id {sid!r}")
                continue
            seen.add(sid)
            try:
                w = float(row[1])
            except ValueError:
                problems.append(f"{path}:{lineno}: weight {row[1]!r} is not "
                                "a number")
                continue
            if not (w > 0 and math.isfinite(w)):
                problems.append(f"{path}:{lineno}: weight must be positive "
                                f"and finite, got {w!r}")
                continue
            samples.append((sid, w))
            if has_labels:
                text = row[2]
                if text not in universe_text:
                    problems.append(f"{path}:{lineno}: label {text!r} not in "
                                    "the label universe")
                    continue
                truth[sid] = universe_text[text]
    return samples, (truth if has_labels else None)


def _load_predictions(path: Path, target: LabelSet, known_ids: Optional[set],
                      problems: list[str]) -> dict[str, Dist]:
    expected = ["sample_id"] + [f"p_{lab}" for lab in target.labels]
    predictions: dict[str, Dist] = {}
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        problems.append(f"{path}: cannot read predictions ({exc})")
        return predictions
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            problems.append(f"{path}:1: empty prediction file")
            return predictions
        header = [h.strip() for h in header]
        if header != expected:
            problems.append(
                f"{path}:1: header must be {','.join(expected)!r}, got "
                f"{','.join(header)!r}")
            return predictions
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected):
                problems.append(f"{path}:{lineno}: expected {len(expected)} "
                                f"fields, got {len(row)}")
                continue
            sid = row[0]
            if sid in predictions:
                problems.append(f"{path}:{lineno}: duplicate row for {sid!r}")
                continue
            if known_ids is not None and sid not in known_ids:
                problems.append(f"{path}:{lineno}: sample {sid!r} is not in "
                                "the dataset")
                continue
            try:
                probs = tuple(float(v) for v in row[1:])
            except ValueError:
                problems.append(f"{path}:{lineno}: non-numeric probability")
                continue
            try:
                predictions[sid] = Dist(target, probs)
            except (DomainError, ValidationError) as exc:
                problems.append(f"{path}:{lineno}: {exc}")
    return predictions


def inspect_bundle(bundle_dir: Union[str, Path]):
    """Load with accumulation: returns (bundle or None, problems, diagnostics).

    `problems` block construction; `diagnostics` (truth outside a model's
    target) are legal but reported, since they force infinite truth cross
    entropies.
    """
    bundle_dir = Path(bundle_dir)
    problems: list[str] = []
    diagnostics: list[str] = []
    manifest_path = bundle_dir / MANIFEST_NAME
    raw = _read_manifest(manifest_path, problems)
    if raw is None:
        return None, problems, diagnostics

    labels_raw = raw.get("label_universe")
    if not isinstance(labels_raw, list) or len(labels_raw) < 2:
        problems.append(f"{manifest_path}: label_universe must list at "
                        "least two labels")
        return None, problems, diagnostics
    try:
        universe = LabelSet(tuple(labels_raw))
        universe_text = _label_text_map(universe.labels)
    except (DomainError, ValidationError) as exc:
        problems.append(f"{manifest_path}: {exc}")
        return None, problems, diagnostics

    models_raw = raw.get("models")
    if not isinstance(models_raw, list) or not models_raw:
        problems.append(f"{manifest_path}: manifest must declare a nonempty "
                        "model list")
        return None, problems, diagnostics

    samples: Optional[list[tuple[str, float]]] = None
    truth = None
    if raw.get("dataset") is not None:
        samples, truth = _load_dataset(bundle_dir / raw["dataset"],
                                       universe_text, problems)
        if problems:
            return None, problems, diagnostics

    model_specs = []
    seen_ids: set[str] = set()
    for i, spec in enumerate(models_raw):
        where = f"{manifest_path}: models[{i}]"
        if not isinstance(spec, dict):
            problems.append(f"{where}: must be an object")
            continue
        mid = spec.get("id")
        if not isinstance(mid, str) or not mid:
            problems.append(f"{where}: missing model id")
            continue
        if mid in seen_ids:
            problems.append(f"{where}: duplicate model id {mid!r}")
            continue
        seen_ids.add(mid)
        target_raw = spec.get("target")
        if not isinstance(target_raw, list) or not target_raw:
            problems.append(f"{where}: missing target label list")
            continue
        try:
            target = LabelSet(tuple(target_raw))
        except (DomainError, ValidationError) as exc:
            problems.append(f"{where}: {exc}")
            continue
        if not target.issubset(universe):
            problems.append(f"{where}: target is not a subset of the label "
                            "universe")
            continue
        fname = spec.get("predictions")
        if not isinstance(fname, str):
            problems.append(f"{where}: missing predictions file name")
            continue
        model_specs.append((mid, target, bundle_dir / fname))
    if problems:
        return None, problems, diagnostics

    known_ids = {sid for sid, _ in samples} if samples is not None else None
    tables = [(mid, target, _load_predictions(path, target, known_ids, problems))
              for mid, target, path in model_specs]
    if problems:
        return None, problems, diagnostics

    if samples is None:
        ids = sorted({sid for _, _, preds in tables for sid in preds})
        if not ids:
            problems.append(f"{manifest_path}: no dataset and no prediction "
                            "rows; the sample space is empty")
            return None, problems, diagnostics
        w = 1.0 / len(ids)
        samples = [(sid, w) for sid in ids]

    try:
        space = SampleSpace(tuple(samples), universe, truth)
    except (DomainError, ValidationError) as exc:
        problems.append(f"{manifest_path}: {exc}")
        return None, problems, diagnostics

    models = []
    for mid, target, preds in tables:
        domain = SampleSubset(frozenset(preds))
        try:
            m = Model(mid, space, domain, target, preds)
        except (DomainError, ValidationError) as exc:
            problems.append(f"{bundle_dir}: model {mid!r}: {exc}")
            continue
        models.append(m)
    if problems:
        return None, problems, diagnostics

    if truth is not None:
        for m in models:
            for sid in space.ordered(m.domain):
                lab = truth.get(sid)
                if lab is not None and lab not in m.target:
                    diagnostics.append(
                        f"model {m.model_id!r}: in-domain sample {sid!r} has "
                        f"true label {lab!r} outside the model target; its "
                        "truth cross entropy is infinite")

    bundle = Bundle(space, tuple(models), name=str(raw.get("name", "")))
    return bundle, problems, diagnostics


def load_bundle(bundle_dir: Union[str, Path],
                epsilon_floor: float = 0.0) -> Bundle:
    """Load a bundle, raising on the first batch of problems.

    A positive epsilon floor replaces ingested hard zeros before any
    entropy computation: each probability is raised to at least epsilon and
    the row renormalized.
    """
    bundle, problems, _ = inspect_bundle(bundle_dir)
    if problems:
        raise ValidationError("; ".join(problems))
    assert bundle is not None
    if epsilon_floor > 0.0:
        bundle = Bundle(bundle.space,
                        tuple(m.floored(epsilon_floor) for m in bundle.models),
                        bundle.name)
    return bundle


def save_bundle(bundle: Bundle, out_dir: Union[str, Path]) -> Path:
    """Write a bundle directory that loads back to identical values."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "label_universe": list(bundle.space.label_universe.labels),
        "dataset": "dataset.csv",
        "models": [{"id": m.model_id,
                    "target": list(m.target.labels),
                    "predictions": f"{m.model_id}.csv"}
                   for m in bundle.models],
    }
    if bundle.name:
        manifest["name"] = bundle.name
    (out / MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    with open(out / "dataset.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if bundle.has_truth:
            writer.writerow(["sample_id", "weight", "label"])
            for sid in bundle.space.sample_ids:
                writer.writerow([sid, f"{bundle.space.weight(sid):.17g}",
                                 str(bundle.space.truth_label(sid))])
        else:
            writer.writerow(["sample_id", "weight"])
            for sid in bundle.space.sample_ids:
                writer.writerow([sid, f"{bundle.space.weight(sid):.17g}"])
    for m in bundle.models:
        with open(out / f"{m.model_id}.csv", "w", newline="",
                  encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sample_id"] + [f"p_{lab}" for lab in
                                             m.target.labels])
            for sid in m.space.ordered(m.domain):
                d = m.predict(sid)
                writer.writerow([sid] + [f"{p:.17g}" for p in d.probs])
    return out
