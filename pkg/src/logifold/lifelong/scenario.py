"""End-to-end synthetic immunization run.

Pipeline: train a first family on the clean environment, transfer-train
specialists on a weakly perturbed one, detect a stronger perturbation via
core-coverage drop, spawn a fresh generation on the out-of-core samples,
then score every ensemble, the naive all-model average, and the routed
two-generation system across all environments.  Everything is driven by
one seed; reruns are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, replace
from typing import Optional, Sequence

from ..core import (aggregator_accuracy, default_grid, select_threshold,
                    threshold_sweep)
from ..ensemble import Ensemble, pointwise_entropy_values, total_entropy
from ..errors import DomainError, ValidationError
from ..simplex import LabelSet
from ..space import SampleSpace, SampleSubset
from .learner import (Environment, LabeledBatch, Perturbation, ToyLearner,
                      concat_batches, learner_as_model, train_learner)
from .system import (Generation, LogifoldSystem, SpawnSpec, evaluate_P,
                     memory_I, detect_environment_change, spawn_generation)


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 2208
    labels: tuple[str, ...] = ("a", "b", "c")
    feature_dim: int = 2
    radius: float = 2.0
    std: float = 0.4
    n_train: int = 240
    n_val: int = 240
    n_test: int = 240
    learners_per_family: int = 3
    epochs_initial: int = 300
    epochs_specialist: int = 300
    epochs_spawn: int = 300
    learning_rate: float = 2.0
    # large random init leaves each learner's decision rays angled a little
    # differently far from the training data, which is what lets a strong
    # shift expose confident disagreement between members
    init_scale: float = 4.2
    perturb_kind: str = "shift"
    # slight off-axis tilt: the re-trained family's boundaries end up offset
    # sideways from the originals, so the two families confidently split on
    # a band of strongly shifted samples
    perturb_direction: tuple[float, ...] = (0.22, -1.0)
    weak_magnitude: float = 1.5
    strong_magnitude: float = 7.5
    accuracy_target: float = 0.95
    compare_coverage: float = 0.9
    trigger_delta: float = 0.2
    union_with_clean: bool = True
    grid: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if len(self.labels) < 2:
            raise ValidationError("need at least two labels")
        if self.n_train <= 0 or self.n_val <= 0 or self.n_test <= 0:
            raise ValidationError("batch sizes must be positive")
        if self.learners_per_family <= 0:
            raise ValidationError("learners_per_family must be positive")
        if not 0 < self.accuracy_target:
            raise ValidationError("accuracy target must be positive")
        if not 0 < self.compare_coverage <= 1:
            raise ValidationError("compare_coverage must be in (0, 1]")
        if self.weak_magnitude >= self.strong_magnitude:
            raise ValidationError(
                "the strong perturbation must exceed the weak one")

    def label_universe(self) -> LabelSet:
        return LabelSet(self.labels)

    def grid_values(self) -> tuple[float, ...]:
        return self.grid if self.grid is not None else default_grid()

    def as_dict(self) -> dict:
        d = asdict(self)
        d["labels"] = list(self.labels)
        d["perturb_direction"] = list(self.perturb_direction)
        d["grid"] = None if self.grid is None else list(self.grid)
        return d

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(raw) - known
        if extra:
            raise ValidationError(f"unknown config keys: {sorted(extra)!r}")
        data = dict(raw)
        for key in ("labels", "perturb_direction", "grid"):
            if key in data and data[key] is not None:
                data[key] = tuple(data[key])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ValidationError(str(exc)) from None

    def config_hash(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class ScenarioResult:
    config: ScenarioConfig
    tau_initial: Optional[float]
    tau_immune: Optional[float]
    tau_spawned: Optional[float]
    tau_compare: float
    detection: dict
    spawn_info: dict
    tables: dict
    sweeps: dict
    log: tuple[dict, ...]

    def as_json_dict(self) -> dict:
        return {
            "config": self.config.as_dict(),
            "config_hash": self.config.config_hash(),
            "tau_initial": self.tau_initial,
            "tau_immune": self.tau_immune,
            "tau_spawned": self.tau_spawned,
            "tau_compare": self.tau_compare,
            "detection": self.detection,
            "spawn_info": self.spawn_info,
            "tables": self.tables,
            "sweeps": self.sweeps,
            "log": list(self.log),
        }


def _materialize(learners: Sequence[ToyLearner], batch: LabeledBatch,
                 space: SampleSpace, prefix: str) -> Ensemble:
    full = SampleSubset(frozenset(space.sample_ids))
    models = [learner_as_model(l, space, full, batch, f"{prefix}{i}")
              for i, l in enumerate(learners)]
    return Ensemble(models, name=prefix)


def _coverage_at(e: Ensemble, tau: float) -> float:
    values = pointwise_entropy_values(e)
    space = e.space
    inside = math.fsum(space.weight(sid) for sid in space.sample_ids
                       if values[sid] < tau)
    return inside / space.total_mass


def _curve_rows(curve) -> list[list]:
    return [[p.tau, p.core_coverage, p.core_accuracy, p.outcore_accuracy,
             p.core_count] for p in curve.points]


def run_immunization_scenario(config: ScenarioConfig) -> ScenarioResult:
    y = config.label_universe()
    grid = config.grid_values()
    log: list[dict] = []

    def perturb(magnitude: float) -> Perturbation:
        return Perturbation(config.perturb_kind, magnitude,
                            config.perturb_direction)

    env0 = Environment("e0", y, config.seed + 11, config.radius, config.std,
                       config.feature_dim)
    env1 = replace(env0, env_id="e1", seed=config.seed + 22,
                   perturbation=perturb(config.weak_magnitude))
    env2 = replace(env0, env_id="e2", seed=config.seed + 33,
                   perturbation=perturb(config.strong_magnitude))

    batches = {
        (e.env_id, tag): e.sample(n, tag)
        for e in (env0, env1, env2)
        for tag, n in (("train", config.n_train), ("val", config.n_val),
                       ("test", config.n_test))
    }

    # first family: fresh learners on the clean environment
    initial = []
    for j in range(config.learners_per_family):
        l = ToyLearner.new(config.feature_dim, y, config.seed + 100 + j,
                           config.learning_rate, config.init_scale)
        initial.append(train_learner(l, batches[("e0", "train")],
                                     config.epochs_initial))
    log.append({"phase": "train-initial", "learners": len(initial),
                "epochs": config.epochs_initial})

    val0_space = batches[("e0", "val")].to_space()
    u0_val = _materialize(initial, batches[("e0", "val")], val0_space, "u0_")
    curve0 = threshold_sweep(u0_val, val0_space, grid)
    tau0 = select_threshold(curve0, config.accuracy_target)
    if tau0 is None:
        raise DomainError(
            "fixture failure: no usable threshold for the initial family")
    baseline0 = _coverage_at(u0_val, tau0)
    tau_compare = None
    for p in curve0.points:
        if p.core_coverage >= config.compare_coverage:
            tau_compare = p.tau
            break
    if tau_compare is None:
        raise DomainError(
            "fixture failure: initial family never reaches the comparison "
            "coverage on clean validation data")
    log.append({"phase": "select-threshold", "generation": 0, "tau": tau0,
                "baseline_coverage": baseline0, "tau_compare": tau_compare})

    # transfer-trained specialists on the weak perturbation
    specialists = [train_learner(l, batches[("e1", "train")],
                                 config.epochs_specialist) for l in initial]
    immune = initial + specialists
    log.append({"phase": "specialize", "learners": len(specialists),
                "epochs": config.epochs_specialist})

    val1_space = batches[("e1", "val")].to_space()
    u1_val = _materialize(immune, batches[("e1", "val")], val1_space, "u1_")
    curve1 = threshold_sweep(u1_val, val1_space, grid)
    tau1 = select_threshold(curve1, config.accuracy_target)
    if tau1 is None:
        raise DomainError(
            "fixture failure: no usable threshold for the immune family")
    baseline1 = _coverage_at(u1_val, tau1)
    log.append({"phase": "select-threshold", "generation": 1, "tau": tau1,
                "baseline_coverage": baseline1})

    # detection: replay of the training environment must stay quiet, the
    # strong perturbation must trip the coverage trigger
    test1_space = batches[("e1", "test")].to_space()
    gen_same = Generation(1, _materialize(immune, batches[("e1", "test")],
                                          test1_space, "u1_"),
                          tau1, baseline_coverage=baseline1)
    same_report = detect_environment_change(gen_same,
                                            trigger_delta=config.trigger_delta)
    train2_space = batches[("e2", "train")].to_space()
    u1_train2 = _materialize(immune, batches[("e2", "train")], train2_space,
                             "u1_")
    gen_drift = Generation(1, u1_train2, tau1, baseline_coverage=baseline1)
    drift_report = detect_environment_change(gen_drift,
                                             trigger_delta=config.trigger_delta)
    detection = {
        "same_environment": {"coverage": same_report.coverage,
                             "baseline": same_report.baseline_coverage,
                             "triggered": same_report.triggered},
        "strong_perturbation": {"coverage": drift_report.coverage,
                                "baseline": drift_report.baseline_coverage,
                                "triggered": drift_report.triggered},
        "trigger_delta": config.trigger_delta,
    }
    log.append({"phase": "detect", **detection})

    # spawn a new generation on the out-of-core region of the strong batch
    values2 = pointwise_entropy_values(u1_train2)
    out_ids = SampleSubset(frozenset(
        sid for sid in train2_space.sample_ids if not values2[sid] < tau1))
    out_batch = batches[("e2", "train")].subset(out_ids)
    extra = batches[("e0", "train")] if config.union_with_clean else None
    sys_train = LogifoldSystem(
        (Generation(1, u1_train2, tau1, baseline_coverage=baseline1),),
        config.trigger_delta, config.accuracy_target)
    spec = SpawnSpec(config.learners_per_family, config.seed + 300,
                     config.epochs_spawn, config.learning_rate,
                     config.init_scale, extra_training=extra)
    spawned_sys = spawn_generation(sys_train, out_batch, spec)
    spawn_members = spawned_sys.generations[-1].ensemble.members
    # recover the spawned learners for evaluation on other batches
    spawn_train = out_batch if extra is None else concat_batches(out_batch, extra)
    spawned_learners = []
    for j in range(spec.count):
        l = ToyLearner.new(out_batch.feature_dim, y, spec.seed + j,
                           spec.learning_rate, spec.init_scale)
        spawned_learners.append(train_learner(l, spawn_train, spec.epochs))
    spawn_info = {
        "out_of_core_count": len(out_batch),
        "extra_clean_count": 0 if extra is None else len(extra),
        "union_with_clean": config.union_with_clean,
        "models": [m.model_id for m in spawn_members],
    }

    # threshold for the spawned generation, swept on its own region
    curve2 = threshold_sweep(
        spawned_sys.generations[-1].ensemble, train2_space, grid)
    tau2 = select_threshold(curve2, config.accuracy_target)
    baseline2 = (None if tau2 is None else
                 _coverage_at(spawned_sys.generations[-1].ensemble, tau2))
    log.append({"phase": "spawn", "tau": tau2, "baseline_coverage": baseline2,
                **{k: v for k, v in spawn_info.items() if k != "models"}})

    # before/after comparison and the per-environment tables
    eval_batches = {
        "e0": batches[("e0", "test")],
        "e1": batches[("e1", "test")],
        "e2": batches[("e2", "test")],
        "union": concat_batches(batches[("e0", "test")],
                                batches[("e1", "test")],
                                batches[("e2", "test")]),
    }
    tables: dict = {}
    sweeps: dict = {}
    for env_name, batch in eval_batches.items():
        space = batch.to_space()
        u0 = _materialize(initial, batch, space, "u0_")
        u1 = _materialize(immune, batch, space, "u1_")
        g2 = _materialize(spawned_learners, batch, space, "g2_")
        naive = Ensemble(u1.members + g2.members, name="naive")
        imm = LogifoldSystem(
            (Generation(1, u1, tau1, baseline_coverage=baseline1),
             Generation(2, g2, tau2, baseline_coverage=baseline2)),
            config.trigger_delta, config.accuracy_target)
        before = LogifoldSystem(
            (Generation(1, u1, tau1, baseline_coverage=baseline1),),
            config.trigger_delta, config.accuracy_target)
        full = SampleSubset(frozenset(space.sample_ids))
        tables[env_name] = {
            "coverage_at_tau_compare": {
                "u0": _coverage_at(u0, tau_compare),
                "u1": _coverage_at(u1, tau_compare),
            },
            "coverage_at_tau_immune": {"u1": _coverage_at(u1, tau1)},
            "accuracy": {
                "u0": aggregator_accuracy(u0, space, full),
                "u1": aggregator_accuracy(u1, space, full),
                "naive": aggregator_accuracy(naive, space, full),
                "imm": evaluate_P(imm, space),
            },
            "entropy": {
                "u0": total_entropy(u0, include_complement=False),
                "u1": total_entropy(u1, include_complement=False),
                "naive": total_entropy(naive, include_complement=False),
                "imm": memory_I(imm),
            },
            "before_after": {
                "P_before": evaluate_P(before, space),
                "P_after": evaluate_P(imm, space),
                "I_before": memory_I(before),
                "I_after": memory_I(imm),
            },
        }
        sweeps[env_name] = {
            "u0": _curve_rows(threshold_sweep(u0, space, grid)),
            "u1": _curve_rows(threshold_sweep(u1, space, grid)),
        }
        log.append({"phase": "evaluate", "env": env_name,
                    **tables[env_name]["accuracy"]})

    return ScenarioResult(config, tau0, tau1, tau2, tau_compare, detection,
                          spawn_info, tables, sweeps, tuple(log))
