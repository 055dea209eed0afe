"""Learning processes, toy learners, and multi-generation routing."""

from .learner import (Environment, LabeledBatch, Perturbation, ToyLearner,
                      concat_batches, learner_as_model, train_learner)
from .process import (LearnerSpec, LearningLog, LogRecord, ProcessSchedule,
                      run_learning_process, separable_fixture)
from .scenario import ScenarioConfig, ScenarioResult, run_immunization_scenario
from .system import (ChangeReport, Generation, LogifoldSystem, RouteReport,
                     RoutedPrediction, SpawnSpec, annihilate_if_unusable,
                     detect_environment_change, evaluate_P, imm_route,
                     memory_I, route_partition, route_report, spawn_generation)

__all__ = [
    "Environment", "LabeledBatch", "Perturbation", "ToyLearner",
    "concat_batches", "learner_as_model", "train_learner",
    "LearnerSpec", "LearningLog", "LogRecord", "ProcessSchedule",
    "run_learning_process", "separable_fixture",
    "ScenarioConfig", "ScenarioResult", "run_immunization_scenario",
    "ChangeReport", "Generation", "LogifoldSystem", "RouteReport",
    "RoutedPrediction", "SpawnSpec", "annihilate_if_unusable",
    "detect_environment_change", "evaluate_P", "imm_route", "memory_I",
    "route_partition", "route_report", "spawn_generation",
]
