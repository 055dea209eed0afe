"""Entropy calculus for ensembles of partial-domain classifiers.

The package measures the fuzziness and disagreement of a finite ensemble
over a measured sample space, extracts the trusted core below an entropy
threshold, verifies the exact conservation laws relating entropy to truth
cross entropy, and routes samples through multi-generation systems that
grow when an environment shift is detected.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .bundle import Bundle, inspect_bundle, load_bundle, save_bundle
from .core import (CoreResult, NonFuzzyResult, SweepCurve, SweepPoint,
                   aggregator_accuracy, compute_core, default_grid,
                   non_fuzzy_limit, select_threshold, theoretical_bound,
                   threshold_sweep)
from .ensemble import (Ensemble, PointwiseReport, StrictnessResult,
                       average_function, conservation_residual_ensemble,
                       knowledge_domain, pairwise_cross_entropy,
                       pointwise_cross_entropy_ensembles, pointwise_entropy,
                       pointwise_entropy_values, strictness_check,
                       total_cross_entropy_ensembles, total_entropy,
                       truth_pointwise_cross_entropy, truth_total_cross_entropy)
from .errors import (BoundWarning, DomainError, LogifoldError, NoDataError,
                     PropertyViolation, ValidationError)
from .model import (Model, conservation_residual_single, model_total_entropy,
                    model_truth_cross_entropy)
from .simplex import (ArgmaxResult, Dist, LabelSet, argmax_label,
                      cross_entropy, embed, entropy_gradient,
                      linear_cross_entropy, one_hot, restrict,
                      shannon_entropy, uniform)
from .space import (EMPTY_SUBSET, SampleSpace, SampleSubset, complement,
                    measure)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND", "__version__",
    "Bundle", "inspect_bundle", "load_bundle", "save_bundle",
    "CoreResult", "NonFuzzyResult", "SweepCurve", "SweepPoint",
    "aggregator_accuracy", "compute_core", "default_grid", "non_fuzzy_limit",
    "select_threshold", "theoretical_bound", "threshold_sweep",
    "Ensemble", "PointwiseReport", "StrictnessResult", "average_function",
    "conservation_residual_ensemble", "knowledge_domain",
    "pairwise_cross_entropy", "pointwise_cross_entropy_ensembles",
    "pointwise_entropy", "pointwise_entropy_values", "strictness_check",
    "total_cross_entropy_ensembles", "total_entropy",
    "truth_pointwise_cross_entropy", "truth_total_cross_entropy",
    "BoundWarning", "DomainError", "LogifoldError", "NoDataError",
    "PropertyViolation", "ValidationError",
    "Model", "conservation_residual_single", "model_total_entropy",
    "model_truth_cross_entropy",
    "ArgmaxResult", "Dist", "LabelSet", "argmax_label", "cross_entropy",
    "embed", "entropy_gradient", "linear_cross_entropy", "one_hot",
    "restrict", "shannon_entropy", "uniform",
    "EMPTY_SUBSET", "SampleSpace", "SampleSubset", "complement", "measure",
]
