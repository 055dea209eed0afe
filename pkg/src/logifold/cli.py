"""Batch command-line surface.

Subcommands: validate, entropy, sweep, route, simulate, verify-laws.
Exit codes: 0 success, 1 validation failure (including bad usage),
2 property violation, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Optional

from .bundle import Bundle, inspect_bundle, load_bundle
from .core import (default_grid, select_threshold, threshold_sweep)
from .ensemble import (Ensemble, average_function, pairwise_cross_entropy,
                       pointwise_entropy, total_entropy,
                       truth_pointwise_cross_entropy,
                       truth_total_cross_entropy)
from .errors import LogifoldError, NoDataError, PropertyViolation, ValidationError
from .laws import run_all_suites
from .lifelong.scenario import ScenarioConfig, run_immunization_scenario
from .lifelong.system import (Generation, LogifoldSystem, route_partition,
                              route_report)
from .reports import emit_report, make_report
from .space import SampleSubset


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; 2 is reserved for
    # property violations here, so remap to the validation-failure code
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self.prog + ": error: " + message)


def _json_float(x: Optional[float]):
    return x


def _parse_grid(text: Optional[str]) -> Optional[tuple[float, ...]]:
    if text is None:
        return None
    try:
        values = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ValidationError(f"--grid must be comma-separated numbers, "
                              f"got {text!r}") from None
    if not values:
        raise ValidationError("--grid is empty")
    return values


def _print_or_write(report: dict, out: Optional[str]) -> None:
    text = emit_report(report, out)
    if out is None:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    bundle, problems, diagnostics = inspect_bundle(args.bundle)
    results = {
        "violations": list(problems) + list(diagnostics),
        "loadable": bundle is not None,
        "models": [] if bundle is None else [m.model_id for m in bundle.models],
        "samples": 0 if bundle is None else len(bundle.space.sample_ids),
        "labeled": bundle is not None and bundle.has_truth,
    }
    report = make_report("validate", {"bundle": str(args.bundle)}, results)
    _print_or_write(report, args.out)
    return 0 if not results["violations"] else 1


def cmd_entropy(args) -> int:
    bundle = load_bundle(args.bundle, epsilon_floor=args.epsilon_floor)
    if args.truth and not bundle.has_truth:
        raise ValidationError("no-labels: the bundle has no truth labels "
                              "but truth cross entropy was requested")
    e = bundle.ensemble()
    space = bundle.space
    rows = []
    infinite = []
    for sid in space.sample_ids:
        rep = pointwise_entropy(e, sid)
        if math.isinf(rep.h_x):
            infinite.append(sid)
        rows.append({"sample_id": sid, "h": rep.h_x, "k": rep.k_x,
                     "in_knowledge_domain": rep.in_knowledge_domain})
    pair_rows = []
    for ml in bundle.models:
        for mr in bundle.models:
            pair_rows.append({"left": ml.model_id, "right": mr.model_id,
                              "value": pairwise_cross_entropy(ml, mr)})
    results = {
        "total_entropy_with_complement": total_entropy(e, True),
        "total_entropy_without_complement": total_entropy(e, False),
        "pointwise": rows,
        "pairwise": pair_rows,
        "infinite_samples": infinite,
    }
    if bundle.has_truth:
        truth_rows = [{"sample_id": sid,
                       "h": truth_pointwise_cross_entropy(e, sid)}
                      for sid in space.sample_ids]
        results["truth_cross_entropy"] = {
            "total_with_complement": truth_total_cross_entropy(e, True),
            "total_without_complement": truth_total_cross_entropy(e, False),
            "pointwise": truth_rows,
        }
    config = {"bundle": str(args.bundle),
              "include_complement": args.include_complement,
              "epsilon_floor": args.epsilon_floor, "truth": args.truth}
    results["total_entropy"] = (results["total_entropy_with_complement"]
                                if args.include_complement else
                                results["total_entropy_without_complement"])
    report = make_report("entropy", config, results)
    _print_or_write(report, args.out)
    return 0


def cmd_sweep(args) -> int:
    bundle = load_bundle(args.bundle, epsilon_floor=args.epsilon_floor)
    if not bundle.has_truth:
        raise ValidationError("sweep needs a labeled dataset in the bundle")
    grid = _parse_grid(args.grid) or default_grid()
    e = bundle.ensemble()
    curve = threshold_sweep(e, bundle.space, grid)
    tau = select_threshold(curve, args.target_accuracy)
    results = {
        "curve": [{"tau": p.tau, "core_coverage": p.core_coverage,
                   "core_accuracy": _json_float(p.core_accuracy),
                   "outcore_accuracy": _json_float(p.outcore_accuracy),
                   "core_count": p.core_count} for p in curve.points],
        "selected_tau": tau,
        "annihilated": tau is None,
    }
    config = {"bundle": str(args.bundle), "grid": list(grid),
              "target_accuracy": args.target_accuracy,
              "epsilon_floor": args.epsilon_floor}
    report = make_report("sweep", config, results)
    _print_or_write(report, args.out)
    return 0


def _build_system(bundle: Bundle, system_path: Optional[str],
                  tau: Optional[float]) -> LogifoldSystem:
    if system_path is None:
        if tau is None:
            raise ValidationError(
                "route needs either --system or --tau (single generation)")
        gen = Generation(1, bundle.ensemble(), tau)
        return LogifoldSystem((gen,))
    try:
        raw = json.loads(Path(system_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{system_path}: invalid JSON ({exc})") from None
    gens_raw = raw.get("generations")
    if not isinstance(gens_raw, list) or not gens_raw:
        raise ValidationError(f"{system_path}: needs a nonempty generations "
                              "list")
    generations = []
    for i, g in enumerate(gens_raw):
        if not isinstance(g, dict) or "models" not in g:
            raise ValidationError(f"{system_path}: generations[{i}] needs a "
                                  "models list")
        members = tuple(bundle.model_by_id(mid) for mid in g["models"])
        ens = Ensemble(members, name=f"gen{i + 1}")
        generations.append(Generation(
            i + 1, ens, g.get("tau"),
            baseline_coverage=g.get("baseline_coverage")))
    return LogifoldSystem(tuple(generations),
                          trigger_delta=raw.get("trigger_delta", 0.2),
                          accuracy_target=raw.get("accuracy_target", 0.9))


def cmd_route(args) -> int:
    bundle = load_bundle(args.bundle, epsilon_floor=args.epsilon_floor)
    sys_ = _build_system(bundle, args.system, args.tau)
    space = bundle.space
    if args.batch is not None:
        wanted = [line.strip() for line in
                  Path(args.batch).read_text(encoding="utf-8").splitlines()
                  if line.strip()]
        if not wanted:
            raise NoDataError("no-data: the batch file lists no samples")
        unknown = [sid for sid in wanted if sid not in space]
        if unknown:
            raise ValidationError(f"batch samples not in bundle: "
                                  f"{unknown[:5]!r}")
        batch_ids = [sid for sid in space.sample_ids if sid in set(wanted)]
    else:
        batch_ids = list(space.sample_ids)
    partition = route_partition(sys_)
    handler = {}
    for gi, region in partition.items():
        for sid in region.members:
            handler[sid] = gi
    by_index = {g.gen_index: g for g in sys_.active_generations()}
    routes = []
    for sid in batch_ids:
        gi = handler[sid]
        dist = average_function(by_index[gi].ensemble, sid)
        routes.append({"sample_id": sid, "generation": gi,
                       "probs": {str(lab): p for lab, p in
                                 zip(dist.support.labels, dist.probs)}})
    results: dict = {"routes": routes}
    if bundle.has_truth and args.batch is None:
        rep = route_report(sys_, space)
        results["accuracy"] = rep.accuracy
        results["shares"] = [
            {"generation": s.gen_index, "mass": s.mass,
             "samples": s.sample_count, "correct": s.correct_count,
             "accuracy": _json_float(s.accuracy)} for s in rep.shares]
    config = {"bundle": str(args.bundle), "system": args.system,
              "tau": args.tau, "batch": args.batch,
              "epsilon_floor": args.epsilon_floor}
    report = make_report("route", config, results)
    _print_or_write(report, args.out)
    return 0


def _scenario_config(args) -> ScenarioConfig:
    if args.config is not None:
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(
                f"{args.config}: invalid JSON ({exc})") from None
        config = ScenarioConfig.from_dict(raw)
    else:
        config = ScenarioConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.union_with_clean:
        overrides["union_with_clean"] = True
    if args.trigger_delta is not None:
        overrides["trigger_delta"] = args.trigger_delta
    if overrides:
        config = ScenarioConfig.from_dict({**config.as_dict(), **overrides})
    return config


def cmd_simulate(args) -> int:
    config = _scenario_config(args)
    result = run_immunization_scenario(config)
    payload = result.as_json_dict()
    report = make_report("simulate", config.as_dict(),
                         payload, seed=config.seed)
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.json").write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n",
            encoding="utf-8")
        with open(out / "log.jsonl", "w", encoding="utf-8") as fh:
            for entry in result.log:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
        for env_name, fams in sorted(result.sweeps.items()):
            for fam, rows in sorted(fams.items()):
                with open(out / f"sweep_{env_name}_{fam}.csv", "w",
                          newline="", encoding="utf-8") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(["tau", "core_coverage", "core_accuracy",
                                     "outcore_accuracy", "core_count"])
                    for row in rows:
                        writer.writerow(
                            ["" if v is None else f"{v:.17g}"
                             if isinstance(v, float) else v for v in row])
        sys.stdout.write(f"artifacts written to {out}\n")
    else:
        sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    return 0


def cmd_verify_laws(args) -> int:
    if args.trials <= 0:
        raise ValidationError("--trials must be positive")
    suites = run_all_suites(args.seed, args.trials)
    results = {
        "suites": [{"name": s.name, "trials": s.trials,
                    "passed": s.passed,
                    "worst": _json_float(s.worst),
                    "failures": list(s.failures)} for s in suites],
        "all_passed": all(s.passed for s in suites),
    }
    report = make_report("verify-laws",
                         {"seed": args.seed, "trials": args.trials},
                         results, seed=args.seed)
    _print_or_write(report, args.out)
    return 0 if results["all_passed"] else 2


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="logifold",
                     description="entropy calculus for partial-domain "
                                 "classifier ensembles")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_bundle(p):
        p.add_argument("--bundle", required=True,
                       help="bundle directory with manifest.json")
        p.add_argument("--epsilon-floor", type=float, default=0.0,
                       help="replace hard zeros: floor probabilities at this "
                            "value and renormalize")

    p = sub.add_parser("validate", help="check a bundle and list violations")
    p.add_argument("--bundle", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("entropy", help="total and pointwise entropies")
    add_bundle(p)
    p.add_argument("--include-complement",
                   action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--truth", action="store_true",
                   help="require truth cross entropy (error if unlabeled)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("sweep", help="threshold sweep and selection")
    add_bundle(p)
    p.add_argument("--grid", help="comma-separated thresholds "
                                  "(default 0,0.01,...,1.4)")
    p.add_argument("--target-accuracy", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("route", help="route samples through generations")
    add_bundle(p)
    p.add_argument("--system",
                   help="JSON file describing the generations to route "
                        "through")
    p.add_argument("--tau", type=float,
                   help="single-generation threshold shortcut")
    p.add_argument("--batch", help="file with one sample id per line")
    p.add_argument("--out")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("simulate", help="run the immunization scenario")
    p.add_argument("config", nargs="?", default=None,
                   help="scenario config JSON (default: built-in fixture)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--union-with-clean", action="store_true")
    p.add_argument("--trigger-delta", type=float, default=None)
    p.add_argument("--out", help="artifacts directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify-laws", help="run the randomized law suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify_laws)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        # argparse --help exits 0; usage errors re-raised by _Parser.error
        # arrive as a message string
        if isinstance(exc.code, str):
            sys.stderr.write(exc.code + "\n")
            return 1
        return 0 if exc.code in (0, None) else 1
    except PropertyViolation as exc:
        sys.stderr.write(f"property violation: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return 3
    except LogifoldError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
