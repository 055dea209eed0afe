"""Deterministic machine-readable reports.

Reruns with identical inputs must produce byte-identical output, so keys
are sorted, floats rely on their shortest round-trip repr, and every
report carries the command name, a hash of the resolved configuration, and
the seed (null when a command takes none).
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Optional, Union


def config_digest(config: dict) -> str:
    return hashlib.sha256(
        json.dumps(config, sort_keys=True).encode("utf-8")).hexdigest()


def make_report(command: str, config: dict, results: dict,
                seed: Optional[int] = None) -> dict:
    return {
        "command": command,
        "config": config,
        "config_hash": config_digest(config),
        "seed": seed,
        "results": results,
    }


def render_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def emit_report(report: dict, out: Optional[Union[str, Path]]) -> str:
    """Write the report to `out` or return it for stdout."""
    text = render_report(report)
    if out is not None:
        Path(out).write_text(text, encoding="utf-8")
    return text
