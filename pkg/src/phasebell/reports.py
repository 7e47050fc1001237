"""Machine-readable experiment reports and their published schema.

Every CLI command emits one report: the config that produced it, named
results, pass/fail checks with values and tolerances, optional tables for
CSV export, and wall time.  Reports validate against the JSON schema
shipped with the package, and the process exit code is 0 exactly when all
checks pass.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

__all__ = ["Check", "ExperimentReport", "load_schema", "validate_report", "write_csv_tables"]

SCHEMA_VERSION = "1"


def load_schema() -> dict:
    with resources.files("phasebell.schema").joinpath("report.schema.json").open() as fh:
        return json.load(fh)


def _jsonable(obj):
    """Recursively coerce to JSON-safe values (non-finite floats -> strings)."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    try:
        import numpy as np

        if isinstance(obj, np.generic):
            return _jsonable(obj.item())
    except ImportError:  # pragma: no cover
        pass
    return str(obj)


@dataclass
class Check:
    name: str
    passed: bool
    value: float | str | bool | None = None
    tolerance: float | None = None
    detail: str = ""

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "value": _jsonable(self.value),
            "tolerance": _jsonable(self.tolerance),
            "detail": self.detail,
        }


@dataclass
class ExperimentReport:
    command: str
    config: dict
    results: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    _t0: float = field(default_factory=time.perf_counter)

    def check(self, name: str, passed: bool, value=None, tolerance=None, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(passed), value, tolerance, detail))
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json_dict(self) -> dict:
        return {
            "command": self.command,
            "schema_version": SCHEMA_VERSION,
            "config": _jsonable(self.config),
            "results": _jsonable(self.results),
            "tables": _jsonable(self.tables),
            "checks": [c.to_json_dict() for c in self.checks],
            "passed": self.passed,
            "wall_time_s": time.perf_counter() - self._t0,
        }

    def write(self, path: str | Path) -> dict:
        d = self.to_json_dict()
        validate_report(d)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(d, indent=1, allow_nan=False))
        return d

    def summary_lines(self):
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            extra = ""
            if c.value is not None:
                extra = f"  value={c.value}"
                if c.tolerance is not None:
                    extra += f" tol={c.tolerance}"
            yield f"[{mark}] {self.command}: {c.name}{extra}"


def validate_report(report_dict: dict) -> None:
    jsonschema.validate(report_dict, load_schema())


def write_csv_tables(report_dict: dict, directory: str | Path) -> list[Path]:
    """One CSV file per table, named <command>_<table>.csv."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, rows in report_dict.get("tables", {}).items():
        if not rows:
            continue
        path = directory / f"{report_dict['command']}_{name}.csv"
        keys = list(rows[0].keys())
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=keys)
            writer.writeheader()
            writer.writerows(rows)
        written.append(path)
    return written
