"""Report artifacts: NDJSON record stream, invariant CSV, raw snapshots.

Determinism contract: two runs with the same config and seed produce
bitwise-identical streams.  The only timestamp lives in the header line;
every other line is a pure function of the run.  Floats are serialized via
Python's shortest round-trip repr.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .model import Array

RECORDS_FILENAME = "records.ndjson"
INVARIANTS_FILENAME = "invariants.csv"
SNAPSHOT_MAGIC = "f64-snapshot"


@dataclass(frozen=True)
class LawRecord:
    """One summary line per (law-or-check, ladder rung)."""

    experiment: str
    law: str
    rung: int
    h: float
    dt: float
    l2_residual: float
    max_residual: float
    normalized_l2: float | None
    invariant_drift: float | None
    order_estimate: float | None
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "law": self.law,
            "rung": self.rung,
            "h": _jsonable(self.h),
            "dt": _jsonable(self.dt),
            "l2_residual": _jsonable(self.l2_residual),
            "max_residual": _jsonable(self.max_residual),
            "normalized_l2": _jsonable(self.normalized_l2),
            "invariant_drift": _jsonable(self.invariant_drift),
            "order_estimate": _jsonable(self.order_estimate),
            "pass": bool(self.passed),
        }


@dataclass(frozen=True)
class CheckResult:
    """A single pass/fail verdict with the compared numbers attached."""

    name: str
    category: str
    passed: bool
    measured: float
    tolerance: float
    comparison: str = "<="  # how measured relates to tolerance when passing

    def describe(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name}: measured {self.measured:.6g} "
            f"{self.comparison} tolerance {self.tolerance:.6g}"
        )


@dataclass
class VerificationReport:
    """Everything one experiment produced: records, invariant series,
    verdicts, and the resolved configuration used."""

    experiment: str
    config_echo: dict
    records: list[LawRecord] = field(default_factory=list)
    checks: list[CheckResult] = field(default_factory=list)
    invariants: dict[tuple[str, int], tuple[Array, Array]] = field(default_factory=dict)
    snapshots: dict[str, Array] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks) and all(r.passed for r in self.records)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def first_failing_category(self) -> str | None:
        for c in self.checks:
            if not c.passed:
                return c.category
        for r in self.records:
            if not r.passed:
                return "residual"
        return None


def _jsonable(v):
    if v is None:
        return None
    if isinstance(v, (bool, int, str)):
        return v
    f = float(v)
    if math.isnan(f) or math.isinf(f):
        return None
    return f


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=False, separators=(", ", ": "))


def write_records(report: VerificationReport, outdir: Path) -> Path:
    """Write the NDJSON stream: one header line (the only place with a
    timestamp), then one line per (law, rung) record."""
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / RECORDS_FILENAME
    header = {
        "record": "header",
        "experiment": report.experiment,
        "config": report.config_echo,
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    lines = [_dump(header)]
    for r in report.records:
        lines.append(_dump(r.to_json_dict()))
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write record stream to {path}: {exc}") from exc
    return path


def write_invariants(report: VerificationReport, outdir: Path) -> Path:
    """CSV time series of the global invariants, one row per stored slice."""
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / INVARIANTS_FILENAME
    rows = ["law,rung,time,value"]
    for (law, rung), (times, values) in report.invariants.items():
        for t, v in zip(times, values):
            rows.append(f"{law},{rung},{t!r},{v!r}")
    try:
        path.write_text("\n".join(rows) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write invariant series to {path}: {exc}") from exc
    return path


def write_snapshot(path: Path, name: str, array: Array) -> Path:
    """Raw little-endian float64 dump with a one-line plain-text header
    naming the shape and component order."""
    arr = np.ascontiguousarray(array, dtype="<f8")
    shape = "x".join(str(n) for n in arr.shape)
    components = "E1,E2,E3" if name.startswith("E") else (
        "B1,B2,B3" if name.startswith("B") else "scalar"
    )
    header = (
        f"{SNAPSHOT_MAGIC} name={name} shape={shape} "
        f"components={components} layout=C byteorder=little\n"
    )
    try:
        with open(path, "wb") as fh:
            fh.write(header.encode("ascii"))
            fh.write(arr.tobytes(order="C"))
    except OSError as exc:
        raise OSError(f"cannot write snapshot to {path}: {exc}") from exc
    return path


def read_snapshot(path: Path) -> tuple[str, Array]:
    """Read back a snapshot written by :func:`write_snapshot`."""
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").strip()
        payload = fh.read()
    fields = dict(kv.split("=", 1) for kv in header.split()[1:])
    if not header.startswith(SNAPSHOT_MAGIC):
        raise ValueError(f"{path} is not a snapshot file")
    shape = tuple(int(n) for n in fields["shape"].split("x"))
    arr = np.frombuffer(payload, dtype="<f8").reshape(shape)
    return fields["name"], arr


def emit_report(report: VerificationReport, outdir: Path) -> list[Path]:
    """Write all artifacts for one run; returns the paths written."""
    outdir = Path(outdir)
    written = [write_records(report, outdir), write_invariants(report, outdir)]
    for name, arr in report.snapshots.items():
        written.append(write_snapshot(outdir / f"{name}.f64", name, arr))
    return written
