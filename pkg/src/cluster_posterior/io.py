"""CSV ingestion and JSON/CSV result serialization."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DataError
from .likelihood import BINARY, CONTINUOUS, Dataset
from .posterior import ClusteringResult

SIG_DIGITS = 12
SCHEMA_PATH = Path(__file__).with_name("schema") / "results.schema.json"


def load_csv(path, *, header: bool = False, kind: str = CONTINUOUS) -> Dataset:
    """Read a comma-separated matrix (rows are items, columns are features).

    ``kind=BINARY`` requires every cell to be 0 or 1. Errors name the 1-based
    row and column of the offending cell.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    names: tuple = ()
    first_line = 1
    if header:
        if not rows:
            raise DataError(f"{path}: empty file, expected a header row")
        names = tuple(cell.strip() for cell in rows[0])
        rows = rows[1:]
        first_line = 2
    rows = [(lineno, r) for lineno, r in enumerate(rows, start=first_line) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: no data rows")

    width = len(rows[0][1])
    values = np.empty((len(rows), width))
    for i, (lineno, row) in enumerate(rows):
        if len(row) != width:
            raise DataError(f"{path}: row {lineno} has {len(row)} columns, expected {width}")
        for j, cell in enumerate(row):
            text = cell.strip()
            if not text:
                raise DataError(f"{path}: missing value at row {lineno}, column {j + 1}")
            try:
                v = float(text)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric value {text!r} at row {lineno}, column {j + 1}"
                ) from None
            if not math.isfinite(v):
                raise DataError(f"{path}: non-finite value at row {lineno}, column {j + 1}")
            if kind == BINARY and v not in (0.0, 1.0):
                raise DataError(
                    f"{path}: binary model needs 0/1 data, found {text!r} "
                    f"at row {lineno}, column {j + 1}"
                )
            values[i, j] = v
    return Dataset(values, kind, names)


def write_csv(data: Dataset, path) -> None:
    """Write a dataset so that :func:`load_csv` reproduces it bit for bit."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        if data.feature_names:
            writer.writerow(data.feature_names)
        for row in data.values:
            if data.kind == BINARY:
                writer.writerow([str(int(v)) for v in row])
            else:
                writer.writerow([repr(float(v)) for v in row])


def _sig(x: float) -> float:
    return float(f"{x:.{SIG_DIGITS}g}")


def result_document(
    result: ClusteringResult, model: dict, prior: dict, *, timing: bool = True
) -> dict:
    summary = result.summary
    doc = {
        "n": summary.n,
        "model": model,
        "prior": prior,
        "log_evidence": _sig(summary.log_evidence),
        "posterior_k": [_sig(p) for p in summary.posterior_k],
        "prior_k": [_sig(p) for p in summary.prior_k],
    }
    if result.cooccurrence is not None:
        doc["cooccurrence"] = [[_sig(p) for p in row] for row in result.cooccurrence.entries]
    if result.modes is not None:
        doc["modes"] = [
            {
                "k": k,
                "clusters": part.as_lists(),
                "posterior_prob": _sig(part.probability),
                "log_posterior": _sig(part.log_posterior),
            }
            for k, part in result.modes
        ]
        best = result.global_mode
        doc["global_mode"] = {
            "k": best.k,
            "clusters": best.as_lists(),
            "posterior_prob": _sig(best.probability),
        }
    engine = dict(result.engine)
    engine["wall_time_s"] = round(engine.get("wall_time_s", 0.0), 6) if timing else None
    doc["engine"] = engine
    return doc


def emit_results(
    result: ClusteringResult,
    path,
    *,
    model: dict,
    prior: dict,
    fmt: str = "json",
    timing: bool = True,
) -> list[Path]:
    """Write results; returns the files created.

    ``json`` writes one document at ``path``. ``csv`` writes
    ``<stem>_posterior_k.csv``, ``<stem>_cooccurrence.csv`` and
    ``<stem>_modes.csv`` next to ``path`` for whichever outputs exist.
    """
    path = Path(path)
    doc = result_document(result, model, prior, timing=timing)
    try:
        if fmt == "json":
            path.write_text(json.dumps(doc, indent=2) + "\n")
            return [path]
        if fmt != "csv":
            raise ValueError(f"unknown output format {fmt!r}")
        return _emit_csv(doc, path)
    except OSError as exc:
        raise DataError(f"cannot write results to {path}: {exc}") from exc


def _fmt(x: Optional[float]) -> str:
    return f"{x:.{SIG_DIGITS}g}"


def _emit_csv(doc: dict, path: Path) -> list[Path]:
    stem = path.with_suffix("")
    written = []
    target = Path(f"{stem}_posterior_k.csv")
    with target.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "posterior", "prior"])
        for k, (p, q) in enumerate(zip(doc["posterior_k"], doc["prior_k"]), start=1):
            w.writerow([k, _fmt(p), _fmt(q)])
        w.writerow([])
        w.writerow(["log_evidence", _fmt(doc["log_evidence"])])
    written.append(target)
    if "cooccurrence" in doc:
        target = Path(f"{stem}_cooccurrence.csv")
        with target.open("w", newline="") as fh:
            w = csv.writer(fh)
            for row in doc["cooccurrence"]:
                w.writerow([_fmt(p) for p in row])
        written.append(target)
    if "modes" in doc:
        target = Path(f"{stem}_modes.csv")
        with target.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "posterior_prob", "log_posterior", "clusters"])
            for m in doc["modes"]:
                clusters = " | ".join(" ".join(str(i) for i in c) for c in m["clusters"])
                w.writerow([m["k"], _fmt(m["posterior_prob"]), _fmt(m["log_posterior"]), clusters])
        written.append(target)
    return written


def load_schema() -> dict:
    return json.loads(SCHEMA_PATH.read_text())
