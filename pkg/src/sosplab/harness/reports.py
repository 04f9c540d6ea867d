"""Fixed-schema CSV and JSON report emission.

The result schema is a contract: column names and order never change
within a schema version, so downstream analysis can be written once.
Floats are serialized with shortest round-trip repr; rerunning with the
same config and seed reproduces every byte except ``wall_ms``, which is
measured (it is the one intentionally nondeterministic column).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .. import __version__
from .._kernels import backend_name
from ..core.oracle import QueryLedger
from ..errors import ContractViolation

SCHEMA_VERSION = 1

RESULT_COLUMNS = [
    "command", "algorithm", "eps", "gamma", "seed", "rep",
    "queries_grad", "queries_hvp", "queries_hess",
    "grad_norm_out", "lambda_min_out", "success", "wall_ms",
]

FIRST_PASSAGE_COLUMNS = [
    "command", "algorithm", "eps", "gamma", "seed", "rep",
    "fp_step", "fp_queries", "success",
]

TRAJECTORY_COLUMNS = ["run_id", "t", "prog"]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: str | Path, columns: list[str], rows: list[dict]) -> None:
    """Write rows under a fixed header; every row must cover every column."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if set(row) != set(columns):
                raise ContractViolation(
                    f"row keys {sorted(row)} do not match schema {columns}")
            writer.writerow([_cell(row[c]) for c in columns])


def write_json(path: str | Path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def result_row(*, command: str, algorithm: str, eps: float,
               gamma: float | None, seed: int, rep: int,
               ledger: QueryLedger, grad_norm: float, lambda_min: float,
               success: bool, wall_ms: float) -> dict:
    return {
        "command": command,
        "algorithm": algorithm,
        "eps": float(eps),
        "gamma": None if gamma is None else float(gamma),
        "seed": int(seed),
        "rep": int(rep),
        "queries_grad": int(ledger.grad),
        "queries_hvp": int(ledger.hvp),
        "queries_hess": int(ledger.hess),
        "grad_norm_out": float(grad_norm),
        "lambda_min_out": float(lambda_min),
        "success": bool(success),
        "wall_ms": round(float(wall_ms), 3),
    }


def first_passage_row(*, command: str, algorithm: str, eps: float,
                      gamma: float | None, seed: int, rep: int,
                      fp_step: int | None, fp_queries: int | None,
                      success: bool) -> dict:
    return {
        "command": command,
        "algorithm": algorithm,
        "eps": float(eps),
        "gamma": None if gamma is None else float(gamma),
        "seed": int(seed),
        "rep": int(rep),
        "fp_step": None if fp_step is None else int(fp_step),
        "fp_queries": None if fp_queries is None else int(fp_queries),
        "success": bool(success),
    }


def run_manifest(config_dict: dict, extra: dict | None = None) -> dict:
    """Echo of what ran: config, package version, kernel backend."""
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "backend": backend_name(),
        "config": config_dict,
    }
    if extra:
        manifest.update(extra)
    return manifest
