"""JSON encodings for matrices, spaces, decompositions, channels and reports.

Matrices are ``{"rows": r, "cols": c, "data": [[re, im], ...]}`` in row-major
order; vectors are ``{"dim": n, "data": [[re, im], ...]}``.
"""

from __future__ import annotations

import datetime as _dt
import json
from pathlib import Path

import numpy as np

from .channels import Channel
from .decomp import SubsystemBlock, SubsystemDecomposition
from .linalg import Subspace, as_matrix
from .opspace import OperatorSpace
from .verify import (Classification, DecodingMap, OracleResult, SyndromeRecord, Tolerances,
                     VerificationReport)

REPORT_SCHEMA = "nsverify-report-1"
BUNDLE_SCHEMA = "nsverify-bundle-1"


class FormatError(ValueError):
    """Malformed JSON document or unexpected structure."""


def _pairs(a: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in a.reshape(-1)]


def _complex(data, n: int) -> np.ndarray:
    try:
        arr = np.array([complex(re, im) for re, im in data], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad complex data: {exc}") from exc
    if arr.size != n:
        raise FormatError(f"expected {n} entries, got {arr.size}")
    return arr


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "data": _pairs(m)}


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"matrix object needs rows, cols, data: {exc}") from exc
    if rows < 1 or cols < 1:
        raise FormatError("matrix dimensions must be positive")
    m = _complex(data, rows * cols).reshape(rows, cols)
    try:
        return as_matrix(m)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def vector_to_json(v) -> dict:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return {"dim": int(v.size), "data": _pairs(v)}


def vector_from_json(obj) -> np.ndarray:
    try:
        return _complex(obj["data"], int(obj["dim"]))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"vector object needs dim, data: {exc}") from exc


def subspace_to_json(s: Subspace) -> dict:
    return {"ambient_dim": s.ambient_dim, "tol": s.tol,
            "basis": [vector_to_json(c) for c in s.basis.T]}


def subspace_from_json(obj) -> Subspace:
    d = int(obj["ambient_dim"])
    vecs = [vector_from_json(v) for v in obj["basis"]]
    basis = np.column_stack(vecs) if vecs else np.zeros((d, 0), dtype=complex)
    return Subspace(d, basis, float(obj.get("tol", 1e-9)))


def space_to_json(s: OperatorSpace) -> dict:
    return {"ambient_dim": s.ambient_dim, "tol": s.tol,
            "basis": [matrix_to_json(b) for b in s.basis]}


def space_from_json(obj) -> OperatorSpace:
    d = int(obj["ambient_dim"])
    mats = [matrix_from_json(m) for m in obj["basis"]]
    basis = np.stack(mats) if mats else np.zeros((0, d, d), dtype=complex)
    return OperatorSpace(d, basis, float(obj.get("tol", 1e-9)))


def decomposition_to_json(dec: SubsystemDecomposition) -> dict:
    return {
        "ambient_dim": dec.ambient_dim,
        "blocks": [{"mult_dim": b.mult_dim, "irrep_dim": b.irrep_dim,
                    "isometry": matrix_to_json(b.isometry)} for b in dec.blocks],
        "complement": subspace_to_json(dec.complement),
    }


def decomposition_from_json(obj) -> SubsystemDecomposition:
    blocks = [SubsystemBlock(int(b["mult_dim"]), int(b["irrep_dim"]), matrix_from_json(b["isometry"]))
              for b in obj["blocks"]]
    return SubsystemDecomposition(int(obj["ambient_dim"]), blocks,
                                  subspace_from_json(obj["complement"]))


def channel_to_json(c: Channel) -> dict:
    return {"label": c.label, "kraus": [matrix_to_json(k) for k in c.kraus]}


def channel_from_json(obj) -> Channel:
    return Channel(tuple(matrix_from_json(k) for k in obj["kraus"]), obj.get("label", ""))


def decoder_to_json(d_map: DecodingMap) -> dict:
    return {"u_d": matrix_to_json(d_map.u_d), "dim_q": d_map.dim_q, "dim_y": d_map.dim_y}


def decoder_from_json(obj) -> DecodingMap:
    try:
        return DecodingMap(matrix_from_json(obj["u_d"]), int(obj["dim_q"]), int(obj["dim_y"]))
    except KeyError as exc:
        raise FormatError(f"decoder needs u_d, dim_q, dim_y: missing {exc}") from exc


def _record_to_json(r: SyndromeRecord) -> dict:
    return {"label": r.error_label, "phi_e": vector_to_json(r.phi_e),
            "deficit": r.fidelity_deficit, "zero": r.zero, "passed": r.passed,
            "reason": r.reason}


def _record_from_json(obj) -> SyndromeRecord:
    return SyndromeRecord(obj["label"], vector_from_json(obj["phi_e"]), float(obj["deficit"]),
                          bool(obj["zero"]), bool(obj["passed"]), obj.get("reason"))


def report_to_json(rep: VerificationReport) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "label": rep.label,
        "records": [_record_to_json(r) for r in rep.records],
        "phi_r": vector_to_json(rep.phi_r),
        "v_space": None if rep.v_space is None else subspace_to_json(rep.v_space),
        "classification": None if rep.classification is None else rep.classification.value,
        "purity": rep.purity,
        "leakage": rep.leakage,
        "oracle_residual": rep.oracle_residual,
        "max_deficit": rep.max_deficit,
        "tolerances": rep.tolerances.as_dict(),
    }


def report_from_json(obj) -> VerificationReport:
    if obj.get("schema") != REPORT_SCHEMA:
        raise FormatError(f"unexpected report schema {obj.get('schema')!r}")
    cls = obj.get("classification")
    return VerificationReport(
        records=[_record_from_json(r) for r in obj["records"]],
        phi_r=vector_from_json(obj["phi_r"]),
        v_space=None if obj.get("v_space") is None else subspace_from_json(obj["v_space"]),
        classification=None if cls is None else Classification(cls),
        purity=obj.get("purity"),
        leakage=obj.get("leakage"),
        tolerances=Tolerances(**obj["tolerances"]),
        label=obj.get("label", ""),
        oracle_residual=obj.get("oracle_residual"),
    )


def bundle_to_json(bundle, timestamp: bool = True) -> dict:
    doc = {
        "schema": BUNDLE_SCHEMA,
        "name": bundle.name,
        "verdict": bundle.verdict,
        "ok": bundle.ok,
        "reports": {k: report_to_json(r) for k, r in bundle.reports.items()},
        "containments": dict(bundle.containments),
        "oracle": {k: {"passed": bool(o.passed), "residual": float(o.residual)}
                   for k, o in bundle.oracle.items()},
        "notes": bundle.notes,
    }
    if timestamp:
        doc["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    return doc


def bundle_from_json(obj):
    from .spin_example import ScenarioBundle

    if obj.get("schema") != BUNDLE_SCHEMA:
        raise FormatError(f"unexpected bundle schema {obj.get('schema')!r}")
    return ScenarioBundle(
        name=obj["name"],
        reports={k: report_from_json(r) for k, r in obj["reports"].items()},
        containments={k: bool(v) for k, v in obj["containments"].items()},
        oracle={k: OracleResult(bool(o["passed"]), float(o["residual"]))
                for k, o in obj["oracle"].items()},
        verdict=obj["verdict"],
        notes=obj.get("notes", {}),
    )


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True)


def load_json(path) -> object:
    """Read a JSON file, raising :class:`FormatError` on parse errors."""
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc


def operators_from_json(obj) -> tuple[list[np.ndarray], list[str] | None]:
    """Operator list from a bare list, ``{"operators": [...], "labels": [...]}``,
    ``{"generators": [...]}`` or ``{"channels": [...]}`` (Kraus operators)."""
    if isinstance(obj, list):
        return [matrix_from_json(m) for m in obj], None
    if not isinstance(obj, dict):
        raise FormatError("expected a list of matrices or an object")
    if "channels" in obj:
        ops, labels = [], []
        for c in obj["channels"]:
            ch = channel_from_json(c)
            ops.extend(ch.kraus)
            labels.extend(f"K{a}^{ch.label}" for a in range(len(ch)))
        return ops, labels
    for key in ("operators", "generators"):
        if key in obj:
            return [matrix_from_json(m) for m in obj[key]], obj.get("labels")
    raise FormatError("no operators, generators or channels key")
