"""Verification of error-correcting and noiseless behaviour of a decoded subsystem.

Setting: a unitary decoder ``U_d`` on ``C^d`` whose output is ordered as
``Q (x) Y (x) rest``. The slot ``rest = 0`` holds ``Q (x) Y``; every state with
a nonzero ``rest`` index belongs to the failure summand ``R``. An encoder is
an isometry ``C^{dim_q} -> C^d`` whose columns are the encoded logical basis.

Syndrome vectors are phase-aligned to the logical input: for encoder column
``l``, ``phi_l = (<l| (x) 1) P_QY U_d E |l>_C``. This keeps ``E -> phi_E``
linear, so verifying a basis of an error space verifies the whole span.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .channels import Channel
from .linalg import (ATOL, RANK_RTOL, Subspace, as_matrix, dagger, factor_product,
                     orthonormalize)
from .opspace import ErrorAlgebra, OperatorSpace, span_of


class VerificationError(RuntimeError):
    pass


class Classification(str, enum.Enum):
    DFS = "DFS"
    CONDITIONAL_NS = "ConditionalNS"
    FULL_NS = "FullNS"
    FAILED = "Failed"


@dataclass(frozen=True)
class Tolerances:
    atol: float = ATOL
    rank_rtol: float = RANK_RTOL
    deficit: float = 1e-8
    oracle: float = 1e-8

    def as_dict(self) -> dict:
        return {"atol": self.atol, "rank_rtol": self.rank_rtol,
                "deficit": self.deficit, "oracle": self.oracle}


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class DecodingMap:
    """Implemented decoder with output ordering ``Q (x) Y (x) rest``."""

    u_d: np.ndarray
    dim_q: int
    dim_y: int
    tol: float = ATOL

    def __post_init__(self):
        u = as_matrix(self.u_d, "u_d")
        object.__setattr__(self, "u_d", u)
        d = u.shape[0]
        if u.shape != (d, d):
            raise ValueError("u_d must be square")
        if np.abs(dagger(u) @ u - np.eye(d)).max() > max(self.tol, 1e-12) * 10:
            raise ValueError("u_d is not unitary")
        if self.dim_q < 1 or self.dim_y < 1 or d % (self.dim_q * self.dim_y):
            raise ValueError(f"dim_q*dim_y = {self.dim_q * self.dim_y} must divide d = {d}")

    @property
    def dim(self) -> int:
        return self.u_d.shape[0]

    @property
    def dim_rest(self) -> int:
        return self.dim // (self.dim_q * self.dim_y)

    def embedding(self) -> np.ndarray:
        """Isometry placing ``Q (x) Y`` at ``rest = 0`` of the output space."""
        n = self.dim_q * self.dim_y
        emb = np.zeros((self.dim, n), dtype=complex)
        emb[np.arange(n) * self.dim_rest, np.arange(n)] = 1
        return emb

    def r_space(self) -> Subspace:
        return Subspace(self.dim, self.embedding()).complement()

    def embed(self, qy) -> np.ndarray:
        return self.embedding() @ np.asarray(qy, dtype=complex)

    def conjugate(self, e) -> np.ndarray:
        """``U_d E U_d^dagger``."""
        return self.u_d @ as_matrix(e) @ dagger(self.u_d)


@dataclass(frozen=True)
class CodeSpec:
    """Encoder isometry; column ``l`` is the encoded logical state ``|l>_C``."""

    encoder: np.ndarray
    ancilla_state_label: str = "0"
    tol: float = ATOL

    def __post_init__(self):
        enc = as_matrix(self.encoder, "encoder")
        object.__setattr__(self, "encoder", enc)
        k = enc.shape[1]
        if np.abs(dagger(enc) @ enc - np.eye(k)).max() > max(self.tol, 1e-12) * 10:
            raise ValueError("encoder columns are not orthonormal")

    @property
    def dim_logical(self) -> int:
        return self.encoder.shape[1]


def encoder_for_reference(d_map: DecodingMap, phi_r) -> CodeSpec:
    """Code ``U_d^{-1}(Q (x) phi_r)``: the encoding consistent with ``d_map``."""
    phi_r = np.asarray(phi_r, dtype=complex)
    phi_r = phi_r / np.linalg.norm(phi_r)
    cols = [np.kron(np.eye(d_map.dim_q)[q], phi_r) for q in range(d_map.dim_q)]
    enc = dagger(d_map.u_d) @ d_map.embed(np.column_stack(cols))
    return CodeSpec(enc)


@dataclass(frozen=True)
class SyndromeRecord:
    error_label: str
    phi_e: np.ndarray
    fidelity_deficit: float
    zero: bool = False
    passed: bool = True
    reason: str | None = None


@dataclass
class VerificationReport:
    records: list
    phi_r: np.ndarray
    v_space: Subspace | None = None
    classification: Classification | None = None
    purity: float | None = None
    leakage: float | None = None
    tolerances: Tolerances = DEFAULT_TOL
    label: str = ""
    oracle_residual: float | None = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def max_deficit(self) -> float:
        return max((r.fidelity_deficit for r in self.records), default=0.0)

    def phis(self) -> list[np.ndarray]:
        return [r.phi_e for r in self.records]


def _check_compat(d_map: DecodingMap, code: CodeSpec):
    if code.encoder.shape[0] != d_map.dim:
        raise ValueError(f"encoder acts on dim {code.encoder.shape[0]}, decoder on {d_map.dim}")
    if code.dim_logical != d_map.dim_q:
        raise ValueError(f"encoder has {code.dim_logical} logical columns, expected {d_map.dim_q}")


def _error_list(errors, labels=None) -> tuple[list[np.ndarray], list[str]]:
    if isinstance(errors, ErrorAlgebra):
        errors = errors.space
    if isinstance(errors, OperatorSpace):
        ops = list(errors.basis)
        default = [f"B{i}" for i in range(len(ops))]
    elif isinstance(errors, Channel):
        ops = list(errors.kraus)
        default = [f"K{i}^{errors.label}" for i in range(len(ops))]
    else:
        ops = [as_matrix(e) for e in errors]
        default = [f"E{i}" for i in range(len(ops))]
    labels = list(labels) if labels is not None else default
    if len(labels) != len(ops):
        raise ValueError("labels and errors differ in length")
    return ops, labels


def _check_error(d_map: DecodingMap, code: CodeSpec, e: np.ndarray, label: str,
                 tol: Tolerances) -> SyndromeRecord:
    dq, dy = d_map.dim_q, d_map.dim_y
    emb = d_map.embedding()
    outs = d_map.u_d @ e @ code.encoder
    if np.linalg.norm(outs, axis=0).max() <= tol.atol:
        return SyndromeRecord(label, np.zeros(dy, dtype=complex),
                              float(np.linalg.norm(outs, axis=0).max()), zero=True)
    qy = dagger(emb) @ outs
    leak = np.linalg.norm(outs - emb @ qy, axis=0)
    reasons = []
    phis = []
    for q in range(dq):
        col = qy[:, q]
        phis.append(col.reshape(dq, dy)[q].copy())
        f = factor_product(col, dq, dy, tol.rank_rtol)
        if f is None:
            reasons.append("factorization failure")
        elif not f.zero and 1 - abs(f.q[q]) > tol.atol:
            reasons.append("logical-vector mismatch")
    phi = np.mean(phis, axis=0)
    if max(np.linalg.norm(p - phi) for p in phis) > tol.atol:
        reasons.append("syndrome inconsistency across logical basis")
    if leak.max() > tol.atol:
        reasons.append("leakage out of Q(x)Y")
    eye = np.eye(dq)
    deficit = max(
        float(np.linalg.norm(outs[:, q] - emb @ np.kron(eye[q], phi))) for q in range(dq)
    )
    passed = deficit <= tol.deficit
    reason = None
    if not passed:
        reason = reasons[0] if reasons else "residual above threshold"
    zero = bool(np.linalg.norm(phi) <= tol.atol and passed)
    return SyndromeRecord(label, phi, deficit, zero=zero, passed=passed, reason=reason)


def verify_stability(d_map: DecodingMap, code: CodeSpec, error_basis, labels=None,
                     tol: Tolerances = DEFAULT_TOL, jobs: int = 1) -> VerificationReport:
    """Check ``U_d E |psi>_C = |psi>_Q (x) |phi_E>_Y`` for each basis error.

    An error that annihilates the code passes with a zero syndrome. Because
    ``E -> phi_E`` is linear, a passing basis certifies the whole span. The
    returned report carries ``phi_r`` (from ``E = 1``), purity and leakage;
    ``classification`` is ``FAILED`` when any check fails and ``None``
    otherwise.
    """
    _check_compat(d_map, code)
    ops, labels = _error_list(error_basis, labels)
    for e in ops:
        if e.shape != (d_map.dim, d_map.dim):
            raise ValueError(f"error operator shape {e.shape} does not match dim {d_map.dim}")
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(lambda a: _check_error(d_map, code, a[0], a[1], tol),
                                    zip(ops, labels)))
    else:
        records = [_check_error(d_map, code, e, lab, tol) for e, lab in zip(ops, labels)]
    ident = _check_error(d_map, code, np.eye(d_map.dim, dtype=complex), "identity", tol)
    report = VerificationReport(records=records, phi_r=ident.phi_e, tolerances=tol)
    report.purity = purity_check(d_map, code)
    report.leakage = _leakage(d_map, code, ops, records + [ident], tol)
    if not (report.passed and ident.passed):
        report.classification = Classification.FAILED
    return report


def reference_syndrome(d_map: DecodingMap, code: CodeSpec,
                       tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Syndrome ``phi_r`` selected by the encoding (decoding with no error).

    Raises
    ------
    VerificationError
        If a decoded logical column does not factor, carries the wrong logical
        vector, or the syndrome factors disagree.
    """
    _check_compat(d_map, code)
    rec = _check_error(d_map, code, np.eye(d_map.dim, dtype=complex), "identity", tol)
    if not rec.passed:
        raise VerificationError(f"reference syndrome undefined: {rec.reason} "
                                f"(deficit {rec.fidelity_deficit:.3g})")
    if rec.zero:
        raise VerificationError("decoded code is empty")
    return rec.phi_e


def purity_check(d_map: DecodingMap, code: CodeSpec) -> float:
    """``Tr(rho_anc^2)`` of the decoded ancillae for a maximally mixed logical input."""
    _check_compat(d_map, code)
    outs = d_map.u_d @ code.encoder
    k = outs.shape[1]
    rho = np.zeros((d_map.dim // d_map.dim_q,) * 2, dtype=complex)
    for i in range(k):
        m = outs[:, i].reshape(d_map.dim_q, -1)
        rho += m.T @ m.conj()
    rho /= k
    return float(np.real(np.trace(rho @ rho)))


def _leakage(d_map, code, ops, records, tol) -> float:
    phis = [r.phi_e for r in records if not r.zero and np.linalg.norm(r.phi_e) > tol.atol]
    synd = orthonormalize(phis, tol=tol.deficit, ambient_dim=d_map.dim_y)
    emb = d_map.embedding() @ np.kron(np.eye(d_map.dim_q), synd.basis)
    worst = 0.0
    for e in ops:
        outs = d_map.u_d @ e @ code.encoder
        resid = outs - emb @ (dagger(emb) @ outs)
        worst = max(worst, float((np.linalg.norm(resid, axis=0) ** 2).max()))
    return worst


def leakage_check(d_map: DecodingMap, code: CodeSpec, errors,
                  report: VerificationReport | None = None,
                  tol: Tolerances = DEFAULT_TOL) -> float:
    """Largest squared amplitude outside ``U_d^{-1}(Q (x) span{phi_E})``.

    The maximum runs over the error basis and the logical basis. ``report``
    supplies the syndromes when the stability check has already been run on
    the same basis.
    """
    ops, labels = _error_list(errors)
    if report is None:
        report = verify_stability(d_map, code, ops, labels, tol)
    return _leakage(d_map, code, ops, report.records, tol)


def reachable_space(alg: ErrorAlgebra | OperatorSpace, d_map: DecodingMap, code: CodeSpec,
                    report: VerificationReport | None = None,
                    tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """Span of the syndromes ``phi_E`` over a basis of the algebra.

    ``report`` may carry stability records for exactly ``alg``'s basis;
    otherwise they are computed here.

    Raises
    ------
    VerificationError
        If stability fails for any basis element.
    """
    space = alg.space if isinstance(alg, ErrorAlgebra) else alg
    if report is None:
        report = verify_stability(d_map, code, space, tol=tol)
    elif len(report.records) != space.dim:
        raise ValueError("report does not match the algebra basis")
    bad = [r.error_label for r in report.records if not r.passed]
    if bad:
        raise VerificationError(f"stability not verified for {bad}")
    phis = [r.phi_e for r in report.records if not r.zero]
    return orthonormalize(phis, tol=tol.deficit, ambient_dim=d_map.dim_y)


def classify(v: Subspace | int, dim_y: int) -> Classification:
    n = v.dim if isinstance(v, Subspace) else int(v)
    if n < 1:
        raise ValueError("reachable space must be at least one-dimensional")
    if n > dim_y:
        raise ValueError(f"dim V = {n} exceeds dim Y = {dim_y}")
    if n == 1:
        return Classification.DFS
    if n < dim_y:
        return Classification.CONDITIONAL_NS
    return Classification.FULL_NS


class OracleResult(NamedTuple):
    passed: bool
    residual: float


def theorem_oracle(alg: ErrorAlgebra | OperatorSpace, d_map: DecodingMap, v: Subspace,
                   tol: float = 1e-8) -> OracleResult:
    """Brute-force check that the algebra acts as ``1_Q (x) End(V)`` on ``Q (x) V``.

    For every basis error ``E``, basis syndrome ``chi`` of ``v`` and logical
    basis vector ``|q>``, decodes ``U_d E U_d^dagger (|q> (x) chi)`` and
    measures leakage out of ``Q (x) Y``, the non-product remainder, the
    dependence of the syndrome part on ``q`` and its distance from ``v``.
    Uses nothing but ``d_map``.
    """
    space = alg.space if isinstance(alg, ErrorAlgebra) else alg
    dq, dy = d_map.dim_q, d_map.dim_y
    if v.ambient_dim != dy:
        raise ValueError("v must live in the syndrome space")
    emb = d_map.embedding()
    eye_q = np.eye(dq)
    worst = 0.0
    for e in space.basis:
        e_t = d_map.conjugate(e)
        for chi in v.basis.T:
            ys = []
            for q in range(dq):
                out = e_t @ emb @ np.kron(eye_q[q], chi)
                qy = dagger(emb) @ out
                leak = np.linalg.norm(out - emb @ qy)
                y = qy.reshape(dq, dy)[q]
                nonprod = np.linalg.norm(qy - np.kron(eye_q[q], y))
                worst = max(worst, float(leak), float(nonprod), v.residual(y))
                ys.append(y)
            worst = max(worst, max(float(np.linalg.norm(y - ys[0])) for y in ys))
    return OracleResult(worst <= tol, worst)


@dataclass(frozen=True)
class VerifiedFamily:
    """An algebra whose stability was verified, with its verified syndrome domain."""

    algebra: ErrorAlgebra
    domain: Subspace
    label: str = ""


def admissible_pairs(families: Sequence[VerifiedFamily], dim_y: int,
                     tol: float = 1e-8) -> list[tuple[int, int]]:
    """Index pairs ``(j, i)``: products ``B A`` with ``B`` from ``j``, ``A`` from ``i``.

    ``B A`` is admitted when ``B`` is verified on all of ``Y`` or on a domain
    containing the syndromes reachable under ``A``.
    """
    pairs = []
    for j, fb in enumerate(families):
        for i, fa in enumerate(families):
            if fb.domain.dim == dim_y or fb.domain.contains(fa.domain, tol):
                pairs.append((j, i))
    return pairs


def enlarge_error_set(verified: Sequence, phi_r, tol: float = 1e-8) -> OperatorSpace:
    """Error space whose stability follows from the verified families.

    ``verified`` holds :class:`VerifiedFamily` objects or ``(algebra, V)``
    pairs. The result spans every family plus all admissible two-letter
    products (see :func:`admissible_pairs`).
    """
    fams = [f if isinstance(f, VerifiedFamily) else VerifiedFamily(*f) for f in verified]
    if not fams:
        raise ValueError("need at least one verified family")
    phi_r = np.asarray(phi_r, dtype=complex)
    dim_y = phi_r.size
    for f in fams:
        if f.domain.ambient_dim != dim_y:
            raise ValueError("domain does not live in the syndrome space")
        if not f.domain.contains_vector(phi_r / np.linalg.norm(phi_r), tol):
            raise ValueError(f"domain of {f.label or 'family'} does not contain phi_r")
    d = fams[0].algebra.ambient_dim
    ops = [b for f in fams for b in f.algebra.basis]
    for j, i in admissible_pairs(fams, dim_y, tol):
        prods = np.einsum("iab,jbc->ijac", fams[j].algebra.basis, fams[i].algebra.basis)
        ops.extend(prods.reshape(-1, d, d))
    return span_of(ops)


def combine_domains(domains: Sequence[Subspace], tol: float = 1e-8) -> Subspace:
    """Span of several verified syndrome domains (e.g. from different references)."""
    vecs = [c for s in domains for c in s.basis.T]
    return orthonormalize(vecs, tol=tol, ambient_dim=domains[0].ambient_dim)
