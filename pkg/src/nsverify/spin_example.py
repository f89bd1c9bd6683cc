"""Three-qubit noiseless qubit under collective noise.

``C^8 = H_{3/2} (+) L (x) Z`` where ``L`` (the logical copy index) and ``Z``
(``j_z = +1/2, -1/2``) are both two-dimensional. The default decoder sends
``|l, j_z>`` to ``|q=l>|y>|0>`` (``y = 0`` for ``j_z = +1/2``) and ``H_{3/2}``
to the slot where the last qubit is ``|1>``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .channels import Channel, collective_dephasing, collective_spin_ops, compose
from .decomp import SubsystemBlock, SubsystemDecomposition
from .linalg import Subspace, dagger
from .opspace import (ErrorAlgebra, algebra_closure, contains,
                      span_of)
from .verify import (Classification, CodeSpec, DecodingMap, OracleResult, Tolerances,
                     VerificationReport, VerifiedFamily, admissible_pairs, classify,
                     combine_domains, enlarge_error_set, encoder_for_reference,
                     reachable_space, theorem_oracle, verify_stability, DEFAULT_TOL)

N_QUBITS = 3
PLUS_HALF = np.array([1, 0], dtype=complex)
MINUS_HALF = np.array([0, 1], dtype=complex)


@dataclass(frozen=True)
class SpinBasis:
    """Coupled basis; ``labels[k] = (j, j_z, copy)`` for column ``k`` of ``vectors``."""

    labels: list
    vectors: np.ndarray

    def index(self, j, jz, copy=0) -> int:
        return self.labels.index((Fraction(j), Fraction(jz), copy))

    def vector(self, j, jz, copy=0) -> np.ndarray:
        return self.vectors[:, self.index(j, jz, copy)]


def _couple_spin_half(states: dict, n_prev: int) -> dict:
    """Couple one more spin-1/2 (rightmost tensor factor) to a coupled basis.

    ``states`` maps ``(path, j, m) -> vector``; ``path`` lists intermediate j
    values. Standard Clebsch-Gordan coefficients for ``j1 (x) 1/2`` with the
    Condon-Shortley phase.
    """
    up = np.array([1, 0], dtype=complex)
    down = np.array([0, 1], dtype=complex)
    half = Fraction(1, 2)
    paths = sorted({(p, j) for p, j, _ in states})
    out = {}
    for path, j1 in paths:
        def ket(m):
            return states.get((path, j1, m))
        for j in ([j1 + half, j1 - half] if j1 > 0 else [j1 + half]):
            m = j
            while m >= -j:
                lo, hi = ket(m - half), ket(m + half)
                norm = 2 * j1 + 1
                if j == j1 + half:
                    a, b = np.sqrt(float((j1 + m + half) / norm)), np.sqrt(float((j1 - m + half) / norm))
                else:
                    a, b = -np.sqrt(float((j1 - m + half) / norm)), np.sqrt(float((j1 + m + half) / norm))
                vec = np.zeros(2 ** (n_prev + 1), dtype=complex)
                if lo is not None:
                    vec += a * np.kron(lo, up)
                if hi is not None:
                    vec += b * np.kron(hi, down)
                out[(path + (j1,), j, m)] = vec
                m -= 1
    return out


def build_spin_basis(n_qubits: int = N_QUBITS) -> SpinBasis:
    """Simultaneous ``J^2``, ``J_z`` eigenbasis, coupling qubits left to right.

    Within each ``j``, ``copy`` enumerates coupling paths in increasing order
    of the intermediate spins (for three qubits: copy 0 has qubits 0 and 1 in
    the singlet, copy 1 in the triplet). Columns are sorted by descending ``j``,
    then copy, then descending ``j_z``.
    """
    half = Fraction(1, 2)
    states = {((), half, half): np.array([1, 0], dtype=complex),
              ((), half, -half): np.array([0, 1], dtype=complex)}
    for k in range(1, n_qubits):
        states = _couple_spin_half(states, k)
    by_j: dict = {}
    for (path, j, m), vec in states.items():
        by_j.setdefault(j, set()).add(path)
    labels, vecs = [], []
    for j in sorted(by_j, reverse=True):
        for copy, path in enumerate(sorted(by_j[j])):
            ms = sorted((m for p, jj, m in states if p == path and jj == j), reverse=True)
            for m in ms:
                labels.append((j, m, copy))
                vecs.append(states[(path, j, m)])
    return SpinBasis(labels, np.column_stack(vecs))


def build_omega(basis: SpinBasis | None = None) -> SubsystemDecomposition:
    """The ``(mult 2, irrep 2)`` block on ``H_{1/2}`` with ``H_{3/2}`` as complement."""
    basis = basis or build_spin_basis()
    half = Fraction(1, 2)
    cols = [basis.vector(half, jz, copy) for copy in (0, 1) for jz in (half, -half)]
    block = SubsystemBlock(2, 2, np.column_stack(cols))
    h32 = np.column_stack([basis.vector(Fraction(3, 2), Fraction(m, 2)) for m in (3, 1, -1, -3)])
    return SubsystemDecomposition(8, [block], Subspace(8, h32))


def default_decoder(basis: SpinBasis | None = None) -> DecodingMap:
    """Decoder realising omega: ``|l, j_z>`` to ``|l>_Q |j_z>_Y |0>``.

    ``H_{3/2}`` (``j_z = 3/2, 1/2, -1/2, -3/2``) goes to ``|00 1>, |01 1>,
    |10 1>, |11 1>``. This choice is a fixed convention.
    """
    omega = build_omega(basis)
    block = omega.blocks[0]
    u = np.zeros((8, 8), dtype=complex)
    for k in range(4):
        u[2 * k, :] = block.isometry[:, k].conj()
        u[2 * k + 1, :] = omega.complement.basis[:, k].conj()
    return DecodingMap(u, dim_q=2, dim_y=2)


def default_code(d_map: DecodingMap | None = None, phi_r=PLUS_HALF) -> CodeSpec:
    return encoder_for_reference(d_map or default_decoder(), phi_r)


def axis_channels() -> dict[str, Channel]:
    return {u: collective_dephasing(u, N_QUBITS) for u in "xyz"}


def axis_algebra(channel: Channel) -> ErrorAlgebra:
    return ErrorAlgebra.from_space(span_of(channel.kraus))


def permutation_matrices(n_qubits: int = N_QUBITS) -> list[np.ndarray]:
    """Transpositions of qubit pairs as ``2^n x 2^n`` permutation matrices."""
    d = 2 ** n_qubits
    mats = []
    for a, b in itertools.combinations(range(n_qubits), 2):
        p = np.zeros((d, d), dtype=complex)
        for idx in range(d):
            bits = [(idx >> (n_qubits - 1 - k)) & 1 for k in range(n_qubits)]
            bits[a], bits[b] = bits[b], bits[a]
            p[int("".join(map(str, bits)), 2), idx] = 1
        mats.append(p)
    return mats


def build_collective_algebra(check_invariance: bool = True) -> ErrorAlgebra:
    """Closure of ``{1, J_x, J_y, J_z}`` on three qubits (dimension 20)."""
    jx, jy, jz = collective_spin_ops(N_QUBITS)
    alg = algebra_closure([np.eye(8), jx, jy, jz])
    if check_invariance:
        for p in permutation_matrices():
            for a in alg.basis:
                if np.abs(p @ a - a @ p).max() > 1e-10:
                    raise RuntimeError("collective algebra element is not permutation invariant")
    return alg


@dataclass
class ScenarioBundle:
    """Outcome of one end-to-end verification scenario."""

    name: str
    reports: dict = field(default_factory=dict)
    containments: dict = field(default_factory=dict)
    oracle: dict = field(default_factory=dict)
    verdict: str = ""
    notes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (all(r.classification != Classification.FAILED for r in self.reports.values())
                and all(self.containments.values())
                and all(o.passed for o in self.oracle.values()))


def _family_report(name, alg, d_map, code, tol) -> VerificationReport:
    rep = verify_stability(d_map, code, alg.space, tol=tol)
    rep.label = name
    if rep.classification is None:
        rep.v_space = reachable_space(alg, d_map, code, rep, tol)
        rep.classification = classify(rep.v_space, d_map.dim_y)
        oracle = theorem_oracle(alg, d_map, rep.v_space, tol.oracle)
        rep.oracle_residual = oracle.residual
    return rep


def kraus_errors(chans: dict, axes: str) -> tuple[list, list]:
    ops, labels = [], []
    for u in axes:
        for a, k in enumerate(chans[u].kraus):
            ops.append(k)
            labels.append(f"K{a}^{u}")
    return ops, labels


def scenario_single_axis(d_map: DecodingMap | None = None, code: CodeSpec | None = None,
                         tol: Tolerances = DEFAULT_TOL, jobs: int = 1) -> ScenarioBundle:
    """Verify under the 12 single-axis Kraus operators, then enlarge to ``A_c``."""
    d_map = d_map or default_decoder()
    code = code or default_code()
    chans = axis_channels()
    bundle = ScenarioBundle("single-axis")
    ops, labels = kraus_errors(chans, "xyz")
    base = verify_stability(d_map, code, ops, labels, tol, jobs=jobs)
    base.label = "E"
    bundle.reports["E"] = base
    if base.classification == Classification.FAILED:
        bundle.verdict = Classification.FAILED.value
        return bundle
    families = []
    for u in "xyz":
        alg = axis_algebra(chans[u])
        rep = _family_report(f"A_{u}", alg, d_map, code, tol)
        bundle.reports[f"A_{u}"] = rep
        if rep.classification == Classification.FAILED:
            bundle.verdict = Classification.FAILED.value
            return bundle
        bundle.oracle[f"A_{u}"] = OracleResult(rep.oracle_residual <= tol.oracle, rep.oracle_residual)
        families.append(VerifiedFamily(alg, rep.v_space, f"A_{u}"))
    enlarged = enlarge_error_set(families, base.phi_r)
    a_c = build_collective_algebra()
    pairs = admissible_pairs(families, d_map.dim_y)
    bundle.notes["admitted_products"] = [f"{families[j].label}*{families[i].label}" for j, i in pairs]
    bundle.notes["dim_E_prime"] = enlarged.dim
    bundle.containments["E' >= A_c"] = contains(enlarged, a_c.space, 1e-8)
    _finish_with_collective(bundle, a_c, d_map, code, tol)
    return bundle


def _finish_with_collective(bundle, a_c, d_map, code, tol):
    rep = _family_report("A_c", a_c, d_map, code, tol)
    bundle.reports["A_c"] = rep
    if rep.classification == Classification.FAILED:
        bundle.verdict = Classification.FAILED.value
        return
    bundle.oracle["A_c"] = theorem_oracle(a_c, d_map, rep.v_space, tol.oracle)
    bundle.verdict = (rep.classification.value if bundle.ok else Classification.FAILED.value)


def composite_channels() -> tuple[Channel, Channel]:
    """``E_xy`` (y then x) and ``E_yx`` (x then y)."""
    chans = axis_channels()
    return compose(chans["x"], chans["y"]), compose(chans["y"], chans["x"])


def kraus_sets_adjoint(c1: Channel, c2: Channel, tol: float = 1e-10) -> bool:
    """True iff ``c2``'s Kraus set equals ``{K^dagger : K in c1}`` as a multiset."""
    if len(c1) != len(c2):
        return False
    remaining = list(c2.kraus)
    for k in c1.kraus:
        kd = dagger(k)
        hit = next((i for i, m in enumerate(remaining) if np.abs(m - kd).max() <= tol), None)
        if hit is None:
            return False
        remaining.pop(hit)
    return True


def scenario_composite(d_map: DecodingMap | None = None, code: CodeSpec | None = None,
                       tol: Tolerances = DEFAULT_TOL, jobs: int = 1) -> ScenarioBundle:
    """Verify under the cascaded channels ``E_xy`` and ``E_yx`` (32 products)."""
    d_map = d_map or default_decoder()
    code = code or default_code()
    e_xy, e_yx = composite_channels()
    bundle = ScenarioBundle("composite")
    ops = list(e_xy.kraus) + list(e_yx.kraus)
    labels = ([f"K{b}^x K{a}^y" for b in range(4) for a in range(4)]
              + [f"K{b}^y K{a}^x" for b in range(4) for a in range(4)])
    base = verify_stability(d_map, code, ops, labels, tol, jobs=jobs)
    base.label = "E''"
    bundle.reports["E''"] = base
    bundle.notes["E_yx == E_xy^dagger"] = kraus_sets_adjoint(e_xy, e_yx)
    if base.classification == Classification.FAILED:
        bundle.verdict = Classification.FAILED.value
        return bundle
    e2 = span_of(ops)
    bundle.notes["dim_E_double_prime"] = e2.dim
    a_c = build_collective_algebra()
    bundle.containments["E'' >= A_c"] = contains(e2, a_c.space, 1e-8)
    _finish_with_collective(bundle, a_c, d_map, code, tol)
    return bundle


def scenario_two_reference(d_map: DecodingMap | None = None,
                           tol: Tolerances = DEFAULT_TOL, jobs: int = 1) -> ScenarioBundle:
    """Verify the single-axis errors with ``phi_r = |+1/2>`` and ``|-1/2>``.

    Each family's verified domain is the span of its reachable spaces over
    both references. With the references spanning ``Y`` every family is
    verified on all of ``Y``, so all products are admissible.
    """
    d_map = d_map or default_decoder()
    chans = axis_channels()
    bundle = ScenarioBundle("two-reference")
    ops, labels = kraus_errors(chans, "xyz")
    domains: dict = {u: [] for u in "xyz"}
    refs = {"+1/2": PLUS_HALF, "-1/2": MINUS_HALF}
    for tag, phi in refs.items():
        code = encoder_for_reference(d_map, phi)
        base = verify_stability(d_map, code, ops, labels, tol, jobs=jobs)
        base.label = f"E@{tag}"
        bundle.reports[base.label] = base
        if base.classification == Classification.FAILED:
            bundle.verdict = Classification.FAILED.value
            return bundle
        for u in "xyz":
            rep = _family_report(f"A_{u}@{tag}", axis_algebra(chans[u]), d_map, code, tol)
            bundle.reports[rep.label] = rep
            if rep.classification == Classification.FAILED:
                bundle.verdict = Classification.FAILED.value
                return bundle
            domains[u].append(rep.v_space)
    refs_span = combine_domains([Subspace(2, phi[:, None]) for phi in refs.values()])
    bundle.notes["dim_reference_span"] = refs_span.dim
    families = []
    for u in "xyz":
        dom = combine_domains(domains[u])
        bundle.notes[f"dim_domain_A_{u}"] = dom.dim
        families.append(VerifiedFamily(axis_algebra(chans[u]), dom, f"A_{u}"))
    enlarged = enlarge_error_set(families, PLUS_HALF)
    bundle.notes["dim_enlarged"] = enlarged.dim
    a_c = build_collective_algebra()
    bundle.containments["enlarged >= A_c"] = contains(enlarged, a_c.space, 1e-8)
    bundle.oracle["A_c"] = theorem_oracle(a_c, d_map, Subspace.full(2), tol.oracle)
    if bundle.ok:
        bundle.verdict = classify(Subspace.full(2), d_map.dim_y).value
    else:
        bundle.verdict = Classification.FAILED.value
    return bundle


SCENARIOS = {
    "single-axis": scenario_single_axis,
    "composite": scenario_composite,
    "two-reference": scenario_two_reference,
}
