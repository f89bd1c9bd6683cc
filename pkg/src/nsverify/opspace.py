"""Operator spaces under the Hilbert-Schmidt inner product ``<A, B> = Tr(A^dagger B)``.

An :class:`OperatorSpace` stores an HS-orthonormal basis as an array of
shape ``(dim, d, d)``. Spans are computed on column-major vectorisations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .linalg import ATOL, RANK_RTOL, as_matrix, dagger, null_space, orth_columns


def _vec(ops: np.ndarray) -> np.ndarray:
    """Column-major vectorisation; returns one column per operator."""
    ops = np.asarray(ops, dtype=complex)
    n, d = ops.shape[0], ops.shape[-1]
    return ops.transpose(0, 2, 1).reshape(n, d * d).T


def _unvec(cols: np.ndarray, d: int) -> np.ndarray:
    return cols.T.reshape(-1, d, d).transpose(0, 2, 1)


@dataclass(frozen=True)
class OperatorSpace:
    """Linear space of ``d x d`` operators with an HS-orthonormal basis."""

    ambient_dim: int
    basis: np.ndarray
    tol: float = ATOL

    def __post_init__(self):
        d = self.ambient_dim
        b = np.asarray(self.basis, dtype=complex).reshape(-1, d, d)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def vectors(self) -> np.ndarray:
        return _vec(self.basis)

    def project(self, op) -> np.ndarray:
        """Orthogonal (HS) projection of ``op`` onto the space."""
        v = _vec(np.asarray(op, dtype=complex)[None])[:, 0]
        cols = self.vectors()
        return _unvec(cols @ (dagger(cols) @ v)[:, None], self.ambient_dim)[0]

    def residual(self, op) -> float:
        op = np.asarray(op, dtype=complex)
        return float(np.linalg.norm(op - self.project(op)))

    def gram(self) -> np.ndarray:
        cols = self.vectors()
        return dagger(cols) @ cols

    def adjoint(self) -> "OperatorSpace":
        return OperatorSpace(self.ambient_dim, dagger(self.basis), self.tol)


def span_of(ops: Sequence, tol: float = RANK_RTOL, ambient_dim: int | None = None) -> OperatorSpace:
    """HS-orthonormal basis of the linear span of ``ops``.

    Rank is decided by an SVD of the stacked vectorisations with relative
    threshold ``tol``.
    """
    mats = [as_matrix(o) for o in ops]
    if not mats:
        raise ValueError("span_of needs at least one operator")
    d = mats[0].shape[0]
    for m in mats:
        if m.shape != (d, d):
            raise ValueError(f"operators must all be {d}x{d}, got {m.shape}")
    if ambient_dim is not None and ambient_dim != d:
        raise ValueError("ambient_dim does not match operator size")
    cols = orth_columns(_vec(np.stack(mats)), rtol=tol)
    return OperatorSpace(d, _unvec(cols, d))


def _check_dims(a: OperatorSpace, b: OperatorSpace):
    if a.ambient_dim != b.ambient_dim:
        raise ValueError(f"ambient dims differ: {a.ambient_dim} vs {b.ambient_dim}")


def sum_space(*spaces: OperatorSpace, tol: float = RANK_RTOL) -> OperatorSpace:
    d = spaces[0].ambient_dim
    for s in spaces[1:]:
        _check_dims(spaces[0], s)
    ops = np.concatenate([s.basis for s in spaces])
    if ops.shape[0] == 0:
        return OperatorSpace(d, np.zeros((0, d, d), dtype=complex))
    return span_of(list(ops), tol=tol)


def identity_space(d: int) -> OperatorSpace:
    return OperatorSpace(d, (np.eye(d, dtype=complex) / np.sqrt(d))[None])


def full_space(d: int) -> OperatorSpace:
    return OperatorSpace(d, np.eye(d * d, dtype=complex).reshape(d * d, d, d))


def contains(outer: OperatorSpace, inner: OperatorSpace, tol: float = ATOL) -> bool:
    """True iff every basis element of ``inner`` lies in ``outer`` within ``tol``."""
    _check_dims(outer, inner)
    if inner.dim == 0:
        return True
    cols_o = outer.vectors()
    cols_i = inner.vectors()
    resid = cols_i - cols_o @ (dagger(cols_o) @ cols_i)
    return bool(np.linalg.norm(resid, axis=0).max() <= tol)


def product_span(a: OperatorSpace, b: OperatorSpace, tol: float = RANK_RTOL) -> OperatorSpace:
    """``span{A B : A in a.basis, B in b.basis}``."""
    _check_dims(a, b)
    d = a.ambient_dim
    if a.dim == 0 or b.dim == 0:
        return OperatorSpace(d, np.zeros((0, d, d), dtype=complex))
    prods = np.einsum("iab,jbc->ijac", a.basis, b.basis).reshape(-1, d, d)
    return span_of(list(prods), tol=tol)


class AlgebraFlags(NamedTuple):
    contains_identity: bool
    dagger_closed: bool
    mult_closed: bool

    def all(self) -> bool:
        return self.contains_identity and self.dagger_closed and self.mult_closed


def verify_algebra(space: OperatorSpace, tol: float = 1e-8) -> AlgebraFlags:
    """Check identity membership, adjoint closure and product closure."""
    d = space.ambient_dim
    if space.dim == 0:
        return AlgebraFlags(False, True, True)
    return AlgebraFlags(
        contains(space, identity_space(d), tol),
        contains(space, space.adjoint(), tol),
        _products_inside(space, tol),
    )


def _products_inside(space: OperatorSpace, tol: float) -> bool:
    # project every pairwise product straight onto the space (no span SVD);
    # residuals are measured relative to each product's norm
    d = space.ambient_dim
    cols_s = space.vectors()
    for a in space.basis:
        prods = _vec(a[None] @ space.basis)
        resid = prods - cols_s @ (dagger(cols_s) @ prods)
        norms = np.linalg.norm(prods, axis=0)
        if np.any(np.linalg.norm(resid, axis=0) > tol * np.maximum(norms, 1.0 / d)):
            return False
    return True


@dataclass(frozen=True)
class ErrorAlgebra:
    """An operator space together with its verified algebra flags.

    :func:`algebra_closure` with ``include_identity=True`` always yields all
    three flags true; decomposition requires that.
    """

    space: OperatorSpace
    flags: AlgebraFlags

    @classmethod
    def from_space(cls, space: OperatorSpace, tol: float = 1e-8) -> "ErrorAlgebra":
        return cls(space, verify_algebra(space, tol))

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def ambient_dim(self) -> int:
        return self.space.ambient_dim

    @property
    def basis(self) -> np.ndarray:
        return self.space.basis


def algebra_closure(gen: OperatorSpace | Sequence, include_identity: bool = True,
                    tol: float = RANK_RTOL) -> ErrorAlgebra:
    """Smallest dagger-closed, multiplicatively closed space containing ``gen``.

    Grows ``S`` by right-multiplying the newly added directions by the
    generators and their adjoints until no new direction appears. This reaches
    the same fixed point as repeatedly taking ``span(S, S^dagger, S S)`` but
    costs ``dim(A) * |gen|`` products instead of ``dim(A)^2`` per round.
    """
    if not isinstance(gen, OperatorSpace):
        gen = span_of(gen, tol=tol)
    d = gen.ambient_dim
    gens = np.concatenate([gen.basis, dagger(gen.basis)])
    start = list(gens)
    if include_identity:
        start.append(np.eye(d, dtype=complex))
    if not start:
        return ErrorAlgebra.from_space(OperatorSpace(d, np.zeros((0, d, d), dtype=complex)))
    space = span_of(start, tol=tol)
    frontier = space.basis if gens.shape[0] else space.basis[:0]
    for _ in range(d * d):
        if frontier.shape[0] == 0:
            break
        prods = np.einsum("iab,jbc->ijac", frontier, gens).reshape(-1, d, d)
        cols_s = space.vectors()
        cols_p = _vec(prods)
        resid = cols_p - cols_s @ (dagger(cols_s) @ cols_p)
        scale = max(1.0, float(np.linalg.norm(cols_p, axis=0).max()))
        new = orth_columns(resid, rtol=tol, scale=scale)
        if new.shape[1]:
            # re-project so new directions stay orthogonal to the basis at machine precision
            new = new - cols_s @ (dagger(cols_s) @ new)
            new = orth_columns(new, rtol=tol, scale=1.0)
        frontier = _unvec(new, d)
        if frontier.shape[0]:
            space = OperatorSpace(d, np.concatenate([space.basis, frontier]))
    return ErrorAlgebra.from_space(space)


def commutant(a: OperatorSpace | ErrorAlgebra, tol: float = RANK_RTOL,
              seed: int = 0) -> OperatorSpace:
    """``{X : B X = X B for every basis element B}``.

    Computed as the joint null space of the maps ``X -> B X - X B``. The
    candidate space is narrowed one map at a time, starting with two random
    combinations of the basis so later steps act on a small subspace. Once
    the random probes are done, a batched check against the whole basis
    usually ends the loop early.
    """
    space = a.space if isinstance(a, ErrorAlgebra) else a
    d = space.ambient_dim
    eye = np.eye(d, dtype=complex)
    rng = np.random.default_rng(seed)
    probes = []
    if space.dim > 1:
        for _ in range(2):
            c = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
            probes.append(np.tensordot(c / np.linalg.norm(c), space.basis, axes=1))
    n_random = len(probes)
    probes.extend(space.basis)
    cand = np.eye(d * d, dtype=complex)
    for i, b in enumerate(probes):
        if cand.shape[1] == 0:
            break
        if i == n_random and _commutes_with_all(_unvec(cand, d), space.basis, tol):
            break
        # vec(BX - XB) = (I kron B - B^T kron I) vec(X), column-major vec
        lmap = np.kron(eye, b) - np.kron(b.T, eye)
        scale = 2.0 * max(np.linalg.norm(b, 2), 1e-300)
        cand = cand @ null_space(lmap @ cand, rtol=tol, scale=scale)
        cand = orth_columns(cand)
    return OperatorSpace(d, _unvec(cand, d))


def _commutes_with_all(xs: np.ndarray, bs: np.ndarray, tol: float) -> bool:
    # xs and bs are HS-normalised, so the commutator norms are already relative
    for b in bs:
        comm = b[None] @ xs - xs @ b[None]
        if np.linalg.norm(comm, axis=(1, 2)).max() > tol:
            return False
    return True


def intersect(a: OperatorSpace, b: OperatorSpace, tol: float = 1e-9) -> OperatorSpace:
    """Intersection via the null space of ``P_a^perp + P_b^perp``."""
    _check_dims(a, b)
    n = a.ambient_dim ** 2
    ca, cb = a.vectors(), b.vectors()
    m = 2 * np.eye(n, dtype=complex) - ca @ dagger(ca) - cb @ dagger(cb)
    w, v = np.linalg.eigh((m + dagger(m)) / 2)
    return OperatorSpace(a.ambient_dim, _unvec(v[:, w <= tol], a.ambient_dim))


def center(a: OperatorSpace | ErrorAlgebra, tol: float = 1e-9) -> OperatorSpace:
    space = a.space if isinstance(a, ErrorAlgebra) else a
    return intersect(space, commutant(space), tol)


def restrict(space: OperatorSpace, iso: np.ndarray) -> OperatorSpace:
    """Span of ``iso^dagger A iso`` over the basis (compression to a subspace)."""
    ops = dagger(iso)[None] @ space.basis @ iso[None]
    return span_of(list(ops))
