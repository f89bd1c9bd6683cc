"""Dense complex matrix and vector kernel.

Operators and states are plain ``numpy`` arrays of dtype ``complex128``.
Subspaces carry an orthonormal column basis. Everything here is a pure
function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

ATOL = 1e-9
RANK_RTOL = 1e-8
MAX_DIM = 4096


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if a.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def as_vector(v, name: str = "vector") -> np.ndarray:
    a = np.asarray(v, dtype=complex).reshape(-1)
    if a.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def kron(a, b, max_dim: int = MAX_DIM) -> np.ndarray:
    """Kronecker product ``a (x) b``.

    Raises
    ------
    OverflowError
        If either output dimension exceeds ``max_dim``.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > max_dim:
        raise OverflowError(f"kron output {rows}x{cols} exceeds max_dim={max_dim}")
    return np.kron(a, b)


def kron_all(ops: Sequence[np.ndarray], max_dim: int = MAX_DIM) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = kron(out, op, max_dim=max_dim)
    return out


def rank_tol(m, tol: float = RANK_RTOL) -> int:
    """Number of singular values above ``tol`` times the largest one."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = np.linalg.svd(np.asarray(m, dtype=complex), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def eigh_hermitian(a, tol: float = ATOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition ``a = V diag(w) V^dagger`` of a Hermitian matrix."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - dagger(a)).max() > tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return np.linalg.eigh((a + dagger(a)) / 2)


def orth_columns(m, rtol: float = RANK_RTOL, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis (as columns) of the column span of ``m``, via SVD.

    Singular values above ``rtol * scale`` are kept; ``scale`` defaults to the
    largest singular value.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape[1] == 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    return u[:, s > rtol * (s[0] if scale is None else scale)]


def null_space(m, rtol: float = RANK_RTOL, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis of the right null space of ``m``.

    Singular values at or below ``rtol * scale`` count as zero; ``scale``
    defaults to the largest singular value (or 1 for a zero matrix).
    """
    m = np.asarray(m, dtype=complex)
    n = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    if scale is None:
        scale = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.count_nonzero(s > rtol * scale))
    return dagger(vh[rank:])


@dataclass(frozen=True)
class Subspace:
    """Subspace of ``C^ambient_dim`` with orthonormal basis columns.

    An empty basis (shape ``(ambient_dim, 0)``) is the zero subspace.
    """

    ambient_dim: int
    basis: np.ndarray
    tol: float = ATOL

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex).reshape(self.ambient_dim, -1)
        object.__setattr__(self, "basis", b)
        gram = dagger(b) @ b
        if b.shape[1] and np.abs(gram - np.eye(b.shape[1])).max() > max(self.tol, 1e-12) * 10:
            raise ValueError("subspace basis is not orthonormal")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ dagger(self.basis)

    def residual(self, v) -> float:
        """Norm of the component of ``v`` orthogonal to this subspace."""
        v = as_vector(v)
        return float(np.linalg.norm(v - self.basis @ (dagger(self.basis) @ v)))

    def contains_vector(self, v, tol: float | None = None) -> bool:
        return self.residual(v) <= (self.tol if tol is None else tol)

    def contains(self, other: "Subspace", tol: float | None = None) -> bool:
        tol = self.tol if tol is None else tol
        return all(self.residual(c) <= tol for c in other.basis.T)

    def complement(self) -> "Subspace":
        if self.dim == 0:
            return Subspace(self.ambient_dim, np.eye(self.ambient_dim, dtype=complex), self.tol)
        return Subspace(self.ambient_dim, null_space(dagger(self.basis), scale=1.0), self.tol)

    @classmethod
    def zero(cls, ambient_dim: int, tol: float = ATOL) -> "Subspace":
        return cls(ambient_dim, np.zeros((ambient_dim, 0), dtype=complex), tol)

    @classmethod
    def full(cls, ambient_dim: int, tol: float = ATOL) -> "Subspace":
        return cls(ambient_dim, np.eye(ambient_dim, dtype=complex), tol)


def orthonormalize(vectors: Sequence, tol: float = ATOL, ambient_dim: int | None = None) -> Subspace:
    """Gram-Schmidt orthonormal basis of ``span(vectors)``.

    Each vector is projected against the basis built so far (two passes, to
    keep orthogonality at machine precision); it is dropped when the
    residual norm is at most ``tol``.
    """
    vecs = [as_vector(v) for v in vectors]
    if ambient_dim is None:
        if not vecs:
            raise ValueError("ambient_dim required for an empty vector list")
        ambient_dim = vecs[0].size
    basis: list[np.ndarray] = []
    for v in vecs:
        if v.size != ambient_dim:
            raise ValueError(f"vector of dim {v.size} in ambient dim {ambient_dim}")
        r = v.copy()
        for _ in range(2):
            for b in basis:
                r -= b * np.vdot(b, r)
        norm = np.linalg.norm(r)
        if norm > tol:
            basis.append(r / norm)
    mat = np.column_stack(basis) if basis else np.zeros((ambient_dim, 0), dtype=complex)
    return Subspace(ambient_dim, mat, tol)


def fix_phase(v: np.ndarray) -> tuple[np.ndarray, complex]:
    """Rotate ``v`` so its largest-magnitude amplitude is real positive.

    Returns the rotated vector and the unit phase ``p`` with ``v = p * out``.
    """
    i = int(np.argmax(np.abs(v)))
    if abs(v[i]) == 0:
        return v, 1.0 + 0j
    p = v[i] / abs(v[i])
    return v / p, p


class ProductFactors(NamedTuple):
    """Result of :func:`factor_product`.

    ``q`` is ``None`` when the input was the zero vector (``zero`` is then
    true and ``y`` is all zeros).
    """

    q: np.ndarray | None
    y: np.ndarray
    zero: bool = False


def rank_one_split(v, dim_q: int, dim_y: int) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Best rank-one split of ``v`` seen as a ``dim_q x dim_y`` matrix.

    Returns ``(q, y, residual, smax)`` with ``q`` a unit vector,
    ``|q (x) y - v| = residual`` and ``smax`` the leading singular value.
    """
    v = as_vector(v)
    if v.size != dim_q * dim_y:
        raise ValueError(f"vector dim {v.size} != {dim_q} x {dim_y}")
    m = v.reshape(dim_q, dim_y)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    q, phase = fix_phase(u[:, 0])
    y = s[0] * vh[0] * phase
    residual = float(np.sqrt(max(np.sum(s[1:] ** 2), 0.0)))
    return q, y, residual, float(s[0])


def factor_product(v, dim_q: int, dim_y: int, tol: float = RANK_RTOL) -> ProductFactors | None:
    """Split ``v`` as ``q (x) y`` if it is a product vector.

    ``v`` is reshaped row-major into a ``dim_q x dim_y`` matrix; it is a
    product when that matrix has numerical rank at most one (relative
    threshold ``tol``). ``q`` is normalised with its largest amplitude real
    positive and ``y`` absorbs the norm. Returns ``None`` for entangled input.
    """
    v = as_vector(v)
    if v.size != dim_q * dim_y:
        raise ValueError(f"vector dim {v.size} != {dim_q} x {dim_y}")
    if np.linalg.norm(v) <= ATOL:
        return ProductFactors(None, np.zeros(dim_y, dtype=complex), True)
    if rank_tol(v.reshape(dim_q, dim_y), tol) > 1:
        return None
    q, y, _, _ = rank_one_split(v, dim_q, dim_y)
    return ProductFactors(q, y, False)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary (QR of a Ginibre matrix with phase fix)."""
    g = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + dagger(g)) / 2


def random_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def expm_hermitian(h, t: float) -> np.ndarray:
    """``exp(-i t h)`` for Hermitian ``h``."""
    w, v = eigh_hermitian(h)
    return (v * np.exp(-1j * t * w)) @ dagger(v)
