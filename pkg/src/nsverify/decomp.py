"""Wedderburn decomposition of finite-dimensional dagger-closed matrix algebras.

For an algebra ``A`` on ``C^d`` with identity, :func:`decompose` finds
isometries ``W_j`` such that ``W_j^dagger a W_j = 1_{n_j} (x) M_j(a)`` for
every ``a`` in ``A``, where ``n_j`` is the multiplicity (noiseless factor)
and ``M_j`` an irreducible representation of size ``d_j`` (syndrome factor).
Isometry columns use the multiplicity-major index ``l * d_j + z``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import ATOL, Subspace, as_matrix, dagger, orth_columns
from .opspace import ErrorAlgebra, OperatorSpace, center, commutant, restrict

MAX_SEED_RETRIES = 8


class DecompositionError(RuntimeError):
    """Raised when no seed produces a consistent block structure."""


@dataclass(frozen=True)
class SubsystemBlock:
    mult_dim: int
    irrep_dim: int
    isometry: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return (self.mult_dim, self.irrep_dim)

    @property
    def size(self) -> int:
        return self.mult_dim * self.irrep_dim


@dataclass(frozen=True)
class SubsystemDecomposition:
    ambient_dim: int
    blocks: list[SubsystemBlock]
    complement: Subspace = field(default=None)

    def __post_init__(self):
        if self.complement is None:
            object.__setattr__(self, "complement", Subspace.zero(self.ambient_dim))
        total = sum(b.size for b in self.blocks) + self.complement.dim
        if total != self.ambient_dim:
            raise ValueError(f"block sizes sum to {total}, expected {self.ambient_dim}")

    def block_shapes(self) -> list[tuple[int, int]]:
        return [b.shape for b in self.blocks]

    def stacked_isometry(self) -> np.ndarray:
        """All block isometries and the complement basis side by side."""
        cols = [b.isometry for b in self.blocks] + [self.complement.basis]
        return np.hstack(cols)

    def orthogonality_error(self) -> float:
        w = self.stacked_isometry()
        return float(np.abs(dagger(w) @ w - np.eye(w.shape[1])).max())


def tilde_conjugate(e, block: SubsystemBlock) -> np.ndarray:
    """``W^dagger e W``: the operator ``e`` seen in the block's subsystem picture."""
    e = as_matrix(e)
    w = block.isometry
    if e.shape != (w.shape[0], w.shape[0]):
        raise ValueError(f"operator shape {e.shape} does not match ambient dim {w.shape[0]}")
    return dagger(w) @ e @ w


def identity_tensor_test(m, dim_l: int, dim_z: int, tol: float = ATOL) -> np.ndarray | None:
    """Return ``M`` if ``m = 1_{dim_l} (x) M`` within ``tol`` (Frobenius), else ``None``."""
    m = as_matrix(m)
    n = dim_l * dim_z
    if m.shape != (n, n):
        raise ValueError(f"expected {n}x{n} matrix, got {m.shape}")
    t = m.reshape(dim_l, dim_z, dim_l, dim_z)
    red = np.einsum("lalb->ab", t) / dim_l
    if np.linalg.norm(m - np.kron(np.eye(dim_l), red)) > tol:
        return None
    return red


def _hermitian_parts(ops: np.ndarray) -> np.ndarray:
    return np.concatenate([(ops + dagger(ops)) / 2, (ops - dagger(ops)) / 2j])


def _random_hermitian_element(space: OperatorSpace, rng: np.random.Generator) -> np.ndarray:
    herm = _hermitian_parts(space.basis)
    c = rng.standard_normal(herm.shape[0])
    h = np.tensordot(c, herm, axes=1)
    return (h + dagger(h)) / 2


def _eigen_clusters(h: np.ndarray, rel_gap: float = 1e-6) -> list[np.ndarray]:
    """Eigenvectors of Hermitian ``h`` grouped by (numerically) equal eigenvalue."""
    w, v = np.linalg.eigh(h)
    scale = max(1.0, float(np.abs(w).max()))
    groups = [[0]]
    for i in range(1, w.size):
        if w[i] - w[i - 1] > rel_gap * scale:
            groups.append([i])
        else:
            groups[-1].append(i)
    return [v[:, g] for g in groups]


def _polar_unitary(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u, s, vh = np.linalg.svd(m)
    return u @ vh, s


def _decompose_once(alg: ErrorAlgebra, comm: OperatorSpace, cent: OperatorSpace,
                    rng: np.random.Generator, tol: float) -> list[SubsystemBlock] | None:
    h = _random_hermitian_element(cent, rng)
    central = _eigen_clusters(h)
    # a generic central element has exactly dim(Z) distinct eigenvalues
    if len(central) != cent.dim:
        return None
    blocks = []
    for proj_basis in central:
        comm_blk = restrict(comm, proj_basis)
        n = int(round(np.sqrt(comm_blk.dim)))
        if n * n != comm_blk.dim or proj_basis.shape[1] % n:
            return None
        irrep = proj_basis.shape[1] // n
        copies = _eigen_clusters(_random_hermitian_element(comm_blk, rng))
        if len(copies) != n or any(c.shape[1] != irrep for c in copies):
            return None
        fiducial = copies[0]
        # transport the fiducial basis to each copy with a generic commutant element;
        # its copy-to-copy block is a scalar times an intertwiner
        coeffs = rng.standard_normal(comm_blk.dim) + 1j * rng.standard_normal(comm_blk.dim)
        link = np.tensordot(coeffs, comm_blk.basis, axes=1)
        frames = [fiducial]
        for other in copies[1:]:
            inter = dagger(other) @ link @ fiducial
            unitary, s = _polar_unitary(inter)
            if s[0] < 1e-6 or s[-1] < (1 - 1e-6) * s[0]:
                return None
            frames.append(other @ unitary)
        local = np.hstack(frames)
        blocks.append(SubsystemBlock(n, irrep, proj_basis @ local))
    for blk in blocks:
        for a in alg.basis:
            if identity_tensor_test(tilde_conjugate(a, blk), blk.mult_dim, blk.irrep_dim, tol) is None:
                return None
    blocks.sort(key=lambda b: (-b.irrep_dim, -b.mult_dim))
    return blocks


def decompose(alg: ErrorAlgebra, seed: int = 0, tol: float = 1e-8) -> SubsystemDecomposition:
    """Split ``C^d`` into ``(multiplicity x irrep)`` blocks of the algebra.

    Minimal central projections come from the eigenspaces of a random Hermitian
    central element. Inside each central block, a random Hermitian element of
    the compressed commutant has ``mult_dim`` eigenspaces of size
    ``irrep_dim``; one is kept as the fiducial copy and carried to the others
    with the unitary part of a generic commutant element. Unlucky draws are
    caught by the block-consistency check and retried with the next seed.

    Raises
    ------
    ValueError
        If ``alg`` is not a dagger-closed algebra with identity.
    DecompositionError
        If ``MAX_SEED_RETRIES`` seeds all fail.
    """
    if not alg.flags.all():
        raise ValueError(f"input is not a unital dagger-closed algebra: {alg.flags}")
    d = alg.ambient_dim
    comm = commutant(alg)
    cent = center(alg)
    for attempt in range(MAX_SEED_RETRIES):
        rng = np.random.default_rng([seed, attempt])
        blocks = _decompose_once(alg, comm, cent, rng, tol)
        if blocks is not None:
            return SubsystemDecomposition(d, blocks, Subspace.zero(d))
    raise DecompositionError(f"no consistent decomposition after {MAX_SEED_RETRIES} seeds")


def block_range(block: SubsystemBlock) -> Subspace:
    return Subspace(block.isometry.shape[0], orth_columns(block.isometry))
