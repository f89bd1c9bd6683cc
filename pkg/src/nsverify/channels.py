"""Kraus channels and collective-spin noise on qubit registers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import ATOL, as_matrix, dagger, kron_all

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class ChannelError(ValueError):
    pass


def completeness_error(kraus: Sequence[np.ndarray]) -> float:
    d = kraus[0].shape[1]
    total = sum(dagger(k) @ k for k in kraus)
    return float(np.abs(total - np.eye(d)).max())


@dataclass(frozen=True)
class Channel:
    """A CPTP map given by Kraus operators, ``rho -> sum K rho K^dagger``."""

    kraus: tuple
    label: str = ""
    tol: float = ATOL

    def __post_init__(self):
        ks = tuple(as_matrix(k, "Kraus operator") for k in self.kraus)
        if not ks:
            raise ChannelError("channel needs at least one Kraus operator")
        d = ks[0].shape
        if d[0] != d[1] or any(k.shape != d for k in ks):
            raise ChannelError("Kraus operators must be square and of equal size")
        err = completeness_error(ks)
        if err > self.tol:
            raise ChannelError(f"Kraus set of {self.label or 'channel'} is incomplete (error {err:.3g})")
        object.__setattr__(self, "kraus", ks)

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    def __len__(self):
        return len(self.kraus)

    def dagger(self) -> "Channel":
        return Channel(tuple(dagger(k) for k in self.kraus), self.label + "^dag", self.tol)


def identity_channel(d: int) -> Channel:
    return Channel((np.eye(d, dtype=complex),), "id")


def check_density_matrix(rho, tol: float = ATOL) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return ``rho`` as an array."""
    rho = as_matrix(rho, "density matrix")
    if rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.abs(rho - dagger(rho)).max() > tol:
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1) > tol:
        raise ValueError(f"density matrix has trace {tr:.12g}")
    if np.linalg.eigvalsh((rho + dagger(rho)) / 2).min() < -tol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def apply(c: Channel, rho, tol: float = ATOL) -> np.ndarray:
    rho = check_density_matrix(rho, tol)
    if rho.shape[0] != c.dim:
        raise ValueError(f"state dim {rho.shape[0]} does not match channel dim {c.dim}")
    out = sum(k @ rho @ dagger(k) for k in c.kraus)
    try:
        return check_density_matrix(out, tol)
    except ValueError as exc:
        raise ChannelError(f"channel output is not a state: {exc}") from exc


def compose(second: Channel, first: Channel) -> Channel:
    """Cascade ``first`` then ``second``.

    Kraus operators are all products ``V_b U_a`` (``U`` from ``first``), listed
    with ``b`` major; no pruning of redundant products.
    """
    if second.dim != first.dim:
        raise ChannelError("channels act on different dimensions")
    prods = tuple(v @ u for v in second.kraus for u in first.kraus)
    label = f"{second.label}{first.label}" if second.label and first.label else ""
    return Channel(prods, label, max(second.tol, first.tol))


def collective_spin_ops(n_qubits: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Total spin ``J_u = 1/2 sum_i sigma_u^(i)``; qubit 0 is the leftmost factor.

    ``|0>`` is spin up: ``J_z |0...0> = +n/2 |0...0>``.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    eye = np.eye(2, dtype=complex)
    out = []
    for u in "xyz":
        total = sum(
            kron_all([PAULI[u] if i == j else eye for i in range(n_qubits)])
            for j in range(n_qubits)
        )
        out.append(total / 2)
    return tuple(out)


def spectral_projectors(h: np.ndarray, decimals: int = 6) -> list[tuple[float, np.ndarray]]:
    """Eigenvalue / projector pairs of Hermitian ``h``.

    Ordered by descending ``|eigenvalue|``, ties broken by descending
    eigenvalue (``+3/2, -3/2, +1/2, -1/2`` for three spins).
    """
    w, v = np.linalg.eigh(h)
    keys = np.round(w, decimals)
    out = []
    for lam in sorted(set(keys.tolist()), key=lambda x: (-abs(x), -x)):
        cols = v[:, keys == lam]
        out.append((float(lam), cols @ dagger(cols)))
    return out


def collective_dephasing(axis: str, n_qubits: int = 3) -> Channel:
    """Full-strength collective phase damping about ``axis``.

    The Kraus operators are the spectral projectors of ``J_axis``; for three
    qubits these are ``K_0 .. K_3`` onto ``j_axis = +3/2, -3/2, +1/2, -1/2``.
    """
    if axis not in "xyz" or len(axis) != 1:
        raise ValueError(f"axis must be one of x, y, z; got {axis!r}")
    j = dict(zip("xyz", collective_spin_ops(n_qubits)))[axis]
    kraus = tuple(p for _, p in spectral_projectors(j))
    return Channel(kraus, axis)


def kraus_labels(c: Channel) -> list[str]:
    return [f"K{a}^{c.label}" for a in range(len(c))]
