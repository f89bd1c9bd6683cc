"""Random structured inputs shared by the property and acceptance tests."""

import numpy as np

from nsverify.linalg import dagger, random_unitary
from nsverify.verify import DecodingMap, encoder_for_reference


def random_block_structure(d, rng, max_irrep=4, max_mult=3):
    """Random ``[(mult, irrep), ...]`` with ``sum mult * irrep == d``."""
    blocks = []
    left = d
    while left > 0:
        irrep = int(rng.integers(1, min(max_irrep, left) + 1))
        mult = int(rng.integers(1, min(max_mult, left // irrep) + 1))
        blocks.append((mult, irrep))
        left -= mult * irrep
    return blocks


def structured_generators(blocks, rng, n_gen=2):
    """Generators of ``U (+)_j (1_{n_j} (x) Mat_{d_j}) U^dagger`` for Haar ``U``."""
    d = sum(n * k for n, k in blocks)
    u = random_unitary(d, rng)
    gens = []
    for _ in range(n_gen):
        g = np.zeros((d, d), dtype=complex)
        pos = 0
        for n, k in blocks:
            r = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
            g[pos:pos + n * k, pos:pos + n * k] = np.kron(np.eye(n), r)
            pos += n * k
        gens.append(u @ g @ dagger(u))
    return gens


def expected_dims(blocks):
    """``(dim A, dim A')`` for a block structure (merging equal-irrep blocks is not
    needed: distinct random generators keep blocks inequivalent)."""
    return sum(k * k for _, k in blocks), sum(n * n for n, _ in blocks)


def synthetic_setting(rng, dim_q=2):
    """Random decoder with ``dim_y in {1, 2, 4}`` and total dim in 4..16."""
    dim_y = int(rng.choice([1, 2, 4]))
    max_rest = 16 // (dim_q * dim_y)
    min_rest = max(1, -(-4 // (dim_q * dim_y)))
    rest = int(rng.integers(min_rest, max_rest + 1))
    d = dim_q * dim_y * rest
    d_map = DecodingMap(random_unitary(d, rng), dim_q, dim_y)
    phi = rng.standard_normal(dim_y) + 1j * rng.standard_normal(dim_y)
    code = encoder_for_reference(d_map, phi / np.linalg.norm(phi))
    return d_map, code


def stable_error(d_map, rng):
    """Random ``U_d^dagger (1_Q (x) B_Y (x) C) U_d`` with ``C |0> = c |0>``.

    Such an error is stable on any code built by ``encoder_for_reference``.
    """
    dy, dr = d_map.dim_y, d_map.dim_rest
    b = rng.standard_normal((dy, dy)) + 1j * rng.standard_normal((dy, dy))
    c = rng.standard_normal((dr, dr)) + 1j * rng.standard_normal((dr, dr))
    c[1:, 0] = 0
    e = np.kron(np.eye(d_map.dim_q), np.kron(b, c))
    return dagger(d_map.u_d) @ e @ d_map.u_d
