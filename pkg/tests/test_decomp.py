import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_block_structure, structured_generators
from nsverify.channels import PAULI, collective_dephasing, collective_spin_ops
from nsverify.decomp import (SubsystemBlock, SubsystemDecomposition, block_range, decompose,
                             identity_tensor_test, tilde_conjugate)
from nsverify.linalg import Subspace, dagger
from nsverify.opspace import (ErrorAlgebra, algebra_closure, commutant, full_space,
                              identity_space, span_of)


def expected_shapes(blocks):
    return sorted(blocks, key=lambda b: (-b[1], -b[0]))


@pytest.fixture(scope="module")
def a_c():
    return algebra_closure(list(collective_spin_ops(3)))


@pytest.mark.parametrize("seed", range(5))
def test_collective_blocks(a_c, seed):
    dec = decompose(a_c, seed=seed)
    assert dec.block_shapes() == [(1, 4), (2, 2)]
    assert dec.orthogonality_error() < 1e-10
    for blk in dec.blocks:
        for a in a_c.basis:
            assert identity_tensor_test(tilde_conjugate(a, blk), *blk.shape, tol=1e-8) is not None


def test_collective_spin_half_block_carries_spin(a_c):
    blk = decompose(a_c).blocks[1]
    jz = collective_spin_ops(3)[2]
    m = identity_tensor_test(tilde_conjugate(jz, blk), 2, 2)
    assert np.allclose(np.sort(np.linalg.eigvalsh(m)), [-0.5, 0.5])


@pytest.mark.parametrize("alg, shapes", [
    (lambda: algebra_closure([PAULI["z"]]), [(1, 1), (1, 1)]),
    (lambda: ErrorAlgebra.from_space(full_space(2)), [(1, 2)]),
    (lambda: ErrorAlgebra.from_space(identity_space(4)), [(4, 1)]),
    (lambda: algebra_closure(list(collective_dephasing("z").kraus)), [(1, 1)] * 2 + [(3, 1)] * 2),
])
def test_small_decompositions(alg, shapes):
    dec = decompose(alg())
    assert sorted(dec.block_shapes()) == sorted(shapes)
    assert dec.block_shapes() == expected_shapes(dec.block_shapes())


def test_decompose_rejects_non_algebra():
    with pytest.raises(ValueError):
        decompose(ErrorAlgebra.from_space(span_of([PAULI["z"]])))


def test_identity_tensor_test():
    m = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.allclose(identity_tensor_test(np.kron(np.eye(3), m), 3, 2), m)
    assert identity_tensor_test(np.kron(m, np.eye(2)), 2, 2) is None
    with pytest.raises(ValueError):
        identity_tensor_test(np.eye(5), 2, 2)


def test_tilde_conjugate_shape_check():
    blk = SubsystemBlock(1, 2, np.eye(4)[:, :2].astype(complex))
    assert tilde_conjugate(np.eye(4), blk).shape == (2, 2)
    with pytest.raises(ValueError):
        tilde_conjugate(np.eye(3), blk)


def test_decomposition_size_check():
    blk = SubsystemBlock(1, 2, np.eye(4)[:, :2].astype(complex))
    with pytest.raises(ValueError):
        SubsystemDecomposition(4, [blk])
    dec = SubsystemDecomposition(4, [blk], Subspace(4, np.eye(4)[:, 2:].astype(complex)))
    assert dec.orthogonality_error() == 0
    assert block_range(blk).dim == 2


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(4, 12))
def test_structured_decomposition(seed, d):
    r = np.random.default_rng(seed)
    blocks = random_block_structure(d, r)
    gens = structured_generators(blocks, r)
    alg = algebra_closure(gens)
    dec = decompose(alg, seed=seed % 1000)
    assert dec.block_shapes() == expected_shapes(blocks)
    assert dec.orthogonality_error() < 1e-8
    comm = commutant(alg)
    for blk in dec.blocks:
        n, k = blk.shape
        # representation is multiplicative on generators
        a, b = gens
        ma = identity_tensor_test(tilde_conjugate(a, blk), n, k, 1e-7)
        mb = identity_tensor_test(tilde_conjugate(b, blk), n, k, 1e-7)
        mab = identity_tensor_test(tilde_conjugate(a @ b, blk), n, k, 1e-7)
        assert np.allclose(mab, ma @ mb, atol=1e-7)
        # the commutant acts as X (x) 1 on each block
        for x in comm.basis:
            xt = dagger(blk.isometry) @ x @ blk.isometry
            swapped = xt.reshape(n, k, n, k).transpose(1, 0, 3, 2).reshape(n * k, n * k)
            assert identity_tensor_test(swapped, k, n, 1e-7) is not None
