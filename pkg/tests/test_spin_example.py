from fractions import Fraction

import numpy as np
import pytest

from nsverify.channels import PAULI, collective_spin_ops
from nsverify.decomp import decompose, identity_tensor_test, tilde_conjugate
from nsverify.linalg import dagger
from nsverify.opspace import contains, span_of
from nsverify.spin_example import (MINUS_HALF, PLUS_HALF, axis_algebra, axis_channels,
                                   build_collective_algebra, build_omega, build_spin_basis,
                                   default_decoder, permutation_matrices, scenario_composite,
                                   scenario_single_axis, scenario_two_reference)
from nsverify.verify import Classification

HALF = Fraction(1, 2)
JX, JY, JZ = collective_spin_ops(3)
J2 = JX @ JX + JY @ JY + JZ @ JZ


@pytest.fixture(scope="module")
def basis():
    return build_spin_basis()


@pytest.fixture(scope="module")
def omega():
    return build_omega()


def test_basis_orthonormal_eigenbasis(basis):
    v = basis.vectors
    assert np.allclose(dagger(v) @ v, np.eye(8), atol=1e-12)
    for (j, jz, _), col in zip(basis.labels, v.T):
        assert np.allclose(J2 @ col, float(j * (j + 1)) * col, atol=1e-12)
        assert np.allclose(JZ @ col, float(jz) * col, atol=1e-12)


def test_basis_known_vectors(basis):
    top = np.zeros(8)
    top[0] = 1
    assert np.allclose(basis.vector(1.5, 1.5), top)
    # copy 0: first two qubits in the singlet, last qubit up
    singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
    assert np.allclose(basis.vector(HALF, HALF, 0), np.kron(singlet, [1, 0]))


def test_ladder_condon_shortley(basis):
    jp = JX + 1j * JY
    for copy in (0, 1):
        lo, hi = basis.vector(HALF, -HALF, copy), basis.vector(HALF, HALF, copy)
        # <1/2, 1/2 | J+ | 1/2, -1/2> = 1 within the same copy
        assert np.isclose(hi.conj() @ jp @ lo, 1.0)
        assert np.isclose(basis.vector(HALF, HALF, 1 - copy).conj() @ jp @ lo, 0.0)
    for m in (Fraction(-3, 2), -HALF, HALF):
        a = basis.vector(1.5, m + 1).conj() @ jp @ basis.vector(1.5, m)
        assert a.real > 0 and abs(a.imag) < 1e-12


def test_omega_is_orthogonal_split(omega):
    assert omega.block_shapes() == [(2, 2)]
    assert omega.complement.dim == 4
    assert omega.orthogonality_error() < 1e-12


def test_collective_spin_in_omega_picture(omega):
    blk = omega.blocks[0]
    for j, s in zip((JX, JY, JZ), "xyz"):
        assert np.allclose(tilde_conjugate(j, blk), np.kron(np.eye(2), PAULI[s] / 2), atol=1e-12)


def test_omega_agrees_with_decompose(omega):
    a_c = build_collective_algebra()
    dec = decompose(a_c)
    blk_ref = omega.blocks[0]
    blk = next(b for b in dec.blocks if b.shape == (2, 2))
    # same range, and the reduced syndrome operators are unitarily equivalent
    p1 = blk.isometry @ dagger(blk.isometry)
    p2 = blk_ref.isometry @ dagger(blk_ref.isometry)
    assert np.abs(p1 - p2).max() < 1e-9
    for a in a_c.basis:
        m1 = identity_tensor_test(tilde_conjugate(a, blk), 2, 2, 1e-8)
        m2 = identity_tensor_test(tilde_conjugate(a, blk_ref), 2, 2, 1e-8)
        # equal spectra: equal characteristic polynomials
        assert np.allclose(np.poly(m1), np.poly(m2), atol=1e-8)


def test_default_decoder_maps_blocks(basis):
    d_map = default_decoder(basis)
    for copy in (0, 1):
        for iz, jz in enumerate((HALF, -HALF)):
            out = d_map.u_d @ basis.vector(HALF, jz, copy)
            assert np.isclose(abs(out[2 * (2 * copy + iz)]), 1)
    h = d_map.u_d @ basis.vector(1.5, 1.5)
    assert np.isclose(abs(h[1]), 1)


def test_collective_algebra_permutation_invariant():
    a_c = build_collective_algebra()
    assert a_c.dim == 20
    perms = permutation_matrices()
    assert len(perms) == 3
    for p in perms:
        for a in a_c.basis:
            assert np.abs(p @ a - a @ p).max() < 1e-10


def test_axis_algebras():
    chans = axis_channels()
    for u in "xyz":
        alg = axis_algebra(chans[u])
        assert alg.dim == 4 and alg.flags.all()


def test_single_axis_scenario():
    b = scenario_single_axis()
    assert b.ok
    dims = {u: b.reports[f"A_{u}"].v_space.dim for u in "xyz"}
    assert dims == {"x": 2, "y": 2, "z": 1}
    assert b.reports["A_z"].classification == Classification.DFS
    assert b.reports["A_x"].classification == Classification.FULL_NS
    assert b.reports["A_c"].classification == Classification.FULL_NS
    assert b.containments["E' >= A_c"]
    assert "A_z*A_x" not in b.notes["admitted_products"]
    assert "A_x*A_z" in b.notes["admitted_products"]
    assert b.verdict == "FullNS"


def test_single_axis_syndromes():
    b = scenario_single_axis()
    z = b.reports["A_z"].v_space
    assert z.contains_vector(PLUS_HALF) and not z.contains_vector(MINUS_HALF)


def test_composite_scenario():
    b = scenario_composite()
    assert b.ok
    assert b.notes["E_yx == E_xy^dagger"]
    assert b.containments["E'' >= A_c"]
    assert b.reports["E''"].passed


def test_two_reference_scenario():
    b = scenario_two_reference()
    assert b.ok
    assert all(b.notes[f"dim_domain_A_{u}"] == 2 for u in "xyz")
    assert b.notes["dim_enlarged"] == 20
    assert b.reports["A_z@-1/2"].classification == Classification.DFS
    assert b.verdict == "FullNS"


def test_collective_contains_single_axis_kraus():
    a_c = build_collective_algebra()
    ops = [k for c in axis_channels().values() for k in c.kraus]
    assert contains(a_c.space, span_of(ops), 1e-9)
