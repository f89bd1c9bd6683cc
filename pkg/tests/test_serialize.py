import json

import numpy as np
import pytest

from nsverify import serialize as ser
from nsverify.channels import collective_dephasing
from nsverify.decomp import decompose
from nsverify.spin_example import build_collective_algebra, default_decoder, scenario_single_axis
from nsverify.opspace import span_of


def roundtrip(doc):
    return json.loads(ser.dumps(doc))


def test_matrix_roundtrip(rng):
    m = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    doc = ser.matrix_to_json(m)
    assert doc["rows"] == 3 and doc["cols"] == 2
    assert doc["data"][1] == [m[0, 1].real, m[0, 1].imag]
    assert np.array_equal(ser.matrix_from_json(roundtrip(doc)), m)


def test_matrix_format_errors():
    with pytest.raises(ser.FormatError):
        ser.matrix_from_json({"rows": 2, "cols": 2, "data": [[1, 0]]})
    with pytest.raises(ser.FormatError):
        ser.matrix_from_json({"rows": 1})
    with pytest.raises(ser.FormatError):
        ser.matrix_from_json({"rows": 1, "cols": 1, "data": [["a", 0]]})


def test_vector_roundtrip(rng):
    v = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    assert np.array_equal(ser.vector_from_json(roundtrip(ser.vector_to_json(v))), v)


def test_space_and_channel_roundtrip():
    ch = collective_dephasing("y")
    back = ser.channel_from_json(roundtrip(ser.channel_to_json(ch)))
    assert back.label == "y" and all(np.array_equal(a, b) for a, b in zip(back.kraus, ch.kraus))
    s = span_of(ch.kraus)
    s2 = ser.space_from_json(roundtrip(ser.space_to_json(s)))
    assert np.array_equal(s2.basis, s.basis)


def test_decomposition_roundtrip():
    dec = decompose(build_collective_algebra())
    back = ser.decomposition_from_json(roundtrip(ser.decomposition_to_json(dec)))
    assert back.block_shapes() == dec.block_shapes()
    assert np.array_equal(back.stacked_isometry(), dec.stacked_isometry())


def test_decoder_roundtrip():
    d = default_decoder()
    back = ser.decoder_from_json(roundtrip(ser.decoder_to_json(d)))
    assert np.array_equal(back.u_d, d.u_d) and (back.dim_q, back.dim_y) == (2, 2)
    with pytest.raises(ser.FormatError):
        ser.decoder_from_json({"u_d": ser.matrix_to_json(d.u_d)})


def test_bundle_roundtrip():
    b = scenario_single_axis()
    doc = roundtrip(ser.bundle_to_json(b))
    assert doc["schema"] == ser.BUNDLE_SCHEMA and "created" in doc
    assert doc["reports"]["A_z"]["schema"] == ser.REPORT_SCHEMA
    back = ser.bundle_from_json(doc)
    assert back.verdict == b.verdict and back.ok
    assert back.reports["A_x"].v_space.dim == 2
    assert back.reports["A_z"].classification == b.reports["A_z"].classification
    assert ser.dumps(ser.bundle_to_json(back, timestamp=False)) == \
        ser.dumps(ser.bundle_to_json(b, timestamp=False))


def test_bundle_schema_check():
    with pytest.raises(ser.FormatError):
        ser.bundle_from_json({"schema": "other"})
    with pytest.raises(ser.FormatError):
        ser.report_from_json({"schema": "other"})


def test_operators_from_json_variants():
    m = ser.matrix_to_json(np.eye(2))
    assert len(ser.operators_from_json([m, m])[0]) == 2
    ops, labels = ser.operators_from_json({"operators": [m], "labels": ["I"]})
    assert labels == ["I"]
    ops, labels = ser.operators_from_json({"channels": [ser.channel_to_json(collective_dephasing("z", 1))]})
    assert len(ops) == 2 and labels == ["K0^z", "K1^z"]
    with pytest.raises(ser.FormatError):
        ser.operators_from_json({"nothing": 1})
    with pytest.raises(ser.FormatError):
        ser.operators_from_json(3)


def test_load_json_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ser.FormatError):
        ser.load_json(p)
