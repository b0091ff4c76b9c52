import json

import numpy as np
import pytest

from helpers import random_ph, random_stable
from phmm import (
    DescriptorModel,
    DimensionError,
    GeneratorLeft,
    GeneratorRight,
    LtiSystem,
    MatchCertificate,
    SchemaError,
    fixture_path,
    ladder_system,
    load_document,
    parse_document,
    reduce_ph_markov,
    save_document,
    write_document,
)
from phmm.io import dumps, format_number, parse_matrix


def same_arrays(a, b):
    return a.shape == b.shape and np.array_equal(a, b)


def test_ph_round_trip():
    sys = random_ph(np.random.default_rng(0), 5, 2)
    text = write_document(sys, "random")
    back = parse_document(text)
    for k in ("J", "R", "Q", "B"):
        assert same_arrays(getattr(back, k), getattr(sys, k))
    assert back.r_psd and back.q_pd
    assert write_document(back, "random") == text
    assert text.endswith("\n")


def test_lti_and_descriptor_round_trip():
    lti = random_stable(np.random.default_rng(1), 4, 2, 3)
    back = parse_document(write_document(lti))
    assert same_arrays(back.A, lti.A) and same_arrays(back.C, lti.C)
    desc = DescriptorModel(np.eye(2), -np.eye(2), np.ones((2, 1)), np.ones((1, 2)), output_derivative=True)
    back = parse_document(write_document(desc))
    assert back.output_derivative and not back.input_derivative
    assert same_arrays(back.F, desc.F)


def test_generator_round_trip_complex():
    gen = GeneratorRight.diagonal([1 + 2j, 1 - 2j], L=np.array([[1 + 1j, 1 - 1j]]))
    text = write_document(gen)
    assert "[1, 2]" in text.replace("\n", "").replace("  ", " ")
    back = parse_document(text)
    assert same_arrays(back.S, gen.S) and same_arrays(back.L, gen.L)


def test_certificate_round_trip():
    red = reduce_ph_markov(ladder_system(q=(1, 1, 2, 1)), GeneratorLeft.jordan(0, 2), "upsilon_hat")
    cert = red.certificate
    back = parse_document(write_document(cert))
    assert isinstance(back, MatchCertificate) and back.kind == cert.kind
    assert same_arrays(back.P, cert.P)
    for k, v in cert.data.items():
        assert np.array_equal(np.asarray(back.data[k]), np.asarray(v))


def test_awkward_doubles_survive():
    vals = np.array([[0.1, 1 / 3, 2.0 ** -1074, 1.7976931348623157e308, -0.0, 5e-324]])
    lti = LtiSystem(-np.eye(6), np.ones((6, 1)), vals)
    back = parse_document(write_document(lti))
    assert np.array_equal(back.C, vals)
    assert np.signbit(back.C[0, 4])
    assert format_number(0.1) == "0.10000000000000001"


def test_jordan_shorthand():
    doc = {"kind": "generator_right", "matrices": {"S": {"jordan": {"eig": 0, "size": 3}}}}
    gen = parse_document(json.dumps(doc))
    np.testing.assert_array_equal(gen.S, np.diag([1.0, 1.0], 1))
    np.testing.assert_array_equal(gen.L, [[1, 0, 0]])
    doc = {"kind": "generator_left", "matrices": {"Qc": {"jordan": {"eig": [0.5, 1], "size": 2}}}}
    gen = parse_document(json.dumps(doc))
    np.testing.assert_array_equal(gen.Qc, [[0.5 + 1j, 0], [1, 0.5 + 1j]])
    np.testing.assert_array_equal(gen.Rc, [[1], [0]])


def test_bundled_ladder_fixture():
    sys = load_document(fixture_path("ladder.json"))
    ref = ladder_system()
    for k in ("J", "R", "Q", "B"):
        assert same_arrays(getattr(sys, k), getattr(ref, k))


def test_save_and_load(tmp_path):
    sys = ladder_system(q=(1, 1, 2, 1))
    path = tmp_path / "ladder.json"
    save_document(sys, path, "ladder")
    assert same_arrays(load_document(path).Q, sys.Q)
    assert [p.name for p in tmp_path.iterdir()] == ["ladder.json"]


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        "[1, 2]",
        '{"kind": "banana"}',
        '{"kind": "lti", "matrices": {"A": [[1]], "B": [[1]]}}',
        '{"kind": "ph", "matrices": {"J": [[0]], "R": [[1]], "Q": [[1]], "B": [[1]]}, "flags": {"x": true}}',
        '{"kind": "lti", "matrices": {"A": [[1, "a"]], "B": [[1]], "C": [[1]]}}',
        '{"kind": "certificate", "matrices": {"P": [[1]]}, "certificate_kind": "nope"}',
        '{"kind": "generator_right", "matrices": {"S": [[0]]}}',
    ],
)
def test_schema_errors(text):
    with pytest.raises(SchemaError):
        parse_document(text)


def test_dimension_errors():
    with pytest.raises(DimensionError):
        parse_document('{"kind": "lti", "matrices": {"A": [[1, 0]], "B": [[1]], "C": [[1]]}}')


def test_parse_matrix_forms():
    np.testing.assert_array_equal(parse_matrix("[[1, 2], [3, 4]]"), [[1, 2], [3, 4]])
    np.testing.assert_array_equal(parse_matrix('{"matrix": [[1, [0, 1]]]}'), [[1, 1j]])


def test_dumps_is_deterministic():
    value = {"b": [1.0, 2.5, 0.1], "a": {"x": True, "y": None}}
    text = dumps(value)
    assert text == dumps(json.loads(text))
    assert json.loads(text) == value
    assert "0.10000000000000001" in text
