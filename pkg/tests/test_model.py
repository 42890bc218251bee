import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpopov.errors import InvalidDimensionError, PlantValidationError
from qpopov.model import (decode_matrix, delta_bounds, doubled_residual, dump_plant, embed_blocks,
                          is_admissible, make_structure, parse_plant, plant_to_dict,
                          random_admissible_delta, random_doubled, validate_doubled)
from qpopov.systems import OPA_DELTA, opa_plant


def test_structure_k1():
    s = make_structure(1)
    np.testing.assert_array_equal(s.J, [[1, 0], [0, -1]])
    np.testing.assert_array_equal(s.Sigma, [[0, 1], [1, 0]])


def test_structure_k2_and_involutions():
    np.testing.assert_array_equal(np.diag(make_structure(2).J), [1, 1, -1, -1])
    s = make_structure(3)
    np.testing.assert_array_equal(s.J @ s.J, np.eye(6))
    np.testing.assert_array_equal(s.Sigma @ s.Sigma, np.eye(6))


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_J_Sigma_anticommute(k):
    s = make_structure(k)
    np.testing.assert_array_equal(s.J @ s.Sigma, -s.Sigma @ s.J)


def test_structure_rejects_zero():
    with pytest.raises(InvalidDimensionError):
        make_structure(0)


@pytest.mark.parametrize("X, valid, residual", [
    ([[-1, 0], [0, -1]], True, 0.0),
    ([[1, 1j], [-1j, 1]], True, 0.0),
    ([[1, 0], [0, 2]], False, 1.0),
])
def test_validate_doubled(X, valid, residual):
    ok, res = validate_doubled(np.array(X, dtype=complex), 1e-12)
    assert ok is valid
    assert res == residual


def test_validate_doubled_odd_dimension():
    with pytest.raises(InvalidDimensionError):
        validate_doubled(np.eye(3))


def test_embed_blocks_examples():
    np.testing.assert_array_equal(embed_blocks([[-1]], [[0]]), [[-1, 0], [0, -1]])
    np.testing.assert_array_equal(embed_blocks([[1]], [[1j]]), OPA_DELTA)
    np.testing.assert_array_equal(embed_blocks([[0]], [[0]]), np.zeros((2, 2)))
    with pytest.raises(InvalidDimensionError):
        embed_blocks(np.zeros((1, 2)), np.zeros((2, 1)))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2 ** 32 - 1))
def test_embed_is_exactly_doubled(k, l, seed):
    rng = np.random.default_rng(seed)
    X1 = rng.standard_normal((k, l)) + 1j * rng.standard_normal((k, l))
    X2 = rng.standard_normal((k, l)) + 1j * rng.standard_normal((k, l))
    assert doubled_residual(embed_blocks(X1, X2)) <= 1e-15


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
def test_products_and_sums_stay_doubled(k, l, p, seed):
    rng = np.random.default_rng(seed)
    X = random_doubled(rng, k, l)
    Y = random_doubled(rng, l, p)
    XY = X @ Y
    assert doubled_residual(XY) <= 1e-10 * np.linalg.norm(X, 2) * np.linalg.norm(Y, 2)
    assert doubled_residual(X + random_doubled(rng, k, l)) <= 1e-15


def _opa_doc(**overrides):
    doc = {"n": 1, "M1": [[[-1, 0]]], "M2": [[[0, 0]]], "Ntilde1": [[[np.sqrt(2.1), 0]]],
           "Ntilde2": [[[0, 0]]], "E1": [[[1, 0]]], "E2": [[[0, 0]]], "gamma": 2}
    doc.update(overrides)
    return json.dumps(doc)


def test_parse_opa_document():
    plant = parse_plant(_opa_doc())
    assert plant.n == 1 and plant.m == 1 and plant.c == 1
    np.testing.assert_allclose(plant.N, np.sqrt(2.1) * np.eye(2))
    np.testing.assert_array_equal(plant.M, -np.eye(2))
    assert plant.gamma == 2.0


@pytest.mark.parametrize("overrides, path", [
    ({"M1": [[[0, 1]]]}, "M1"),
    ({"gamma": 0}, "gamma"),
    ({"gamma": -1.0}, "gamma"),
    ({"n": 0}, "n"),
    ({"M2": [[[0, 0], [0, 0]]]}, "M2"),
    ({"E1": [[[1, 0, 3]]]}, "E1[0][0]"),
    ({"M1": [[[-1, 0]], [[0, 0]]]}, "M1"),
])
def test_parse_rejects(overrides, path):
    with pytest.raises(PlantValidationError) as info:
        parse_plant(_opa_doc(**overrides))
    assert info.value.path == path


def test_parse_missing_field_and_bad_json():
    doc = json.loads(_opa_doc())
    del doc["E2"]
    with pytest.raises(PlantValidationError, match="E2"):
        parse_plant(json.dumps(doc))
    with pytest.raises(PlantValidationError):
        parse_plant("{not json")


def test_non_symmetric_M2_rejected():
    doc = _opa_doc(n=2, M1=[[[0, 0], [0, 0]], [[0, 0], [0, 0]]],
                   M2=[[[0, 0], [1, 0]], [[0, 0], [0, 0]]],
                   Ntilde1=[[[1, 0], [1, 0]]], Ntilde2=[[[0, 0], [0, 0]]],
                   E1=[[[1, 0], [0, 0]]], E2=[[[0, 0], [0, 0]]])
    with pytest.raises(PlantValidationError) as info:
        parse_plant(doc)
    assert info.value.path == "M2"


def test_plant_round_trip(rng):
    from qpopov.systems import random_plant
    for _ in range(10):
        plant = random_plant(rng, int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(1, 3)))
        again = parse_plant(dump_plant(plant))
        np.testing.assert_array_equal(again.M, plant.M)
        np.testing.assert_array_equal(again.Ntilde, plant.Ntilde)
        np.testing.assert_array_equal(again.E, plant.E)
        assert again.gamma == plant.gamma
    assert decode_matrix(plant_to_dict(opa_plant())["M1"])[0, 0] == -1


def test_extreme_delta_is_top_of_bound():
    np.testing.assert_array_equal(random_admissible_delta(1, 2.0, 0, "extreme"), 2 * np.eye(2))


@pytest.mark.parametrize("strategy", ["extreme", "interior", "boundary"])
def test_delta_bounds_m1(strategy):
    lo, hi = delta_bounds(random_admissible_delta(1, 2.0, 3, strategy))
    assert lo >= -1e-12 and hi <= 2 + 1e-12


def test_reference_delta_admissible():
    # eigenvalues of [[1, i], [-i, 1]] are 1 -+ |i| = {0, 2}
    lo, hi = delta_bounds(OPA_DELTA)
    assert lo == pytest.approx(0, abs=1e-15) and hi == pytest.approx(2)
    assert is_admissible(OPA_DELTA, 2.0)
    assert not is_admissible(OPA_DELTA, 2.5)


def test_delta_deterministic_per_seed():
    a = random_admissible_delta(2, 1.5, 11, "interior")
    b = random_admissible_delta(2, 1.5, 11, "interior")
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, random_admissible_delta(2, 1.5, 12, "interior"))


def test_boundary_delta_is_scaled_projection():
    for seed in range(20):
        d = random_admissible_delta(2, 0.8, seed, "boundary")
        w = np.linalg.eigvalsh(d)
        assert np.all(np.minimum(np.abs(w), np.abs(w - 5.0)) < 1e-9)


def test_thousand_seeds_never_violate_bound():
    for seed in range(1000):
        m = 1 + seed % 3
        gamma = 0.5 + (seed % 7) * 0.4
        strategy = ("extreme", "interior", "boundary")[seed % 3]
        assert is_admissible(random_admissible_delta(m, gamma, seed, strategy), gamma), seed


def test_delta_argument_validation():
    with pytest.raises(InvalidDimensionError):
        random_admissible_delta(0, 1.0, 0)
    with pytest.raises(ValueError):
        random_admissible_delta(1, 0.0, 0)
    with pytest.raises(ValueError):
        random_admissible_delta(1, 1.0, 0, "corner")
