import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bornlab.errors import ValidationError
from bornlab.pauli import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    TOL_EQ,
    TOL_HERM,
    bloch_from_projector,
    cos_angle,
    euclidean_inner,
    hermitian_from_json,
    hermitian_to_json,
    hilbert_schmidt_inner,
    ket_to_operator,
    overlap_probability,
    pauli_compose,
    pauli_decompose,
    projector_from_bloch,
)

from conftest import random_hermitian, random_ket, random_unit

S2 = 1 / np.sqrt(2)
ZHAT, XHAT = [0, 0, 1], [1, 0, 0]


@pytest.mark.parametrize(
    "op, expected",
    [
        (np.diag([1, 0]), [1, 0, 0, 1]),
        (0.5 * np.eye(2), [1, 0, 0, 0]),
        ([[0, 0.5], [0.5, 0]], [0, 1, 0, 0]),
    ],
)
def test_pauli_decompose_examples(op, expected):
    np.testing.assert_allclose(pauli_decompose(op), expected, atol=TOL_HERM)


def test_pauli_decompose_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        pauli_decompose([[1, 1], [0, 0]])
    with pytest.raises(ValidationError):
        pauli_decompose([[1j, 0], [0, 0]])
    with pytest.raises(ValidationError):
        pauli_decompose(np.eye(3))


def test_pauli_compose_examples():
    np.testing.assert_allclose(pauli_compose([1, 0, 0, 1]), np.diag([1, 0]), atol=TOL_HERM)
    np.testing.assert_allclose(pauli_compose([2, 0, 0, 0]), np.eye(2), atol=TOL_HERM)
    # oracle: direct matrix arithmetic
    oracle = 0.5 * (np.eye(2) + 0.6 * SIGMA_X + 0.8 * SIGMA_Z)
    np.testing.assert_allclose(pauli_compose([1, 0.6, 0, 0.8]), oracle, atol=TOL_HERM)
    np.testing.assert_allclose(oracle, [[0.9, 0.3], [0.3, 0.1]], atol=TOL_HERM)


def test_pauli_compose_rejects_non_finite():
    with pytest.raises(ValidationError):
        pauli_compose([np.nan, 0, 0, 0])


def test_projector_from_bloch_examples():
    np.testing.assert_allclose(projector_from_bloch(ZHAT), np.diag([1, 0]), atol=TOL_HERM)
    np.testing.assert_allclose(projector_from_bloch(XHAT), np.full((2, 2), 0.5), atol=TOL_HERM)
    with pytest.raises(ValidationError):
        projector_from_bloch([0, 0, 0.5])


def test_bloch_from_projector_examples():
    np.testing.assert_allclose(bloch_from_projector(np.diag([1, 0])), [0, 0, 1], atol=TOL_HERM)
    np.testing.assert_allclose(bloch_from_projector(np.diag([0, 1])), [0, 0, -1], atol=TOL_HERM)
    p = np.array([[0.5, -0.5j], [0.5j, 0.5]])
    # oracle: Tr(sigma_i P) computed with plain matrix products
    oracle = [np.trace(s @ p).real for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)]
    np.testing.assert_allclose(oracle, [0, 1, 0], atol=TOL_HERM)
    np.testing.assert_allclose(bloch_from_projector(p), oracle, atol=TOL_HERM)


@pytest.mark.parametrize("op", [np.eye(2), 0.5 * np.eye(2), np.diag([2, -1])])
def test_bloch_from_projector_rejects_non_projectors(op):
    with pytest.raises(ValidationError):
        bloch_from_projector(op)


def test_ket_to_operator_examples():
    np.testing.assert_allclose(ket_to_operator([1, 0]), np.diag([1, 0]))
    np.testing.assert_allclose(ket_to_operator([S2, S2]), np.full((2, 2), 0.5), atol=TOL_HERM)
    np.testing.assert_allclose(ket_to_operator([2, 0]), np.diag([4, 0]))


def test_ket_to_operator_rank_and_trace(rng):
    for _ in range(100):
        psi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        op = ket_to_operator(psi)
        ev = np.linalg.eigvalsh(op)
        assert ev[0] == pytest.approx(0, abs=1e-12)
        assert np.trace(op).real == pytest.approx(np.sum(np.abs(psi) ** 2), rel=1e-12)


def test_overlap_probability_examples():
    assert overlap_probability([1, 0], [1, 0]) == 1
    assert overlap_probability([1, 0], [0, 1]) == 0
    assert overlap_probability([1, 0], [S2, S2]) == pytest.approx(0.5, abs=TOL_EQ)
    with pytest.raises(ValidationError):
        overlap_probability([2, 0], [1, 0])


def test_euclidean_inner_examples():
    assert euclidean_inner([1, 0, 0, 1], [1, 0, 0, -1]) == 0
    assert euclidean_inner([1, 0, 0, 1], [1, 0, 0, 1]) == 2
    assert euclidean_inner([-1, 0, 0, 1], [1, 0, 0, 1]) == 0


def test_hilbert_schmidt_examples():
    pz, pmz, px = (projector_from_bloch(v) for v in (ZHAT, [0, 0, -1], XHAT))
    assert hilbert_schmidt_inner(pz, pz) == pytest.approx(1, abs=TOL_EQ)
    assert hilbert_schmidt_inner(pz, pmz) == pytest.approx(0, abs=TOL_EQ)
    assert hilbert_schmidt_inner(pz, px) == pytest.approx(0.5, abs=TOL_EQ)


def test_cos_angle():
    assert cos_angle([1, 0, 0], [2, 0, 0]) == pytest.approx(1)
    assert cos_angle([1, 0, 0], [0, 3, 0]) == pytest.approx(0)
    with pytest.raises(ValidationError):
        cos_angle([0, 0, 0], [1, 0, 0])


def test_round_trip_many(rng):
    for _ in range(2_000):
        a = random_hermitian(rng)
        assert np.max(np.abs(pauli_compose(pauli_decompose(a)) - a)) <= TOL_HERM


def test_parseval_many(rng):
    # the 10^4-pair run lives in the acceptance suite
    for _ in range(2_000):
        a, b = random_hermitian(rng), random_hermitian(rng)
        lhs = euclidean_inner(pauli_decompose(a), pauli_decompose(b))
        assert abs(lhs - 2 * hilbert_schmidt_inner(a, b)) <= TOL_EQ


def test_projectors_idempotent_many(rng):
    for n in random_unit(rng, 2_000):
        p = projector_from_bloch(n)
        assert np.max(np.abs(p @ p - p)) <= TOL_HERM
        assert abs(np.trace(p) - 1) <= TOL_HERM
        assert np.max(np.abs(bloch_from_projector(p) - n)) <= TOL_HERM


def test_three_form_agreement_many(rng):
    for _ in range(2_000):
        phi, psi = random_ket(rng), random_ket(rng)
        p_phi, p_psi = ket_to_operator(phi), ket_to_operator(psi)
        n_phi, n_psi = pauli_decompose(p_phi)[1:], pauli_decompose(p_psi)[1:]
        ket_form = overlap_probability(phi, psi)
        assert abs(ket_form - hilbert_schmidt_inner(p_phi, p_psi)) <= TOL_EQ
        assert abs(ket_form - 0.5 * (1 + n_phi @ n_psi)) <= TOL_EQ


finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, 4, elements=finite), arrays(np.float64, 4, elements=finite))
def test_parseval_property(r, s):
    a, b = pauli_compose(r), pauli_compose(s)
    assert euclidean_inner(r, s) == pytest.approx(
        2 * hilbert_schmidt_inner(a, b), abs=1e-9 * (1 + np.abs(r) @ np.abs(s))
    )


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, 4, elements=finite))
def test_round_trip_property(r):
    np.testing.assert_allclose(pauli_decompose(pauli_compose(r)), r, atol=1e-9 * (1 + np.abs(r).max()))


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, 4, elements=finite), arrays(np.float64, 4, elements=finite))
def test_euclidean_inner_symmetric(r, s):
    assert euclidean_inner(r, s) == euclidean_inner(s, r)
    assert euclidean_inner(r, r) >= 0


def test_hermitian_json_encoding():
    op = np.array([[0.5, -0.5j], [0.5j, 0.5]])
    enc = hermitian_to_json(op)
    assert enc == [[0.5, 0.0], [0.0, -0.5], [0.0, 0.5], [0.5, 0.0]]
    np.testing.assert_array_equal(hermitian_from_json(json.loads(json.dumps(enc))), op)


@pytest.mark.parametrize(
    "bad",
    [[[1, 0]] * 3, [[1, 0], [0, 1], [0, 0], [1, 0]], "nope", [[1, 0, 0]] * 4],
)
def test_hermitian_json_rejects(bad):
    with pytest.raises(ValidationError):
        hermitian_from_json(bad)


def test_values_are_immutable():
    p = projector_from_bloch(ZHAT)
    r = pauli_decompose(p)
    r[0] = 5.0  # decompose returns a fresh array
    assert pauli_decompose(p)[0] == 1.0
