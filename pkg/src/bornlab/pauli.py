"""Pauli/Bloch algebra for a single qubit.

Operators are plain ``(2, 2)`` complex numpy arrays, four-vectors ``(4,)``
float arrays ``(r0, r1, r2, r3)`` and Bloch vectors ``(3,)`` float arrays.
The correspondence between them is

    R = 1/2 * sum_mu r_mu sigma_mu,     r_mu = Tr(sigma_mu R)

with sigma_0 the identity and sigma_{1,2,3} the standard Pauli matrices.
Nothing is silently renormalized: inputs outside the declared domain raise
:class:`~bornlab.errors.ValidationError`.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from numpy.typing import ArrayLike

from bornlab.errors import ValidationError

__all__ = [
    "TOL_HERM",
    "TOL_UNIT",
    "TOL_EQ",
    "SIGMA_0",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "PAULI",
    "as_hermitian",
    "as_four_vector",
    "as_bloch",
    "as_unit_bloch",
    "as_ket",
    "pauli_decompose",
    "pauli_compose",
    "projector_from_bloch",
    "bloch_from_projector",
    "ket_to_operator",
    "overlap_probability",
    "euclidean_inner",
    "hilbert_schmidt_inner",
    "cos_angle",
    "hermitian_to_json",
    "hermitian_from_json",
]

TOL_HERM = 1e-9
TOL_UNIT = 1e-9
TOL_EQ = 1e-9

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z])

for _s in (SIGMA_0, SIGMA_X, SIGMA_Y, SIGMA_Z, PAULI):
    _s.setflags(write=False)


def _finite(a: np.ndarray, what: str) -> np.ndarray:
    # scalar loop: cheaper than a ufunc reduction on 2-4 entries
    if not all(map(cmath.isfinite, a.ravel().tolist())):
        raise ValidationError(f"{what} has non-finite entries: {a!r}")
    return a


def as_hermitian(op: ArrayLike, tol: float = TOL_HERM) -> np.ndarray:
    """Return ``op`` as a read-only 2x2 complex array, checking hermiticity."""
    a = np.array(op, dtype=complex)
    if a.shape != (2, 2):
        raise ValidationError(f"expected a 2x2 operator, got shape {a.shape}")
    _finite(a, "operator")
    (a00, a01), (a10, a11) = a.tolist()
    if max(abs(a00.imag), abs(a11.imag), abs(a01 - a10.conjugate())) > tol:
        raise ValidationError(f"operator is not Hermitian within {tol:g}: {a!r}")
    a.setflags(write=False)
    return a


def as_four_vector(r: ArrayLike) -> np.ndarray:
    a = np.array(r, dtype=float)
    if a.shape != (4,):
        raise ValidationError(f"expected 4 components, got shape {a.shape}")
    _finite(a, "four-vector")
    a.setflags(write=False)
    return a


def as_bloch(n: ArrayLike) -> np.ndarray:
    a = np.array(n, dtype=float)
    if a.shape != (3,):
        raise ValidationError(f"expected 3 components, got shape {a.shape}")
    _finite(a, "Bloch vector")
    a.setflags(write=False)
    return a


def as_unit_bloch(n: ArrayLike, tol: float = TOL_UNIT) -> np.ndarray:
    """Bloch vector that must already have unit norm (no renormalization)."""
    a = as_bloch(n)
    x, y, z = a.tolist()
    norm = math.sqrt(x * x + y * y + z * z)
    if abs(norm - 1.0) > tol:
        raise ValidationError(f"Bloch vector must have unit norm, |n| = {norm!r}")
    return a


def as_ket(psi: ArrayLike, normalized: bool = False, tol: float = TOL_UNIT) -> np.ndarray:
    a = np.array(psi, dtype=complex)
    if a.shape != (2,):
        raise ValidationError(f"expected 2 amplitudes, got shape {a.shape}")
    _finite(a, "ket")
    if normalized:
        u, v = a.tolist()
        norm2 = abs(u) ** 2 + abs(v) ** 2
        if abs(norm2 - 1.0) > tol:
            raise ValidationError(f"ket must be normalized, <psi|psi> = {norm2!r}")
    a.setflags(write=False)
    return a


def pauli_decompose(op: ArrayLike) -> np.ndarray:
    """Coefficients ``r_mu = Tr(sigma_mu op)`` of a Hermitian operator.

    >>> pauli_decompose([[1, 0], [0, 0]])
    array([1., 0., 0., 1.])
    """
    a = as_hermitian(op)
    (a00, a01), (a10, a11) = a.tolist()
    # Tr(sigma_mu A) written out for the four basis matrices
    coeffs = (a00 + a11, a01 + a10, 1j * (a01 - a10), a00 - a11)
    if max(abs(z.imag) for z in coeffs) > TOL_HERM:
        raise ValidationError(f"Pauli coefficients are not real: {coeffs!r}")
    return np.array([z.real for z in coeffs])


def pauli_compose(r: ArrayLike) -> np.ndarray:
    """Inverse of :func:`pauli_decompose`: ``1/2 * sum_mu r_mu sigma_mu``."""
    r0, r1, r2, r3 = as_four_vector(r).tolist()
    off = complex(0.5 * r1, -0.5 * r2)
    return np.array(
        [[0.5 * (r0 + r3), off], [off.conjugate(), 0.5 * (r0 - r3)]], dtype=complex
    )


def projector_from_bloch(n: ArrayLike) -> np.ndarray:
    """Rank-1 projector ``(1 + n.sigma) / 2`` for a unit Bloch vector."""
    u = as_unit_bloch(n)
    return pauli_compose(np.concatenate(([1.0], u)))


def bloch_from_projector(p: ArrayLike) -> np.ndarray:
    """Unit Bloch vector ``Tr(sigma P)`` of a rank-1 projector.

    Raises
    ------
    ValidationError
        If ``p`` is not Hermitian, idempotent and of unit trace.
    """
    a = as_hermitian(p)
    (a00, a01), (a10, a11) = a.tolist()
    tr = a00 + a11
    if abs(tr - 1.0) > TOL_HERM:
        raise ValidationError(f"projector must have trace 1, got {tr!r}")
    square = (
        a00 * a00 + a01 * a10 - a00,
        a00 * a01 + a01 * a11 - a01,
        a10 * a00 + a11 * a10 - a10,
        a10 * a01 + a11 * a11 - a11,
    )
    if max(map(abs, square)) > TOL_HERM:
        raise ValidationError("operator is not idempotent")
    # same coefficients as pauli_decompose, without validating ``a`` again
    return as_unit_bloch([(a01 + a10).real, (1j * (a01 - a10)).real, (a00 - a11).real])


def ket_to_operator(psi: ArrayLike) -> np.ndarray:
    """Outer product ``|psi><psi|``; non-normalized kets are allowed."""
    a, b = as_ket(psi).tolist()
    ab = a * b.conjugate()
    return np.array([[abs(a) ** 2, ab], [ab.conjugate(), abs(b) ** 2]], dtype=complex)


def overlap_probability(phi: ArrayLike, psi: ArrayLike) -> float:
    """Transition probability ``|<phi|psi>|^2`` of two normalized kets."""
    a0, a1 = as_ket(phi, normalized=True).tolist()
    b0, b1 = as_ket(psi, normalized=True).tolist()
    return abs(a0.conjugate() * b0 + a1.conjugate() * b1) ** 2


def euclidean_inner(r: ArrayLike, s: ArrayLike) -> float:
    a0, a1, a2, a3 = as_four_vector(r).tolist()
    b0, b1, b2, b3 = as_four_vector(s).tolist()
    return a0 * b0 + a1 * b1 + a2 * b2 + a3 * b3


def hilbert_schmidt_inner(a: ArrayLike, b: ArrayLike) -> float:
    """``Tr(A^dagger B)``; real for Hermitian arguments."""
    x = as_hermitian(a)
    y = as_hermitian(b)
    # sum conj(x_ij) y_ij = Tr(x^dagger y)
    val = sum(u.conjugate() * v for u, v in zip(x.ravel().tolist(), y.ravel().tolist()))
    if abs(val.imag) > TOL_HERM:
        raise ValidationError(f"Hilbert-Schmidt product is not real: {val!r}")
    return float(val.real)


def cos_angle(n: ArrayLike, m: ArrayLike) -> float:
    """Cosine of the angle between two non-zero 3-vectors."""
    a = as_bloch(n)
    b = as_bloch(m)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValidationError("angle undefined for a zero vector")
    return float(np.dot(a, b) / (na * nb))


def hermitian_to_json(op: ArrayLike) -> list[list[float]]:
    """Four ``[re, im]`` pairs in row-major order."""
    a = as_hermitian(op)
    return [[float(z.real), float(z.imag)] for z in a.ravel()]


def hermitian_from_json(pairs) -> np.ndarray:
    try:
        flat = [complex(float(re), float(im)) for re, im in pairs]
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed operator encoding: {pairs!r}") from exc
    if len(flat) != 4:
        raise ValidationError(f"expected four [re, im] pairs, got {len(flat)}")
    return as_hermitian(np.reshape(flat, (2, 2)))
