"""Gudder-form functionals and the constraint chain that pins down the
qubit probability measure anchored at a pure state ``(1, n_phi)``.

A Gudder functional on the four-vector space is ``f(r) = c (r.r) + k.r``.
Requiring

* ``f(1, n_phi) = 1`` and ``f(1, -n_phi) = 0``,
* ``f(1, n_psi)`` in ``[0, 1]`` for every unit ``n_psi``,
* ``f(-1, n_phi) = 0`` (the four-vector orthogonal to ``(1, n_phi)``),

leaves exactly one solution, ``c = 0`` and ``k = (1, n_phi) / 2``.
:func:`derive_measure` walks these steps analytically and cross-checks the
result against a numerically solved linear system.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from bornlab.errors import ConsistencyError, ContractError, ValidationError
from bornlab.pauli import (
    TOL_EQ,
    TOL_UNIT,
    as_four_vector,
    as_unit_bloch,
    pauli_compose,
    projector_from_bloch,
)

__all__ = [
    "GudderFunctional",
    "DerivationTrace",
    "gudder_eval",
    "derive_measure",
    "constraint_system",
    "born_probability",
    "measure_linear_form",
    "measure_trace_form",
]


@dataclass(frozen=True)
class GudderFunctional:
    """Parameters ``(c, k)`` of ``f(r) = c (r.r) + k.r``."""

    c: float
    k: np.ndarray = field(repr=True)

    def __post_init__(self):
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "k", as_four_vector(self.k))
        if not np.isfinite(self.c):
            raise ValidationError(f"c must be finite, got {self.c!r}")

    def __call__(self, r: ArrayLike) -> float | np.ndarray:
        return gudder_eval(self, r)

    def __eq__(self, other):
        if not isinstance(other, GudderFunctional):
            return NotImplemented
        return self.c == other.c and bool(np.array_equal(self.k, other.k))

    __hash__ = None

    @property
    def k0(self) -> float:
        return float(self.k[0])

    @property
    def k_vec(self) -> np.ndarray:
        return self.k[1:]

    def is_derived_measure(self, tol: float = TOL_EQ) -> bool:
        """True when ``c = 0``, ``k0 = 1/2`` and ``|k_vec| = 1/2``."""
        return (
            abs(self.c) <= tol
            and abs(self.k0 - 0.5) <= tol
            and abs(float(np.linalg.norm(self.k_vec)) - 0.5) <= tol
        )

    def to_dict(self) -> dict:
        return {"c": self.c, "k": [float(x) for x in self.k]}


@dataclass(frozen=True)
class DerivationTrace:
    """Values produced at each step of :func:`derive_measure`.

    ``sum_constraint`` is ``2c + k0`` and ``dot_constraint`` is
    ``n_phi . k_vec`` (both from the pair ``f(1, +-n_phi) = 1, 0``);
    ``k_norm`` comes from the range argument; ``c`` and ``k0`` from the
    off-slice condition ``f(-1, n_phi) = 0``.
    """

    n_phi: np.ndarray
    sum_constraint: float
    dot_constraint: float
    k_norm: float
    c: float
    k0: float
    k_vec: np.ndarray
    crosscheck_residual: float

    def is_complete(self, tol: float = TOL_EQ) -> bool:
        return (
            abs(self.sum_constraint - 0.5) <= tol
            and abs(self.dot_constraint - 0.5) <= tol
            and abs(self.k_norm - 0.5) <= tol
            and abs(self.c) <= tol
            and abs(self.k0 - 0.5) <= tol
        )

    def to_dict(self) -> dict:
        return {
            "n_phi": [float(x) for x in self.n_phi],
            "steps": {
                "boundary_pair": {
                    "sum_constraint": self.sum_constraint,
                    "dot_constraint": self.dot_constraint,
                },
                "range_restriction": {
                    "k_norm": self.k_norm,
                    "k_vec": [float(x) for x in self.k_vec],
                },
                "off_slice_orthogonal": {"c": self.c, "k0": self.k0},
            },
            "sum_constraint": self.sum_constraint,
            "dot_constraint": self.dot_constraint,
            "k_norm": self.k_norm,
            "c": self.c,
            "k0": self.k0,
            "crosscheck_residual": self.crosscheck_residual,
        }


def gudder_eval(f: GudderFunctional, r: ArrayLike) -> float | np.ndarray:
    """Evaluate ``c (r.r) + k.r``.

    ``r`` may be a single four-vector or an array of shape ``(..., 4)``; a
    scalar is returned for a single vector.
    """
    v = np.asarray(r, dtype=float)
    if v.shape[-1:] != (4,):
        raise ValidationError(f"expected trailing dimension 4, got shape {v.shape}")
    if v.ndim == 1:
        v = as_four_vector(v)
        k = f.k
        rr = v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]
        kr = k[0] * v[0] + k[1] * v[1] + k[2] * v[2] + k[3] * v[3]
        return float(f.c * rr + kr)
    return f.c * np.einsum("...i,...i->...", v, v) + v @ f.k


def constraint_system(n_phi: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    """Linear system in the unknowns ``(c, k0, k1, k2, k3)``.

    Rows: ``f(1, n) = 1``, ``f(1, -n) = 0``, ``f(-1, n) = 0`` (each linear
    in the unknowns because ``r.r = 2`` on all three vectors), followed by
    the three components of ``n x k_vec = 0`` expressing ``k_vec || n``.
    """
    n = as_unit_bloch(n_phi)
    rows = [
        np.concatenate(([2.0, 1.0], n)),
        np.concatenate(([2.0, 1.0], -n)),
        np.concatenate(([2.0, -1.0], n)),
    ]
    # cross-product matrix: (n x k)_i = sum_j C[i, j] k_j
    cross = np.array([[0.0, -n[2], n[1]], [n[2], 0.0, -n[0]], [-n[1], n[0], 0.0]])
    for row in cross:
        rows.append(np.concatenate(([0.0, 0.0], row)))
    rhs = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    return np.array(rows), rhs


def derive_measure(n_phi: ArrayLike) -> tuple[GudderFunctional, DerivationTrace]:
    """Construct the unique measure anchored at the pure state ``n_phi``.

    Returns the functional ``(c = 0, k = (1/2, n_phi/2))`` together with a
    trace of the intermediate constraint values.

    Raises
    ------
    ValidationError
        If ``n_phi`` is not a unit vector.
    ConsistencyError
        If the analytic chain and the numerical solve disagree.
    """
    n = as_unit_bloch(n_phi)

    # f(1, n) = 2c + k0 + n.k = 1 and f(1, -n) = 2c + k0 - n.k = 0
    f_plus, f_minus = 1.0, 0.0
    sum_constraint = (f_plus + f_minus) / 2.0
    dot_constraint = (f_plus - f_minus) / 2.0

    # f(1, m) = sum_constraint + |k| cos(theta) in [0, 1] for every unit m and
    # cos(theta) covers [-1, 1], so |k| <= 1/2; n.k = 1/2 with |n| = 1 forces
    # |k| >= 1/2. Equality in Cauchy-Schwarz makes k parallel to n.
    k_norm = min(sum_constraint, 1.0 - sum_constraint)
    if dot_constraint > k_norm + TOL_EQ:
        raise ConsistencyError("range restriction incompatible with n.k constraint")
    k_vec = k_norm * n

    # f(-1, n) = 2c - k0 + n.k = 0  together with  2c + k0 = sum_constraint
    two_c_minus_k0 = -dot_constraint
    c = (sum_constraint + two_c_minus_k0) / 4.0
    k0 = (sum_constraint - two_c_minus_k0) / 2.0

    a, b = constraint_system(n)
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    analytic = np.concatenate(([c, k0], k_vec))
    residual = float(np.max(np.abs(sol - analytic)))
    if residual > TOL_EQ:
        raise ConsistencyError(
            f"analytic derivation {analytic} disagrees with linear solve {sol}"
        )

    functional = GudderFunctional(c, np.concatenate(([k0], k_vec)))
    trace = DerivationTrace(
        n_phi=n,
        sum_constraint=float(sum_constraint),
        dot_constraint=float(np.dot(n, k_vec)),
        k_norm=float(np.linalg.norm(k_vec)),
        c=float(c),
        k0=float(k0),
        k_vec=k_vec,
        crosscheck_residual=residual,
    )
    return functional, trace


def _unit_rows(n: ArrayLike) -> np.ndarray:
    a = np.asarray(n, dtype=float)
    if a.shape[-1:] != (3,) or not np.all(np.isfinite(a)):
        raise ValidationError(f"expected finite Bloch vectors, got shape {a.shape}")
    norms = np.linalg.norm(a, axis=-1)
    if np.any(np.abs(norms - 1.0) > TOL_UNIT):
        raise ValidationError("Bloch vectors must have unit norm")
    return a


def born_probability(n_phi: ArrayLike, n_psi: ArrayLike) -> float | np.ndarray:
    """``(1 + n_phi . n_psi) / 2``, evaluated as ``f_phi(1, n_psi)``.

    Both arguments may be batches of shape ``(..., 3)``; they broadcast.
    Unit norms are only checked to ``TOL_UNIT``, so the raw evaluation can
    overshoot ``[0, 1]`` by rounding; that excess is clipped. Inside the
    interval the value is exactly ``gudder_eval`` of the derived measure.
    """
    if np.ndim(n_phi) == 1 and np.ndim(n_psi) == 1:
        h0, h1, h2 = (0.5 * x for x in as_unit_bloch(n_phi).tolist())
        p0, p1, p2 = as_unit_bloch(n_psi).tolist()
        # k.(1, psi) for k = (1/2, phi/2), summed in the same order as gudder_eval
        p = 0.5 * 1.0 + h0 * p0 + h1 * p1 + h2 * p2
        return min(max(p, 0.0), 1.0)
    phi, psi = np.broadcast_arrays(_unit_rows(n_phi), _unit_rows(n_psi))
    # c = 0, k = (1/2, phi/2): k.(1, psi), summed in the same order as gudder_eval
    h = 0.5 * phi
    raw = 0.5 * 1.0 + h[..., 0] * psi[..., 0] + h[..., 1] * psi[..., 1] + h[..., 2] * psi[..., 2]
    return np.clip(raw, 0.0, 1.0)


def measure_linear_form(f_phi: GudderFunctional, r: ArrayLike) -> float:
    """Closed form ``(r0 + n_phi . r_vec) / 2`` of a derived measure."""
    if f_phi.c != 0.0:
        raise ContractError(f"linear form requires c = 0, got c = {f_phi.c!r}")
    if not f_phi.is_derived_measure():
        raise ContractError("functional is not a derived measure (k0 = |k_vec| = 1/2)")
    v = as_four_vector(r)
    n_phi = 2.0 * f_phi.k_vec
    return float(0.5 * (v[0] + np.dot(n_phi, v[1:])))


def measure_trace_form(n_phi: ArrayLike, r: ArrayLike) -> float:
    """Hilbert-Schmidt form ``Tr(P_phi^dagger R)`` with ``R`` composed from ``r``."""
    p = projector_from_bloch(n_phi)
    op = pauli_compose(r)
    return float(np.trace(p.conj().T @ op).real)
