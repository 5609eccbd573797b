"""Sampling and property checks: orthogonal additivity on four-vectors,
lattice-measure axioms on the Bloch sphere, and additivity of expectation
values over (non-orthogonal) effects.

All randomness goes through an explicit :class:`numpy.random.Generator`
built on PCG64, so a seed fixes the whole sample stream on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike

from bornlab.errors import ValidationError
from bornlab.measure import born_probability
from bornlab.pauli import TOL_HERM, as_four_vector, as_hermitian, as_unit_bloch

__all__ = [
    "TOL_ORTH",
    "GS_REJECT",
    "make_rng",
    "sample_four_vector",
    "sample_unit_bloch",
    "sample_orthogonal_pair",
    "OrthogonalPair",
    "AdditivityReport",
    "check_orthogonal_additivity",
    "check_full_additivity",
    "LatticeMeasure",
    "born_lattice_measure",
    "odd_power_measure",
    "constant_measure",
    "check_lattice_axioms",
    "LatticeReport",
    "as_effect",
    "as_density",
    "EffectReport",
    "check_effect_additivity",
]

TOL_ORTH = 1e-12
GS_REJECT = 1e-6
_MAX_RESAMPLE = 1000


def make_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    """PCG64 generator; an existing generator is passed through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def sample_four_vector(rng: np.random.Generator) -> np.ndarray:
    """Standard-normal four-vector (never the zero vector)."""
    while True:
        r = rng.standard_normal(4)
        if r @ r > 0.0:
            return r


def sample_unit_bloch(rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform point(s) on the unit sphere, shape ``(3,)`` or ``(size, 3)``."""
    shape = (3,) if size is None else (size, 3)
    while True:
        v = rng.standard_normal(shape)
        norms = np.linalg.norm(v, axis=-1, keepdims=True)
        if np.all(norms > 1e-8):
            return v / norms


@dataclass(frozen=True)
class OrthogonalPair:
    r: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        r = as_four_vector(self.r)
        s = as_four_vector(self.s)
        scale = math.sqrt((r @ r) * (s @ s))
        if abs(float(r @ s)) > TOL_ORTH * scale:
            raise ValidationError(f"pair is not orthogonal: r.s = {np.dot(r, s)!r}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "s", s)


def _project_out(v: np.ndarray, r: np.ndarray) -> np.ndarray:
    return v - ((v @ r) / (r @ r)) * r


def sample_orthogonal_pair(
    rng: np.random.Generator, r: ArrayLike | None = None
) -> OrthogonalPair:
    """Random ``(r, s)`` with ``r.s = 0``.

    ``s`` is a fresh normal draw with its component along ``r`` removed by
    one Gram-Schmidt step (applied twice to clean up rounding). Draws whose
    remainder is shorter than ``GS_REJECT`` times the candidate are redrawn.
    """
    r = sample_four_vector(rng) if r is None else as_four_vector(r)
    if not np.any(r):
        raise ValidationError("anchor vector must be non-zero")
    for _ in range(_MAX_RESAMPLE):
        cand = sample_four_vector(rng)
        s = _project_out(cand, r)
        if s @ s < GS_REJECT**2 * (cand @ cand):
            continue
        s = _project_out(s, r)
        if abs(r @ s) <= TOL_ORTH * math.sqrt((r @ r) * (s @ s)):
            return OrthogonalPair(r, s)
    raise RuntimeError("could not draw an orthogonal partner")  # pragma: no cover


@dataclass(frozen=True)
class AdditivityReport:
    samples: int
    max_defect: float
    mean_defect: float
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "max_defect": self.max_defect,
            "mean_defect": self.mean_defect,
            "tol": self.tol,
            "pass": self.passed,
        }


def _relative_defect(f: Callable, r: np.ndarray, s: np.ndarray) -> float:
    fr, fs = float(f(r)), float(f(s))
    return abs(float(f(r + s)) - fr - fs) / max(1.0, abs(fr) + abs(fs))


def _summarize(defects: list[float], tol: float) -> AdditivityReport:
    d = np.asarray(defects)
    worst = float(d.max())
    return AdditivityReport(
        samples=len(d),
        max_defect=worst,
        mean_defect=float(d.mean()),
        tol=tol,
        passed=bool(worst <= tol),
    )


def check_orthogonal_additivity(
    f: Callable[[np.ndarray], float], n_pairs: int, seed=0, tol: float = 1e-8
) -> AdditivityReport:
    """Relative defect ``|f(r+s) - f(r) - f(s)| / max(1, |f(r)| + |f(s)|)``
    over ``n_pairs`` random orthogonal pairs.

    ``f`` is any callable on four-vectors; a :class:`GudderFunctional` works
    directly.
    """
    if n_pairs < 1:
        raise ValidationError("n_pairs must be >= 1")
    rng = make_rng(seed)
    defects = []
    for _ in range(n_pairs):
        pair = sample_orthogonal_pair(rng)
        defects.append(_relative_defect(f, pair.r, pair.s))
    return _summarize(defects, tol)


def check_full_additivity(
    f: Callable[[np.ndarray], float], n_pairs: int, seed=0, tol: float = 1e-8
) -> AdditivityReport:
    """Same defect as above but over unconstrained random pairs."""
    if n_pairs < 1:
        raise ValidationError("n_pairs must be >= 1")
    rng = make_rng(seed)
    defects = [
        _relative_defect(f, sample_four_vector(rng), sample_four_vector(rng))
        for _ in range(n_pairs)
    ]
    return _summarize(defects, tol)


@dataclass(frozen=True)
class LatticeMeasure:
    """Assignment of a number to each rank-1 projector, keyed by its unit
    Bloch vector.

    ``rule`` must accept an array of shape ``(..., 3)`` of unit vectors and
    return values of shape ``(...)``.
    """

    rule: Callable[[np.ndarray], np.ndarray]
    tag: str = "custom"

    def __call__(self, n: ArrayLike):
        v = np.asarray(n, dtype=float)
        out = self.rule(v)
        return float(out) if v.ndim == 1 else np.asarray(out, dtype=float)

    def lift(self) -> Callable[[np.ndarray], float]:
        """Function on slice four-vectors ``(1, n)``; rejects anything else."""

        def lifted(r):
            v = as_four_vector(r)
            if v[0] != 1.0:
                raise ValidationError("lattice measures are defined on (1, n) only")
            return self(as_unit_bloch(v[1:]))

        return lifted


def born_lattice_measure(n_phi: ArrayLike) -> LatticeMeasure:
    phi = as_unit_bloch(n_phi)
    return LatticeMeasure(lambda n: born_probability(phi, n), tag="born")


def odd_power_measure(n_s: ArrayLike, m: int = 3) -> LatticeMeasure:
    """``p(n) = (1 + (n_s . n)^m) / 2`` for odd ``m >= 3``.

    A representative lattice measure that obeys range and complement rules
    but is not linear in the projector.
    """
    if isinstance(m, bool) or int(m) != m:
        raise ValidationError(f"exponent must be an integer, got {m!r}")
    m = int(m)
    if m < 3 or m % 2 == 0:
        raise ValidationError(f"exponent must be odd and >= 3, got {m}")
    s = as_unit_bloch(n_s)

    def rule(n):
        x = np.clip(np.asarray(n, dtype=float) @ s, -1.0, 1.0)
        return 0.5 * (1.0 + x**m)

    return LatticeMeasure(rule, tag=f"odd-power({m})")


def constant_measure(value: float) -> LatticeMeasure:
    v = float(value)
    return LatticeMeasure(lambda n: np.full(np.shape(n)[:-1], v), tag=f"constant({v:g})")


@dataclass(frozen=True)
class LatticeReport:
    samples: int
    max_defect: float
    mean_defect: float
    tol: float
    passed: bool
    min_value: float
    max_value: float
    range_ok: bool
    complement_ok: bool

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "max_defect": self.max_defect,
            "mean_defect": self.mean_defect,
            "tol": self.tol,
            "pass": self.passed,
            "min_value": self.min_value,
            "max_value": self.max_value,
            "range_ok": self.range_ok,
            "complement_ok": self.complement_ok,
        }


def check_lattice_axioms(
    p: LatticeMeasure, n_samples: int, seed=0, tol: float = 1e-12
) -> LatticeReport:
    """Range ``p in [0, 1]`` and complement ``p(n) + p(-n) = 1`` on random
    unit vectors. The reported defect is the complement defect."""
    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    rng = make_rng(seed)
    n = sample_unit_bloch(rng, n_samples)
    plus = np.asarray(p(n), dtype=float).reshape(n_samples)
    minus = np.asarray(p(-n), dtype=float).reshape(n_samples)
    defect = np.abs(plus + minus - 1.0)
    values = np.concatenate((plus, minus))
    lo, hi = float(values.min()), float(values.max())
    range_ok = bool(lo >= -tol and hi <= 1.0 + tol)
    complement_ok = bool(defect.max() <= tol)
    return LatticeReport(
        samples=n_samples,
        max_defect=float(defect.max()),
        mean_defect=float(defect.mean()),
        tol=tol,
        passed=range_ok and complement_ok,
        min_value=lo,
        max_value=hi,
        range_ok=range_ok,
        complement_ok=complement_ok,
    )


def as_effect(op: ArrayLike, tol: float = TOL_HERM) -> np.ndarray:
    """Hermitian operator with both eigenvalues in ``[0, 1]``."""
    a = as_hermitian(op, tol)
    ev = np.linalg.eigvalsh(a)
    if ev[0] < -tol or ev[-1] > 1.0 + tol:
        raise ValidationError(f"effect eigenvalues {ev} outside [0, 1]")
    return a


def as_density(op: ArrayLike, tol: float = TOL_HERM) -> np.ndarray:
    """Positive semidefinite Hermitian operator of unit trace."""
    a = as_hermitian(op, tol)
    tr = np.trace(a).real
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"density operator must have trace 1, got {tr!r}")
    if np.linalg.eigvalsh(a)[0] < -tol:
        raise ValidationError("density operator has a negative eigenvalue")
    return a


@dataclass(frozen=True)
class EffectReport:
    defect: float
    value_sum: float
    value_1: float
    value_2: float
    product_norm: float
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "defect": self.defect,
            "value_sum": self.value_sum,
            "value_1": self.value_1,
            "value_2": self.value_2,
            "product_norm": self.product_norm,
            "tol": self.tol,
            "pass": self.passed,
        }


def check_effect_additivity(
    rho: ArrayLike, e1: ArrayLike, e2: ArrayLike, tol: float = 1e-12
) -> EffectReport:
    """Defect ``Tr(rho (E1 + E2)) - Tr(rho E1) - Tr(rho E2)``.

    ``product_norm`` is the spectral norm of ``E1 E2``; a non-zero value
    means the effects are not orthogonal, yet the defect still vanishes.
    """
    r = as_density(rho)
    a = as_effect(e1)
    b = as_effect(e2)
    total = as_effect(a + b)
    v_sum = np.trace(r @ total).real
    v1 = np.trace(r @ a).real
    v2 = np.trace(r @ b).real
    defect = abs(float(v_sum - v1 - v2))
    return EffectReport(
        defect=defect,
        value_sum=float(v_sum),
        value_1=float(v1),
        value_2=float(v2),
        product_norm=float(np.linalg.norm(a @ b, 2)),
        tol=tol,
        passed=defect <= tol,
    )
