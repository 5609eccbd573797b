"""Least-squares identification of ``(c, k)`` in ``f(r) = c (r.r) + k.r``
from sampled values, with rank diagnostics and a three-way verdict.

The regression basis for a sample at ``r`` is ``[r.r, r0, r1, r2, r3]``.
On the slice ``r = (1, n)`` with ``|n| = 1`` the first two columns are
proportional (``r.r = 2 r0``), so only ``2c + k0`` is identifiable there.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike

from bornlab.errors import ValidationError
from bornlab.pauli import TOL_EQ, as_four_vector, hermitian_to_json, pauli_compose

__all__ = [
    "TOL_RANK",
    "TAU_C",
    "TAU_FIT",
    "Verdict",
    "MeasureSample",
    "FitReport",
    "DensityEstimate",
    "build_design_row",
    "design_matrix",
    "fit_gudder",
    "classify",
    "extract_density",
    "general_support",
    "slice_support",
    "sample_values",
    "samples_from_iterable",
]

TOL_RANK = 1e-10
TAU_C = 1e-6
TAU_FIT = 1e-6

# null direction of the design on the slice (1, n): 2c + k0 is blind to it
_SLICE_NULL = np.array([1.0, -2.0, 0.0, 0.0, 0.0]) / np.sqrt(5.0)


class Verdict(str, enum.Enum):
    BORN_LINEAR = "BornLinear"
    GUDDER_QUADRATIC = "GudderQuadratic"
    NON_GUDDER = "NonGudder"


@dataclass(frozen=True)
class MeasureSample:
    r: np.ndarray
    value: float

    def __post_init__(self):
        object.__setattr__(self, "r", as_four_vector(self.r))
        v = float(self.value)
        if not np.isfinite(v):
            raise ValidationError(f"sample value must be finite, got {self.value!r}")
        object.__setattr__(self, "value", v)

    def to_dict(self) -> dict:
        return {"r": [float(x) for x in self.r], "value": self.value}


@dataclass(frozen=True)
class DensityEstimate:
    rho: np.ndarray
    trace: float
    min_eigenvalue: float
    physical: bool


@dataclass(frozen=True)
class FitReport:
    c_hat: float
    k_hat: np.ndarray
    rms_residual: float
    max_residual: float
    design_rank: int
    identifiable_note: str
    singular_values: np.ndarray
    null_space: np.ndarray
    n_samples: int
    verdict: Verdict | None = None
    rho_hat: np.ndarray | None = None
    density: DensityEstimate | None = None
    representative: str = "minimum-norm"
    thresholds: dict = field(default_factory=dict)

    @property
    def combination_2c_k0(self) -> float:
        return 2.0 * self.c_hat + float(self.k_hat[0])

    def to_dict(self) -> dict:
        out = {
            "c_hat": self.c_hat,
            "k_hat": [float(x) for x in self.k_hat],
            "rms_residual": self.rms_residual,
            "max_residual": self.max_residual,
            "design_rank": self.design_rank,
            "identifiable_note": self.identifiable_note,
            "singular_values": [float(x) for x in self.singular_values],
            "n_samples": self.n_samples,
            "representative": self.representative,
            "verdict": None if self.verdict is None else self.verdict.value,
            "rho_hat": None if self.rho_hat is None else hermitian_to_json(self.rho_hat),
        }
        if self.density is not None:
            out["density"] = {
                "trace": self.density.trace,
                "min_eigenvalue": self.density.min_eigenvalue,
                "physical": self.density.physical,
            }
        if self.thresholds:
            out["thresholds"] = dict(self.thresholds)
        return out


def build_design_row(r: ArrayLike) -> np.ndarray:
    """``[r.r, r0, r1, r2, r3]``."""
    v = as_four_vector(r)
    return np.concatenate(([float(np.dot(v, v))], v))


def design_matrix(rs: ArrayLike) -> np.ndarray:
    a = np.asarray(rs, dtype=float)
    if a.ndim != 2 or a.shape[1] != 4:
        raise ValidationError(f"expected an (n, 4) array of four-vectors, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("four-vectors must be finite")
    return np.column_stack((np.einsum("ij,ij->i", a, a), a))


def _as_arrays(samples) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(samples, tuple) and len(samples) == 2:
        rs = np.asarray(samples[0], dtype=float)
        vals = np.asarray(samples[1], dtype=float)
    else:
        samples = [s if isinstance(s, MeasureSample) else MeasureSample(**s) for s in samples]
        rs = np.array([s.r for s in samples], dtype=float).reshape(-1, 4)
        vals = np.array([s.value for s in samples], dtype=float)
    if vals.ndim != 1 or len(vals) != len(rs):
        raise ValidationError("need one value per four-vector")
    if not np.all(np.isfinite(vals)):
        raise ValidationError("sample values must be finite")
    return rs, vals


def _describe_null_space(null: np.ndarray) -> str:
    if null.shape[0] == 0:
        return "full rank: c, k0, k1, k2, k3 are all determined"
    if null.shape[0] == 1 and abs(abs(float(null[0] @ _SLICE_NULL)) - 1.0) < 1e-8:
        return (
            "rank 4: only the combination 2c+k0 is determined (plus k1, k2, k3); "
            "c and k0 are not separately identifiable on this support. "
            "A sample off the slice r0 = 1, e.g. (-1, n), separates them"
        )
    dirs = "; ".join(
        "(" + ", ".join(f"{x:+.6f}" for x in v) + ")" for v in null
    )
    return (
        f"rank {5 - null.shape[0]}: parameters (c, k0, k1, k2, k3) are determined "
        f"only up to the null directions {dirs}"
    )


def fit_gudder(samples, tol_rank: float = TOL_RANK) -> FitReport:
    """Minimum-norm least-squares fit of ``(c, k)``.

    Parameters
    ----------
    samples : sequence of MeasureSample (or dicts with ``r``, ``value``), or
        a tuple ``(rs, values)`` of arrays with shapes ``(n, 4)`` and ``(n,)``.
    tol_rank : float
        Singular values below ``tol_rank * s_max`` count as zero.

    Returns
    -------
    FitReport
        Parameters, residuals and rank diagnostics; ``verdict`` is left
        unset (see :func:`classify`).
    """
    rs, vals = _as_arrays(samples)
    if len(vals) < 5:
        raise ValidationError(f"need at least 5 samples, got {len(vals)}")
    a = design_matrix(rs)

    u, s, vt = np.linalg.svd(a, full_matrices=False)
    keep = s > tol_rank * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    rank = int(keep.sum())
    s_inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    x = vt.T @ (s_inv * (u.T @ vals))
    null = vt[~keep]

    resid = vals - a @ x
    return FitReport(
        c_hat=float(x[0]),
        k_hat=x[1:].copy(),
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        max_residual=float(np.max(np.abs(resid))),
        design_rank=rank,
        identifiable_note=_describe_null_space(null),
        singular_values=s,
        null_space=null,
        n_samples=len(vals),
    )


def _zero_c_representative(fit: FitReport) -> FitReport | None:
    """Shift along the null space to c = 0 when c is not identifiable.

    Fitted values are unchanged by such a shift. Returns None when c is
    identifiable.
    """
    null = fit.null_space
    if null.shape[0] == 0:
        return None
    nc = null[:, 0]
    if float(np.dot(nc, nc)) < 1e-16:
        return None
    x = np.concatenate(([fit.c_hat], fit.k_hat))
    x = x + null.T @ (-x[0] * nc / np.dot(nc, nc))
    x[0] = 0.0
    return replace(fit, c_hat=0.0, k_hat=x[1:], representative="c=0")


def classify(
    fit: FitReport, tau_c: float = TAU_C, tau_fit: float = TAU_FIT
) -> FitReport:
    """Attach a verdict.

    ``NonGudder`` when the rms residual exceeds ``tau_fit``; otherwise
    ``BornLinear`` if ``|c_hat| <= tau_c`` (and the density operator is
    extracted), else ``GudderQuadratic``. If ``c`` is not identifiable on
    the sampled support, the parameters are first moved to the ``c = 0``
    member of the solution set, which fits the data equally well.
    """
    thresholds = {"tau_c": tau_c, "tau_fit": tau_fit}
    if fit.rms_residual > tau_fit:
        return replace(fit, verdict=Verdict.NON_GUDDER, thresholds=thresholds)
    shifted = _zero_c_representative(fit)
    if shifted is not None:
        fit = replace(
            shifted,
            identifiable_note=fit.identifiable_note
            + "; parameters reported for the c = 0 member of the solution set",
        )
    if abs(fit.c_hat) <= tau_c:
        dens = extract_density(fit.k_hat)
        return replace(
            fit,
            verdict=Verdict.BORN_LINEAR,
            rho_hat=dens.rho,
            density=dens,
            thresholds=thresholds,
        )
    return replace(fit, verdict=Verdict.GUDDER_QUADRATIC, thresholds=thresholds)


def extract_density(k_hat: ArrayLike) -> DensityEstimate:
    """Operator ``rho`` with ``k.r = Tr(rho^dagger R_r)`` for every ``r``.

    By the Pauli Parseval relation ``rho`` has coefficients ``2 k``, i.e.
    ``rho = sum_mu k_mu sigma_mu``. Unphysical results (trace != 1 or a
    negative eigenvalue) are flagged, not rejected.
    """
    k = as_four_vector(k_hat)
    rho = pauli_compose(2.0 * k)
    evals = np.linalg.eigvalsh(rho)
    trace = float(np.trace(rho).real)
    physical = abs(trace - 1.0) <= TOL_EQ and evals[0] >= -TOL_EQ
    return DensityEstimate(rho=rho, trace=trace, min_eigenvalue=float(evals[0]), physical=bool(physical))


def general_support(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` standard-normal four-vectors; full rank with probability 1."""
    return rng.standard_normal((n, 4))


def slice_support(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` vectors ``(1, n_hat)`` with ``n_hat`` uniform on the sphere."""
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return np.column_stack((np.ones(n), v))


def sample_values(
    f: Callable[[np.ndarray], float], rs: Sequence[ArrayLike] | np.ndarray
) -> list[MeasureSample]:
    """Evaluate ``f`` on each four-vector and wrap as samples."""
    return [MeasureSample(r, float(f(np.asarray(r, dtype=float)))) for r in rs]


def samples_from_iterable(items: Iterable[dict]) -> list[MeasureSample]:
    out = []
    for i, item in enumerate(items):
        try:
            out.append(MeasureSample(item["r"], item["value"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed sample #{i}: {item!r}") from exc
    return out
