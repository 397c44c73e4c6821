"""Finite spectral models of compact operators.

The convergence theory lives in infinite dimensions, but every statement
about rates reduces to coefficient inequalities against the spectrum of
the normal operator.  This module provides finite eigen-decompositions
(synthetic diagonal spectra or a one-sided Jacobi SVD of a dense
matrix), source elements x_j = s(eig_j) w_j, application of the
regularized inverse in the eigenbasis, and a tail-decay membership probe
for the source sets R(s(T*T)).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .filters import FilterFamily, ParameterRangeError, _check_alpha

MAX_DIM = 512
JACOBI_MAX_SWEEPS = 60
MEMBERSHIP_TAIL_SHARE = 0.10   # last-quartile share of sum v_j^2 marking decay
MEMBERSHIP_GROWTH = 10.0       # |v_j| may exceed the running floor by this factor
SOURCE_FLOOR = 1e-300


class OperatorError(ValueError):
    pass


class DimensionError(OperatorError):
    pass


class ConvergenceFailure(OperatorError):
    pass


@dataclass(frozen=True)
class SpectralModel:
    """Eigenvalues of the normal operator, sorted descending."""

    eigenvalues: np.ndarray
    provenance: str
    tnorm_sq: float = None  # reference operator norm squared (defaults to eig_1)

    def __post_init__(self):
        eig = np.asarray(self.eigenvalues, dtype=float)
        object.__setattr__(self, "eigenvalues", eig)
        if eig.ndim != 1 or eig.size == 0:
            raise OperatorError("eigenvalues must be a nonempty 1-d array")
        if np.any(eig <= 0):
            raise OperatorError("eigenvalues must be strictly positive")
        if np.any(np.diff(eig) > 0):
            raise OperatorError("eigenvalues must be sorted descending")
        if self.tnorm_sq is None:
            object.__setattr__(self, "tnorm_sq", float(eig[0]))
        elif eig[0] > self.tnorm_sq * (1 + 1e-12):
            raise OperatorError("largest eigenvalue exceeds the declared norm")

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.size)

    def to_json_dict(self) -> dict:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "provenance": self.provenance,
            "dim": self.dim,
        }


@dataclass(frozen=True)
class SourceElement:
    """x_j = s(eig_j) w_j : an element of the source set R(s(T*T))."""

    x_dagger: np.ndarray
    generator_w: np.ndarray
    source_s: object
    model: SpectralModel


_DIAG_RULES = {
    "j^-2": lambda j: j ** -2.0,
    "j^-4": lambda j: j ** -4.0,
    "exp": lambda j: np.exp(-j.astype(float)),
}


def make_model(rule: str = "j^-2", dim: int = 200) -> SpectralModel:
    """Synthetic diagonal spectrum: polynomially or exponentially decaying."""
    if dim < 1 or dim > MAX_DIM:
        raise DimensionError(f"dim must be in [1, {MAX_DIM}], got {dim}")
    fn = _DIAG_RULES.get(rule)
    if fn is None:
        raise OperatorError(f"unknown spectrum rule '{rule}' (choose from {sorted(_DIAG_RULES)})")
    j = np.arange(1, dim + 1, dtype=float)
    return SpectralModel(eigenvalues=fn(j), provenance=f"synthetic-diagonal({rule})")


def model_from_json(text: str) -> SpectralModel:
    doc = json.loads(text)
    return SpectralModel(
        eigenvalues=np.asarray(doc["eigenvalues"], dtype=float),
        provenance=doc.get("provenance", "json"),
    )


def load_matrix_csv(path: str) -> np.ndarray:
    """Dense row-major CSV, optional header row."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise OperatorError(f"empty matrix file: {path}")
    start = 0
    try:
        [float(tok) for tok in lines[0].split(",")]
    except ValueError:
        start = 1  # header row
    rows = [[float(tok) for tok in ln.split(",")] for ln in lines[start:]]
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise OperatorError("ragged CSV matrix")
    return np.asarray(rows, dtype=float)


def jacobi_svd(matrix: np.ndarray, tol: float = 1e-12):
    """One-sided Jacobi SVD of a small dense matrix.

    Columns are rotated pairwise until every off-diagonal Gram entry is
    below tol relative to the column norms.  Returns (U, sigma, V) with
    A = U @ diag(sigma) @ V.T, sigma descending.
    """
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2:
        raise OperatorError("matrix must be 2-d")
    m, n = A.shape
    if m > MAX_DIM or n > MAX_DIM:
        raise DimensionError(f"matrix dimensions capped at {MAX_DIM}, got {A.shape}")
    if not 1e-14 <= tol <= 1e-8:
        raise OperatorError(f"tol must lie in [1e-14, 1e-8], got {tol}")
    transposed = m < n
    if transposed:
        A = A.T
        m, n = n, m

    W = A.copy()
    V = np.eye(n)
    # numerically zero columns count as converged; rotating them chases noise
    norm_floor = (np.finfo(float).eps * np.linalg.norm(A)) ** 2
    for sweep in range(JACOBI_MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                app = float(W[:, p] @ W[:, p])
                aqq = float(W[:, q] @ W[:, q])
                apq = float(W[:, p] @ W[:, q])
                if app <= norm_floor or aqq <= norm_floor:
                    continue
                if abs(apq) <= tol * math.sqrt(app * aqq) or apq == 0.0:
                    continue
                rotated = True
                zeta = (aqq - app) / (2.0 * apq)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(1.0, zeta))
                c = 1.0 / math.hypot(1.0, t)
                s = c * t
                Wp = W[:, p].copy()
                W[:, p] = c * Wp - s * W[:, q]
                W[:, q] = s * Wp + c * W[:, q]
                Vp = V[:, p].copy()
                V[:, p] = c * Vp - s * V[:, q]
                V[:, q] = s * Vp + c * V[:, q]
        if not rotated:
            break
    else:
        raise ConvergenceFailure(f"Jacobi SVD did not converge in {JACOBI_MAX_SWEEPS} sweeps")

    sigma = np.linalg.norm(W, axis=0)
    order = np.argsort(sigma)[::-1]
    sigma = sigma[order]
    V = V[:, order]
    U = np.zeros((m, n))
    for k in range(n):
        if sigma[k] > 0:
            U[:, k] = W[:, order[k]] / sigma[k]
        else:
            U[k % m, k] = 1.0
    if transposed:
        return V, sigma, U
    return U, sigma, V


def svd_decompose(matrix: np.ndarray, tol: float = 1e-12):
    """Spectral model of T*T from a dense matrix via the Jacobi SVD.

    Returns (model, U, sigma, V); eigenvalues are the squared singular
    values above tol * sigma_max.
    """
    U, sigma, V = jacobi_svd(matrix, tol)
    keep = sigma > (sigma[0] * tol if sigma[0] > 0 else 0.0)
    if not np.any(keep):
        raise OperatorError("matrix is numerically zero; no spectral model")
    model = SpectralModel(
        eigenvalues=(sigma[keep] ** 2),
        provenance=f"dense-svd({matrix.shape[0]}x{matrix.shape[1]})",
    )
    return model, U, sigma, V


def make_source_element(model: SpectralModel, s, w: np.ndarray) -> SourceElement:
    """Coefficients of s(T*T) w in the eigenbasis."""
    if not getattr(s, "certified", False):
        raise OperatorError("source function must be certified")
    w = np.asarray(w, dtype=float)
    if w.shape != (model.dim,):
        raise OperatorError(f"generator length {w.shape} does not match dim {model.dim}")
    x = np.asarray(s.at(model.eigenvalues), dtype=float) * w
    return SourceElement(x_dagger=x, generator_w=w, source_s=s, model=model)


def _filter_lambda_check(model: SpectralModel, filt: FilterFamily):
    if filt.lambda_sup is not None and model.eigenvalues[0] >= filt.lambda_sup:
        raise ParameterRangeError(
            f"model spectrum reaches {model.eigenvalues[0]:.3g}, beyond the "
            f"valid range of filter '{filt.id}' (< {filt.lambda_sup:.3g})"
        )


def regularize(model: SpectralModel, filt: FilterFamily, alpha: float,
               solution_coefs: np.ndarray) -> np.ndarray:
    """Apply the regularized inverse to data y = T x, in the eigenbasis.

    With y_j = sigma_j x_j, the reconstruction is
    g_alpha(eig_j) * eig_j * x_j = (1 - r_alpha(eig_j)) x_j.
    """
    _check_alpha(filt, alpha)
    _filter_lambda_check(model, filt)
    x = np.asarray(solution_coefs, dtype=float)
    if x.shape != (model.dim,):
        raise OperatorError(f"coefficient length {x.shape} does not match dim {model.dim}")
    r = np.asarray(filt._r_value(np.float64(alpha), model.eigenvalues), dtype=float)
    return x - r * x


def regularization_error(model: SpectralModel, filt: FilterFamily, alpha: float,
                         source: SourceElement) -> float:
    """l2 reconstruction error sqrt(sum_j r_j^2 x_j^2); may underflow to 0."""
    lr = log_regularization_error(model, filt, alpha, source)
    if lr == -math.inf:
        return 0.0
    if lr > 709.0:
        return math.inf
    return math.exp(lr)


def log_regularization_error(model: SpectralModel, filt: FilterFamily, alpha: float,
                             source: SourceElement) -> float:
    """ln of the reconstruction error, stable when every residual underflows."""
    _check_alpha(filt, alpha)
    _filter_lambda_check(model, filt)
    x = source.x_dagger
    with np.errstate(all="ignore"):
        lr = np.asarray(filt._r_log(np.float64(alpha), model.eigenvalues), dtype=float)
    terms = 2.0 * lr
    with np.errstate(divide="ignore"):
        terms = terms + 2.0 * np.log(np.abs(x))
    finite = terms[terms > -np.inf]
    if finite.size == 0:
        return -math.inf
    peak = float(np.max(finite))
    return 0.5 * (peak + math.log(float(np.sum(np.exp(finite - peak)))))


@dataclass(frozen=True)
class MembershipVerdict:
    inside: bool
    bound: float | None = None
    witness_index: int | None = None  # 1-based eigenvalue index
    reason: str = ""

    def __bool__(self) -> bool:
        return self.inside


def membership_probe(model: SpectralModel, x: np.ndarray, s) -> MembershipVerdict:
    """Does x look like an element of R(s(T*T))?

    The candidate generator v_j = x_j / s(eig_j) must behave like a
    square-summable sequence on the finite spectrum: the last quartile of
    sum v_j^2 contributes under 10%, and |v_j| never climbs past 10x its
    running floor.  Finite models cannot decide summability, so this is
    an explicit-threshold heuristic.
    """
    if not getattr(s, "certified", False):
        raise OperatorError("source function must be certified")
    x = np.asarray(x, dtype=float)
    if x.shape != (model.dim,):
        raise OperatorError(f"coefficient length {x.shape} does not match dim {model.dim}")
    if not np.any(x):
        return MembershipVerdict(inside=True, bound=0.0)

    sv = np.asarray(s.at(model.eigenvalues), dtype=float)
    degenerate = (sv < SOURCE_FLOOR) & (x != 0)
    if np.any(degenerate):
        j = int(np.argmax(degenerate))
        return MembershipVerdict(inside=False, witness_index=j + 1,
                                 reason="source function vanishes on a used component")
    safe = sv >= SOURCE_FLOOR
    v = np.zeros_like(x)
    v[safe] = x[safe] / sv[safe]

    total = float(np.sum(v ** 2))
    quart = max(1, model.dim // 4)
    tail = float(np.sum(v[-quart:] ** 2))
    if total > 0 and tail > MEMBERSHIP_TAIL_SHARE * total:
        return MembershipVerdict(inside=False, witness_index=model.dim - quart + 1,
                                 reason="last-quartile share of the generator norm too large")

    av = np.abs(v)
    meaningful = av > 1e-12 * float(np.max(av))
    floor = math.inf
    for j in range(model.dim):
        if not meaningful[j]:
            continue
        if av[j] > MEMBERSHIP_GROWTH * floor:
            return MembershipVerdict(inside=False, witness_index=j + 1,
                                     reason="generator grows along the spectrum")
        floor = min(floor, av[j])
    return MembershipVerdict(inside=True, bound=total)
