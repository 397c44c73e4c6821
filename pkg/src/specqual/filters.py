"""Spectral filter families and the regularization-method axiom checker.

A filter family g_alpha(lambda) approximates 1/lambda as alpha -> 0.
Each catalog entry carries closed forms for both the filter g and its
residual r_alpha(lambda) = 1 - lambda*g_alpha(lambda), the quantity that
controls the componentwise regularization error.

Residuals are dual-channel: alongside the value, every entry supplies
ln|r| in closed form.  Ratios like exp(-1/alpha) / r_alpha(lambda) that
drive the source-function estimators live far below double-precision
range for e^(-lambda/alpha)-type methods, so the whole estimation stack
works on the log channel and treats the value channel as a convenience.

Catalog ids (stable interface, used by the CLI and config files):
tikhonov, tsvd, ex3_exp, ex4_log, ex7_piecewise, ex8_osc(k),
ex9_osc, ex10_osc, landweber(mu), showalter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

NEG_INF = -np.inf

# H3 deep-probe parameters: the residual must have shrunk at alpha=1e-300,
# either below the absolute tolerance or to half its value at the grid floor
H3_PROBE_ALPHA = 1e-300
H3_ABS_TOL = 0.05
H3_SHRINK = 0.5
H3_LAMBDA_MIN = 0.01


class FilterError(ValueError):
    """Base class for filter-family failures."""


class UnknownFilterError(FilterError):
    def __init__(self, name: str):
        super().__init__(f"unknown catalog filter '{name}'")
        self.name = name


class ParameterRangeError(FilterError):
    """alpha or lambda outside the family's valid range."""


@dataclass(frozen=True)
class ResidualValue:
    """r_alpha(lambda) with an underflow-safe logarithmic channel."""

    value: float
    log_abs: float  # ln|r|, -inf when r == 0
    sign: int       # -1, 0, +1


@dataclass(frozen=True)
class FilterFamily:
    """A parametric spectral filter with closed-form residual channels.

    ``g`` and ``residual_*`` callables accept numpy arrays (broadcast
    over alpha and lambda).  Instances are immutable and safe to share.
    """

    id: str
    alpha_max: float
    h2_constant: float
    oscillatory: bool
    params: dict[str, float] = field(default_factory=dict)
    lambda_sup: float | None = None  # exclusive upper bound on valid lambda
    _g: Callable = None
    _r_log: Callable = None
    _r_value: Callable = None
    _r_sign: Callable = None

    def __post_init__(self):
        if not self.alpha_max > 0:
            raise FilterError(f"alpha_max must be positive, got {self.alpha_max}")
        if not self.h2_constant > 0:
            raise FilterError(f"h2_constant must be positive, got {self.h2_constant}")


def _check_alpha(filt: FilterFamily, alpha) -> np.ndarray:
    a = np.asarray(alpha, dtype=float)
    if np.any(a <= 0) or np.any(a > filt.alpha_max):
        bad = a[(a <= 0) | (a > filt.alpha_max)].flat[0]
        raise ParameterRangeError(
            f"alpha={bad} outside (0, {filt.alpha_max}] for filter '{filt.id}'"
        )
    return a


def _check_lambda(filt: FilterFamily, lam) -> np.ndarray:
    lm = np.asarray(lam, dtype=float)
    if np.any(lm < 0):
        raise ParameterRangeError(f"lambda must be nonnegative for filter '{filt.id}'")
    if filt.lambda_sup is not None and np.any(lm > filt.lambda_sup):
        raise ParameterRangeError(
            f"lambda exceeds {filt.lambda_sup} (valid range) for filter '{filt.id}'"
        )
    return lm


def eval_g(filt: FilterFamily, alpha: float, lam: float) -> float:
    """The filter value g_alpha(lambda); may saturate to inf on overflow."""
    a = _check_alpha(filt, alpha)
    lm = _check_lambda(filt, lam)
    return float(filt._g(a, lm))


def eval_residual(filt: FilterFamily, alpha: float, lam: float) -> ResidualValue:
    """r_alpha(lambda) = 1 - lambda*g_alpha(lambda), with ln|r| channel."""
    a = _check_alpha(filt, alpha)
    lm = _check_lambda(filt, lam)
    return ResidualValue(
        value=float(filt._r_value(a, lm)),
        log_abs=float(filt._r_log(a, lm)),
        sign=int(filt._r_sign(a, lm)),
    )


def residual_log_abs(filt: FilterFamily, alpha, lam) -> np.ndarray:
    """Vectorized ln|r_alpha(lambda)| (no range checks; internal fast path)."""
    return filt._r_log(np.asarray(alpha, dtype=float), np.asarray(lam, dtype=float))


def residual_value(filt: FilterFamily, alpha, lam) -> np.ndarray:
    return filt._r_value(np.asarray(alpha, dtype=float), np.asarray(lam, dtype=float))


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def _softplus(u):
    """ln(1 + e^u), stable for large |u|."""
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    big = u > 34.0
    with np.errstate(over="ignore"):
        out[~big] = np.log1p(np.exp(u[~big]))
    out[big] = u[big]  # + e^-u, below double resolution
    return out


def _tikhonov():
    def g(a, lm):
        return 1.0 / (lm + a)

    def r_value(a, lm):
        return a / (a + lm)

    def r_log(a, lm):
        return np.log(a) - np.log(a + lm)

    def r_sign(a, lm):
        return np.ones(np.broadcast(a, lm).shape)

    return FilterFamily(
        id="tikhonov", alpha_max=1.0, h2_constant=1.0, oscillatory=False,
        _g=g, _r_log=r_log, _r_value=r_value, _r_sign=r_sign,
    )


def _tsvd():
    def g(a, lm):
        with np.errstate(divide="ignore"):
            return np.where(lm >= a, 1.0 / np.asarray(lm, dtype=float), 0.0)

    def r_value(a, lm):
        return np.where(lm >= a, 0.0, 1.0)

    def r_log(a, lm):
        return np.where(lm >= a, NEG_INF, 0.0)

    def r_sign(a, lm):
        return np.where(lm >= a, 0, 1)

    return FilterFamily(
        id="tsvd", alpha_max=1.0, h2_constant=1.0, oscillatory=False,
        _g=g, _r_log=r_log, _r_value=r_value, _r_sign=r_sign,
    )


def _ex3_exp():
    # g = (1 - e^(-1/a)) / (lm + e^(-1/a));  r = (1+lm) / (1 + lm*e^(1/a))
    def g(a, lm):
        with np.errstate(over="ignore", divide="ignore"):
            e = np.exp(-1.0 / a)
            return (1.0 - e) / (lm + e)

    def r_log(a, lm):
        a, lm = np.broadcast_arrays(np.asarray(a, float), np.asarray(lm, float))
        out = np.zeros(a.shape)
        pos = lm > 0
        with np.errstate(divide="ignore"):
            u = 1.0 / a[pos] + np.log(lm[pos])
        out[pos] = np.log1p(lm[pos]) - _softplus(u)
        return out.reshape(np.broadcast(a, lm).shape)

    def r_value(a, lm):
        return _sat_exp(r_log(a, lm))

    def r_sign(a, lm):
        return np.ones(np.broadcast(a, lm).shape)

    return FilterFamily(
        id="ex3_exp", alpha_max=1.0, h2_constant=1.0, oscillatory=False,
        _g=g, _r_log=r_log, _r_value=r_value, _r_sign=r_sign,
    )


def _ex4_log():
    # alpha_0 < 1/e;  g = (1 + 1/ln(a)) / (lm - 1/ln(a));  r = (1+lm)/(1 - lm*ln(a))
    def g(a, lm):
        inv = 1.0 / np.log(a)
        return (1.0 + inv) / (lm - inv)

    def r_value(a, lm):
        return (1.0 + lm) / (1.0 - lm * np.log(a))

    def r_log(a, lm):
        return np.log1p(lm) - np.log(1.0 - lm * np.log(a))

    def r_sign(a, lm):
        return np.ones(np.broadcast(a, lm).shape)

    return FilterFamily(
        id="ex4_log", alpha_max=0.3, h2_constant=1.0, oscillatory=False,
        _g=g, _r_log=r_log, _r_value=r_value, _r_sign=r_sign,
    )


def _ex7_piecewise():
    # alpha_0 < 1/2.  Inner region [0, 2a) uses the constant filter value
    # c(a) = (2a - (a + 2a^2)/ln 3)^(-1); outer region uses
    # g = (1 - h)/(lm + h) with h = a / (a + ln(a/(a+lm))).
    LN3 = math.log(3.0)

    def c_of(a):
        return 1.0 / (2.0 * a - (a + 2.0 * a * a) / LN3)

    def g(a, lm):
        a, lm = np.broadcast_arrays(np.asarray(a, float), np.asarray(lm, float))
        out = np.empty(a.shape)
        inner = lm < 2.0 * a
        out[inner] = c_of(a[inner])
        ao, lo = a[~inner], lm[~inner]
        h = ao / (ao + np.log(ao / (ao + lo)))
        out[~inner] = (1.0 - h) / (lo + h)
        return out.reshape(np.broadcast(a, lm).shape)

    def r_value(a, lm):
        a, lm = np.broadcast_arrays(np.asarray(a, float), np.asarray(lm, float))
        out = np.empty(a.shape)
        inner = lm < 2.0 * a
        out[inner] = 1.0 - lm[inner] * c_of(a[inner])
        ao, lo = a[~inner], lm[~inner]
        out[~inner] = ao * (1.0 + lo) / (lo * np.log(ao / (ao + lo)) + ao * (1.0 + lo))
        return out.reshape(np.broadcast(a, lm).shape)

    def r_log(a, lm):
        a, lm = np.broadcast_arrays(np.asarray(a, float), np.asarray(lm, float))
        out = np.empty(a.shape)
        inner = lm < 2.0 * a
        with np.errstate(divide="ignore"):
            out[inner] = np.log(np.abs(1.0 - lm[inner] * c_of(a[inner])))
            ao, lo = a[~inner], lm[~inner]
            den = lo * np.log(ao / (ao + lo)) + ao * (1.0 + lo)
            out[~inner] = np.log(ao) + np.log1p(lo) - np.log(np.abs(den))
        return out.reshape(np.broadcast(a, lm).shape)

    def r_sign(a, lm):
        return np.sign(r_value(a, lm))

    return FilterFamily(
        id="ex7_piecewise", alpha_max=0.4, h2_constant=6.0, oscillatory=False,
        _g=g, _r_log=r_log, _r_value=r_value, _r_sign=r_sign,
    )


def _osc_family(fid: str, coeff_log, h2: float, alpha_max: float = 1.0, params=None):
    """Shared form for the oscillatory entries:

    r = e^(-lm/a) + c(a) * lm^(-1/2) * |sin(lm^(3/2)/a)|
    g = (1 - e^(-lm/a))/lm - c(a) * lm^(-3/2) * |sin(lm^(3/2)/a)|

    ``coeff_log`` returns ln c(alpha) for the family's perturbation size.
    """

    def g(a, lm):
        a, lm = np.broadcast_arrays(np.asarray(a, float), np.asarray(lm, float))
        out = np.empty(a.shape)
        zero = lm == 0
        c = np.exp(coeff_log(a))
        # limit at lambda -> 0: (1 - c(a))/a
        out[zero] = (1.0 - c[zero]) / a[zero]
        an, ln_ = a[~zero], lm[~zero]
        cn = c[~zero]
        out[~zero] = (
            (1.0 - np.exp(-ln_ / an)) / ln_
            - cn * ln_ ** -1.5 * np.abs(np.sin(ln_ ** 1.5 / an))
        )
        return out.reshape(np.broadcast(a, lm).shape)

    def r_log(a, lm):
        a, lm = np.broadcast_arrays(np.asarray(a, float), np.asarray(lm, float))
        out = np.zeros(a.shape)  # lambda == 0 -> r = 1 -> log 0
        pos = lm > 0
        an, ln_ = a[pos], lm[pos]
        t1 = -ln_ / an
        with np.errstate(divide="ignore"):
            t2 = coeff_log(an) - 0.5 * np.log(ln_) + np.log(np.abs(np.sin(ln_ ** 1.5 / an)))
        out[pos] = np.logaddexp(t1, t2)
        return out.reshape(np.broadcast(a, lm).shape)

    def r_value(a, lm):
        return _sat_exp(r_log(a, lm))

    def r_sign(a, lm):
        return np.ones(np.broadcast(a, lm).shape)

    return FilterFamily(
        id=fid, alpha_max=alpha_max, h2_constant=h2, oscillatory=True,
        params=params or {},
        _g=g, _r_log=r_log, _r_value=r_value, _r_sign=r_sign,
    )


def _ex8_osc(k: float = 1.0):
    if k <= 0:
        raise FilterError(f"ex8_osc requires k > 0, got {k}")

    def coeff_log(a):
        return k * np.log(a)

    return _osc_family("ex8_osc", coeff_log, h2=2.5, params={"k": float(k)})


def _ex9_osc():
    def coeff_log(a):
        return -1.0 / np.sqrt(a)

    return _osc_family("ex9_osc", coeff_log, h2=2.0)


def _ex10_osc():
    def coeff_log(a):
        return -np.log(-np.log(a))  # ln of -1/ln(alpha), positive for alpha < 1

    return _osc_family("ex10_osc", coeff_log, h2=8.0)


def _landweber(mu: float = 0.5):
    if not 0 < mu:
        raise FilterError(f"landweber requires mu > 0, got {mu}")
    lam_sup = 1.0 / mu

    def g(a, lm):
        a, lm = np.broadcast_arrays(np.asarray(a, float), np.asarray(lm, float))
        out = np.empty(a.shape)
        zero = lm == 0
        out[zero] = mu / a[zero]
        an, ln_ = a[~zero], lm[~zero]
        out[~zero] = -np.expm1(np.log1p(-mu * ln_) / an) / ln_
        return out.reshape(np.broadcast(a, lm).shape)

    def r_log(a, lm):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log1p(-mu * np.asarray(lm, float)) / np.asarray(a, float)

    def r_value(a, lm):
        return _sat_exp(r_log(a, lm))

    def r_sign(a, lm):
        return np.where(np.asarray(lm, float) >= lam_sup, 0, 1) * np.ones(
            np.broadcast(a, lm).shape, dtype=int
        )

    return FilterFamily(
        id="landweber", alpha_max=1.0, h2_constant=1.0, oscillatory=False,
        params={"mu": float(mu)}, lambda_sup=lam_sup,
        _g=g, _r_log=r_log, _r_value=r_value, _r_sign=r_sign,
    )


def _showalter():
    def g(a, lm):
        a, lm = np.broadcast_arrays(np.asarray(a, float), np.asarray(lm, float))
        out = np.empty(a.shape)
        zero = lm == 0
        out[zero] = 1.0 / a[zero]
        out[~zero] = -np.expm1(-lm[~zero] / a[~zero]) / lm[~zero]
        return out.reshape(np.broadcast(a, lm).shape)

    def r_log(a, lm):
        return -np.asarray(lm, float) / np.asarray(a, float) * np.ones(
            np.broadcast(a, lm).shape
        )

    def r_value(a, lm):
        return _sat_exp(r_log(a, lm))

    def r_sign(a, lm):
        return np.ones(np.broadcast(a, lm).shape)

    return FilterFamily(
        id="showalter", alpha_max=1.0, h2_constant=1.0, oscillatory=False,
        _g=g, _r_log=r_log, _r_value=r_value, _r_sign=r_sign,
    )


def _sat_exp(logv):
    logv = np.asarray(logv, dtype=float)
    out = np.empty_like(logv)
    hi = logv > 709.0
    with np.errstate(under="ignore"):
        np.exp(logv, out=out, where=~hi)
    out[hi] = np.inf
    return out.reshape(logv.shape)


_BUILDERS: dict[str, Callable[..., FilterFamily]] = {
    "tikhonov": _tikhonov,
    "tsvd": _tsvd,
    "ex3_exp": _ex3_exp,
    "ex4_log": _ex4_log,
    "ex7_piecewise": _ex7_piecewise,
    "ex8_osc": _ex8_osc,
    "ex9_osc": _ex9_osc,
    "ex10_osc": _ex10_osc,
    "landweber": _landweber,
    "showalter": _showalter,
}

_ALIASES = {
    "ex3": "ex3_exp",
    "ex4": "ex4_log",
    "ex7": "ex7_piecewise",
    "ex8": "ex8_osc",
    "ex9": "ex9_osc",
    "ex10": "ex10_osc",
}


def list_filters() -> list[str]:
    return sorted(_BUILDERS)


def get_filter(name: str, **params) -> FilterFamily:
    """Instantiate a catalog family by id (aliases ex3..ex10 accepted)."""
    key = _ALIASES.get(name, name)
    builder = _BUILDERS.get(key)
    if builder is None:
        raise UnknownFilterError(name)
    return builder(**params)


def make_custom_filter(
    fid: str,
    g: Callable,
    alpha_max: float,
    h2_constant: float,
    oscillatory: bool = False,
) -> FilterFamily:
    """Wrap an arbitrary g(alpha, lambda); the residual channel is generic."""

    def r_value(a, lm):
        return 1.0 - lm * g(a, lm)

    def r_log(a, lm):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(np.abs(r_value(a, lm)))

    def r_sign(a, lm):
        return np.sign(r_value(a, lm))

    return FilterFamily(
        id=fid, alpha_max=alpha_max, h2_constant=h2_constant,
        oscillatory=oscillatory,
        _g=g, _r_log=r_log, _r_value=r_value, _r_sign=r_sign,
    )


# ---------------------------------------------------------------------------
# axiom verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxiomReport:
    """Grid verdicts for the three regularization-method hypotheses."""

    h1_finite: bool
    h2_bounded: bool
    h3_pointwise: bool
    h2_observed_sup: float
    h3_worst_deviation: float
    failures: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return self.h1_finite and self.h2_bounded and self.h3_pointwise


def default_alpha_grid(filt: FilterFamily, alpha_min: float = 1e-7,
                       alpha_max: float | None = None,
                       per_decade: int | None = None) -> np.ndarray:
    """Working geometric alpha grid; oscillatory families get 8x density."""
    if alpha_max is None:
        alpha_max = filt.alpha_max / 2.0
    if per_decade is None:
        per_decade = 512 if filt.oscillatory else 64
    decades = math.log10(alpha_max / alpha_min)
    n = max(int(math.ceil(per_decade * decades)) + 1, 16)
    return np.geomspace(alpha_min, alpha_max, n)


def default_lambda_grid(filt: FilterFamily, lam_min: float = 1e-2,
                        lam_max: float = 10.0, per_decade: int = 4) -> np.ndarray:
    """Default lambda sample set, clamped below the family's valid bound."""
    if filt.lambda_sup is not None:
        lam_max = min(lam_max, 0.95 * filt.lambda_sup)
    decades = math.log10(lam_max / lam_min)
    n = max(int(round(per_decade * decades)) + 1, 4)
    return np.geomspace(lam_min, lam_max, n)


def verify_srm_axioms(filt: FilterFamily,
                      alpha_grid: np.ndarray | None = None,
                      lambda_grid: np.ndarray | None = None) -> AxiomReport:
    """Empirically check the three method hypotheses on sampling grids.

    H1: g is a well-defined (non-NaN) function at every sampled point;
    overflow of a mathematically finite g(., 0) is recorded as a note.
    H2: |lambda*g| stays below the family's declared constant.
    H3: for each lambda > 0 the residual at the deep probe alpha=1e-300
    is below H3_ABS_TOL, or at most half its value at the grid floor
    (slow log-type convergence never looks "small" on a double grid, but
    it does keep shrinking).
    Failures are reported with witnessing (alpha, lambda), never raised.
    """
    if alpha_grid is None:
        alpha_grid = default_alpha_grid(filt, per_decade=64 if not filt.oscillatory else 128)
    if lambda_grid is None:
        lam = default_lambda_grid(filt, lam_min=1e-4, per_decade=8)
        lambda_grid = np.concatenate(([0.0], lam))
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    lambda_grid = np.asarray(lambda_grid, dtype=float)

    A = alpha_grid[:, None]
    L = lambda_grid[None, :]
    failures: list[dict] = []
    notes: list[str] = []

    with np.errstate(all="ignore"):
        gv = filt._g(A, L)
        rv = filt._r_value(A, L)

    # H1: piecewise continuity proxy -- g defined (no NaN); infs at
    # lambda=0 come from overflow of finite values and are noted only
    nan_mask = np.isnan(gv)
    inf_mask = np.isinf(gv) & (L > 0)
    h1 = not (np.any(nan_mask) or np.any(inf_mask))
    if not h1:
        i, j = np.argwhere(nan_mask | inf_mask)[0]
        failures.append({"axiom": "H1", "alpha": float(alpha_grid[i]),
                         "lambda": float(lambda_grid[j])})
    if np.any(np.isinf(gv) & (L == 0)):
        notes.append("g(alpha, 0) overflows double precision at small alpha")

    # H2: |lambda*g| = |1 - r|, computed from the residual channel
    lg = np.abs(1.0 - rv)
    observed = float(np.nanmax(lg))
    h2 = bool(observed <= filt.h2_constant + 1e-9)
    if not h2:
        i, j = np.argwhere(lg > filt.h2_constant + 1e-9)[0]
        failures.append({"axiom": "H2", "alpha": float(alpha_grid[i]),
                         "lambda": float(lambda_grid[j]),
                         "observed": float(lg[i, j])})

    # H3: pointwise convergence of g to 1/lambda, i.e. r -> 0, sampled on
    # moderate lambdas: below ~0.01 the log-rate families shrink by less
    # than a factor 2 over the entire representable alpha range
    h3_lams = lambda_grid[lambda_grid >= H3_LAMBDA_MIN]
    if h3_lams.size == 0:
        h3_lams = lambda_grid[lambda_grid > 0]
    with np.errstate(all="ignore"):
        r_floor = np.abs(_sat_exp(filt._r_log(np.array([alpha_grid[0]]), h3_lams)))
        r_deep = np.abs(_sat_exp(filt._r_log(np.array([H3_PROBE_ALPHA]), h3_lams)))
    r_floor = np.ravel(r_floor)
    r_deep = np.ravel(r_deep)
    ok = (r_deep <= H3_ABS_TOL) | (r_deep <= H3_SHRINK * r_floor)
    h3 = bool(np.all(ok))
    worst = float(np.max(r_deep)) if r_deep.size else 0.0
    if not h3:
        j = int(np.argmax(~ok))
        failures.append({"axiom": "H3", "alpha": H3_PROBE_ALPHA,
                         "lambda": float(h3_lams[j]),
                         "deviation": float(r_deep[j])})

    return AxiomReport(
        h1_finite=h1, h2_bounded=h2, h3_pointwise=h3,
        h2_observed_sup=observed, h3_worst_deviation=worst,
        failures=failures, notes=notes,
    )
