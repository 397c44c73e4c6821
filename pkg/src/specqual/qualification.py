"""The qualification calculus for spectral filter families.

Given a filter family and an order-of-convergence function rho, this
module estimates the induced source function

    s_rho(lambda) = liminf_{alpha -> 0+}  rho(alpha) / |r_alpha(lambda)|,

checks the three pair predicates that tie source functions to orders,

  * weak source-order pair:   s(lm)|r_a(lm)| / rho(a) stays bounded per lambda,
  * strong source-order pair: additionally its limsup never vanishes,
  * order-source pair:        s(lm)|r_a(lm)| / rho(a) >= gamma > 0 uniformly
                              for lambda >= h(alpha), h(alpha) -> 0,

and classifies rho into one of four levels:

    none < weak < strong < optimal

where strong holds iff 0 < s_rho < inf on the sampled lambdas and
optimal additionally requires (rho, s_rho) to be an order-source pair.
Classical order (the supremum of mu with lambda^mu |r| = O(alpha^mu))
and the increasing-weight qualification inequality
sup_lm |r_a(lm)| rho(lm) <= gamma rho(a) are checked alongside.

All ratio arithmetic runs in the log domain through the filters'
closed-form residual channels, which is what makes ratios like
exp(-1/alpha) / exp(-lambda/alpha) computable at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .filters import FilterFamily, default_alpha_grid, default_lambda_grid
from .limits import CAP, FLOOR, LimitEstimate, tail_limit
from .rates import (
    TabulatedOrder,
    TabulatedSource,
    certify_source_fn,
)

SCHEMA_VERSION = 1

# deep probe used by the classical-order check: slow statistics such as
# alpha^(-1/64) / |ln alpha| only start growing below alpha ~ e^(-64)
DEEP_ALPHA_MIN = 1e-300
DEEP_PER_DECADE = 16

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
LAMBDA_TINY = 1e-300


class QualificationError(ValueError):
    pass


class UncertifiedError(QualificationError):
    def __init__(self, what: str):
        super().__init__(f"{what} is not certified; certify it first")


class HypothesisViolation(QualificationError):
    """The constructive builder's monotonicity hypotheses fail on the grid."""

    def __init__(self, message: str, alpha: float, lam: float):
        super().__init__(f"{message} (witness alpha={alpha:.6g}, lambda={lam:.6g})")
        self.alpha = alpha
        self.lam = lam


@dataclass(frozen=True)
class PairVerdict:
    """Outcome of a source-order / order-source pair test."""

    holds: bool
    bound_k: float | None = None
    gamma: float | None = None
    h_used: str | None = None
    witnesses: list = field(default_factory=list)
    detail: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.holds

    def to_json_dict(self) -> dict:
        return {
            "holds": self.holds,
            "bound_k": _jsonable(self.bound_k),
            "gamma": _jsonable(self.gamma),
            "h_used": self.h_used,
            "witnesses": [[_jsonable(a), _jsonable(l)] for a, l in self.witnesses],
        }


@dataclass(frozen=True)
class ClassicalOrder:
    """Dyadic bracket for the classical qualification order."""

    low: float | None      # largest passing mu
    high: float | None     # smallest failing mu
    zero: bool             # even the smallest mu fails
    infinite: bool         # even the largest mu passes
    mu_grid: list[float] = field(default_factory=list)
    passed: list[bool] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "low": _jsonable(self.low),
            "high": _jsonable(self.high),
            "zero": self.zero,
            "infinite": self.infinite,
        }


@dataclass(frozen=True)
class MPVerdict:
    """Result of the increasing-weight qualification inequality check."""

    passes: bool
    gamma: float | None = None
    witness_alpha: float | None = None
    growth: float | None = None
    weak_certificate: dict | None = None

    def to_json_dict(self) -> dict:
        out = {"passes": self.passes}
        if self.passes:
            out["gamma"] = _jsonable(self.gamma)
        else:
            out["witness_alpha"] = _jsonable(self.witness_alpha)
            out["growth"] = _jsonable(self.growth)
        if self.weak_certificate is not None:
            out["weak_certificate"] = self.weak_certificate
        return out


@dataclass(frozen=True)
class QualificationReport:
    """Full qualification verdict for one (filter, rho) combination."""

    filter_id: str
    rho_label: str
    level: str  # none | weak | strong | optimal
    srho_table: dict  # lambda -> LimitEstimate
    classical_mu0: ClassicalOrder | None
    mp_verdict: MPVerdict | None
    evidence: dict  # level name -> PairVerdict
    source_label: str | None = None
    grid_meta: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "filter": self.filter_id,
            "order": self.rho_label,
            "level": self.level,
            "source": self.source_label,
            "srho_table": [
                {
                    "lambda": _jsonable(lam),
                    "estimate": _jsonable(est.value),
                    "stabilized": est.stabilized,
                }
                for lam, est in sorted(self.srho_table.items())
            ],
            "classical_mu0": self.classical_mu0.to_json_dict() if self.classical_mu0 else None,
            "mp": self.mp_verdict.to_json_dict() if self.mp_verdict else None,
            "evidence": {k: v.to_json_dict() for k, v in self.evidence.items()},
            "grid_meta": _jsonable_dict(self.grid_meta),
        }


def _jsonable(x):
    if x is None:
        return None
    x = float(x)
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def _jsonable_dict(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out[k] = _jsonable_dict(v)
        elif isinstance(v, float):
            out[k] = _jsonable(v)
        elif isinstance(v, (list, tuple)):
            out[k] = [_jsonable(e) if isinstance(e, float) else e for e in v]
        else:
            out[k] = v
    return out


def _require_certified(fn, what):
    if not getattr(fn, "certified", False):
        raise UncertifiedError(what)


def _order_log(rho, alphas) -> np.ndarray:
    return np.asarray(rho.log_at(alphas), dtype=float)


def _source_log(s, lams) -> np.ndarray:
    return np.asarray(s.log_at(lams), dtype=float)


# ---------------------------------------------------------------------------
# s_rho estimation
# ---------------------------------------------------------------------------

def estimate_srho(
    filt: FilterFamily,
    rho,
    lam: float,
    alpha_grid: np.ndarray | None = None,
) -> LimitEstimate:
    """liminf of rho(alpha)/|r_alpha(lambda)| on the working grid.

    Computed entirely in the log domain; a vanishing residual contributes
    +inf to the ratio, so methods that annihilate the component exactly
    (truncation) report an infinite source value.
    """
    _require_certified(rho, "order function")
    if not lam > 0:
        raise QualificationError(f"lambda must be positive, got {lam}")
    if alpha_grid is None:
        alpha_grid = default_alpha_grid(filt)
    alphas = np.asarray(alpha_grid, dtype=float)

    with np.errstate(all="ignore"):
        log_ratio = _order_log(rho, alphas) - filt._r_log(alphas, np.float64(lam))
    xs = -np.log(alphas)
    order = np.argsort(xs)
    return tail_limit(xs[order], log_ratio[order], "liminf",
                      meta={"lambda": float(lam)})


def srho_table(
    filt: FilterFamily,
    rho,
    lambda_grid: np.ndarray | None = None,
    alpha_grid: np.ndarray | None = None,
) -> dict[float, LimitEstimate]:
    if lambda_grid is None:
        lambda_grid = default_lambda_grid(filt)
    if alpha_grid is None:
        alpha_grid = default_alpha_grid(filt)
    return {
        float(lam): estimate_srho(filt, rho, float(lam), alpha_grid)
        for lam in np.asarray(lambda_grid, dtype=float)
    }


# ---------------------------------------------------------------------------
# pair predicates
# ---------------------------------------------------------------------------

def _pair_limsup(filt, s, rho, lam, alphas) -> LimitEstimate:
    """limsup over alpha of s(lm)|r_alpha(lm)| / rho(alpha)."""
    with np.errstate(all="ignore"):
        lq = (
            float(np.ravel(_source_log(s, np.float64(lam)))[0])
            + np.asarray(filt._r_log(alphas, np.float64(lam)), dtype=float)
            - _order_log(rho, alphas)
        )
    xs = -np.log(alphas)
    order = np.argsort(xs)
    return tail_limit(xs[order], lq[order], "limsup", meta={"lambda": float(lam)})


def check_weak_pair(
    filt: FilterFamily,
    s,
    rho,
    lambda_grid: np.ndarray | None = None,
    alpha_grid: np.ndarray | None = None,
) -> PairVerdict:
    """Is s(lm)|r|/rho bounded in alpha for every sampled lambda?"""
    _require_certified(s, "source function")
    _require_certified(rho, "order function")
    if lambda_grid is None:
        lambda_grid = default_lambda_grid(filt)
    if alpha_grid is None:
        alpha_grid = default_alpha_grid(filt)
    alphas = np.asarray(alpha_grid, dtype=float)

    witnesses = []
    bound = 0.0
    estimates = {}
    for lam in np.asarray(lambda_grid, dtype=float):
        est = _pair_limsup(filt, s, rho, float(lam), alphas)
        estimates[float(lam)] = est
        if not est.bounded:
            witnesses.append((float(np.min(alphas)), float(lam)))
        else:
            bound = max(bound, est.tail_max)
    holds = not witnesses
    return PairVerdict(
        holds=holds,
        bound_k=bound if holds else None,
        witnesses=witnesses,
        detail={"estimates": estimates},
    )


def check_strong_pair(
    filt: FilterFamily,
    s,
    rho,
    lambda_grid: np.ndarray | None = None,
    alpha_grid: np.ndarray | None = None,
) -> PairVerdict:
    """Weak pair whose limsup also stays bounded away from zero."""
    weak = check_weak_pair(filt, s, rho, lambda_grid, alpha_grid)
    if not weak.holds:
        return PairVerdict(holds=False, witnesses=weak.witnesses,
                           detail={"failed": "weak", **weak.detail})
    witnesses = []
    for lam, est in weak.detail["estimates"].items():
        if not est.positive:
            witnesses.append((est.grid_meta["alpha_range"][0], lam))
    return PairVerdict(
        holds=not witnesses,
        bound_k=weak.bound_k,
        witnesses=witnesses,
        detail=weak.detail,
    )


def _refine_minima(log_q, lo, hi, iters=80):
    """Batched golden-section minimization of log_q over [lo, hi].

    ``log_q`` maps an array of lambda to an array of ln q; ``lo``/``hi``
    are equal-shaped bracket endpoints in ln-lambda.  Returns the
    refined lambdas and values, one per lane.
    """
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    for _ in range(iters):
        c = b - GOLDEN * (b - a)
        d = a + GOLDEN * (b - a)
        left = log_q(np.exp(c)) < log_q(np.exp(d))
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    lam = np.exp(0.5 * (a + b))
    return lam, log_q(lam)


# a coarse q below this marks the smooth envelope as "dead": past this
# point the infimum is governed by oscillation dips, if any
ZOOM_TRIGGER_LOG = math.log(0.3)
ZOOM_SPAN = 5.0  # ln-lambda units scanned above the first dead point
ZOOM_POINTS = 512


def check_order_source_pair(
    filt: FilterFamily,
    rho,
    s,
    h,
    lambda_grid: np.ndarray | None = None,
    alpha_grid: np.ndarray | None = None,
    n_alpha: int = 96,
    coarse_lambda: int = 64,
) -> PairVerdict:
    """Does s(lm)|r|/rho stay >= gamma > 0 for lambda in [h(alpha), lm_max]?

    For each alpha the infimum over the lambda window is estimated in
    three passes: a coarse geometric scan; a dense zoom over the first
    region where the smooth envelope has died out (oscillatory residuals
    dip to machine-level zeros at phase roots there, and the earliest
    roots are the ones a double can resolve far below the positivity
    floor); and golden-section refinement of the best local minima.
    The per-alpha infima then go through the tail estimator: the pair
    holds when their liminf stays above the positivity floor.
    """
    _require_certified(rho, "order function")
    _require_certified(s, "source function")
    _require_certified(h, "window function h")
    if lambda_grid is None:
        lambda_grid = default_lambda_grid(filt)
    if alpha_grid is None:
        alpha_grid = default_alpha_grid(filt)
    lam_max = float(np.max(lambda_grid))

    alphas = np.asarray(alpha_grid, dtype=float)
    n_alpha = min(n_alpha, alphas.size)
    sub = np.geomspace(alphas[0], alphas[-1], n_alpha)

    log_rho = _order_log(rho, sub)
    log_h = np.asarray(h.log_at(sub), dtype=float)
    log_hi = math.log(lam_max)
    log_lo = np.minimum(np.maximum(log_h, math.log(LAMBDA_TINY)), log_hi - 1e-6)

    def log_q(alpha_arr, lam_arr, lrho_arr):
        with np.errstate(all="ignore"):
            return (
                np.asarray(s.log_at(lam_arr), dtype=float)
                + np.asarray(filt._r_log(alpha_arr, lam_arr), dtype=float)
                - lrho_arr
            )

    rows = np.arange(n_alpha)

    # pass 1: coarse scan of the full window
    t = np.linspace(0.0, 1.0, coarse_lambda)
    Lc = np.exp(log_lo[:, None] + t[None, :] * (log_hi - log_lo)[:, None])
    Qc = log_q(sub[:, None], Lc, log_rho[:, None])
    coarse_min = np.min(Qc, axis=1)
    coarse_idx = np.argmin(Qc, axis=1)

    # pass 2: dense zoom starting at the first envelope-dead coarse point
    dead = Qc < ZOOM_TRIGGER_LOG
    has_dead = np.any(dead, axis=1)
    first_dead = np.where(has_dead, np.argmax(dead, axis=1), coarse_idx)
    center = np.log(Lc[rows, first_dead])
    z_lo = np.maximum(center - 1.0, log_lo)
    z_hi = np.minimum(center + ZOOM_SPAN, log_hi)
    tz = np.linspace(0.0, 1.0, ZOOM_POINTS)
    Lz = np.exp(z_lo[:, None] + tz[None, :] * (z_hi - z_lo)[:, None])
    Qz = log_q(sub[:, None], Lz, log_rho[:, None])

    # pass 3: golden refinement around the best zoom minima and the
    # coarse global minimum
    k_best = 3
    zoom_best = np.argpartition(Qz, k_best, axis=1)[:, :k_best]
    lanes_lo, lanes_hi = [], []
    for c in range(k_best):
        idx = zoom_best[:, c]
        lanes_lo.append(np.log(Lz[rows, np.maximum(idx - 1, 0)]))
        lanes_hi.append(np.log(Lz[rows, np.minimum(idx + 1, ZOOM_POINTS - 1)]))
    lanes_lo.append(np.log(Lc[rows, np.maximum(coarse_idx - 1, 0)]))
    lanes_hi.append(np.log(Lc[rows, np.minimum(coarse_idx + 1, coarse_lambda - 1)]))
    lo_mat = np.stack(lanes_lo, axis=1)
    hi_mat = np.stack(lanes_hi, axis=1)
    lam_ref, q_ref = _refine_minima(
        lambda lam_arr: log_q(sub[:, None], lam_arr, log_rho[:, None]),
        lo_mat, hi_mat,
    )

    # a minimum whose few-ulp neighbors sit far above it is a kink pinned
    # at the floating-point resolution limit: the continuum infimum there
    # is an unresolved zero, not the quantized value we happened to read
    bump = 64.0 * np.finfo(float).eps
    q_near = np.minimum(
        log_q(sub[:, None], lam_ref * (1.0 - bump), log_rho[:, None]),
        log_q(sub[:, None], lam_ref * (1.0 + bump), log_rho[:, None]),
    )
    kink = np.isfinite(q_ref) & (q_near > q_ref + math.log(2.0))
    q_ref = np.where(kink, -np.inf, q_ref)

    refined_min = np.min(q_ref, axis=1)
    refined_lam = lam_ref[rows, np.argmin(q_ref, axis=1)]
    gam_log = np.minimum(np.minimum(coarse_min, np.min(Qz, axis=1)), refined_min)
    gam_lam = np.where(refined_min <= gam_log, refined_lam,
                       Lz[rows, np.argmin(Qz, axis=1)])

    xs = -np.log(sub)
    order = np.argsort(xs)
    est = tail_limit(xs[order], gam_log[order], "liminf",
                     meta={"h": getattr(h, "label", "h")})

    holds = est.positive
    worst = int(np.argmin(gam_log))
    witnesses = [] if holds else [(float(sub[worst]), float(gam_lam[worst]))]
    gamma = None
    if holds:
        g_min = float(gam_log[worst])
        gamma = math.inf if g_min > 709.0 else math.exp(max(g_min, -745.0))
    return PairVerdict(
        holds=holds,
        gamma=gamma,
        h_used=getattr(h, "label", "h"),
        witnesses=witnesses,
        detail={"inf_estimate": est},
    )


# ---------------------------------------------------------------------------
# classical order and the increasing-weight check
# ---------------------------------------------------------------------------

def _deep_alpha_grid(filt: FilterFamily) -> np.ndarray:
    top = filt.alpha_max / 2.0
    decades = math.log10(top / DEEP_ALPHA_MIN)
    n = int(decades * DEEP_PER_DECADE)
    return np.geomspace(DEEP_ALPHA_MIN, top, n)


def default_mu_grid() -> np.ndarray:
    return np.array([2.0 ** j for j in range(-6, 7)])


def estimate_classical_order(
    filt: FilterFamily,
    mu_grid: np.ndarray | None = None,
    lambda_grid: np.ndarray | None = None,
    alpha_grid: np.ndarray | None = None,
) -> ClassicalOrder:
    """Bracket the classical order on a dyadic mu grid.

    For each mu, boundedness of lambda^mu |r| / alpha^mu is tested per
    lambda over a deep alpha grid reaching 1e-300: statistics like
    alpha^(-1/64)/|ln alpha| only reveal their divergence hundreds of
    decades down, far below any working grid.
    """
    mu_grid = default_mu_grid() if mu_grid is None else np.asarray(mu_grid, dtype=float)
    if lambda_grid is None:
        lambda_grid = default_lambda_grid(filt, per_decade=2)
    if alpha_grid is None:
        alpha_grid = _deep_alpha_grid(filt)
    alphas = np.asarray(alpha_grid, dtype=float)
    log_alpha = np.log(alphas)
    xs = -log_alpha
    order = np.argsort(xs)

    with np.errstate(all="ignore"):
        rlog = {float(lam): np.asarray(filt._r_log(alphas, np.float64(lam)), dtype=float)
                for lam in np.asarray(lambda_grid, dtype=float)}

    passed = []
    for mu in mu_grid:
        ok = True
        for lam, lr in rlog.items():
            lq = mu * math.log(lam) + lr - mu * log_alpha
            est = tail_limit(xs[order], lq[order], "limsup", n_blocks=5)
            if not est.bounded:
                ok = False
                break
        passed.append(ok)

    low = None
    high = None
    for mu, ok in zip(mu_grid, passed):
        if ok and high is None:
            low = float(mu)
        elif high is None:
            high = float(mu)
    return ClassicalOrder(
        low=low,
        high=high,
        zero=not passed[0],
        infinite=all(passed),
        mu_grid=[float(m) for m in mu_grid],
        passed=passed,
    )


def check_mp_qualification(
    filt: FilterFamily,
    rho,
    a: float = 1.0,
    lambda_grid: np.ndarray | None = None,
    alpha_grid: np.ndarray | None = None,
    with_weak_certificate: bool = True,
) -> MPVerdict:
    """Check sup_lm |r_alpha(lm)| rho(lm) <= gamma rho(alpha) on (0, a].

    Fails when the ratio grows past 100x its grid median toward
    alpha -> 0 (reported with the witnessing alpha), passes otherwise
    with gamma = the tail maximum.  On failure a companion certificate
    reports whether the given rho still bounds the residual in the
    constructive windowed sense (sup over lambda >= h(alpha) of |r|
    below rho(alpha) for a vanishing h), which is how methods with
    infinite classical order keep a meaningful order of convergence.
    """
    _require_certified(rho, "order function")
    if not a > 0:
        raise QualificationError(f"interval bound a must be positive, got {a}")
    if alpha_grid is None:
        top = min(a, filt.alpha_max * (1 - 1e-12))
        alpha_grid = np.geomspace(1e-7, top, int(64 * math.log10(top / 1e-7)))
    if lambda_grid is None:
        lam_top = a if filt.lambda_sup is None else min(a, 0.95 * filt.lambda_sup)
        lambda_grid = np.geomspace(1e-4, lam_top, int(16 * math.log10(lam_top / 1e-4)) + 1)
    alphas = np.asarray(alpha_grid, dtype=float)
    lams = np.asarray(lambda_grid, dtype=float)

    with np.errstate(all="ignore"):
        R = np.asarray(filt._r_log(alphas[:, None], lams[None, :]), dtype=float)
        lrho_lam = _order_log(rho, lams)
        lS = np.max(R + lrho_lam[None, :], axis=1)
        ratio_log = lS - _order_log(rho, alphas)

    finite = ratio_log[np.isfinite(ratio_log)]
    median = float(np.median(finite)) if finite.size else 0.0
    exceed = ratio_log > median + math.log(100.0)

    xs = -np.log(alphas)
    order = np.argsort(xs)
    est = tail_limit(xs[order], ratio_log[order], "limsup")
    passes = bool(not np.any(exceed) and est.bounded)

    certificate = None
    if with_weak_certificate and not passes:
        certificate = _windowed_certificate(filt, rho, alphas, lams)
    if passes:
        return MPVerdict(passes=True, gamma=est.tail_max,
                         weak_certificate=certificate)
    if np.any(exceed):
        idx = np.nonzero(exceed)[0]
        witness = float(alphas[idx[0]])
        growth = float(math.exp(min(np.max(ratio_log[idx]) - median, 700.0)))
    else:
        witness = float(alphas[0])
        growth = float("inf")
    return MPVerdict(passes=False, witness_alpha=witness, growth=growth,
                     weak_certificate=certificate)


def _windowed_certificate(filt, rho, alphas, lams) -> dict:
    """Does some vanishing window h(alpha) give sup_{lm>=h} |r| <= rho(alpha)?"""
    with np.errstate(all="ignore"):
        R = np.asarray(filt._r_log(alphas[:, None], lams[None, :]), dtype=float)
        # suffix maxima over lambda: sup of |r| on [lam_j, lam_max]
        suffix = np.flip(np.maximum.accumulate(np.flip(R, axis=1), axis=1), axis=1)
        lrho = _order_log(rho, alphas)
    h_vals = np.full(alphas.shape, np.nan)
    for i in range(len(alphas)):
        ok = np.nonzero(suffix[i] <= lrho[i] + 1e-9)[0]
        if ok.size:
            h_vals[i] = lams[ok[0]]
    found = np.isfinite(h_vals)
    tail = found[: max(len(alphas) // 2, 1)]
    holds = bool(np.all(tail))
    vanishing = False
    if holds:
        lo = h_vals[np.nonzero(found)[0][0]]
        vanishing = bool(lo <= lams[max(1, len(lams) // 5)])
    return {
        "holds": holds and vanishing,
        "h_at_alpha_min": _jsonable(float(h_vals[0]) if found[0] else math.nan),
        "coverage": float(np.mean(found)),
    }


# ---------------------------------------------------------------------------
# constructive weak qualification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstructResult:
    h: TabulatedOrder
    rho_star: TabulatedOrder
    certificate: PairVerdict
    theta: np.ndarray
    f: np.ndarray
    lambdas: np.ndarray


def construct_weak_qualification(
    filt: FilterFamily,
    lambda_grid: np.ndarray | None = None,
    alpha_grid: np.ndarray | None = None,
    bisect_tol: float = 1e-10,
) -> ConstructResult:
    """Build the (h, rho*) pair that certifies weak qualification.

    Requires, and first verifies on the grids, that the residual is
    positive and decreasing in lambda while the filter is decreasing in
    alpha.  Then theta(lm) = sup{ gamma : r_gamma(lm) <= lm } is found by
    bisection (monotone in gamma because r increases with alpha),
    f = (1 - e^-lm) theta(lm) is made strictly increasing, h is its
    interpolated inverse, z(alpha) = r_alpha(h(alpha)), and rho* is the
    running-maximum envelope of z.  The certificate re-verifies
    sup_{lm >= h(alpha)} |r| <= rho*(alpha) by an independent sweep.
    """
    if lambda_grid is None:
        lambda_grid = np.geomspace(1e-4, 100.0, 321)
    if alpha_grid is None:
        alpha_grid = default_alpha_grid(filt, per_decade=64)
    lams = np.asarray(lambda_grid, dtype=float)
    alphas = np.asarray(alpha_grid, dtype=float)

    _verify_part_b_hypotheses(filt, alphas, lams)

    # theta by vectorized bisection over the lambda batch
    lo = np.full(lams.shape, alphas[0] * 1e-3)
    hi = np.full(lams.shape, filt.alpha_max * (1.0 - 1e-12))
    with np.errstate(all="ignore"):
        top_ok = _sat_exp_arr(filt._r_log(hi, lams)) <= lams
    theta = np.where(top_ok, hi, np.nan)
    active = ~top_ok
    steps = int(math.ceil(math.log2(float(filt.alpha_max) / bisect_tol)))
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        with np.errstate(all="ignore"):
            ok = _sat_exp_arr(filt._r_log(mid, lams)) <= lams
        lo = np.where(active & ok, mid, lo)
        hi = np.where(active & ~ok, mid, hi)
    theta = np.where(active, lo, theta)
    if np.any(theta <= 0) or np.any(np.isnan(theta)):
        raise QualificationError("bisection for theta failed to converge")

    f = -np.expm1(-lams) * theta
    # strict increase (the underlying function is nondecreasing; remove
    # flat spots so the inverse is single-valued)
    f = np.maximum.accumulate(f)
    eps = np.spacing(f)
    for i in range(1, len(f)):
        if f[i] <= f[i - 1]:
            f[i] = f[i - 1] + eps[i - 1]

    log_f = np.log(f)
    log_lams = np.log(lams)

    def h_log_at(alpha):
        x = np.log(np.asarray(alpha, dtype=float))
        out = np.interp(x, log_f, log_lams)
        lo_mask = x < log_f[0]
        hi_mask = x > log_f[-1]
        if np.any(lo_mask):
            slope = (log_lams[1] - log_lams[0]) / (log_f[1] - log_f[0])
            out = np.where(lo_mask, log_lams[0] + slope * (x - log_f[0]), out)
        if np.any(hi_mask):
            out = np.where(hi_mask, log_lams[-1], out)
        return out

    h_tab = TabulatedOrder(
        alphas=np.exp(np.clip(log_f, -700, 700)),
        log_values=log_lams,
        label="h (inverse of f)",
    )

    h_on_grid = np.exp(h_log_at(alphas))
    with np.errstate(all="ignore"):
        z_log = np.asarray(filt._r_log(alphas, h_on_grid), dtype=float)
    rho_star_log = np.maximum.accumulate(z_log)
    rho_star = TabulatedOrder(alphas=alphas, log_values=rho_star_log,
                              label="rho* (envelope of r at the window edge)")

    # independent certificate sweep of the windowed supremum
    witnesses = []
    worst_gap = -math.inf
    sweep = np.geomspace(lams[0], lams[-1], 1024)
    check_alphas = alphas[:: max(1, len(alphas) // 128)]
    check_rho = np.interp(np.log(check_alphas), np.log(alphas), rho_star_log)
    for a_val, bound in zip(check_alphas, check_rho):
        h_val = float(np.exp(h_log_at(a_val)))
        window = sweep[sweep >= h_val]
        if window.size == 0:
            continue
        with np.errstate(all="ignore"):
            sup = float(np.max(filt._r_log(np.float64(a_val), window)))
        gap = sup - bound
        worst_gap = max(worst_gap, gap)
        if gap > 1e-6:
            witnesses.append((float(a_val), float(window[np.argmax(
                filt._r_log(np.float64(a_val), window))])))
    certificate = PairVerdict(
        holds=not witnesses,
        witnesses=witnesses,
        detail={"worst_log_gap": worst_gap},
    )
    return ConstructResult(h=h_tab, rho_star=rho_star, certificate=certificate,
                           theta=theta, f=f, lambdas=lams)


def _sat_exp_arr(logv):
    logv = np.asarray(logv, dtype=float)
    out = np.empty_like(logv)
    hi = logv > 709.0
    with np.errstate(under="ignore"):
        np.exp(logv, out=out, where=~hi)
    out[hi] = np.inf
    return out


def _verify_part_b_hypotheses(filt, alphas, lams):
    probe_a = alphas[:: max(1, len(alphas) // 48)]
    probe_l = lams[:: max(1, len(lams) // 48)]
    with np.errstate(all="ignore"):
        R = np.asarray(filt._r_log(probe_a[:, None], probe_l[None, :]), dtype=float)
        signs = np.asarray(filt._r_sign(probe_a[:, None], probe_l[None, :]))
        G = np.asarray(filt._g(probe_a[:, None], probe_l[None, :]), dtype=float)
    bad = signs <= 0
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise HypothesisViolation("residual is not positive",
                                  float(probe_a[i]), float(probe_l[j]))
    inc = np.diff(R, axis=1) > 1e-9
    if np.any(inc):
        i, j = np.argwhere(inc)[0]
        raise HypothesisViolation("residual is not decreasing in lambda",
                                  float(probe_a[i]), float(probe_l[j + 1]))
    ginc = np.diff(G, axis=0) > 1e-9 * np.maximum(np.abs(G[1:]), 1.0)
    if np.any(ginc):
        i, j = np.argwhere(ginc)[0]
        raise HypothesisViolation("filter is not decreasing in alpha",
                                  float(probe_a[i + 1]), float(probe_l[j]))


# ---------------------------------------------------------------------------
# classifier
# ---------------------------------------------------------------------------

CANONICAL_SOURCES = ("lambda", "lambda^0.5", "lambda/(1+lambda)")


def classify(
    filt: FilterFamily,
    rho,
    lambda_grid: np.ndarray | None = None,
    alpha_grid: np.ndarray | None = None,
    h=None,
    include_classical: bool = True,
    include_mp: bool = True,
) -> QualificationReport:
    """Classify rho as none/weak/strong/optimal qualification of the filter.

    strong requires every sampled s_rho estimate to be stabilized and
    strictly between the positivity floor and the divergence cap;
    optimal additionally requires the tabulated s_rho to form an
    order-source pair with rho (window h defaults to rho itself, clamped
    into the lambda range); weak falls back to a canonical list of
    bounded certified sources when strong fails.
    """
    _require_certified(rho, "order function")
    if lambda_grid is None:
        lambda_grid = default_lambda_grid(filt)
    if alpha_grid is None:
        alpha_grid = default_alpha_grid(filt)

    table = srho_table(filt, rho, lambda_grid, alpha_grid)
    evidence: dict[str, PairVerdict] = {}

    strong = all(
        est.stabilized and FLOOR < est.value < CAP and math.isfinite(est.value)
        for est in table.values()
    )
    level = "none"
    source_label = None

    if strong:
        level = "strong"
        lams = np.array(sorted(table))
        vals = np.array([table[l].value for l in lams])
        s_tab = TabulatedSource(lambdas=lams, log_values=np.log(vals),
                                label="s_rho (tabulated)")
        source_label = s_tab.label
        evidence["strong"] = PairVerdict(
            holds=True,
            bound_k=float(np.max(vals) / np.min(vals)),
            detail={"criterion": "0 < s_rho < inf at every sampled lambda"},
        )
        evidence["weak"] = evidence["strong"]
        h_fn = h if h is not None else rho
        osp = check_order_source_pair(filt, rho, s_tab, h_fn,
                                      lambda_grid, alpha_grid)
        evidence["optimal"] = osp
        if osp.holds:
            level = "optimal"
    else:
        evidence["strong"] = PairVerdict(
            holds=False,
            witnesses=[
                (est.grid_meta["alpha_range"][0], lam)
                for lam, est in table.items()
                if not (est.stabilized and FLOOR < est.value < CAP)
            ][:4],
            detail={"criterion": "s_rho must be finite, positive and stabilized"},
        )
        # weak fallback: a bounded certified source that keeps the ratio bounded
        candidates = list(_capped_srho_candidates(table)) + [
            certify_source_fn(text) for text in CANONICAL_SOURCES
        ]
        for cand in candidates:
            if not cand.certified:
                continue
            verdict = check_weak_pair(filt, cand, rho, lambda_grid, alpha_grid)
            if verdict.holds:
                level = "weak"
                source_label = getattr(cand, "label", "candidate")
                evidence["weak"] = verdict
                break
        else:
            evidence["weak"] = PairVerdict(
                holds=False, detail={"criterion": "no candidate source found"}
            )

    classical = estimate_classical_order(filt) if include_classical else None
    mp = check_mp_qualification(filt, rho) if include_mp else None

    return QualificationReport(
        filter_id=filt.id,
        rho_label=getattr(rho, "label", "rho"),
        level=level,
        srho_table=table,
        classical_mu0=classical,
        mp_verdict=mp,
        evidence=evidence,
        source_label=source_label,
        grid_meta={
            "lambda_grid": [float(x) for x in np.asarray(lambda_grid)],
            "alpha_points": int(np.asarray(alpha_grid).size),
            "alpha_range": (float(np.min(alpha_grid)), float(np.max(alpha_grid))),
        },
    )


def _capped_srho_candidates(table):
    """A bounded source built by capping the finite part of the s_rho table."""
    lams = np.array(sorted(table))
    vals = np.array([table[l].value for l in lams])
    finite = np.isfinite(vals) & (vals > 0)
    if finite.sum() >= 2:
        cap_val = float(10.0 * np.max(vals[finite]))
        capped = np.minimum(np.where(finite, vals, cap_val), cap_val)
        yield TabulatedSource(lambdas=lams, log_values=np.log(capped),
                              label="capped s_rho")
