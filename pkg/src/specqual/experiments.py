"""Convergence studies on finite spectral models.

Runs the direct statement (error = O(rho(alpha)) on a source set), fits
observed orders from log-log slopes, probes the converse direction
(bounded error ratio + order-source pair => source-set membership), and
demonstrates maximality of the induced source set R(s_rho(T*T)).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .filters import FilterFamily, default_alpha_grid, default_lambda_grid
from .limits import tail_limit
from .operators import (
    MembershipVerdict,
    SourceElement,
    SpectralModel,
    log_regularization_error,
    make_source_element,
    membership_probe,
)
from .qualification import (
    PairVerdict,
    check_order_source_pair,
    check_strong_pair,
    classify,
    estimate_srho,
)
from .rates import TabulatedSource

STUDY_RATIO_CAP = 1e6  # observed err/rho beyond this counts as unbounded


class ExperimentError(ValueError):
    pass


@dataclass(frozen=True)
class StudyRecord:
    alpha: float
    err: float
    rho: float
    ratio: float
    log_err: float
    log_ratio: float


@dataclass(frozen=True)
class ConvergenceStudy:
    """Per-alpha reconstruction errors against a target rate."""

    records: list[StudyRecord]
    filter_id: str
    model_provenance: str
    source_label: str
    rho_label: str
    source: SourceElement | None = None

    def alphas(self) -> np.ndarray:
        return np.array([r.alpha for r in self.records])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("alpha,err,rho,ratio\n")
        for r in self.records:
            buf.write(f"{r.alpha!r},{r.err!r},{r.rho!r},{r.ratio!r}\n")
        return buf.getvalue()

    def to_json_dict(self) -> dict:
        return {
            "filter": self.filter_id,
            "model": self.model_provenance,
            "source": self.source_label,
            "order": self.rho_label,
            "records": [
                {"alpha": r.alpha, "err": r.err, "rho": r.rho, "ratio": r.ratio}
                for r in self.records
            ],
        }


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    n_points: int

    def to_json_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "n_points": self.n_points,
        }


def run_convergence(
    model: SpectralModel,
    filt: FilterFamily,
    source: SourceElement,
    rho,
    alpha_grid: np.ndarray | None = None,
) -> ConvergenceStudy:
    """Reconstruction error per grid alpha, with ratios to rho(alpha).

    Ratios are formed in the log domain so that exponentially small
    errors (and rates) stay meaningful after both underflow.
    """
    if not getattr(rho, "certified", False):
        raise ExperimentError("order function must be certified")
    if alpha_grid is None:
        alpha_grid = np.geomspace(1e-5, filt.alpha_max / 2.0, 76)
    alphas = np.sort(np.asarray(alpha_grid, dtype=float))[::-1]  # descending

    records = []
    for a in alphas:
        log_err = log_regularization_error(model, filt, float(a), source)
        log_rho = float(rho.log_at(float(a)))
        log_ratio = log_err - log_rho
        records.append(StudyRecord(
            alpha=float(a),
            err=_sat(log_err),
            rho=_sat(log_rho),
            ratio=_sat(log_ratio),
            log_err=log_err,
            log_ratio=log_ratio,
        ))
    return ConvergenceStudy(
        records=records,
        filter_id=filt.id,
        model_provenance=model.provenance,
        source_label=getattr(source.source_s, "label", "source"),
        rho_label=getattr(rho, "label", "rho"),
        source=source,
    )


def _sat(logv: float) -> float:
    if logv == -math.inf:
        return 0.0
    if logv > 709.0:
        return math.inf
    return math.exp(logv)


def fit_order(study: ConvergenceStudy, window: tuple[float, float] | None = None) -> SlopeFit:
    """Least squares of ln(err) against ln(rho(alpha)) over an alpha window.

    A slope near 1 means the error tracks the target rate; against
    rho = alpha, the slope reads off the observed power of alpha.
    """
    if window is None:
        window = _default_window(study)
    lo, hi = window
    pts = [r for r in study.records if lo <= r.alpha <= hi]
    if any(r.err == 0.0 for r in pts):
        raise ExperimentError("window contains exact-zero errors; shrink it")
    pts = [r for r in pts if math.isfinite(r.log_err)]
    if len(pts) < 8:
        raise ExperimentError(f"need at least 8 usable records in the window, got {len(pts)}")

    # ln rho from the log channel directly (rho may underflow as a double)
    x = np.array([r.log_err - r.log_ratio for r in pts])
    y = np.array([r.log_err for r in pts])
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    sxy = float(np.sum((x - xm) * (y - ym)))
    if sxx == 0.0:
        raise ExperimentError("rate function is constant over the window")
    slope = sxy / sxx
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    sst = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if sst == 0.0 else max(0.0, min(1.0, 1.0 - float(np.sum(resid ** 2)) / sst))
    return SlopeFit(slope=slope, intercept=intercept, r_squared=r2,
                    window=(lo, hi), n_points=len(pts))


def _default_window(study: ConvergenceStudy) -> tuple[float, float]:
    """Clip below 10x the smallest eigenvalue so the exactly-resolved
    finite tail does not pollute the fit, and below a tenth of the top
    alpha to stay clear of the large-alpha shoulder."""
    alphas = study.alphas()
    lo = float(alphas.min())
    if study.source is not None:
        lo = max(lo, 10.0 * float(study.source.model.eigenvalues[-1]))
    hi = float(alphas.max()) / 10.0
    return (lo, hi)


@dataclass(frozen=True)
class ConverseProbe:
    pair_certificate: PairVerdict
    prediction: bool
    verification: MembershipVerdict
    agree: bool
    ratio_bounded: bool

    def to_json_dict(self) -> dict:
        return {
            "pair_holds": self.pair_certificate.holds,
            "prediction": self.prediction,
            "verification_inside": self.verification.inside,
            "agree": self.agree,
            "ratio_bounded": self.ratio_bounded,
        }


def converse_probe(
    study: ConvergenceStudy,
    filt: FilterFamily,
    rho,
    s,
    h,
    lambda_grid: np.ndarray | None = None,
    alpha_grid: np.ndarray | None = None,
) -> ConverseProbe:
    """Test the converse direction on a finished study.

    Prediction: the (rho, s) order-source certificate holds and the
    study's err/rho ratio stays bounded, in which case the true solution
    must lie in R(s(T*T)).  Verification: the membership probe on the
    study's actual coefficients.  The probe reports whether the two
    agree.
    """
    if study.source is None:
        raise ExperimentError("study carries no source element to verify against")
    cert = check_order_source_pair(filt, rho, s, h, lambda_grid, alpha_grid)
    bounded = _study_ratio_bounded(study)
    prediction = bool(cert.holds and bounded)
    verification = membership_probe(study.source.model, study.source.x_dagger, s)
    return ConverseProbe(
        pair_certificate=cert,
        prediction=prediction,
        verification=verification,
        agree=prediction == verification.inside,
        ratio_bounded=bounded,
    )


def _study_ratio_bounded(study: ConvergenceStudy) -> bool:
    """Bounded err/rho over the study grid: capped and not trending up."""
    recs = [r for r in study.records if math.isfinite(r.log_ratio)]
    if len(recs) < 8:
        return True
    xs = np.array([-math.log(r.alpha) for r in recs])
    lv = np.array([r.log_ratio for r in recs])
    order = np.argsort(xs)
    est = tail_limit(xs[order], lv[order], "limsup", cap=STUDY_RATIO_CAP)
    return bool(est.bounded and est.value < STUDY_RATIO_CAP)


@dataclass(frozen=True)
class InclusionEntry:
    source_label: str
    strong_pair: bool
    domination_k: float | None
    elements_inside: int
    elements_total: int
    included: bool


@dataclass(frozen=True)
class MaximalSourceReport:
    filter_id: str
    rho_label: str
    level: str
    entries: list[InclusionEntry] = field(default_factory=list)
    qualification: object = None  # the QualificationReport backing `level`

    def to_json_dict(self) -> dict:
        return {
            "filter": self.filter_id,
            "order": self.rho_label,
            "level": self.level,
            "qualification": (self.qualification.to_json_dict()
                              if self.qualification is not None else None),
            "entries": [
                {
                    "source": e.source_label,
                    "strong_pair": e.strong_pair,
                    "domination_k": e.domination_k,
                    "elements_inside": e.elements_inside,
                    "elements_total": e.elements_total,
                    "included": e.included,
                }
                for e in self.entries
            ],
        }


def _default_generators(dim: int) -> list[np.ndarray]:
    j = np.arange(1, dim + 1, dtype=float)
    return [j ** -0.6, j ** -1.0, (1.0 + 0.3 * np.sin(3.0 * j)) * j ** -0.8]


def maximal_source_demo(
    model: SpectralModel,
    filt: FilterFamily,
    rho,
    candidates: list,
    lambda_grid: np.ndarray | None = None,
    alpha_grid: np.ndarray | None = None,
) -> MaximalSourceReport:
    """Show that R(s_rho) absorbs every strong-pair source set.

    Requires the order to be at least strong qualification.  For each
    candidate s forming a strong pair with rho, the pointwise bound
    s <= k * s_rho is fitted on the model spectrum and sampled elements
    of R(s(T*T)) are pushed through the membership probe for s_rho.
    Candidates failing the strong-pair test are excluded from inclusion
    claims.
    """
    if lambda_grid is None:
        lambda_grid = default_lambda_grid(filt)
    if alpha_grid is None:
        alpha_grid = default_alpha_grid(filt)
    report = classify(filt, rho, lambda_grid, alpha_grid,
                      include_classical=False, include_mp=False)
    if report.level not in ("strong", "optimal"):
        raise ExperimentError(
            f"maximal-source demo requires strong qualification; got '{report.level}'"
        )

    # tabulate s_rho on a grid covering the model spectrum
    eigs = model.eigenvalues
    lam_tab = np.geomspace(float(eigs[-1]) * 0.5, float(eigs[0]) * 2.0, 33)
    vals = np.array([estimate_srho(filt, rho, float(l), alpha_grid).value for l in lam_tab])
    if not np.all(np.isfinite(vals) & (vals > 0)):
        raise ExperimentError("s_rho is not finite and positive over the spectrum")
    s_rho = TabulatedSource(lambdas=lam_tab, log_values=np.log(vals),
                            label="s_rho (tabulated)")

    entries = []
    generators = _default_generators(model.dim)
    srho_on_spec = np.asarray(s_rho.at(eigs), dtype=float)
    for cand in candidates:
        if not getattr(cand, "certified", False):
            entries.append(InclusionEntry(
                source_label=getattr(cand, "label", "candidate"),
                strong_pair=False, domination_k=None,
                elements_inside=0, elements_total=0, included=False,
            ))
            continue
        strong = check_strong_pair(filt, cand, rho, lambda_grid, alpha_grid)
        if not strong.holds:
            entries.append(InclusionEntry(
                source_label=getattr(cand, "label", "candidate"),
                strong_pair=False, domination_k=None,
                elements_inside=0, elements_total=0, included=False,
            ))
            continue
        k_fit = float(np.max(np.asarray(cand.at(eigs), dtype=float) / srho_on_spec))
        inside = 0
        for w in generators:
            elem = make_source_element(model, cand, w)
            if membership_probe(model, elem.x_dagger, s_rho).inside:
                inside += 1
        entries.append(InclusionEntry(
            source_label=getattr(cand, "label", "candidate"),
            strong_pair=True,
            domination_k=k_fit,
            elements_inside=inside,
            elements_total=len(generators),
            included=inside == len(generators) and math.isfinite(k_fit),
        ))
    return MaximalSourceReport(
        filter_id=filt.id, rho_label=getattr(rho, "label", "rho"),
        level=report.level, entries=entries, qualification=report,
    )
