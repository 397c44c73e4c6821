"""Command-line front end.

Subcommands mirror the library workflows:

    specqual classify   --filter tikhonov --order "alpha"
    specqual srho       --filter ex3 --order "exp(-1/alpha)" --lambda 0.01,0.1,1
    specqual classical  --filter ex8 --param k=1
    specqual mp-check   --filter showalter --order "exp(-1/sqrt(alpha))"
    specqual construct  --filter showalter
    specqual converge   --filter tikhonov --model "diag:j^-2" --dim 200 --source "lambda"

Exit codes: 0 success; 1 a requested certification failed; 2 input
error; 3 numerical instability (an estimate did not stabilize).
Identical configurations produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .expressions import ExprError
from .filters import (
    FilterError,
    default_alpha_grid,
    default_lambda_grid,
    get_filter,
    list_filters,
)
from .limits import LimitEstimate
from .operators import (
    OperatorError,
    load_matrix_csv,
    make_model,
    make_source_element,
    svd_decompose,
)
from .qualification import (
    HypothesisViolation,
    QualificationError,
    check_mp_qualification,
    classify,
    construct_weak_qualification,
    estimate_classical_order,
    estimate_srho,
    _jsonable,
)
from .experiments import ExperimentError, fit_order, run_convergence
from .rates import certify_order_fn, certify_source_fn

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_INPUT = 2
EXIT_UNSTABLE = 3

LEVEL_RANK = {"none": 0, "weak": 1, "strong": 2, "optimal": 3}


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2) with usage text
        raise InputError(message)


def _add_common(p: _Parser, need_filter=True):
    if need_filter:
        p.add_argument("--filter", default=None, help="catalog filter id (required)")
    p.add_argument("--param", action="append", default=[], metavar="K=V",
                   help="filter parameter (repeatable), e.g. k=1 or mu=0.5")
    p.add_argument("--alpha-min", type=float, default=None)
    p.add_argument("--alpha-max", type=float, default=None)
    p.add_argument("--per-decade", type=int, default=None,
                   help="alpha grid density (>= 8)")
    p.add_argument("--lambda", dest="lambda_spec", default=None,
                   help="comma list '0.01,0.1,1' or 'geo:MIN:MAX:PERDECADE'")
    p.add_argument("--config", default=None, help="JSON config file; flags override it")
    p.add_argument("--out", default=None, help="output path (stdout when omitted)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled generators")


def build_parser() -> _Parser:
    p = _Parser(prog="specqual",
                description="Qualification analysis for spectral regularization filters")
    p.add_argument("--version", action="version", version=f"specqual {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[], help="classify an order function")
    _add_common(c)
    c.add_argument("--order", default=None, help="order expression in alpha (required)")
    c.add_argument("--require", choices=("weak", "strong", "optimal"), default=None,
                   help="exit 1 unless this level is reached")

    c = sub.add_parser("srho", help="estimate the induced source function")
    _add_common(c)
    c.add_argument("--order", default=None)

    c = sub.add_parser("classical", help="bracket the classical qualification order")
    _add_common(c)

    c = sub.add_parser("mp-check", help="check the increasing-weight inequality")
    _add_common(c)
    c.add_argument("--order", default=None)
    c.add_argument("--a", type=float, default=1.0, help="right end of the interval (0, a]")

    c = sub.add_parser("construct", help="build the (h, rho*) weak-qualification pair")
    _add_common(c)

    c = sub.add_parser("converge", help="run a convergence study on a spectral model")
    _add_common(c)
    c.add_argument("--order", default="alpha")
    c.add_argument("--source", default=None, help="source expression in lambda (required)")
    c.add_argument("--model", default="diag:j^-2",
                   help="'diag:RULE' (j^-2, j^-4, exp) or a CSV matrix path")
    c.add_argument("--dim", type=int, default=200)
    c.add_argument("--generator", default="j^-0.6",
                   help="generator decay 'j^-Q' for w_j = j^-Q")
    c.add_argument("--fit-window", default=None, metavar="LO:HI",
                   help="alpha window for the slope fit")
    return p


# flags that always take exactly one value; merged to --flag=value form so
# expressions with a leading minus (e.g. -1/ln(alpha)) survive argparse
_VALUE_FLAGS = {
    "--filter", "--param", "--order", "--source", "--lambda", "--alpha-min",
    "--alpha-max", "--per-decade", "--config", "--out", "--format", "--seed",
    "--require", "--a", "--model", "--dim", "--generator", "--fit-window",
}


def _merge_flag_values(argv: list[str]) -> list[str]:
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _scan_config_path(argv) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _load_config_defaults(path: str) -> dict:
    """Config file values become parser defaults; CLI flags override them."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("config file must hold a JSON object")
    out = {}
    for key, value in doc.items():
        attr = key.replace("-", "_")
        if attr == "lambda":
            attr = "lambda_spec"
            if isinstance(value, list):
                value = ",".join(repr(float(v)) for v in value)
        if attr == "param" and isinstance(value, dict):
            value = [f"{k}={v}" for k, v in value.items()]
        out[attr] = value
    return out


def _parse_params(pairs) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise InputError(f"--param expects K=V, got '{item}'")
        key, _, val = item.partition("=")
        try:
            out[key.strip()] = float(val)
        except ValueError as exc:
            raise InputError(f"--param value for '{key}' is not a number: '{val}'") from exc
    return out


def _get_filter(args):
    try:
        return get_filter(args.filter, **_parse_params(args.param))
    except FilterError as exc:
        raise InputError(f"{exc}; available: {', '.join(list_filters())}") from exc
    except TypeError as exc:
        raise InputError(f"bad parameters for filter '{args.filter}': {exc}") from exc


def _alpha_grid(args, filt):
    kw = {}
    if args.alpha_min is not None:
        kw["alpha_min"] = args.alpha_min
    if args.alpha_max is not None:
        kw["alpha_max"] = args.alpha_max
    if args.per_decade is not None:
        if args.per_decade < 8:
            raise InputError("--per-decade must be at least 8")
        kw["per_decade"] = args.per_decade
    grid = default_alpha_grid(filt, **kw)
    if np.any(grid <= 0):
        raise InputError("alpha grid must be strictly positive")
    return grid


def _lambda_grid(args, filt):
    spec = args.lambda_spec
    if spec is None:
        return default_lambda_grid(filt)
    if spec.startswith("geo:"):
        parts = spec.split(":")
        if len(parts) != 4:
            raise InputError("--lambda geo spec is 'geo:MIN:MAX:PERDECADE'")
        try:
            lo, hi, per = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as exc:
            raise InputError(f"bad --lambda spec '{spec}'") from exc
        if not (0 < lo < hi) or per < 1:
            raise InputError("--lambda geo spec needs 0 < MIN < MAX and PERDECADE >= 1")
        n = max(int(per * math.log10(hi / lo)) + 1, 2)
        return np.geomspace(lo, hi, n)
    try:
        vals = np.array([float(tok) for tok in spec.split(",") if tok.strip()])
    except ValueError as exc:
        raise InputError(f"bad --lambda list '{spec}'") from exc
    if vals.size == 0 or np.any(vals <= 0):
        raise InputError("--lambda values must be positive")
    return np.sort(vals)


def _order(args, alpha_grid):
    try:
        fn = certify_order_fn(args.order, alpha_grid)
    except ExprError as exc:
        raise InputError(f"bad --order expression: {exc}") from exc
    if not fn.certified:
        raise InputError(
            f"--order '{args.order}' is not an admissible order function "
            "(must be positive, nondecreasing, vanishing at 0)"
        )
    return fn


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_classify(args) -> int:
    filt = _get_filter(args)
    agrid = _alpha_grid(args, filt)
    rho = _order(args, agrid)
    report = classify(filt, rho, _lambda_grid(args, filt), agrid)
    _emit(args, _dump_json(report.to_json_dict()))
    if args.require and LEVEL_RANK[report.level] < LEVEL_RANK[args.require]:
        return EXIT_VERDICT
    return EXIT_OK


def cmd_srho(args) -> int:
    filt = _get_filter(args)
    agrid = _alpha_grid(args, filt)
    rho = _order(args, agrid)
    rows = []
    unstable = False
    for lam in _lambda_grid(args, filt):
        est: LimitEstimate = estimate_srho(filt, rho, float(lam), agrid)
        unstable = unstable or not est.stabilized
        rows.append((float(lam), est))
    if args.format == "csv":
        lines = ["lambda,estimate,stabilized"]
        for lam, est in rows:
            val = "+inf" if math.isinf(est.value) else repr(est.value)
            lines.append(f"{lam!r},{val},{str(est.stabilized).lower()}")
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, _dump_json({
            "filter": filt.id,
            "order": rho.label,
            "table": [
                {"lambda": lam, "estimate": _jsonable(est.value),
                 "stabilized": est.stabilized}
                for lam, est in rows
            ],
        }))
    return EXIT_UNSTABLE if unstable else EXIT_OK


def cmd_classical(args) -> int:
    filt = _get_filter(args)
    co = estimate_classical_order(filt)
    doc = {"filter": filt.id, **co.to_json_dict()}
    if args.format == "csv":
        low = "" if doc["low"] is None else doc["low"]
        high = "" if doc["high"] is None else doc["high"]
        _emit(args, "low,high,zero,infinite\n"
              f"{low},{high},{str(co.zero).lower()},{str(co.infinite).lower()}\n")
    else:
        _emit(args, _dump_json(doc))
    return EXIT_OK


def cmd_mp_check(args) -> int:
    filt = _get_filter(args)
    agrid = _alpha_grid(args, filt)
    rho = _order(args, agrid)
    if args.a <= 0:
        raise InputError("--a must be positive")
    verdict = check_mp_qualification(filt, rho, a=args.a)
    _emit(args, _dump_json({"filter": filt.id, "order": rho.label,
                            **verdict.to_json_dict()}))
    return EXIT_OK if verdict.passes else EXIT_VERDICT


def cmd_construct(args) -> int:
    filt = _get_filter(args)
    agrid = _alpha_grid(args, filt)
    try:
        res = construct_weak_qualification(filt, alpha_grid=agrid)
    except HypothesisViolation as exc:
        _structured_error(str(exc), code="hypothesis-violation")
        return EXIT_VERDICT
    alphas = res.rho_star.alphas
    h_vals = np.exp(res.h.log_at(alphas))
    rho_vals = [_jsonable(v) for v in np.exp(np.minimum(res.rho_star.log_values, 709.0))]
    if args.format == "csv":
        lines = ["alpha,h,rho_star"]
        for a_val, h_val, r_val in zip(alphas, h_vals, rho_vals):
            lines.append(f"{float(a_val)!r},{float(h_val)!r},{r_val!r}")
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, _dump_json({
            "filter": filt.id,
            "certificate": res.certificate.to_json_dict(),
            "table": [
                {"alpha": float(a_val), "h": float(h_val), "rho_star": r_val}
                for a_val, h_val, r_val in zip(alphas, h_vals, rho_vals)
            ],
        }))
    return EXIT_OK if res.certificate.holds else EXIT_VERDICT


def cmd_converge(args) -> int:
    filt = _get_filter(args)
    model = _load_model(args)
    try:
        source = certify_source_fn(args.source)
    except ExprError as exc:
        raise InputError(f"bad --source expression: {exc}") from exc
    if not source.certified:
        raise InputError(f"--source '{args.source}' is not an admissible source function")
    agrid = _alpha_grid(args, filt)
    rho = _order(args, agrid)

    if not args.generator.startswith("j^"):
        raise InputError("--generator must look like 'j^-0.6'")
    try:
        q = float(args.generator[2:])
    except ValueError as exc:
        raise InputError(f"bad --generator '{args.generator}'") from exc
    j = np.arange(1, model.dim + 1, dtype=float)
    w = j ** q

    elem = make_source_element(model, source, w)
    study_grid = np.geomspace(max(1e-5, float(model.eigenvalues[-1]) / 10.0),
                              filt.alpha_max / 2.0, 150)
    study = run_convergence(model, filt, elem, rho, study_grid)
    window = _fit_window(args)
    try:
        fit = fit_order(study, window)
        fit_doc = fit.to_json_dict()
    except ExperimentError as exc:
        fit_doc = {"error": str(exc)}
    if args.format == "csv":
        _emit(args, study.to_csv())
        sys.stderr.write(_dump_json({"fit": fit_doc}))
    else:
        _emit(args, _dump_json({"study": study.to_json_dict(), "fit": fit_doc}))
    return EXIT_OK


def _fit_window(args):
    if args.fit_window is None:
        return None
    parts = args.fit_window.split(":")
    if len(parts) != 2:
        raise InputError("--fit-window is 'LO:HI'")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise InputError(f"bad --fit-window '{args.fit_window}'") from exc
    if not 0 < lo < hi:
        raise InputError("--fit-window needs 0 < LO < HI")
    return (lo, hi)


def _load_model(args):
    spec = args.model
    if spec.startswith("diag:"):
        rule = spec.split(":", 1)[1]
        try:
            return make_model(rule, args.dim)
        except OperatorError as exc:
            raise InputError(str(exc)) from exc
    try:
        matrix = load_matrix_csv(spec)
    except OSError as exc:
        raise InputError(f"cannot read model matrix '{spec}': {exc}") from exc
    except OperatorError as exc:
        raise InputError(str(exc)) from exc
    model, _, _, _ = svd_decompose(matrix)
    return model


def _structured_error(message: str, code: str = "input-error"):
    sys.stderr.write(_dump_json({"error": code, "message": message}))


_COMMANDS = {
    "classify": cmd_classify,
    "srho": cmd_srho,
    "classical": cmd_classical,
    "mp-check": cmd_mp_check,
    "construct": cmd_construct,
    "converge": cmd_converge,
}


def _require_args(args):
    needs_order = args.command in ("classify", "srho", "mp-check")
    if getattr(args, "filter", None) is None:
        raise InputError("--filter is required (via flag or config file)")
    if needs_order and getattr(args, "order", None) is None:
        raise InputError("--order is required (via flag or config file)")
    if args.command == "converge" and getattr(args, "source", None) is None:
        raise InputError("--source is required (via flag or config file)")


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    argv = _merge_flag_values(argv)
    parser = build_parser()
    try:
        config_path = _scan_config_path(argv)
        if config_path:
            defaults = _load_config_defaults(config_path)
            for sub_action in parser._subparsers._group_actions[0].choices.values():
                known = {a.dest for a in sub_action._actions}
                sub_action.set_defaults(**{k: v for k, v in defaults.items() if k in known})
        args = parser.parse_args(argv)
        _require_args(args)
        return _COMMANDS[args.command](args)
    except InputError as exc:
        _structured_error(str(exc))
        return EXIT_INPUT
    except (ExprError, FilterError, QualificationError, OperatorError,
            ExperimentError) as exc:
        _structured_error(str(exc), code=type(exc).__name__)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
