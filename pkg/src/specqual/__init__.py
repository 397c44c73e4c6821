"""specqual: qualification analysis for spectral regularization filters.

The package answers three families of questions about a filter family
g_alpha(lambda) approximating 1/lambda:

* what source function s_rho does a target convergence rate rho induce,
  and is rho a weak, strong, or optimal qualification of the method?
* what is the classical qualification order, and does rho satisfy the
  increasing-weight qualification inequality?
* do the direct/converse convergence statements hold on finite spectral
  models, at the rates the classification predicts?

Quick start::

    from specqual import get_filter, order_fn, classify

    filt = get_filter("tikhonov")
    report = classify(filt, order_fn("alpha"))
    print(report.level)            # "optimal"
"""

from .expressions import (
    DomainError,
    ExprError,
    ExprSyntaxError,
    FuncExpr,
    UnboundVariableError,
    UnknownIdentifierError,
    eval_expr,
    parse_expr,
    to_string,
)
from .filters import (
    AxiomReport,
    FilterFamily,
    FilterError,
    ParameterRangeError,
    ResidualValue,
    UnknownFilterError,
    default_alpha_grid,
    default_lambda_grid,
    eval_g,
    eval_residual,
    get_filter,
    list_filters,
    make_custom_filter,
    verify_srm_axioms,
)
from .limits import LimitEstimate, tail_limit
from .rates import (
    CompareVerdict,
    OrderFn,
    SourceFn,
    TabulatedOrder,
    TabulatedSource,
    certify_order_fn,
    certify_source_fn,
    equivalent_at_origin,
    eval_log,
    order_fn,
    precedes,
    source_fn,
)
from .qualification import (
    ClassicalOrder,
    ConstructResult,
    HypothesisViolation,
    MPVerdict,
    PairVerdict,
    QualificationError,
    QualificationReport,
    UncertifiedError,
    check_mp_qualification,
    check_order_source_pair,
    check_strong_pair,
    check_weak_pair,
    classify,
    construct_weak_qualification,
    estimate_classical_order,
    estimate_srho,
    srho_table,
)
from .operators import (
    ConvergenceFailure,
    DimensionError,
    MembershipVerdict,
    OperatorError,
    SourceElement,
    SpectralModel,
    jacobi_svd,
    load_matrix_csv,
    make_model,
    make_source_element,
    membership_probe,
    model_from_json,
    regularization_error,
    log_regularization_error,
    regularize,
    svd_decompose,
)
from .experiments import (
    ConvergenceStudy,
    ConverseProbe,
    ExperimentError,
    MaximalSourceReport,
    SlopeFit,
    converse_probe,
    fit_order,
    maximal_source_demo,
    run_convergence,
)

__version__ = "0.1.0"
