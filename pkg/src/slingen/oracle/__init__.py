"""Dense numpy reference implementations used to verify generated code.

Everything here is deliberately naive: inputs are materialized as full
matrices, higher-level equations are solved with dense numpy routines
(or explicit Kronecker systems), and nothing is shared with the
synthesis or code generation stages beyond the AST itself.
"""

from .evaluate import (
    eval_expr,
    evaluate_basic,
    init_values,
    rel_error,
    within_tolerance,
)
from .inputs import generate_inputs
from .reference import (
    OracleError,
    cholesky_lower,
    output_names,
    reference_outputs,
    residuals,
    tri_inverse,
    trisolve,
    trsyl_kron,
    trsyl_subst,
)

__all__ = [
    "OracleError",
    "cholesky_lower",
    "eval_expr",
    "evaluate_basic",
    "generate_inputs",
    "init_values",
    "output_names",
    "reference_outputs",
    "rel_error",
    "residuals",
    "tri_inverse",
    "trisolve",
    "trsyl_kron",
    "trsyl_subst",
    "within_tolerance",
]
