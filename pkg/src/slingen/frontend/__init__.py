from .astnodes import (
    Add,
    Assign,
    CheckedProgram,
    Div,
    Expr,
    For,
    Inverse,
    Literal,
    OperandDecl,
    OperandRef,
    Program,
    RegionRef,
    Sqrt,
    Statement,
    StatementClass,
    Sub,
    Mul,
    Transpose,
)
from .check import CheckError, check, classify
from .parser import ParseError, parse
from .pretty import pretty_expr, pretty_program, pretty_stmt

__all__ = [
    "Add",
    "Assign",
    "CheckedProgram",
    "CheckError",
    "Div",
    "Expr",
    "For",
    "Inverse",
    "Literal",
    "Mul",
    "OperandDecl",
    "OperandRef",
    "ParseError",
    "Program",
    "RegionRef",
    "Sqrt",
    "Statement",
    "StatementClass",
    "Sub",
    "Transpose",
    "check",
    "classify",
    "parse",
    "pretty_expr",
    "pretty_program",
    "pretty_stmt",
]
