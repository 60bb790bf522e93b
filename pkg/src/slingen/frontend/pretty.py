"""Pretty printer for LA programs; output re-parses to the same AST."""

from __future__ import annotations

from .astnodes import (
    Add,
    Assign,
    Div,
    Expr,
    For,
    Inverse,
    Literal,
    Mul,
    Neg,
    OperandDecl,
    OperandRef,
    Program,
    RegionRef,
    Sqrt,
    Statement,
    Sub,
    Transpose,
)

_PREC = {Add: 1, Sub: 1, Neg: 1, Mul: 2, Div: 2, Transpose: 3}


def _wrap(child: Expr, text: str, parent_prec: int) -> str:
    if _PREC.get(type(child), 4) < parent_prec:
        return f"({text})"
    return text


def pretty_expr(expr: Expr) -> str:
    if isinstance(expr, OperandRef):
        return expr.name
    if isinstance(expr, RegionRef):
        def idx(off, ext):
            if ext.is_const and ext.as_int() == 1:
                return str(off)
            return f"{off}:{off + ext}"
        return f"{expr.name}({idx(expr.row_off, expr.rows)}, {idx(expr.col_off, expr.cols)})"
    if isinstance(expr, Literal):
        v = expr.value
        return str(int(v)) if v == int(v) and abs(v) < 1e15 else repr(v)
    if isinstance(expr, Add):
        return (f"{_wrap(expr.left, pretty_expr(expr.left), 1)} + "
                f"{_wrap(expr.right, pretty_expr(expr.right), 2)}")
    if isinstance(expr, Sub):
        return (f"{_wrap(expr.left, pretty_expr(expr.left), 1)} - "
                f"{_wrap(expr.right, pretty_expr(expr.right), 2)}")
    if isinstance(expr, Mul):
        return (f"{_wrap(expr.left, pretty_expr(expr.left), 2)} * "
                f"{_wrap(expr.right, pretty_expr(expr.right), 3)}")
    if isinstance(expr, Div):
        return (f"{_wrap(expr.left, pretty_expr(expr.left), 2)} / "
                f"{_wrap(expr.right, pretty_expr(expr.right), 3)}")
    if isinstance(expr, Transpose):
        return f"{_wrap(expr.child, pretty_expr(expr.child), 3)}'"
    if isinstance(expr, Neg):
        return f"-{_wrap(expr.child, pretty_expr(expr.child), 2)}"
    if isinstance(expr, Sqrt):
        return f"sqrt({pretty_expr(expr.child)})"
    if isinstance(expr, Inverse):
        return f"inv({pretty_expr(expr.child)})"
    raise TypeError(f"cannot print {expr!r}")


def pretty_stmt(stmt: Statement, indent: int = 0) -> str:
    pad = "    " * indent
    if isinstance(stmt, For):
        head = f"{pad}for ({stmt.var} = {stmt.lo}:{stmt.hi}"
        head += f":{stmt.step})" if stmt.step != 1 else ")"
        body = "\n".join(pretty_stmt(s, indent + 1) for s in stmt.body)
        return f"{head} {{\n{body}\n{pad}}}"
    assert isinstance(stmt, Assign)
    return f"{pad}{pretty_expr(stmt.lhs)} = {pretty_expr(stmt.rhs)};"


def _pretty_decl_group(group: list[OperandDecl]) -> str:
    d0 = group[0]
    kw = {"matrix": "Mat", "vector": "Vec", "scalar": "Sca"}[d0.kind]
    if d0.kind == "matrix":
        items = ", ".join(f"{d.name}({d.rows},{d.cols})" for d in group)
    elif d0.kind == "vector":
        items = ", ".join(f"{d.name}({d.rows})" for d in group)
    else:
        items = ", ".join(d.name for d in group)
    attrs = [d0.iotype] + sorted(d0.properties)
    if d0.overwrites:
        attrs.append(f"ow({d0.overwrites})")
    return f"{kw} {items} <{', '.join(attrs)}>;"


def pretty_program(prog: Program) -> str:
    lines = [_pretty_decl_group(g) for g in prog.decl_groups]
    if prog.decl_groups and prog.stmts:
        lines.append("")
    lines.extend(pretty_stmt(s) for s in prog.stmts)
    return "\n".join(lines) + "\n"
