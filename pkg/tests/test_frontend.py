"""Parser, checker, and statement classification."""

import pytest

from slingen.frontend import (
    Assign,
    CheckError,
    For,
    ParseError,
    StatementClass,
    check,
    parse,
    pretty_program,
)

from conftest import ALL_PROGRAMS, checked, program_source


def test_parse_all_programs():
    for name in ALL_PROGRAMS:
        prog = parse(program_source(name), name=name)
        assert prog.name == name
        assert prog.decls
        assert prog.stmts


@pytest.mark.parametrize("name,hlacs", [
    ("potrf", 1), ("trsyl", 1), ("trlya", 1), ("trtri", 1),
    ("kf", 5), ("gpr", 4), ("l1a", 0),
])
def test_hlac_classification_counts(name, hlacs):
    cp = checked(name, 8)
    got = sum(1 for a in cp.assigns()
              if cp.class_of(a) is StatementClass.HLAC)
    assert got == hlacs


def test_sblac_statements_have_no_unknown_on_rhs():
    cp = checked("l1a", 8)
    for a in cp.assigns():
        assert cp.class_of(a) in (StatementClass.SBLAC,
                                  StatementClass.SCALAR_OP)


def test_declared_shapes_bound():
    cp = checked("potrf", 6)
    assert cp.decls["A"].rows == 6
    assert cp.decls["A"].cols == 6
    assert "UpTri" in cp.decls["X"].properties


def test_overwrite_links():
    cp = checked("gpr", 4)
    assert cp.decls["L"].overwrites == "K"
    assert cp.decls["K"].overwrites is None


def test_missing_binding_rejected():
    prog = parse(program_source("potrf"), name="potrf")
    with pytest.raises(CheckError):
        check(prog, {})


def test_unknown_operand_rejected():
    with pytest.raises(CheckError):
        check(parse("Mat A(n,n) <In>;\nB = A;\n", name="bad"), {"n": 4})


def test_shape_mismatch_rejected():
    src = ("Mat A(n,n) <In>;\nVec x(n) <In>;\nMat B(n,n) <Out>;\n"
           "B = A + x;\n")
    with pytest.raises(CheckError):
        check(parse(src, name="bad"), {"n": 4})


def test_parse_error_reports_line():
    with pytest.raises(ParseError) as exc:
        parse("Mat A(n,n) <In>;\nB = = A;\n", name="bad")
    assert "2" in str(exc.value)


def test_for_loop_parses():
    src = ("Vec x(n) <InOut>;\nSca a <In>;\n"
           "for (i = 0:n) {\n  x(i) = a * x(i);\n}\n")
    cp = check(parse(src, name="scale"), {"n": 5})
    assert any(isinstance(s, For) for s in cp.stmts)


def test_pretty_round_trips_through_parser():
    for name in ALL_PROGRAMS:
        prog = parse(program_source(name), name=name)
        text = pretty_program(prog)
        reparsed = parse(text, name=name)
        assert len(reparsed.stmts) == len(prog.stmts)
        assert check(parse(text, name=name), {"n": 4}).decls.keys() == \
            checked(name, 4).decls.keys()


def test_implicit_equation_lhs_unknowns_tracked():
    cp = checked("potrf", 4)
    (stmt,) = [a for a in cp.assigns()
               if cp.class_of(a) is StatementClass.HLAC]
    assert cp.unknowns[id(stmt)] == {"X"}
    assert isinstance(stmt, Assign)
