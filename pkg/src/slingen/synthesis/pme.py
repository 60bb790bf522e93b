"""Partitioned Matrix Expression generation for supported HLAC families.

The defining equation of a family is partitioned blockwise, multiplied
out symbolically, and split into dependent block equations.  Each block
equation is solved for the unknown block it determines: terms containing
that block stay on the left (the core), everything else moves to the
right as an update of the original right-hand-side block.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import symbolic as sy
from ..symbolic import Atom, Equation, Grid, SymExpr, ZERO, atom
from .families import Family

BLOCK_ORDER = {"TL": 0, "TR": 1, "BL": 2, "BR": 3, "T": 0, "B": 1,
               "L": 0, "R": 1, "": 0}


class SynthesisError(Exception):
    pass


@dataclass(frozen=True)
class BlockEquation:
    """core = rhs_block - update, determining the block `solves`."""

    core: SymExpr
    rhs_block: SymExpr
    update: SymExpr
    solves: Atom
    tag: str  # "recursive-instance" | "known-kernel" | "sBLAC"
    deps: tuple[int, ...]

    @property
    def equation(self) -> Equation:
        return Equation(sy.add(self.core, self.update), self.rhs_block)

    def __str__(self) -> str:
        rhs = sy.sub(self.rhs_block, self.update)
        return f"{sy.sym_str(self.core)} = {sy.sym_str(rhs)}"


@dataclass
class PME:
    family: Family
    scheme: str
    equations: list[BlockEquation]
    structures: dict[Atom, str]  # untransposed block atom -> structure label

    @property
    def unknown(self) -> str:
        return self.family.role("out")

    def structure(self, a: Atom) -> str:
        s = self.structures.get(Atom(a.op, a.block), "General")
        if a.t:
            s = {"LoTri": "UpTri", "UpTri": "LoTri"}.get(s, s)
        return s


def _partition(name: str, structure: str, scheme: str,
               structs: dict[Atom, str]) -> Grid:
    """Build the block grid of one operand and record block structures."""
    def blk(label: str, s: str) -> SymExpr:
        if s == "Zero":
            return ZERO
        structs[Atom(name, label)] = s
        return atom(name, label)

    if scheme == "none":
        return ((blk("", structure),),)
    if scheme == "1x2":
        return ((blk("L", "General"), blk("R", "General")),)
    if scheme == "2x1":
        return ((blk("T", "General"),), (blk("B", "General"),))
    assert scheme == "2x2"
    if structure == "UpTri":
        return ((blk("TL", "UpTri"), blk("TR", "General")),
                (ZERO, blk("BR", "UpTri")))
    if structure == "LoTri":
        return ((blk("TL", "LoTri"), ZERO),
                (blk("BL", "General"), blk("BR", "LoTri")))
    if structure in ("SymU", "SymL"):
        tl = blk("TL", "Sym")
        br = blk("BR", "Sym")
        if structure == "SymU":
            tr = blk("TR", "General")
            return ((tl, tr), (sy.transpose(tr), br))
        bl = blk("BL", "General")
        return ((tl, sy.transpose(bl)), (bl, br))
    if structure == "Ident":
        return ((blk("TL", "Ident"), ZERO), (ZERO, blk("BR", "Ident")))
    return ((blk("TL", "General"), blk("TR", "General")),
            (blk("BL", "General"), blk("BR", "General")))


def _operand_structure(family: Family, role: str) -> str:
    kind = family.kind
    if role in ("tri", "l", "u"):
        if role == "u":
            return "UpTri"
        return "LoTri" if family.uplo == "lower" else "UpTri"
    if role == "out":
        if kind == "chol" or kind == "trtri":
            return "LoTri" if family.uplo == "lower" else "UpTri"
        if kind == "trlya":
            return "SymL"
        return "General"
    if role == "rhs":
        if kind == "chol":
            return "SymU" if family.uplo == "upper" else "SymL"
        if kind == "trlya":
            return "SymL"
        return "General"
    raise ValueError(role)


def _grids(family: Family, scheme: str,
           structs: dict[Atom, str]) -> tuple[Grid, Grid]:
    """Left and right defining-equation grids, already multiplied out."""
    kind = family.kind

    def part(role: str, sch: str) -> Grid:
        return _partition(family.role(role), _operand_structure(family, role),
                          sch, structs)

    if kind == "chol":
        u = part("out", scheme)
        s = part("rhs", scheme)
        if family.uplo == "upper":
            return sy.gmul(sy.gtranspose(u), u), s
        return sy.gmul(u, sy.gtranspose(u)), s

    if kind == "solve":
        if scheme == "1x2":
            tri_s = "none"
        elif scheme == "2x1" and family.side == "right":
            tri_s = "none"
        elif scheme == "none":
            tri_s = "none"
        else:
            tri_s = "2x2"
        tri = part("tri", tri_s)
        if family.trans:
            tri = sy.gtranspose(tri)
        x = part("out", scheme)
        b = part("rhs", scheme)
        if family.side == "left":
            return sy.gmul(tri, x), b
        return sy.gmul(x, tri), b

    if kind == "trtri":
        tri = part("tri", scheme)
        x = part("out", scheme)
        ident = _partition("I", "Ident", scheme, structs)
        return sy.gmul(tri, x), ident

    if kind == "trsyl":
        l = part("l", scheme)
        u = part("u", scheme)
        x = part("out", scheme)
        c = part("rhs", scheme)
        return sy.gadd(sy.gmul(l, x), sy.gmul(x, u)), c

    if kind == "trlya":
        l = part("l", scheme)
        x = part("out", scheme)
        s = part("rhs", scheme)
        return sy.gadd(sy.gmul(l, x), sy.gmul(x, sy.gtranspose(l))), s

    raise SynthesisError(f"unknown family kind {kind!r}")


def _unknown_atoms(expr: SymExpr, unknown: str) -> set[Atom]:
    return {Atom(a.op, a.block) for a in sy.atoms_of(expr) if a.op == unknown}


def _core_kind(core: SymExpr, solved: Atom, rhs_block: SymExpr,
               pme_structs: dict[Atom, str], family: Family) -> str:
    """What operation solves `core = rhs` for `solved`?"""
    def struct(a: Atom) -> str:
        s = pme_structs.get(Atom(a.op, a.block), "General")
        if a.t:
            s = {"LoTri": "UpTri", "UpTri": "LoTri"}.get(s, s)
        return s

    rhs_atoms = sy.atoms_of(rhs_block)
    if len(core) == 1:
        _, factors = core[0]
        if len(factors) == 2:
            a, b = factors
            if {Atom(a.op, a.block), Atom(b.op, b.block)} == {solved} and a.t != b.t:
                return "chol"
            if rhs_atoms and all(struct(x) == "Ident" for x in rhs_atoms):
                return "trtri"
            return "solve"
        if len(factors) == 1:
            return "copy"
    if len(core) == 2:
        (_, fa), (_, fb) = core
        if len(fa) == 2 and len(fb) == 2:
            # L*X + X*U with X = solved
            def side_and_coeff(fs):
                if Atom(fs[1].op, fs[1].block) == solved and not fs[1].t:
                    return ("L", fs[0])
                if Atom(fs[0].op, fs[0].block) == solved and not fs[0].t:
                    return ("R", fs[1])
                return None
            pa, pb = side_and_coeff(fa), side_and_coeff(fb)
            if pa and pb and {pa[0], pb[0]} == {"L", "R"}:
                lo = pa[1] if pa[0] == "L" else pb[1]
                up = pb[1] if pa[0] == "L" else pa[1]
                if lo.op == up.op and lo.block == up.block and lo.t != up.t:
                    return "trlya"
                return "trsyl"
    return "other"


def generate_pme(family: Family, scheme: str = "2x2") -> PME:
    structs: dict[Atom, str] = {}
    lhs_grid, rhs_grid = _grids(family, scheme, structs)
    unknown = family.role("out")

    # symmetric/identity diagonal blocks equal their own transpose; fold
    # that in so aliased corner equations compare equal
    def canon(expr: SymExpr) -> SymExpr:
        return sy.normalize(
            (c, tuple(Atom(a.op, a.block) if a.t and structs.get(
                Atom(a.op, a.block)) in ("Sym", "Ident") else a
                for a in fs))
            for c, fs in expr)

    # collect raw block equations in row-major block order, deduplicated
    # up to transposition (symmetric operands alias opposite corners)
    raw: list[Equation] = []
    for lrow, rrow in zip(lhs_grid, rhs_grid):
        for lhs, rhs in zip(lrow, rrow):
            eq = Equation(canon(lhs), canon(rhs))
            if eq.is_trivial():
                continue
            flipped = Equation(canon(sy.transpose(eq.lhs)),
                               canon(sy.transpose(eq.rhs)))

            def t_count(e: Equation) -> int:
                return sum(1 for a in sy.atoms_of(sy.add(e.lhs, e.rhs))
                           if a.t and a.op == unknown)
            dup = next((k for k, prev in enumerate(raw)
                        if prev.diff() in (eq.diff(), flipped.diff())), None)
            if dup is not None:
                # prefer the orientation where the unknown is untransposed
                if t_count(eq) < t_count(raw[dup]):
                    raw[dup] = eq
                continue
            raw.append(eq)

    # assign a solved block to each equation by elimination
    solved_of: dict[int, Atom] = {}
    assigned: set[Atom] = set()
    pending = list(range(len(raw)))
    while pending:
        progress = False
        for i in list(pending):
            unk = _unknown_atoms(sy.add(raw[i].lhs, raw[i].rhs), unknown)
            new = unk - assigned
            if len(new) == 1:
                solved_of[i] = next(iter(new))
                assigned |= new
                pending.remove(i)
                progress = True
        if not progress:
            raise SynthesisError(
                f"could not orient PME equations for {family.kind} ({scheme})")

    # solve each equation for its block and classify
    equations: list[BlockEquation] = []
    index_of: dict[Atom, int] = {}
    order = sorted(range(len(raw)),
                   key=lambda i: BLOCK_ORDER.get(solved_of[i].block, 9))
    for i in order:
        eq = raw[i]
        solved = solved_of[i]
        def has_solved(term):
            return any(Atom(a.op, a.block) == solved for a in term[1])
        core = sy.normalize(t for t in eq.lhs if has_solved(t))
        moved = sy.normalize(t for t in eq.lhs if not has_solved(t))
        rhs_block = eq.rhs
        if any(has_solved(t) for t in eq.rhs):
            raise SynthesisError("unknown block on the right-hand side")
        kind = _core_kind(core, solved, rhs_block, structs, family)
        if kind == family.kind:
            tag = "recursive-instance"
        elif kind in ("solve", "chol", "trsyl", "trlya", "trtri"):
            tag = "known-kernel"
        else:
            tag = "sBLAC"
        equations.append(BlockEquation(core, rhs_block, moved, solved, tag, ()))
        index_of[solved] = len(equations) - 1

    # dependency edges: reads of other solved blocks
    final: list[BlockEquation] = []
    for be in equations:
        reads = _unknown_atoms(sy.add(be.core, be.update), unknown) - {be.solves}
        deps = tuple(sorted(index_of[a] for a in reads))
        final.append(BlockEquation(be.core, be.rhs_block, be.update,
                                   be.solves, be.tag, deps))
    return PME(family, scheme, final, structs)
