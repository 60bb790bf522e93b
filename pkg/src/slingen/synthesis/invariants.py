"""Loop-invariant enumeration over a PME's task graph.

Each block equation becomes one task, except that an equation whose core
is nonlinear in its unknown (a Cholesky block, where the unknown appears
twice in one term) has its right-hand-side update split off as a
separate task.  Invariants are the dependency-closed, proper, nonempty
task subsets that hold vacuously when the loop starts, i.e. when the
top-left part of the traversal is still empty.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .. import symbolic as sy
from ..symbolic import Atom
from .pme import PME, BlockEquation

# Regions that are empty before the first iteration of a forward
# (top-left to bottom-right) traversal, and of the reversed one
# (bottom-right to top-left) used by effectively upper solves.
_EMPTY_FORWARD = {"TL", "TR", "BL", "L", "T"}
_EMPTY_REVERSED = {"BR", "TR", "BL", "R", "B"}


def _traversal_reversed(fam) -> bool:
    """True when the algorithm walks the partition bottom-right first."""
    if fam.kind == "solve":
        if fam.side == "right":
            return (fam.uplo == "upper") == fam.trans
        return (fam.uplo == "lower") == fam.trans
    if fam.kind == "trtri":
        return fam.uplo == "upper"
    return False


def _empty_set(pme: PME) -> set[str]:
    return _EMPTY_REVERSED if _traversal_reversed(pme.family) else _EMPTY_FORWARD


@dataclass(frozen=True)
class Task:
    id: str
    kind: str  # "solve" | "update"
    eq_index: int
    out_block: str
    deps: tuple[str, ...]


@dataclass(frozen=True)
class LoopInvariant:
    """A steady-state predicate: the subset of PME tasks already done."""

    pme: PME
    tasks: frozenset[str]
    index: int

    def predicate(self) -> tuple[str, ...]:
        lines = []
        for t in build_tasks(self.pme):
            if t.id not in self.tasks:
                continue
            be = self.pme.equations[t.eq_index]
            if t.kind == "update":
                lines.append(
                    f"{_rhs_name(be)} := {_rhs_name(be)} - ({sy.sym_str(be.update)})")
            else:
                lines.append(str(be))
        return tuple(lines)

    def __str__(self) -> str:
        return f"inv{self.index}{{{', '.join(sorted(self.tasks))}}}"


def _rhs_name(be: BlockEquation) -> str:
    atoms = sy.atoms_of(be.rhs_block)
    if len(atoms) == 1:
        return str(next(iter(atoms)))
    return sy.sym_str(be.rhs_block)


def _nonlinear(be: BlockEquation, unknown: str) -> bool:
    for _, factors in be.core:
        if sum(1 for a in factors if a.op == unknown) >= 2:
            return True
    return False


def build_tasks(pme: PME) -> list[Task]:
    unknown = pme.unknown
    solve_task_of: dict[Atom, str] = {}
    for be in pme.equations:
        solve_task_of[be.solves] = f"solve:{be.solves.block}"

    def solve_deps(expr, exclude) -> list[str]:
        blocks = {Atom(a.op, a.block) for a in sy.atoms_of(expr) if a.op == unknown}
        return [solve_task_of[b] for b in sorted(blocks - {exclude})]

    tasks: list[Task] = []
    for i, be in enumerate(pme.equations):
        block = be.solves.block
        if be.update and _nonlinear(be, unknown):
            up_id = f"update:{block}"
            up_deps = tuple(sorted(set(solve_deps(be.update, be.solves))))
            tasks.append(Task(up_id, "update", i, block, up_deps))
            core_deps = {up_id, *solve_deps(be.core, be.solves)}
            tasks.append(Task(f"solve:{block}", "solve", i, block,
                              tuple(sorted(core_deps))))
        else:
            deps = set(solve_deps(be.core, be.solves))
            deps |= set(solve_deps(be.update, be.solves))
            tasks.append(Task(f"solve:{block}", "solve", i, block,
                              tuple(sorted(deps))))
    return tasks


def _vacuous_at_entry(task: Task, pme: PME) -> bool:
    empty = _empty_set(pme)
    if task.kind == "update":
        be = pme.equations[task.eq_index]
        return all(any(a.block in empty for a in factors)
                   for _, factors in be.update)
    return task.out_block in empty


def enumerate_invariants(pme: PME) -> list[LoopInvariant]:
    tasks = build_tasks(pme)
    by_id = {t.id: t for t in tasks}
    feasible = [t for t in tasks if _vacuous_at_entry(t, pme)]
    out: list[LoopInvariant] = []
    for size in range(1, len(tasks)):
        for combo in itertools.combinations(sorted(t.id for t in feasible), size):
            chosen = set(combo)
            if any(d not in chosen for tid in combo for d in by_id[tid].deps):
                continue
            out.append(LoopInvariant(pme, frozenset(chosen), len(out)))
    return out
