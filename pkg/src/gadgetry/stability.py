"""Deciding surjective closure and stability of an encoding."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .core import Structure, eliminate_equalities, equality_classes
from .encoding import (Encoding, build_applications, closure_formula, coded_rows,
                       has_constant_symbols, variable_names)
from .errors import UndecidedError
from .search import CompiledProblem, SearchConfig, automorphisms

log = logging.getLogger(__name__)

STABLE = "STABLE"
UNSTABLE = "UNSTABLE"
INCONCLUSIVE = "INCONCLUSIVE"

NOT_SURJECTIVE = "coded assignment is not surjective"
NOT_AUTOMORPHIC = "surjective member of the closure is not an automorphic image of a coded assignment"


@dataclass
class Counterexample:
    size: int
    assignment: dict  # application name -> value
    reason: str


@dataclass
class StabilityVerdict:
    status: str
    checked_sizes: list = field(default_factory=list)
    counterexample: Counterexample | None = None
    surjective_solutions: dict = field(default_factory=dict)  # size -> count examined

    @property
    def closed(self):
        return self.status != UNSTABLE


def surjective_closure_solutions(structure: Structure, V, encoding: Encoding, config=None):
    """Yield (applications, value-index tuples) for surjective members of the closure of T_V."""
    psi0 = closure_formula(structure, V, encoding)
    reps = equality_classes(psi0)
    reduced = eliminate_equalities(psi0)
    config = config or SearchConfig(surjective=True)
    problem = CompiledProblem.from_instance(reduced, structure, config)
    names = list(reduced.variables)
    where = {v: i for i, v in enumerate(names)}
    lift = [where[reps[v]] for v in psi0.variables]
    apps = build_applications(V, encoding)
    return apps, (tuple(sol[i] for i in lift) for sol in problem.solutions())


def decide_surjectively_closed(structure: Structure, V, encoding: Encoding) -> StabilityVerdict:
    """Check one variable set: every surjective closure member is gamma o t[g]."""
    if isinstance(V, int):
        V = variable_names(V)
    V = tuple(V)
    index = structure.index
    apps, sols = surjective_closure_solutions(structure, V, encoding)
    rows = {tuple(index[b] for b in row) for row in coded_rows(V, encoding, apps)}
    inverses = []
    for aut in automorphisms(structure):
        m = aut.as_unary_dict()
        inv = [0] * len(structure.universe)
        for b, c in m.items():
            inv[index[c]] = index[b]
        inverses.append(inv)
    count = 0
    for sol in sols:
        count += 1
        if not any(tuple(inv[x] for x in sol) in rows for inv in inverses):
            witness = {a.name: structure.universe[x] for a, x in zip(apps, sol)}
            log.info("size %d: counterexample after %d surjective solutions", len(V), count)
            return StabilityVerdict(UNSTABLE, [len(V)], Counterexample(len(V), witness, NOT_AUTOMORPHIC),
                                    {len(V): count})
    log.info("size %d: %d surjective solutions, all automorphic images", len(V), count)
    return StabilityVerdict(STABLE, [len(V)], None, {len(V): count})


def _non_surjective_coded(structure, V, encoding):
    apps = build_applications(V, encoding)
    universe = set(structure.universe)
    for row in coded_rows(V, encoding, apps):
        if set(row) != universe:
            return Counterexample(len(V), {a.name: b for a, b in zip(apps, row)}, NOT_SURJECTIVE)
    return None


def stability_plan(structure: Structure, encoding: Encoding, bound=None):
    """Sizes to check, and whether passing all of them proves stability."""
    n = len(structure.universe)
    needed = None
    if encoding.max_arity <= 1:
        if has_constant_symbols(encoding, structure):
            needed = n
        elif set(structure.universe) <= {f.constant_value() for f in encoding.maps if f.arity == 1}:
            # constant unary applications occupy one variable of their own
            needed = n + 1
    if needed is None:
        if bound is None:
            if encoding.max_arity > 1:
                raise UndecidedError(
                    "stability of encodings with maps of arity > 1 needs an explicit size bound")
            bound = n + 1
        return list(range(1, bound + 1)), False
    if bound is None:
        bound = needed
    return list(range(1, bound + 1)), bound >= needed


def decide_stability(structure: Structure, encoding: Encoding, bound=None) -> StabilityVerdict:
    """Check surjectivity of coded assignments and surjective closure size by size.

    With arity <= 1 and all arity-0 constants present, sizes 1..|B| decide
    stability; with constant unary maps instead, sizes 1..|B|+1. Anything
    else yields INCONCLUSIVE at best.
    """
    sizes, conclusive = stability_plan(structure, encoding, bound)
    verdict = StabilityVerdict(INCONCLUSIVE)
    for size in sizes:
        V = variable_names(size)
        bad = _non_surjective_coded(structure, V, encoding)
        if bad is not None:
            verdict.checked_sizes.append(size)
            verdict.status = UNSTABLE
            verdict.counterexample = bad
            return verdict
        step = decide_surjectively_closed(structure, V, encoding)
        verdict.checked_sizes.append(size)
        verdict.surjective_solutions.update(step.surjective_solutions)
        if step.status == UNSTABLE:
            verdict.status = UNSTABLE
            verdict.counterexample = step.counterexample
            return verdict
    verdict.status = STABLE if conclusive else INCONCLUSIVE
    return verdict
