"""Finite relational structures, conjunctive formulas and instances.

Values and variables are plain string tokens. Order matters: a structure's
universe is kept in declaration order, which is the canonical value order
used by search and serialization.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import ArityMismatchError, GadgetryError, UnknownValueError

CSP = "csp"
SCSP = "scsp"
COND = "cond"
KINDS = (CSP, SCSP, COND)


@dataclass(frozen=True)
class Relation:
    symbol: str
    arity: int
    tuples: frozenset

    def __contains__(self, item):
        return tuple(item) in self.tuples

    def __len__(self):
        return len(self.tuples)


@dataclass(frozen=True, eq=True)
class Structure:
    name: str
    universe: tuple
    relations: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "universe", tuple(self.universe))
        object.__setattr__(self, "relations", tuple(self.relations))
        if len(set(self.universe)) != len(self.universe):
            raise GadgetryError(f"structure {self.name}: repeated universe value")
        seen = set()
        values = set(self.universe)
        for rel in self.relations:
            if rel.symbol in seen:
                raise GadgetryError(f"structure {self.name}: duplicate relation {rel.symbol}")
            seen.add(rel.symbol)
            for t in rel.tuples:
                if len(t) != rel.arity:
                    raise ArityMismatchError(
                        f"relation {rel.symbol} has arity {rel.arity} but tuple {t} has {len(t)} entries")
                for v in t:
                    if v not in values:
                        raise UnknownValueError(f"relation {rel.symbol}: unknown value {v!r}")

    @classmethod
    def build(cls, name, universe, relations: Mapping[str, Iterable[Sequence]] | Iterable = (),
              arities: Mapping[str, int] | None = None):
        """Convenience constructor from ``{symbol: tuples}``.

        Arity is read off the first tuple unless given in ``arities``
        (needed for empty relations).
        """
        universe = tuple(str(b) for b in universe)
        rels = []
        items = relations.items() if isinstance(relations, Mapping) else relations
        for symbol, tuples in items:
            tuples = frozenset(tuple(str(v) for v in t) for t in tuples)
            if arities and symbol in arities:
                arity = arities[symbol]
            elif tuples:
                arity = len(next(iter(tuples)))
            else:
                raise GadgetryError(f"cannot infer arity of empty relation {symbol}")
            rels.append(Relation(symbol, arity, tuples))
        return cls(name, universe, tuple(rels))

    @cached_property
    def _by_symbol(self):
        return {rel.symbol: rel for rel in self.relations}

    def relation(self, symbol) -> Relation:
        try:
            return self._by_symbol[symbol]
        except KeyError:
            raise UnknownValueError(f"structure {self.name} has no relation {symbol!r}") from None

    def has_relation(self, symbol):
        return symbol in self._by_symbol

    @property
    def signature(self):
        return {rel.symbol: rel.arity for rel in self.relations}

    @cached_property
    def index(self):
        """Map from value token to its position in the universe."""
        return {b: i for i, b in enumerate(self.universe)}

    def __hash__(self):
        return hash((self.name, self.universe, self.relations))


@dataclass(frozen=True)
class Atom:
    symbol: str
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self):
        return f"{self.symbol}({','.join(self.args)})"


@dataclass(frozen=True)
class AndFormula:
    atoms: tuple = ()
    equalities: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "equalities", tuple(tuple(e) for e in self.equalities))

    @property
    def variables(self):
        out = []
        for atom in self.atoms:
            out.extend(atom.args)
        for u, v in self.equalities:
            out.extend((u, v))
        return list(dict.fromkeys(out))

    def deduplicated(self):
        return AndFormula(tuple(dict.fromkeys(self.atoms)), tuple(dict.fromkeys(self.equalities)))

    def __and__(self, other):
        return AndFormula(self.atoms + other.atoms, self.equalities + other.equalities)


@dataclass(frozen=True)
class Instance:
    kind: str
    variables: tuple
    formula: AndFormula = field(default_factory=AndFormula)
    structure: str = ""

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if self.kind not in KINDS:
            raise GadgetryError(f"unknown instance kind {self.kind!r}")
        if len(set(self.variables)) != len(self.variables):
            raise GadgetryError("repeated variable in instance")
        if self.kind != CSP and not self.variables:
            raise GadgetryError(f"{self.kind} instance needs a non-empty variable set")
        declared = set(self.variables)
        for v in self.formula.variables:
            if v not in declared:
                raise UnknownValueError(f"variable {v!r} used but not declared")

    def with_kind(self, kind):
        return Instance(kind, self.variables, self.formula, self.structure)

    def check_against(self, structure: Structure):
        """Raise unless every atom matches the structure's signature."""
        for atom in self.formula.atoms:
            rel = structure.relation(atom.symbol)
            if len(atom.args) != rel.arity:
                raise ArityMismatchError(
                    f"atom {atom} has {len(atom.args)} arguments, {atom.symbol} has arity {rel.arity}")


def satisfies(assignment: Mapping[str, str], instance: Instance, structure: Structure) -> bool:
    """True iff ``assignment`` satisfies every atom and equality of the instance."""
    for atom in instance.formula.atoms:
        if tuple(assignment[v] for v in atom.args) not in structure.relation(atom.symbol).tuples:
            return False
    return all(assignment[u] == assignment[v] for u, v in instance.formula.equalities)


def covers_relations(assignment: Mapping[str, str], instance: Instance, structure: Structure) -> bool:
    """Every tuple of every relation is the image of some atom (condensation side condition)."""
    images = {}
    for atom in instance.formula.atoms:
        images.setdefault(atom.symbol, set()).add(tuple(assignment[v] for v in atom.args))
    return all(rel.tuples <= images.get(rel.symbol, set()) for rel in structure.relations)


def is_surjective(assignment: Mapping[str, str], structure: Structure) -> bool:
    return set(assignment.values()) >= set(structure.universe)


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        # the lexicographically least name represents the class
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra


def equality_classes(instance: Instance):
    """Return the representative of each variable under the instance's equalities."""
    uf = _UnionFind(instance.variables)
    for u, v in instance.formula.equalities:
        uf.union(u, v)
    return {v: uf.find(v) for v in instance.variables}


def eliminate_equalities(instance: Instance) -> Instance:
    """Merge equated variables into their lexicographically least representative.

    Preserves satisfiability for CSP instances and existence of a surjective
    (or condensation) witness for SCSP/COND instances.
    """
    if not instance.formula.equalities:
        return instance
    rep = equality_classes(instance)
    variables = tuple(v for v in instance.variables if rep[v] == v)
    atoms = tuple(dict.fromkeys(
        Atom(a.symbol, tuple(rep[v] for v in a.args)) for a in instance.formula.atoms))
    return Instance(instance.kind, variables, AndFormula(atoms), instance.structure)


def expand_assignment(assignment: Mapping[str, str], representatives: Mapping[str, str]):
    """Lift an assignment of representatives back to all original variables."""
    return {v: assignment[r] for v, r in representatives.items()}
