"""Sparsifying no-rainbow SCSP instances by linear algebra over GF(2).

A constraint R(a, b, c) becomes e_ab + e_bc + e_ac = 1, where e_vw stands for
"v and w get the same value". Two equal entries give sum 1, three give
3 = 1 and a rainbow triple gives 0, so the equation holds exactly when the
atom does. e_vv is identically 1 and is folded into the constant.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import AndFormula, Instance, Structure
from .errors import GadgetryError


@dataclass(frozen=True)
class Gf2Equation:
    pairs: frozenset  # of frozenset({v, w}), v != w, each with coefficient 1
    constant: int
    origin: int

    def holds(self, assignment) -> bool:
        total = sum(1 for p in self.pairs if len({assignment[v] for v in p}) == 1)
        return total % 2 == self.constant

    @property
    def trivial(self):
        return not self.pairs and self.constant == 0


def _check(instance: Instance, structure: Structure | None, symbol: str):
    if instance.formula.equalities:
        raise GadgetryError("kernelization needs an equality-free instance; eliminate equalities first")
    if structure is not None:
        rel = structure.relation(symbol)
        if rel.arity != 3:
            raise GadgetryError(f"{symbol} must be ternary")
    for atom in instance.formula.atoms:
        if atom.symbol != symbol or len(atom.args) != 3:
            raise GadgetryError(f"atom {atom} is not a ternary {symbol}-atom")


def encode(instance: Instance, structure: Structure | None = None, symbol="R") -> list:
    """One equation per atom, in atom order."""
    _check(instance, structure, symbol)
    out = []
    for k, atom in enumerate(instance.formula.atoms):
        a, b, c = atom.args
        pairs = set()
        constant = 1
        for v, w in ((a, b), (b, c), (a, c)):
            if v == w:
                constant ^= 1
            else:
                pairs ^= {frozenset((v, w))}
        out.append(Gf2Equation(frozenset(pairs), constant, k))
    return out


def _row(eq: Gf2Equation, index) -> int:
    bits = eq.constant
    for p in eq.pairs:
        bits |= 1 << index[p]
    return bits


def pair_index(variables):
    """Bit positions 1.. for unordered pairs; bit 0 carries the constant."""
    return {frozenset(p): i for i, p in enumerate(itertools.combinations(variables, 2), start=1)}


def independent_rows(rows):
    """Indices of the rows kept by a greedy XOR basis (first independent rows win)."""
    basis = {}  # leading bit -> reduced row
    kept = []
    for k, row in enumerate(rows):
        r = row
        while r:
            top = r.bit_length() - 1
            if top not in basis:
                basis[top] = r
                kept.append(k)
                break
            r ^= basis[top]
    return kept


@dataclass
class KernelStats:
    n: int
    m: int
    rank: int
    kernel_size: int


def kernelize(instance: Instance, structure: Structure | None = None, symbol="R"):
    """Keep the atoms whose augmented equations form a row basis.

    Returns ``(kernel, stats)``. The kernel has the same variables and at
    most n(n-1)/2 + 1 atoms.
    """
    equations = encode(instance, structure, symbol)
    index = pair_index(instance.variables)
    kept = independent_rows([_row(e, index) for e in equations])
    atoms = tuple(instance.formula.atoms[k] for k in kept)
    kernel = Instance(instance.kind, instance.variables, AndFormula(atoms), instance.structure)
    return kernel, KernelStats(len(instance.variables), len(equations), len(kept), len(atoms))


def kernel_bound(n: int) -> int:
    return n * (n - 1) // 2 + 1
