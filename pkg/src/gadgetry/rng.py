"""Seeded instance generation that other implementations can reproduce exactly.

The generator is the 64-bit linear congruential generator

    state <- (state * 6364136223846793005 + 1442695040888963407) mod 2**64

seeded with ``state = seed mod 2**64``. ``below(n)`` advances the state once
and returns ``(state >> 33) % n``. Every random choice below is one call to
``below`` in the order written, so the instance stream is fully determined by
the seed.
"""
from __future__ import annotations

from .core import CSP, SCSP, AndFormula, Atom, Instance, Structure

MULTIPLIER = 6364136223846793005
INCREMENT = 1442695040888963407
MASK = (1 << 64) - 1


class Lcg64:
    def __init__(self, seed: int):
        self.state = seed & MASK

    def next(self) -> int:
        self.state = (self.state * MULTIPLIER + INCREMENT) & MASK
        return self.state

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("bound must be positive")
        return (self.next() >> 33) % n

    def between(self, lo: int, hi: int) -> int:
        """Uniform-ish integer in [lo, hi]."""
        return lo + self.below(hi - lo + 1)


def random_instance(rng: Lcg64, structure: Structure, max_vars: int, max_atoms: int,
                    kind=CSP, min_vars=1, prefix="x") -> Instance:
    """Variables x1..xn with n in [min_vars, max_vars]; m in [0, max_atoms] atoms.

    Each atom draws a relation in signature order, then its arguments.
    Repeated arguments and repeated atoms are allowed (atoms are de-duplicated
    afterwards, as the text format would).
    """
    n = rng.between(min_vars, max_vars)
    m = rng.between(0, max_atoms)
    names = tuple(f"{prefix}{i}" for i in range(1, n + 1))
    rels = structure.relations
    atoms = []
    for _ in range(m):
        rel = rels[rng.below(len(rels))]
        atoms.append(Atom(rel.symbol, tuple(names[rng.below(n)] for _ in range(rel.arity))))
    return Instance(kind, names, AndFormula(tuple(atoms)).deduplicated(), structure.name)


def random_kernel_instance(rng: Lcg64, structure: Structure, n=5, max_atoms=40, symbol="R") -> Instance:
    """SCSP instance on exactly n variables with up to ``max_atoms`` distinct atoms."""
    target = rng.between(1, max_atoms)
    names = tuple(f"x{i}" for i in range(1, n + 1))
    arity = structure.relation(symbol).arity
    atoms = []
    seen = set()
    # bounded number of draws keeps generation total even when target is large
    for _ in range(8 * target):
        if len(atoms) >= target:
            break
        atom = Atom(symbol, tuple(names[rng.below(n)] for _ in range(arity)))
        if atom not in seen:
            seen.add(atom)
            atoms.append(atom)
    return Instance(SCSP, names, AndFormula(tuple(atoms)), structure.name)


def instance_stream(seed: int, count: int, structure: Structure, max_vars: int, max_atoms: int,
                    kind=CSP):
    rng = Lcg64(seed)
    for _ in range(count):
        yield random_instance(rng, structure, max_vars, max_atoms, kind)
