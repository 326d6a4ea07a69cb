"""Built-in gadgets: the reflexive 4-cycle, no-rainbow colouring, and the
essentially-unary construction for two-element structures."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .core import Relation, Structure
from .encoding import (EQUALITY, Application, Encoding, InducedRelationSpec,
                       check_inner_symmetry, induced_template)
from .errors import GadgetryError, InvariantViolation
from .search import polymorphisms


@dataclass
class CaseStudy:
    name: str
    structure: Structure
    encoding: Encoding
    specs: dict  # relation symbol -> tuple of InducedRelationSpec
    inner_symmetries: list = field(default_factory=list)  # (rho, tau) dict pairs
    expected_stability: str = "STABLE"

    def template(self):
        return induced_template(self.structure, self.encoding, self.specs, name=f"{self.name}_template")

    def check(self):
        """Sanity-check that the pieces fit together."""
        self.encoding.check_against(self.structure)
        tmpl = self.template()
        for rho, tau in self.inner_symmetries:
            if not check_inner_symmetry(self.structure, self.encoding, rho, tau):
                raise InvariantViolation(f"{self.name}: ({rho}, {tau}) is not an inner symmetry")
        return tmpl


def _bracket(values):
    return "[" + "".join(values) + "]"


def _app(token):
    name, _, rest = token[:-1].partition("(")
    return Application(name, tuple(rest.split(",")) if rest else ())


def _spec(base, *apps, arity=2):
    return InducedRelationSpec(base, tuple(_app(a) for a in apps), arity)


# -- reflexive 4-cycle -------------------------------------------------------------

CYCLE_MAPS = ("013", "010", "323", "313", "112", "003", "113")


def reflexive_4cycle_structure():
    C = ("0", "1", "2", "3")
    missing = {("0", "2"), ("2", "0"), ("1", "3"), ("3", "1")}
    edges = [t for t in itertools.product(C, repeat=2) if t not in missing]
    return Structure.build("C4", C, {"E": edges})


def reflexive_4cycle_encoding():
    D = ("0", "1", "3")
    maps = {b: b for b in "0123"}
    for m in CYCLE_MAPS:
        maps[_bracket(m)] = list(m)
    return Encoding.build("F_C4", D, maps, structure="C4")


def builtin_reflexive_4cycle() -> CaseStudy:
    specs = {
        "S1": (_spec("E", "2()", "[013](u2)"),
               _spec("E", "[013](u1)", "[323](u2)")),
        "S2": (_spec("E", "2()", "[013](u1)"),
               _spec("E", "[112](u1)", "[013](u2)")),
        "S3": (_spec("E", "2()", "[013](u1)"),
               _spec("E", "2()", "[013](u2)"),
               _spec("E", "[003](u1)", "[323](u2)")),
        "S4": (_spec("E", "2()", "[013](u1)"),
               _spec("E", "2()", "[013](u2)"),
               _spec("E", "[112](u1)", "[010](u2)")),
    }
    swap = {"0": "0", "1": "3", "3": "1"}
    tau = {"0": "0", "1": "3", "2": "2", "3": "1"}
    return CaseStudy("4cycle", reflexive_4cycle_structure(), reflexive_4cycle_encoding(),
                     specs, [(swap, tau)])


# expected literal relations of the 4-cycle template
CYCLE_TEMPLATE = {
    "S1": {("0", "3"), ("1", "1"), ("3", "1"), ("3", "3")},
    "S2": {("1", "0"), ("1", "1"), ("3", "1"), ("3", "3")},
    "S3": {("1", "3"), ("3", "1"), ("3", "3")},
    "S4": {("1", "1"), ("1", "3"), ("3", "1")},
}


# -- no-rainbow 3-colouring ----------------------------------------------------------


def no_rainbow_structure():
    N = ("0", "1", "2")
    tuples = [t for t in itertools.product(N, repeat=3) if set(t) != set(N)]
    return Structure.build("N", N, {"R": tuples})


def no_rainbow_encoding():
    D = ("0", "1")
    maps = {b: b for b in "012"}
    for a, b in itertools.permutations("012", 2):
        maps[_bracket(a + b)] = [a, b]
    return Encoding.build("F_N", D, maps, structure="N")


NAE = {t for t in itertools.product("01", repeat=3) if len(set(t)) > 1}


def builtin_no_rainbow() -> CaseStudy:
    specs = {"NAE": (_spec("R", "[01](u1)", "[12](u2)", "[20](u3)", arity=3),)}
    identity = {"0": "0", "1": "1"}
    pairs = [(dict(identity), dict(zip("012", perm))) for perm in itertools.permutations("012")]
    return CaseStudy("norainbow", no_rainbow_structure(), no_rainbow_encoding(), specs, pairs)


# -- Boolean structures with essentially unary polymorphisms ---------------------------


def boolean_nae_structure():
    return Structure.build("BNAE", ("0", "1"), {"R": sorted(NAE)})


def check_essentially_unary(structure: Structure) -> bool:
    """Every polymorphism of arity <= 3 is essentially unary (two-element universes only)."""
    if len(structure.universe) != 2:
        raise GadgetryError("essential-unarity check is limited to two-element structures")
    for arity in (1, 2, 3):
        for op in polymorphisms(structure, arity):
            if not op.is_essentially_unary(structure.universe):
                return False
    return True


@dataclass
class EssentiallyUnaryPipelineResult:
    structure: Structure
    generators: tuple  # the n generating rows t^1..t^n over the coordinates
    coordinates: tuple  # names v1..vn, x, y1..ym
    P: tuple  # all tuples f(t^1, ..., t^n)
    P_prime: tuple  # those with prefix (b1*, ..., bn*)
    encoding: Encoding
    specs: dict
    star: Structure  # B expanded by the singleton relations
    G: str = "G(b1,...,bn) = {b1,...,bn}"

    @property
    def domain(self):
        return self.encoding.domain

    def map_for(self, coordinate):
        return self.encoding.map(f"f_{coordinate}")

    def template(self):
        return induced_template(self.structure, self.encoding, self.specs, name=f"{self.structure.name}_star_D")


def _generator_columns(universe):
    """Columns of (t^1, ..., t^n): constants, then a rainbow column, then the rest of B^n."""
    n = len(universe)
    consts = [tuple([b] * n) for b in universe]
    rainbow = tuple(universe)
    rest = [c for c in itertools.product(universe, repeat=n) if c not in consts and c != rainbow]
    return consts + [rainbow] + rest


def constant_symbol(b):
    return f"C{b}"


def construct_essentially_unary_encoding(structure: Structure) -> EssentiallyUnaryPipelineResult:
    """Arity-<=1 encoding realising the diagonal-cautious hardness argument for |B| = 2."""
    if len(structure.universe) != 2:
        raise GadgetryError("the construction is implemented for two-element structures only")
    if not check_essentially_unary(structure):
        raise GadgetryError(f"{structure.name} has a polymorphism that is not essentially unary")
    universe = structure.universe
    n = len(universe)
    cols = _generator_columns(universe)
    m = len(cols) - n - 1
    coords = tuple(f"v{i}" for i in range(1, n + 1)) + ("x",) + tuple(f"y{i}" for i in range(1, m + 1))
    rows = tuple(tuple(c[i] for c in cols) for i in range(n))
    P = set()
    for f in polymorphisms(structure, n):
        table = f.mapping
        P.add(tuple(table[c] for c in cols))
    P = tuple(sorted(P, key=lambda t: [structure.index[b] for b in t]))
    prefix = tuple(universe)
    P_prime = tuple(q for q in P if q[:n] == prefix)
    if not P_prime:
        raise InvariantViolation("no tuple of P has the constant prefix")

    unary = [op.as_unary_dict() for op in polymorphisms(structure, 1)]
    # (1) with G(b1..bn) = {b1..bn}
    for q in P:
        if not set(q) <= set(q[:n]):
            raise InvariantViolation(f"property (1) fails on {q}")
    # (2) every c in B appears at x after the constant prefix
    xs = {q[n] for q in P_prime}
    if xs != set(universe):
        raise InvariantViolation(f"property (2) fails: x takes only {sorted(xs)}")
    # (3) every prefix is the image of the constants under a unary polymorphism
    for q in P:
        if not any(all(u[b] == q[i] for i, b in enumerate(universe)) for u in unary):
            raise InvariantViolation(f"property (3) fails on {q}")

    D = tuple(str(i) for i in range(1, len(P_prime) + 1))
    maps = {}
    for j, z in enumerate(coords):
        maps[f"f_{z}"] = [q[j] for q in P_prime]
    encoding = Encoding.build(f"F_{structure.name}", D, maps, structure=structure.name)
    if set(encoding.map("f_x").mapping.values()) != set(universe):
        raise InvariantViolation("f_x is not surjective")

    specs = {}
    for rel in structure.relations:
        apps = tuple(Application("f_x", (f"u{i}",)) for i in range(1, rel.arity + 1))
        specs[rel.symbol] = (InducedRelationSpec(rel.symbol, apps, rel.arity),)
    for i, b in enumerate(universe, start=1):
        specs[constant_symbol(b)] = (InducedRelationSpec(
            EQUALITY, (Application("f_x", ("u1",)), Application(f"f_v{i}", ("u1",))), 1),)

    star_rels = list(structure.relations) + [
        Relation(constant_symbol(b), 1, frozenset({(b,)})) for b in universe]
    star = Structure(f"{structure.name}_star", universe, tuple(star_rels))
    return EssentiallyUnaryPipelineResult(structure, rows, coords, P, P_prime, encoding, specs, star)


def builtin_boolean_eu(structure: Structure | None = None) -> CaseStudy:
    structure = structure or boolean_nae_structure()
    result = construct_essentially_unary_encoding(structure)
    identity = {d: d for d in result.domain}
    return CaseStudy("boolean-eu", structure, result.encoding, result.specs,
                     [(identity, {b: b for b in structure.universe})])


BUILTINS = {
    "4cycle": builtin_reflexive_4cycle,
    "norainbow": builtin_no_rainbow,
    "boolean-eu": builtin_boolean_eu,
}


def essentially_unary_witness(structure: Structure):
    """First polymorphism of arity <= 3 that is not essentially unary, or None."""
    for arity in (1, 2, 3):
        for op in polymorphisms(structure, arity):
            if not op.is_essentially_unary(structure.universe):
                return op
    return None

