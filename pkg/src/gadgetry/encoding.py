"""Encodings (families of maps D^k -> B) and what they induce over a structure.

An *application* pairs a tuple of variables with an encoding map; the set of
all applications over a variable set is the variable set of every reduced
instance. A map ``g: V -> D`` induces the coded assignment ``t[g]`` sending
each application to the map's value on ``g``'s images.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .core import SCSP, AndFormula, Atom, Instance, Structure, Relation
from .errors import ArityMismatchError, GadgetryError, UnknownValueError
from .search import automorphisms

EQUALITY = "="


@dataclass(frozen=True)
class EncodingMap:
    name: str
    arity: int
    table: tuple  # ((d1, ..., dk), b) pairs, domain tuples in lexicographic order

    @property
    def mapping(self):
        return dict(self.table)

    def __call__(self, *args):
        return self.mapping[tuple(args)]

    def is_constant(self):
        return len({b for _, b in self.table}) == 1

    def constant_value(self):
        values = {b for _, b in self.table}
        return next(iter(values)) if len(values) == 1 else None


@dataclass(frozen=True)
class Encoding:
    name: str
    domain: tuple
    maps: tuple
    structure: str = ""

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "maps", tuple(self.maps))
        if len(set(self.domain)) != len(self.domain):
            raise GadgetryError(f"encoding {self.name}: repeated domain value")
        names = [f.name for f in self.maps]
        if len(set(names)) != len(names):
            raise GadgetryError(f"encoding {self.name}: duplicate map name")
        dom = set(self.domain)
        seen = {}
        for f in self.maps:
            keys = [args for args, _ in f.table]
            expected = list(itertools.product(self.domain, repeat=f.arity))
            if sorted(keys) != sorted(expected) or len(set(keys)) != len(keys):
                bad = [a for a in keys if len(a) != f.arity or not set(a) <= dom]
                if bad:
                    raise UnknownValueError(f"map {f.name}: argument {bad[0]} outside D^{f.arity}")
                raise GadgetryError(f"map {f.name} is not total on D^{f.arity}")
            key = (f.arity, tuple(sorted(f.table)))
            if key in seen:
                raise GadgetryError(f"maps {seen[key]} and {f.name} coincide")
            seen[key] = f.name

    @classmethod
    def build(cls, name, domain, maps: Mapping[str, object], structure=""):
        """Build from ``{name: table}`` where a table is either a mapping
        from argument tuples to values, a constant (arity 0), or a sequence
        of values for a unary map listed in domain order."""
        domain = tuple(str(d) for d in domain)
        out = []
        for fname, spec in maps.items():
            if isinstance(spec, Mapping):
                table = {tuple(str(x) for x in k): str(v) for k, v in spec.items()}
                arity = len(next(iter(table))) if table else 0
            elif isinstance(spec, (str, int)):
                table, arity = {(): str(spec)}, 0
            else:
                spec = [str(v) for v in spec]
                if len(spec) != len(domain):
                    raise ArityMismatchError(f"map {fname}: expected {len(domain)} values")
                table, arity = {(d,): b for d, b in zip(domain, spec)}, 1
            out.append(EncodingMap(fname, arity, _ordered_table(table, domain, arity)))
        return cls(name, domain, tuple(out), structure)

    def map(self, name) -> EncodingMap:
        for f in self.maps:
            if f.name == name:
                return f
        raise UnknownValueError(f"encoding {self.name} has no map {name!r}")

    @property
    def max_arity(self):
        return max((f.arity for f in self.maps), default=0)

    def check_against(self, structure: Structure):
        universe = set(structure.universe)
        for f in self.maps:
            for _, b in f.table:
                if b not in universe:
                    raise UnknownValueError(f"map {f.name} takes value {b!r} outside {structure.name}")


def _ordered_table(table, domain, arity):
    return tuple((args, table[args]) for args in itertools.product(domain, repeat=arity))


@dataclass(frozen=True, order=True)
class Application:
    map: str
    variables: tuple

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))

    @property
    def name(self):
        return f"{self.map}({','.join(self.variables)})"

    def __str__(self):
        return self.name

    def rename(self, substitution: Mapping[str, str]):
        return Application(self.map, tuple(substitution[v] for v in self.variables))


def parse_application(token: str) -> Application:
    """Inverse of :attr:`Application.name`."""
    if not token.endswith(")") or "(" not in token:
        raise GadgetryError(f"not an application: {token!r}")
    head, _, rest = token[:-1].partition("(")
    if not head:
        raise GadgetryError(f"not an application: {token!r}")
    args = tuple(rest.split(",")) if rest else ()
    if any(not a for a in args):
        raise GadgetryError(f"empty variable in application {token!r}")
    return Application(head, args)


def variable_names(size: int):
    return tuple(f"v{i}" for i in range(1, size + 1))


def build_applications(V: Sequence[str], encoding: Encoding) -> list:
    """All (V, F)-applications, ordered by map name then variable tuple."""
    if not V:
        raise GadgetryError("variable set must be non-empty")
    out = []
    for f in sorted(encoding.maps, key=lambda f: f.name):
        for vs in itertools.product(V, repeat=f.arity):
            out.append(Application(f.name, vs))
    return out


def evaluate(app: Application, g: Mapping[str, str], encoding: Encoding):
    return encoding.map(app.map).mapping[tuple(g[v] for v in app.variables)]


def coded_assignment(g: Mapping[str, str], encoding: Encoding, applications=None) -> dict:
    """t[g]: application name -> value in B."""
    if applications is None:
        applications = build_applications(tuple(g), encoding)
    tables = {f.name: f.mapping for f in encoding.maps}
    return {a.name: tables[a.map][tuple(g[v] for v in a.variables)] for a in applications}


def assignments(V: Sequence[str], domain: Sequence[str]):
    """G_{V,D} in lexicographic order."""
    for values in itertools.product(domain, repeat=len(V)):
        yield dict(zip(V, values))


def coded_rows(V, encoding: Encoding, applications=None):
    """T_V as a list of value tuples aligned with ``applications``."""
    if applications is None:
        applications = build_applications(V, encoding)
    tables = {f.name: f.mapping for f in encoding.maps}
    pos = {v: i for i, v in enumerate(V)}
    plan = [(tables[a.map], tuple(pos[v] for v in a.variables)) for a in applications]
    rows = []
    for values in itertools.product(encoding.domain, repeat=len(V)):
        rows.append(tuple(tab[tuple(values[i] for i in idx)] for tab, idx in plan))
    return rows


# -- closure formula --------------------------------------------------------


def _pattern(apps):
    """Shape of an application tuple up to renaming of variables."""
    local = {}
    shape = []
    for a in apps:
        shape.append((a.map, tuple(local.setdefault(v, len(local)) for v in a.variables)))
    return tuple(shape), len(local)


class _Projector:
    """Projection of T_V onto application tuples, memoised by shape."""

    def __init__(self, encoding: Encoding):
        self.tables = {f.name: f.mapping for f in encoding.maps}
        self.domain = encoding.domain
        self.cache = {}

    def projection(self, apps):
        shape, width = _pattern(apps)
        hit = self.cache.get(shape)
        if hit is None:
            plan = [(self.tables[m], idx) for m, idx in shape]
            hit = frozenset(
                tuple(tab[tuple(g[i] for i in idx)] for tab, idx in plan)
                for g in itertools.product(self.domain, repeat=width))
            self.cache[shape] = hit
        return hit


def closure_formula(structure: Structure, V: Sequence[str], encoding: Encoding,
                    equalities=True) -> Instance:
    """An AND-formula over the applications whose solutions are the closure of T_V.

    Atom ``R(a1, ..., ak)`` is included iff every coded assignment maps the
    application tuple into R; an equality ``a = b`` iff every coded
    assignment agrees on the two applications.
    """
    apps = build_applications(V, encoding)
    proj = _Projector(encoding)
    atoms = []
    for rel in structure.relations:
        for combo in itertools.product(apps, repeat=rel.arity):
            if proj.projection(combo) <= rel.tuples:
                atoms.append(Atom(rel.symbol, tuple(a.name for a in combo)))
    eqs = []
    if equalities:
        for i, a in enumerate(apps):
            for b in apps[i + 1:]:
                if all(x == y for x, y in proj.projection((a, b))):
                    eqs.append((a.name, b.name))
    return Instance(SCSP, tuple(a.name for a in apps), AndFormula(tuple(atoms), tuple(eqs)),
                    structure.name)


def closure_of_maps(structure: Structure, index: Sequence[str], maps, equalities=True,
                    kind=SCSP) -> Instance:
    """Closure formula for an arbitrary set of maps ``index -> B``.

    ``maps`` holds dicts keyed by ``index`` or tuples aligned with it. This
    materialises every map, so it only suits small sets; it is the generic
    counterpart of :func:`closure_formula`.
    """
    index = tuple(index)
    rows = [tuple(m[i] for i in index) if isinstance(m, Mapping) else tuple(m) for m in maps]
    cols = list(zip(*rows)) if rows else [()] * len(index)
    atoms = []
    for rel in structure.relations:
        for combo in itertools.product(range(len(index)), repeat=rel.arity):
            if all(tuple(r[i] for i in combo) in rel.tuples for r in rows):
                atoms.append(Atom(rel.symbol, tuple(index[i] for i in combo)))
    eqs = []
    if equalities:
        for i in range(len(index)):
            for j in range(i + 1, len(index)):
                if cols[i] == cols[j]:
                    eqs.append((index[i], index[j]))
    return Instance(kind, index, AndFormula(tuple(atoms), tuple(eqs)), structure.name)


# -- induced relations -------------------------------------------------------


@dataclass(frozen=True)
class InducedRelationSpec:
    """Definition (Q, (a1, ..., ar)) of an induced relation of arity s.

    Applications range over the variables u1, ..., us.
    """
    base: str
    applications: tuple
    arity: int

    def __post_init__(self):
        object.__setattr__(self, "applications", tuple(self.applications))
        allowed = set(spec_variables(self.arity))
        for a in self.applications:
            if not set(a.variables) <= allowed:
                raise UnknownValueError(f"application {a} uses variables outside u1..u{self.arity}")
        if self.base == EQUALITY and len(self.applications) != 2:
            raise ArityMismatchError("equality-based specs take exactly two applications")

    def validate(self, structure: Structure, encoding: Encoding):
        if self.base != EQUALITY:
            rel = structure.relation(self.base)
            if rel.arity != len(self.applications):
                raise ArityMismatchError(
                    f"spec over {self.base} lists {len(self.applications)} applications, arity is {rel.arity}")
        for a in self.applications:
            if encoding.map(a.map).arity != len(a.variables):
                raise ArityMismatchError(f"application {a} does not match arity of {a.map}")

    def __str__(self):
        return f"{self.base} " + " ".join(a.name for a in self.applications)


def spec_variables(s):
    return tuple(f"u{i}" for i in range(1, s + 1))


def induced_relation(structure: Structure, encoding: Encoding, spec: InducedRelationSpec) -> frozenset:
    """Tuples (g(u1), ..., g(us)) whose coded values land in the base relation."""
    spec.validate(structure, encoding)
    tables = {f.name: f.mapping for f in encoding.maps}
    us = spec_variables(spec.arity)
    pos = {u: i for i, u in enumerate(us)}
    plan = [(tables[a.map], tuple(pos[v] for v in a.variables)) for a in spec.applications]
    if spec.base == EQUALITY:
        def accept(vals):
            return vals[0] == vals[1]
    else:
        tuples = structure.relation(spec.base).tuples

        def accept(vals):
            return vals in tuples
    out = set()
    for g in itertools.product(encoding.domain, repeat=spec.arity):
        vals = tuple(tab[tuple(g[i] for i in idx)] for tab, idx in plan)
        if accept(vals):
            out.add(g)
    return frozenset(out)


@dataclass(frozen=True)
class InducedTemplate:
    """A structure over D whose relations are intersections of induced relations."""
    name: str
    structure: Structure
    specs: dict = field(hash=False)
    base: str = ""
    encoding: str = ""

    def specs_for(self, symbol):
        try:
            return self.specs[symbol]
        except KeyError:
            raise UnknownValueError(f"template {self.name} has no spec list for {symbol!r}") from None


def induced_template(structure: Structure, encoding: Encoding, named_specs, name="D") -> InducedTemplate:
    """Compute each named relation as the intersection of its specs' induced relations."""
    rels = []
    kept = {}
    for symbol, specs in (named_specs.items() if isinstance(named_specs, Mapping) else named_specs):
        specs = tuple(specs)
        if not specs:
            raise GadgetryError(f"relation {symbol} has an empty spec list")
        arities = {s.arity for s in specs}
        if len(arities) != 1:
            raise ArityMismatchError(f"specs for {symbol} disagree on arity: {sorted(arities)}")
        tuples = None
        for s in specs:
            got = induced_relation(structure, encoding, s)
            tuples = got if tuples is None else tuples & got
        rels.append(Relation(symbol, specs[0].arity, frozenset(tuples)))
        kept[symbol] = specs
    return InducedTemplate(name, Structure(name, encoding.domain, tuple(rels)), kept,
                           structure.name, encoding.name)


# -- constants and inner symmetries ----------------------------------------------


def contains_all_constants(encoding: Encoding, structure: Structure) -> bool:
    """Each value of B is the constant value of some map (of any arity)."""
    have = {f.constant_value() for f in encoding.maps}
    return set(structure.universe) <= have


def has_constant_symbols(encoding: Encoding, structure: Structure) -> bool:
    """Arity-0 maps alone cover B."""
    have = {f.table[0][1] for f in encoding.maps if f.arity == 0}
    return set(structure.universe) <= have


def transform_map(f: EncodingMap, rho: Mapping[str, str], tau: Mapping[str, str], domain) -> tuple:
    """Table of tau o f o (rho, ..., rho)."""
    m = f.mapping
    return tuple((args, tau[m[tuple(rho[d] for d in args)]])
                 for args in itertools.product(domain, repeat=f.arity))


@dataclass
class InnerSymmetryReport:
    ok: bool
    permutation: dict = field(default_factory=dict)
    reason: str = ""

    def __bool__(self):
        return self.ok

    def transpositions(self):
        """Pairs of distinct maps swapped by the action (2-cycles only)."""
        out = []
        for a, b in self.permutation.items():
            if a < b and self.permutation.get(b) == a:
                out.append((a, b))
        return out

    def cycles(self):
        seen = set()
        out = []
        for start in self.permutation:
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            nxt = self.permutation[start]
            while nxt != start:
                cyc.append(nxt)
                seen.add(nxt)
                nxt = self.permutation[nxt]
            if len(cyc) > 1:
                out.append(tuple(cyc))
        return out


def check_inner_symmetry(structure: Structure, encoding: Encoding, rho: Mapping[str, str],
                         tau: Mapping[str, str]) -> InnerSymmetryReport:
    """Is (rho, tau) an inner symmetry of the encoding over the structure?

    The report maps every map name to the name of its image under the action.
    """
    if sorted(rho) != sorted(encoding.domain) or sorted(rho.values()) != sorted(encoding.domain):
        return InnerSymmetryReport(False, reason="rho is not a bijection on D")
    if sorted(tau) != sorted(structure.universe) or sorted(tau.values()) != sorted(structure.universe):
        return InnerSymmetryReport(False, reason="tau is not a bijection on B")
    auts = {tuple(a.as_unary_dict()[b] for b in structure.universe) for a in automorphisms(structure)}
    if tuple(tau[b] for b in structure.universe) not in auts:
        return InnerSymmetryReport(False, reason="tau is not an automorphism")
    by_table = {(f.arity, f.table): f.name for f in encoding.maps}
    perm = {}
    for f in encoding.maps:
        image = (f.arity, transform_map(f, rho, tau, encoding.domain))
        if image not in by_table:
            return InnerSymmetryReport(False, perm, f"image of {f.name} is not in the encoding")
        perm[f.name] = by_table[image]
    return InnerSymmetryReport(True, perm)


def parse_permutation(text: str, universe: Sequence[str]) -> dict:
    """Read ``a:b,c:d`` (unlisted points fixed), cycles like ``(1 3)(0 2)``,
    ``identity``, or a comma list of images in universe order."""
    universe = list(universe)
    text = text.strip()
    if text in ("", "identity", "id"):
        return {b: b for b in universe}
    if text.startswith("("):
        out = {b: b for b in universe}
        body = text.replace(")", " ) ").replace("(", " ( ").split()
        cycle = None
        for tok in body:
            if tok == "(":
                if cycle is not None:
                    raise GadgetryError(f"nested cycle in {text!r}")
                cycle = []
            elif tok == ")":
                if cycle is None:
                    raise GadgetryError(f"unbalanced ')' in {text!r}")
                for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                    out[a] = b
                cycle = None
            else:
                if cycle is None:
                    raise GadgetryError(f"value outside a cycle in {text!r}")
                if tok not in out:
                    raise UnknownValueError(f"cycle mentions unknown value {tok!r}")
                cycle.append(tok)
        if cycle is not None:
            raise GadgetryError(f"unclosed cycle in {text!r}")
        if sorted(out.values()) != sorted(universe):
            raise GadgetryError(f"{text!r} is not a permutation")
        return out
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if all(":" in p for p in parts):
        out = {b: b for b in universe}
        for p in parts:
            a, _, b = p.partition(":")
            if a not in out or b not in out:
                raise UnknownValueError(f"permutation entry {p!r} mentions an unknown value")
            out[a] = b
    else:
        if len(parts) != len(universe):
            raise ArityMismatchError(f"expected {len(universe)} images, got {len(parts)}")
        out = dict(zip(universe, parts))
    if sorted(out.values()) != sorted(universe):
        raise GadgetryError(f"{text!r} is not a permutation")
    return out
