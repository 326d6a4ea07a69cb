"""Backtracking search over finite structures.

The engine compiles an instance to integer domains held as bitmasks and
explores variables in a fixed order, values in universe order, so the
solutions come out lexicographically sorted. Constraint propagation is
generalized arc consistency (or single-step forward checking).

Surjectivity and the condensation side condition are "coverage"
requirements: some variable (resp. some atom) must take each value (resp.
each relation tuple). A node with uncovered requirements is only expanded
if a completion meeting all of them exists; that existence test branches on
which candidate provides each missing value, which is exact and avoids
wandering through huge non-surjective subtrees.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from .core import (COND, CSP, SCSP, AndFormula, Atom, Instance, Structure,
                   eliminate_equalities)
from .errors import GadgetryError

MAX_POLYMORPHISM_ARITY = 3


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for :func:`enumerate_solutions`.

    ``variable_order`` is ``"lexicographic"`` (by name), ``"declared"``
    (instance order) or an explicit sequence of variable names.
    """
    variable_order: str | Sequence[str] = "lexicographic"
    surjective: bool = False
    cap: int | None = None
    propagation: str = "gac"


class SolutionList(list):
    """A list of assignments that remembers whether the cap cut it short."""
    truncated = False


def _bits(mask):
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


class CompiledProblem:
    """Integer form of an instance, ready for search.

    Build with :meth:`from_instance`. ``requirements`` is a list of
    ``(values, candidate_scopes)`` pairs: a solution must fix every variable
    of at least one candidate scope to ``values``.
    """

    def __init__(self, num_vars, num_values, constraints, order, requirements=(),
                 propagation="gac", initial_domains=None):
        self.n = num_vars
        self.k = num_values
        self.full = (1 << num_values) - 1
        self.order = list(order)
        self.propagation = propagation
        self.bits = [_bits(m) for m in range(1 << num_values)] if num_values <= 12 else None
        self.dom0 = list(initial_domains) if initial_domains is not None else [self.full] * num_vars
        self.unsat = False
        self.constraints = []
        self.var_cons = [[] for _ in range(num_vars)]
        self._add_constraints(constraints)
        self.requirements = []
        for values, cands in requirements:
            masks = tuple(1 << v for v in values)
            self.requirements.append((masks, [tuple(s) for s in cands]))

    @classmethod
    def from_instance(cls, instance: Instance, structure: Structure, config: SearchConfig):
        names = list(instance.variables)
        vindex = {v: i for i, v in enumerate(names)}
        bindex = structure.index
        raw = []
        encoded = {}
        for atom in instance.formula.atoms:
            rel = structure.relation(atom.symbol)
            if len(atom.args) != rel.arity:
                raise GadgetryError(f"atom {atom} does not match arity {rel.arity}")
            tuples = encoded.get(rel.symbol)
            if tuples is None:
                tuples = encoded[rel.symbol] = tuple(tuple(bindex[b] for b in t) for t in rel.tuples)
            raw.append((tuple(vindex[v] for v in atom.args), tuples))
        diag = tuple((b, b) for b in range(len(structure.universe)))
        for u, v in instance.formula.equalities:
            raw.append(((vindex[u], vindex[v]), diag))

        order = _resolve_order(config.variable_order, names)
        requirements = []
        if config.surjective:
            for b in range(len(structure.universe)):
                requirements.append(((b,), [(vindex[v],) for v in order]))
        if instance.kind == COND and config.surjective:
            pos = {vindex[v]: r for r, v in enumerate(order)}
            for rel in structure.relations:
                scopes = [tuple(vindex[v] for v in a.args) for a in instance.formula.atoms
                          if a.symbol == rel.symbol]
                scopes = list(dict.fromkeys(scopes))
                scopes.sort(key=lambda s: [pos[x] for x in s])
                for t in sorted(tuple(bindex[b] for b in t) for t in rel.tuples):
                    good = [s for s in scopes if _consistent(s, t)]
                    requirements.append((t, good))
        return cls(len(names), len(structure.universe), raw, [vindex[v] for v in order],
                   requirements, config.propagation)

    # -- compilation -------------------------------------------------

    def _add_constraints(self, raw):
        merged = {}
        shapes = {}
        for scope, tuples in raw:
            distinct = tuple(dict.fromkeys(scope))
            pos = tuple(distinct.index(x) for x in scope)
            # canonical scope order so permuted copies intersect
            perm = tuple(sorted(range(len(distinct)), key=lambda i: distinct[i]))
            key = tuple(distinct[i] for i in perm)
            shape = (id(tuples), pos, perm)
            allowed = shapes.get(shape)
            if allowed is None:
                allowed = shapes[shape] = frozenset(_collapse(tuples, pos, len(distinct), perm))
            if key in merged:
                merged[key] &= allowed
            else:
                merged[key] = allowed
        for scope, allowed in merged.items():
            arity = len(scope)
            if not allowed:
                self.unsat = True
                continue
            if arity == 0:
                continue
            if len(allowed) == self.k ** arity:
                continue
            if arity == 1:
                mask = 0
                for (b,) in allowed:
                    mask |= 1 << b
                self.dom0[scope[0]] &= mask
                continue
            cid = len(self.constraints)
            if arity == 2:
                fwd = [0] * self.k
                bwd = [0] * self.k
                for a, b in allowed:
                    fwd[a] |= 1 << b
                    bwd[b] |= 1 << a
                self.constraints.append((scope, 2, (fwd, bwd)))
            else:
                masks = [tuple(1 << b for b in t) for t in sorted(allowed)]
                self.constraints.append((scope, arity, masks))
            for x in scope:
                self.var_cons[x].append(cid)

    # -- propagation -------------------------------------------------

    def _revise(self, cid, dom):
        scope, arity, data = self.constraints[cid]
        if arity == 2:
            x, y = scope
            fwd, bwd = data
            dx, dy = dom[x], dom[y]
            sy = 0
            for a in self._iter(dx):
                sy |= fwd[a]
            ny = dy & sy
            sx = 0
            for b in self._iter(ny):
                sx |= bwd[b]
            nx = dx & sx
            if not nx or not ny:
                return None
            changed = []
            if nx != dx:
                dom[x] = nx
                changed.append(x)
            if ny != dy:
                dom[y] = ny
                changed.append(y)
            return changed
        doms = [dom[x] for x in scope]
        sup = [0] * arity
        if arity == 3:
            d0, d1, d2 = doms
            s0 = s1 = s2 = 0
            for m0, m1, m2 in data:
                if d0 & m0 and d1 & m1 and d2 & m2:
                    s0 |= m0
                    s1 |= m1
                    s2 |= m2
            sup = [s0, s1, s2]
        else:
            for masks in data:
                if all(d & m for d, m in zip(doms, masks)):
                    for i, m in enumerate(masks):
                        sup[i] |= m
        changed = []
        for x, d, s in zip(scope, doms, sup):
            nd = d & s
            if not nd:
                return None
            if nd != d:
                dom[x] = nd
                changed.append(x)
        return changed

    def _iter(self, mask):
        if self.bits is not None:
            return self.bits[mask]
        return _bits(mask)

    def propagate(self, dom, changed_vars):
        """Prune ``dom`` in place; False on a wipe-out."""
        if self.propagation == "forward":
            for x in changed_vars:
                for cid in self.var_cons[x]:
                    if self._revise(cid, dom) is None:
                        return False
            return True
        pending = []
        queued = set()
        for x in changed_vars:
            for cid in self.var_cons[x]:
                if cid not in queued:
                    queued.add(cid)
                    pending.append(cid)
        while pending:
            cid = pending.pop()
            queued.discard(cid)
            changed = self._revise(cid, dom)
            if changed is None:
                return False
            for x in changed:
                for c2 in self.var_cons[x]:
                    if c2 != cid and c2 not in queued:
                        queued.add(c2)
                        pending.append(c2)
        return True

    def root(self):
        """Initial propagated domains, or None if unsatisfiable outright."""
        if self.unsat:
            return None
        dom = list(self.dom0)
        if not all(dom):
            return None
        if self.propagation == "gac":
            ok = self.propagate(dom, range(self.n))
        else:
            ok = all(self._revise(c, dom) is not None for c in range(len(self.constraints)))
        return dom if ok else None

    def _assign(self, dom, x, mask):
        new = list(dom)
        new[x] = mask
        if self.propagate(new, (x,)):
            return new
        return None

    # -- coverage ----------------------------------------------------

    def _open_requirements(self, dom):
        """Uncovered requirements with their still-possible candidates, or None if one is dead."""
        out = []
        for masks, cands in self.requirements:
            possible = []
            covered = False
            for s in cands:
                fixed = True
                ok = True
                for x, m in zip(s, masks):
                    d = dom[x]
                    if not d & m:
                        ok = False
                        break
                    if d != m:
                        fixed = False
                if not ok:
                    continue
                if fixed:
                    covered = True
                    break
                possible.append(s)
            if covered:
                continue
            if not possible:
                return None
            out.append((masks, possible))
        return out

    def feasible(self, dom):
        """Does some complete solution extending ``dom`` meet every requirement?"""
        return self._witness(dom) is not None

    def _witness(self, dom):
        if not self.requirements:
            return self._complete(dom)
        open_reqs = self._open_requirements(dom)
        if open_reqs is None:
            return None
        if not open_reqs:
            return self._complete(dom)
        unfixed = sum(1 for d in dom if d & (d - 1))
        # each unfixed variable can settle at most one distinct missing value
        single = {r[0] for r in open_reqs if len(r[0]) == 1}
        if len(single) > unfixed:
            return None
        masks, cands = min(open_reqs, key=lambda r: len(r[1]))
        dom = list(dom)
        for s in cands:
            if any(not dom[x] & m for x, m in zip(s, masks)):
                continue
            new = list(dom)
            for x, m in zip(s, masks):
                new[x] = m
            if self.propagate(new, s):
                found = self._witness(new)
                if found is not None:
                    return found
            if len(s) == 1:
                # no solution puts this value on this variable at all
                dom[s[0]] &= ~masks[0]
                if not dom[s[0]] or not self.propagate(dom, s):
                    return None
        return None

    def _complete(self, dom):
        """Any full extension of ``dom`` (ignoring requirements)."""
        for x in self.order:
            d = dom[x]
            if d & (d - 1):
                for b in self._iter(d):
                    new = self._assign(dom, x, 1 << b)
                    if new is not None:
                        found = self._complete(new)
                        if found is not None:
                            return found
                return None
        return dom if self._check_full(dom) else None

    def _check_full(self, dom):
        for scope, arity, data in self.constraints:
            if arity == 2:
                x, y = scope
                if not data[0][dom[x].bit_length() - 1] & dom[y]:
                    return False
            else:
                if not any(all(dom[x] == m for x, m in zip(scope, masks)) for masks in data):
                    return False
        return True

    # -- enumeration -------------------------------------------------

    def solutions(self) -> Iterator[tuple]:
        """Yield solutions as value-index tuples, in lexicographic order along ``order``."""
        dom = self.root()
        if dom is None:
            return
        yield from self._dfs(dom, 0)

    def _dfs(self, dom, depth):
        if self.requirements:
            open_reqs = self._open_requirements(dom)
            if open_reqs is None:
                return
            if open_reqs and not self.feasible(dom):
                return
        order = self.order
        while depth < len(order):
            d = dom[order[depth]]
            if d & (d - 1):
                break
            depth += 1
        if depth == len(order):
            if self._check_full(dom) and (not self.requirements or self._open_requirements(dom) == []):
                yield tuple(d.bit_length() - 1 for d in dom)
            return
        x = order[depth]
        for b in self._iter(dom[x]):
            new = self._assign(dom, x, 1 << b)
            if new is not None:
                yield from self._dfs(new, depth + 1)


def _collapse(tuples, pos, width, perm):
    """Tuples of a relation seen through a scope with repeated variables."""
    for t in tuples:
        vals = [None] * width
        ok = True
        for p, b in zip(pos, t):
            if vals[p] is None:
                vals[p] = b
            elif vals[p] != b:
                ok = False
                break
        if ok:
            yield tuple(vals[i] for i in perm)


def _consistent(scope, values):
    seen = {}
    for x, b in zip(scope, values):
        if seen.setdefault(x, b) != b:
            return False
    return True


def _resolve_order(order, names):
    if order == "lexicographic":
        return sorted(names)
    if order == "declared":
        return list(names)
    order = list(order)
    if sorted(order) != sorted(names):
        raise GadgetryError("explicit variable order must list every variable exactly once")
    return order


def iter_solutions(instance: Instance, structure: Structure, config: SearchConfig | None = None):
    """Yield satisfying assignments (dicts) in canonical order."""
    config = config or SearchConfig()
    problem = CompiledProblem.from_instance(instance, structure, config)
    names = instance.variables
    universe = structure.universe
    for sol in problem.solutions():
        yield {v: universe[sol[i]] for i, v in enumerate(names)}


def enumerate_solutions(instance: Instance, structure: Structure,
                        config: SearchConfig | None = None) -> SolutionList:
    """All satisfying assignments, surjective ones only when configured.

    With ``config.cap`` set, at most that many are returned and
    ``.truncated`` tells whether more exist.
    """
    config = config or SearchConfig()
    out = SolutionList()
    for sol in iter_solutions(instance, structure, config):
        if config.cap is not None and len(out) >= config.cap:
            out.truncated = True
            break
        out.append(sol)
    return out


def find_solution(instance: Instance, structure: Structure, surjective=False):
    """First solution in canonical order, or None."""
    config = SearchConfig(surjective=surjective)
    return next(iter_solutions(instance, structure, config), None)


def decide(instance: Instance, structure: Structure) -> bool:
    """Answer the instance under its own kind (CSP, SCSP or COND)."""
    reduced = eliminate_equalities(instance)
    config = SearchConfig(surjective=instance.kind in (SCSP, COND))
    problem = CompiledProblem.from_instance(reduced, structure, config)
    dom = problem.root()
    if dom is None:
        return False
    return problem.feasible(dom)


# -- operations on finite sets ------------------------------------------


@dataclass(frozen=True)
class FiniteOperation:
    """A (possibly partial) operation B^k -> B given by its table."""
    arity: int
    table: tuple  # sorted (argument tuple, value) pairs

    @classmethod
    def from_dict(cls, arity, mapping):
        return cls(arity, tuple(sorted(mapping.items())))

    @property
    def mapping(self):
        return dict(self.table)

    def __call__(self, *args):
        return self.mapping[tuple(args)]

    def get(self, args, default=None):
        return self.mapping.get(tuple(args), default)

    @property
    def domain(self):
        return [args for args, _ in self.table]

    def image(self):
        return {v for _, v in self.table}

    def is_total(self, universe):
        return len(self.table) == len(universe) ** self.arity

    def as_unary_dict(self):
        return {args[0]: v for args, v in self.table}

    def is_essentially_unary(self, universe) -> bool:
        """Total and depends on a single coordinate (constants count)."""
        if not self.is_total(universe):
            return False
        if self.arity == 0:
            return True
        m = self.mapping
        for j in range(self.arity):
            by_coord = {}
            if all(by_coord.setdefault(args[j], v) == v for args, v in m.items()):
                return True
        return False


def diagonal(op: FiniteOperation, universe=None) -> FiniteOperation:
    """The unary map b -> op(b, ..., b), undefined where op is."""
    m = op.mapping
    if universe is None:
        universe = sorted({x for args in m for x in args})
    out = {}
    for b in universe:
        key = (b,) * op.arity
        if key in m:
            out[(b,)] = m[key]
    return FiniteOperation.from_dict(1, out)


def preserves(op: FiniteOperation, structure: Structure) -> bool:
    """Check op (possibly partial) against every relation, row-wise."""
    m = op.mapping
    for rel in structure.relations:
        rows = sorted(rel.tuples)
        for pick in itertools.product(rows, repeat=op.arity):
            image = []
            for col in zip(*pick) if op.arity else [()] * rel.arity:
                value = m.get(tuple(col))
                if value is None:
                    break
                image.append(value)
            else:
                if tuple(image) not in rel.tuples:
                    return False
    return True


def automorphisms(structure: Structure) -> list:
    """All relation-preserving bijections, in lexicographic table order."""
    universe = structure.universe
    rels = [(sorted(r.tuples), r.tuples) for r in structure.relations]
    out = []
    for perm in itertools.permutations(universe):
        sigma = dict(zip(universe, perm))
        if all(all(tuple(sigma[b] for b in t) in tset for t in rows) for rows, tset in rels):
            out.append(FiniteOperation.from_dict(1, {(b,): sigma[b] for b in universe}))
    return out


def _preservation_instance(structure, points, arity):
    """CSP instance whose solutions are the operations on ``points`` preserving every relation."""
    names = [f"x{i}" for i in range(len(points))]
    where = {p: n for p, n in zip(points, names)}
    atoms = []
    for rel in structure.relations:
        rows = sorted(rel.tuples)
        for pick in itertools.product(rows, repeat=arity):
            cols = list(zip(*pick)) if arity else [()] * rel.arity
            if all(c in where for c in cols):
                atoms.append(Atom(rel.symbol, tuple(where[c] for c in cols)))
    formula = AndFormula(tuple(dict.fromkeys(atoms)))
    return Instance(CSP, tuple(names), formula, structure.name), names


def polymorphisms(structure: Structure, arity: int, cap=None) -> list:
    """All total operations of the given arity preserving every relation."""
    if arity > MAX_POLYMORPHISM_ARITY:
        raise GadgetryError(f"polymorphism arity capped at {MAX_POLYMORPHISM_ARITY}")
    points = list(itertools.product(structure.universe, repeat=arity))
    inst, names = _preservation_instance(structure, points, arity)
    config = SearchConfig(variable_order="declared", cap=cap)
    return [FiniteOperation.from_dict(arity, {p: sol[n] for p, n in zip(points, names)})
            for sol in enumerate_solutions(inst, structure, config)]


def unary_partial_polymorphisms(structure: Structure, domain) -> list:
    """All partial unary polymorphisms whose domain is exactly ``domain``."""
    order = structure.index
    points = [(b,) for b in sorted(set(domain), key=order.__getitem__)]
    if not points:
        return [FiniteOperation(1, ())]
    inst, names = _preservation_instance(structure, points, 1)
    config = SearchConfig(variable_order="declared")
    return [FiniteOperation.from_dict(1, {p: sol[n] for p, n in zip(points, names)})
            for sol in enumerate_solutions(inst, structure, config)]
