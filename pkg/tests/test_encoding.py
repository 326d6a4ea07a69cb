import itertools
import random

import pytest

import closure_checks
import oracles
from gadgetry.core import CSP, eliminate_equalities, satisfies
from gadgetry.encoding import (EQUALITY, Application, Encoding, InducedRelationSpec,
                               build_applications, check_inner_symmetry, closure_formula,
                               closure_of_maps, coded_assignment, coded_rows, contains_all_constants,
                               induced_relation, induced_template, parse_permutation)
from gadgetry.errors import ArityMismatchError, GadgetryError
from gadgetry.search import SearchConfig, automorphisms, enumerate_solutions


def test_application_counts(cycle, norainbow):
    assert len(build_applications(("a", "b", "c", "d"), norainbow.encoding)) == 27
    assert len(build_applications(("a", "b", "c"), norainbow.encoding)) == 21
    assert len(build_applications(("v",), cycle.encoding)) == 11
    with pytest.raises(GadgetryError):
        build_applications((), cycle.encoding)


def test_application_order_and_names(norainbow):
    apps = build_applications(("x", "y"), norainbow.encoding)
    names = [a.name for a in apps]
    assert names[:3] == ["0()", "1()", "2()"]
    assert names[3:5] == ["[01](x)", "[01](y)"]
    binary = Encoding.build("B2", ("0", "1"), {"f": {(a, b): a for a in "01" for b in "01"}})
    assert [a.name for a in build_applications(("x", "y"), binary)] == ["f(x,x)", "f(x,y)", "f(y,x)", "f(y,y)"]


def test_coded_assignment_examples(cycle, norainbow):
    t = coded_assignment({"v": "0"}, norainbow.encoding)
    assert t["0()"] == "0" and t["1()"] == "1" and t["2()"] == "2"
    assert t["[01](v)"] == "0"
    t = coded_assignment({"v": "3"}, cycle.encoding)
    assert t["[313](v)"] == "3"
    assert all(t[f"{b}()"] == b for b in "0123")


def test_encoding_validation():
    with pytest.raises(GadgetryError):
        Encoding.build("E", ("0", "1"), {"f": ["0"]})
    with pytest.raises(GadgetryError):
        Encoding.build("E", ("0", "1"), {"f": ["0", "1"], "g": ["0", "1"]})


def _brute_psi0_solutions(structure, V, encoding):
    names, rows = oracles.coded_table(V, encoding)
    return names, set(oracles.closure_members(rows, structure))


@pytest.mark.parametrize("case", ["norainbow", "cycle"])
def test_closure_solutions_equal_brute_force(case, request):
    cs = request.getfixturevalue(case)
    psi0 = closure_formula(cs.structure, ("v1",), cs.encoding)
    names, want = _brute_psi0_solutions(cs.structure, ("v1",), cs.encoding)
    assert list(psi0.variables) == names
    got = {tuple(s[n] for n in names) for s in enumerate_solutions(psi0.with_kind(CSP), cs.structure)}
    assert got == want


@pytest.mark.parametrize("case, size", [("norainbow", 1), ("norainbow", 2), ("norainbow", 3),
                                        ("cycle", 1), ("cycle", 2)])
def test_closure_conjuncts_equal_brute_force(case, size, request):
    cs = request.getfixturevalue(case)
    V = tuple(f"v{i}" for i in range(1, size + 1))
    psi0 = closure_formula(cs.structure, V, cs.encoding)
    names, rows = oracles.coded_table(V, cs.encoding)
    atoms, eqs = oracles.closure_patterns(names, rows, cs.structure)
    assert {(a.symbol, a.args) for a in psi0.formula.atoms} == atoms
    assert set(psi0.formula.equalities) == eqs


def test_closure_with_only_constants(N):
    enc = Encoding.build("B0", ("d",), {"0": "0", "1": "1", "2": "2"})
    psi0 = closure_formula(N, ("v",), enc)
    got = {tuple(a.args) for a in psi0.formula.atoms}
    want = {tuple(f"{b}()" for b in t) for t in N.relation("R").tuples}
    assert got == want


@pytest.mark.parametrize("case, size", [("norainbow", 1), ("norainbow", 2), ("norainbow", 3),
                                        ("cycle", 1), ("cycle", 2), ("cycle", 3)])
def test_closure_soundness(case, size, request):
    cs = request.getfixturevalue(case)
    V = tuple(f"v{i}" for i in range(1, size + 1))
    psi0 = closure_formula(cs.structure, V, cs.encoding)
    for row in coded_rows(V, cs.encoding):
        assert satisfies(dict(zip(psi0.variables, row)), psi0, cs.structure)


def test_closure_closed_under_automorphisms(cycle, norainbow):
    rnd = random.Random(5)
    for cs in (cycle, norainbow):
        for size in (1, 2):
            V = tuple(f"v{i}" for i in range(1, size + 1))
            psi0 = closure_formula(cs.structure, V, cs.encoding)
            sols = enumerate_solutions(eliminate_equalities(psi0).with_kind(CSP), cs.structure,
                                       SearchConfig(cap=200))
            auts = [a.as_unary_dict() for a in automorphisms(cs.structure)]
            full = {}
            for u in rnd.sample(list(sols), min(20, len(sols))):
                reps = {v: v for v in psi0.variables}
                for a, b in psi0.formula.equalities:
                    reps[b] = reps[a] if a in u else a
                full = {v: u[v] if v in u else u[reps[v]] for v in psi0.variables}
                assert satisfies(full, psi0, cs.structure)
                for g in auts:
                    assert satisfies({k: g[x] for k, x in full.items()}, psi0, cs.structure)


def test_only_size_matters(norainbow):
    from gadgetry.stability import decide_surjectively_closed
    a = decide_surjectively_closed(norainbow.structure, ("p", "q"), norainbow.encoding)
    b = decide_surjectively_closed(norainbow.structure, ("v1", "v2"), norainbow.encoding)
    assert a.status == b.status
    assert a.surjective_solutions[2] == b.surjective_solutions[2]


# -- closure oracle: singleton sets against unary partial polymorphisms ------------


@pytest.mark.parametrize("structure", list(closure_checks.small_structures()), ids=lambda s: s.name)
def test_singleton_closure_oracle(structure):
    width = min(len(structure.universe), 3)
    assert closure_checks.singleton_oracle_agrees(structure, width)


def test_atoms_only_differs_on_non_injective_maps(N):
    # the reason equalities are needed: t = (0, 0) allows u = (0, 1) without them
    inst = closure_of_maps(N, ("a", "b"), [("0", "0")], equalities=False, kind=CSP)
    got = {(s["a"], s["b"]) for s in enumerate_solutions(inst, N)}
    assert ("0", "1") in got


# -- induced relations ---------------------------------------------------------------


def test_nae_induced(norainbow):
    (spec,) = norainbow.specs["NAE"]
    got = induced_relation(norainbow.structure, norainbow.encoding, spec)
    assert got == set(itertools.product("01", repeat=3)) - {("0", "0", "0"), ("1", "1", "1")}


def test_cycle_s1_by_intersection(cycle):
    s1 = [induced_relation(cycle.structure, cycle.encoding, s) for s in cycle.specs["S1"]]
    assert s1[0] & s1[1] == {("0", "3"), ("1", "1"), ("3", "1"), ("3", "3")}


def test_equality_spec_identical_applications(cycle):
    a = Application("[013]", ("u1",))
    spec = InducedRelationSpec(EQUALITY, (a, a), 2)
    assert induced_relation(cycle.structure, cycle.encoding, spec) == set(itertools.product("013", repeat=2))


def test_induced_relation_matches_definition(cycle):
    # recompute directly from coded assignments
    for symbol, specs in cycle.specs.items():
        for spec in specs:
            want = set()
            for g in itertools.product(cycle.encoding.domain, repeat=spec.arity):
                gv = dict(zip(("u1", "u2"), g))
                t = coded_assignment(gv, cycle.encoding, spec.applications)
                if tuple(t[a.name] for a in spec.applications) in cycle.structure.relation(spec.base).tuples:
                    want.add(g)
            assert induced_relation(cycle.structure, cycle.encoding, spec) == want


def test_template_errors_and_empty(cycle):
    tmpl = induced_template(cycle.structure, cycle.encoding, {})
    assert tmpl.structure.relations == () and tmpl.structure.universe == ("0", "1", "3")
    bad = {"S": (cycle.specs["S1"][0], InducedRelationSpec("E", cycle.specs["S1"][0].applications, 3))}
    with pytest.raises(ArityMismatchError):
        induced_template(cycle.structure, cycle.encoding, bad)


# -- inner symmetries and constants ------------------------------------------------------


def test_cycle_inner_symmetry(cycle):
    rho = parse_permutation("(1 3)", cycle.encoding.domain)
    tau = parse_permutation("1:3,3:1", cycle.structure.universe)
    rep = check_inner_symmetry(cycle.structure, cycle.encoding, rho, tau)
    assert rep.ok
    assert set(rep.transpositions()) == {("1", "3"), ("[003]", "[010]"), ("[112]", "[323]"), ("[113]", "[313]")}


def test_norainbow_inner_symmetries(norainbow):
    ident = {d: d for d in norainbow.encoding.domain}
    for perm in itertools.permutations("012"):
        assert check_inner_symmetry(norainbow.structure, norainbow.encoding, ident, dict(zip("012", perm)))


def test_identity_and_failures(cycle):
    ident_d = {d: d for d in cycle.encoding.domain}
    ident_b = {b: b for b in cycle.structure.universe}
    assert check_inner_symmetry(cycle.structure, cycle.encoding, ident_d, ident_b)
    # an automorphism that is not compatible with the encoding
    rot = {"0": "1", "1": "2", "2": "3", "3": "0"}
    rep = check_inner_symmetry(cycle.structure, cycle.encoding, ident_d, rot)
    assert not rep.ok and "not in the encoding" in rep.reason
    rep = check_inner_symmetry(cycle.structure, cycle.encoding, ident_d, {"0": "1", "1": "0", "2": "2", "3": "3"})
    assert not rep.ok


def test_inner_symmetry_preserves_closure(cycle):
    """u satisfies psi0 iff u o sigma does, sampled for |V| <= 2."""
    rho = {"0": "0", "1": "3", "3": "1"}
    tau = {"0": "0", "1": "3", "2": "2", "3": "1"}
    rep = check_inner_symmetry(cycle.structure, cycle.encoding, rho, tau)
    rnd = random.Random(3)
    for size in (1, 2):
        V = tuple(f"v{i}" for i in range(1, size + 1))
        psi0 = closure_formula(cycle.structure, V, cycle.encoding)
        apps = build_applications(V, cycle.encoding)
        image = {a.name: Application(rep.permutation[a.map], a.variables).name for a in apps}
        rows = coded_rows(V, cycle.encoding, apps)
        samples = [dict(zip(image, r)) for r in rows]
        samples += [{a: rnd.choice(cycle.structure.universe) for a in image} for _ in range(300)]
        for u in samples:
            moved = {a: u[image[a]] for a in image}
            assert satisfies(u, psi0, cycle.structure) == satisfies(moved, psi0, cycle.structure)


def test_contains_all_constants(cycle, norainbow, N):
    assert contains_all_constants(cycle.encoding, cycle.structure)
    assert contains_all_constants(norainbow.encoding, norainbow.structure)
    only = Encoding.build("U", ("0", "1"), {"[01]": ["0", "1"]})
    assert not contains_all_constants(only, N)


def test_parse_permutation_forms():
    U = ("0", "1", "2")
    assert parse_permutation("identity", U) == {"0": "0", "1": "1", "2": "2"}
    assert parse_permutation("1,2,0", U) == {"0": "1", "1": "2", "2": "0"}
    assert parse_permutation("(0 1 2)", U) == {"0": "1", "1": "2", "2": "0"}
    with pytest.raises(GadgetryError):
        parse_permutation("0:1", U)
