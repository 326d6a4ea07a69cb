import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gadgetry import casestudies, textio
from gadgetry.core import AndFormula, Atom, Instance, Structure
from gadgetry.encoding import Encoding
from gadgetry.errors import (ArityMismatchError, FormatError, FormatSyntaxError, GadgetryError,
                             UnknownValueError)

CYCLE_FILE = """# reflexive 4-cycle
structure C4
universe 0 1 2 3
relation E 2
0 0
0 1
0 3
1 0
1 1
1 2
2 1
2 2
2 3
3 0
3 2
3 3
0 1   # duplicate, kept once
end
end
"""


def test_parse_cycle_file():
    s = textio.parse_structure(CYCLE_FILE)
    assert s.universe == ("0", "1", "2", "3")
    assert len(s.relation("E").tuples) == 12
    assert s == casestudies.reflexive_4cycle_structure()


def test_serialize_is_canonical_and_round_trips():
    s = textio.parse_structure(CYCLE_FILE)
    text = textio.serialize_structure(s)
    assert textio.parse_structure(text) == s
    assert textio.serialize_structure(textio.parse_structure(text)) == text
    lines = text.splitlines()
    assert lines[0] == "structure C4" and lines[-1] == "end"
    assert lines[3:5] == ["    0 0", "    0 1"]


def test_norainbow_file_count(N):
    s = textio.parse_structure(textio.serialize_structure(N))
    assert len(s.relation("R").tuples) == 27 - 6


@pytest.mark.parametrize("text, cls, line, col", [
    ("structure S\nuniverse a b\nrelation R 2\na b c\nend\nend\n", ArityMismatchError, 4, 1),
    ("structure S\nuniverse a b\nrelation R 2\na z\nend\nend\n", UnknownValueError, 4, 3),
    ("structure S\nuniverse a b\nrelation R two\nend\nend\n", FormatSyntaxError, 3, 12),
    ("structure S\nuniverse a b\nrelation R 1\na\nend\n", FormatSyntaxError, 6, 1),
    ("structure S\nuniverse a a\nend\n", FormatSyntaxError, 2, 12),
    ("structure S\nuniverse a\nfrobnicate\nend\n", FormatSyntaxError, 3, 1),
    ("structure S\nuniverse a\nend\nend\n", FormatSyntaxError, 4, 1),
])
def test_structure_errors_are_distinct_and_located(text, cls, line, col):
    with pytest.raises(cls) as info:
        textio.parse_structure(text)
    assert (info.value.line, info.value.column) == (line, col)
    assert f"line {line}, column {col}" in str(info.value)


def test_error_classes_are_distinct():
    assert not issubclass(ArityMismatchError, UnknownValueError)
    assert not issubclass(UnknownValueError, FormatSyntaxError)
    assert issubclass(FormatSyntaxError, ValueError)


def test_arity_zero_relation_round_trip():
    s = Structure.build("T", ("a",), {"Z": [()]}, arities={"Z": 0})
    assert textio.parse_structure(textio.serialize_structure(s)) == s


INSTANCE = """instance scsp over N
vars a b c
atom R a b c
atom R a b c
eq a b  # trailing comment
end
"""


def test_instance_parse_and_dedup(N):
    i = textio.parse_instance(INSTANCE, N)
    assert i.kind == "scsp" and i.variables == ("a", "b", "c")
    assert len(i.formula.atoms) == 1
    assert i.formula.equalities == (("a", "b"),)
    assert textio.parse_instance(textio.serialize_instance(i), N) == i


@pytest.mark.parametrize("text, cls", [
    ("instance scsp over N\nvars a\natom R a a\nend\n", ArityMismatchError),
    ("instance scsp over N\nvars a\natom Q a a a\nend\n", UnknownValueError),
    ("instance scsp over N\nvars a\natom R a a b\nend\n", UnknownValueError),
    ("instance maybe over N\nvars a\nend\n", FormatSyntaxError),
    ("instance scsp over N\nvars a(b\nend\n", FormatSyntaxError),
    ("instance scsp over N\nvars a a\nend\n", FormatSyntaxError),
    ("instance scsp over N\nend\n", FormatSyntaxError),
    ("instance scsp over M\nvars a\nend\n", UnknownValueError),
])
def test_instance_errors(N, text, cls):
    with pytest.raises(cls):
        textio.parse_instance(text, N)


def test_application_tokens_are_variables(N):
    text = "instance scsp over N\nvars 0() [01](v1) f(x,y)\natom R 0() [01](v1) f(x,y)\nend\n"
    i = textio.parse_instance(text, N)
    assert i.variables == ("0()", "[01](v1)", "f(x,y)")


def test_encoding_round_trip(cycle, norainbow, boolean_eu):
    for cs in (cycle, norainbow, boolean_eu):
        text = textio.serialize_encoding(cs.encoding)
        assert textio.parse_encoding(text, cs.structure) == cs.encoding
        assert textio.serialize_encoding(textio.parse_encoding(text)) == text


@pytest.mark.parametrize("body, cls", [
    ("map f 1\n0 -> 0\nend\n", FormatSyntaxError),                  # not total
    ("map f 1\n0 -> 0\n1 -> 7\nend\n", UnknownValueError),          # value outside B
    ("map f 1\n0 1 -> 0\n1 -> 1\nend\n", ArityMismatchError),
    ("map f 1\n0 -> 0\n2 -> 1\nend\n", UnknownValueError),          # outside D
    ("map f 1\n0 0\nend\n", FormatSyntaxError),
    ("map f 0\n-> 0\nend\nmap f 0\n-> 1\nend\n", FormatSyntaxError),
])
def test_encoding_errors(N, body, cls):
    text = "encoding E over N\ndomain 0 1\n" + body + "end\n"
    with pytest.raises(cls):
        textio.parse_encoding(text, N)


def test_template_round_trip(cycle):
    tmpl = cycle.template()
    text = textio.serialize_template(tmpl)
    again = textio.parse_template(text, cycle.structure, cycle.encoding)
    assert again.structure == tmpl.structure
    assert again.specs == tmpl.specs


def test_template_errors(cycle):
    bad = "template T over C4 encoding F_C4\nrelation S 2\nspec E 2() nope\nend\nend\n"
    with pytest.raises(FormatSyntaxError):
        textio.parse_template(bad, cycle.structure, cycle.encoding)
    bad = "template T over C4 encoding F_C4\nrelation S 2\nspec E 2() [013](u3)\nend\nend\n"
    with pytest.raises(UnknownValueError):
        textio.parse_template(bad, cycle.structure, cycle.encoding)
    bad = "template T over C4 encoding F_C4\nrelation S 2\nspec E 2()\nend\nend\n"
    with pytest.raises(FormatError):
        textio.parse_template(bad, cycle.structure, cycle.encoding)


token = st.text(alphabet="abcxyz019_[]-", min_size=1, max_size=4)


@st.composite
def structures(draw):
    universe = tuple(draw(st.lists(token, min_size=1, max_size=4, unique=True)))
    rels, arities = {}, {}
    for name in draw(st.lists(st.sampled_from(["R", "S", "E", "Q"]), max_size=3, unique=True)):
        arity = arities[name] = draw(st.integers(0, 3))
        grid = list(itertools.product(universe, repeat=arity))
        rels[name] = draw(st.lists(st.sampled_from(grid), max_size=6))
    return Structure.build(draw(token), universe, rels, arities=arities)


@settings(max_examples=120, deadline=None)
@given(structures(), st.data())
def test_round_trip_property(s, data):
    assert textio.parse_structure(textio.serialize_structure(s)) == s
    vs = data.draw(st.lists(token, min_size=1, max_size=4, unique=True))
    atoms = []
    for rel in s.relations:
        for _ in range(data.draw(st.integers(0, 2))):
            atoms.append(Atom(rel.symbol, tuple(data.draw(st.sampled_from(vs)) for _ in range(rel.arity))))
    eqs = data.draw(st.lists(st.tuples(st.sampled_from(vs), st.sampled_from(vs)), max_size=2))
    inst = Instance(data.draw(st.sampled_from(["csp", "scsp", "cond"])), tuple(vs),
                    AndFormula(tuple(atoms), tuple(eqs)).deduplicated(), s.name)
    assert textio.parse_instance(textio.serialize_instance(inst), s) == inst
    domain = tuple(data.draw(st.lists(token, min_size=1, max_size=3, unique=True)))
    maps = {}
    for k in range(data.draw(st.integers(1, 3))):
        arity = data.draw(st.integers(0, 2))
        grid = list(itertools.product(domain, repeat=arity))
        maps[f"f{k}"] = {a: data.draw(st.sampled_from(s.universe)) for a in grid}
    try:
        enc = Encoding.build("F", domain, maps, structure=s.name)
    except GadgetryError:
        return  # coinciding tables are rejected by design
    assert textio.parse_encoding(textio.serialize_encoding(enc), s) == enc
