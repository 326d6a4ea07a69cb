"""Text formats for structures, instances, encodings and induced templates.

All four are line oriented: ``#`` starts a comment, tokens are separated by
whitespace, and every block is closed by ``end``. Serializers emit a
canonical layout (two-space indent, tuples in universe order) that the
parsers read back to an equal object.
"""
from __future__ import annotations

import itertools
import re
from pathlib import Path

from .core import KINDS, AndFormula, Atom, Instance, Relation, Structure
from .encoding import (Encoding, EncodingMap, InducedRelationSpec, InducedTemplate,
                       induced_template, parse_application)
from .errors import (ArityMismatchError, FormatError, FormatSyntaxError,
                     UnknownValueError)

_PLAIN = r"[^\s(),#]+"
PLAIN_RE = re.compile(_PLAIN)
APPLICATION_RE = re.compile(rf"{_PLAIN}\((?:{_PLAIN}(?:,{_PLAIN})*)?\)")


class _Line:
    __slots__ = ("number", "tokens", "columns")

    def __init__(self, number, tokens, columns):
        self.number = number
        self.tokens = tokens
        self.columns = columns

    @property
    def keyword(self):
        return self.tokens[0]

    def col(self, i):
        return self.columns[i] if i < len(self.columns) else (self.columns[-1] if self.columns else 1)

    def error(self, cls, message, i=0):
        return cls(message, self.number, self.col(i))


def _lines(text):
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        tokens, columns = [], []
        for m in re.finditer(r"\S+", body):
            tokens.append(m.group())
            columns.append(m.start() + 1)
        if tokens:
            yield _Line(number, tokens, columns)


class _Reader:
    def __init__(self, text):
        self.lines = list(_lines(text))
        self.pos = 0
        self.last = len(text.splitlines()) or 1

    def next(self, what="more input"):
        if self.pos >= len(self.lines):
            raise FormatSyntaxError(f"unexpected end of file, expected {what}", self.last + 1, 1)
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def peek(self):
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def expect(self, keyword, nargs=None):
        line = self.next(repr(keyword))
        if line.keyword != keyword:
            raise line.error(FormatSyntaxError, f"expected {keyword!r}, found {line.keyword!r}")
        if nargs is not None and len(line.tokens) - 1 != nargs:
            raise line.error(FormatSyntaxError,
                             f"{keyword!r} takes {nargs} argument(s), found {len(line.tokens) - 1}")
        return line

    def finish(self):
        extra = self.peek()
        if extra is not None:
            raise extra.error(FormatSyntaxError, f"trailing content after final 'end': {extra.keyword!r}")


def _natural(line, i):
    tok = line.tokens[i]
    if not tok.isdigit():
        raise line.error(FormatSyntaxError, f"expected a natural number, found {tok!r}", i)
    return int(tok)


def _unique(line, tokens, what, offset=1):
    seen = set()
    for i, tok in enumerate(tokens):
        if tok in seen:
            raise line.error(FormatSyntaxError, f"repeated {what} {tok!r}", i + offset)
        seen.add(tok)


def _check_plain(line, i):
    if not PLAIN_RE.fullmatch(line.tokens[i]):
        raise line.error(FormatSyntaxError, f"invalid name {line.tokens[i]!r}", i)


# -- structures ----------------------------------------------------------------


def parse_structure(text: str) -> Structure:
    r = _Reader(text)
    head = r.expect("structure", 1)
    _check_plain(head, 1)
    name = head.tokens[1]
    uni = r.expect("universe")
    universe = tuple(uni.tokens[1:])
    _unique(uni, universe, "universe value")
    for i in range(1, len(uni.tokens)):
        _check_plain(uni, i)
    values = set(universe)
    relations = []
    symbols = set()
    while True:
        line = r.next("'relation' or 'end'")
        if line.keyword == "end":
            if len(line.tokens) != 1:
                raise line.error(FormatSyntaxError, "'end' takes no arguments", 1)
            break
        if line.keyword != "relation":
            raise line.error(FormatSyntaxError, f"expected 'relation' or 'end', found {line.keyword!r}")
        if len(line.tokens) != 3:
            raise line.error(FormatSyntaxError, "usage: relation <symbol> <arity>")
        _check_plain(line, 1)
        symbol = line.tokens[1]
        if symbol in symbols:
            raise line.error(FormatSyntaxError, f"duplicate relation {symbol!r}", 1)
        symbols.add(symbol)
        arity = _natural(line, 2)
        tuples = set()
        while True:
            row = r.next(f"a tuple of {symbol} or 'end'")
            if row.tokens == ["end"]:
                break
            entries = [] if row.tokens == ["()"] else row.tokens
            if len(entries) != arity:
                raise row.error(ArityMismatchError,
                                f"relation {symbol} has arity {arity}, tuple has {len(entries)} entries")
            for i, v in enumerate(entries):
                if v not in values:
                    raise row.error(UnknownValueError, f"value {v!r} is not in the universe", i)
            tuples.add(tuple(entries))
        relations.append(Relation(symbol, arity, frozenset(tuples)))
    r.finish()
    return Structure(name, universe, tuple(relations))


def _sorted_tuples(tuples, index):
    return sorted(tuples, key=lambda t: [index[v] for v in t])


def serialize_structure(s: Structure) -> str:
    out = [f"structure {s.name}", "  universe " + " ".join(s.universe)]
    for rel in s.relations:
        out.append(f"  relation {rel.symbol} {rel.arity}")
        for t in _sorted_tuples(rel.tuples, s.index):
            out.append("    " + (" ".join(t) if t else "()"))
        out.append("  end")
    out.append("end")
    return "\n".join(out) + "\n"


# -- instances -----------------------------------------------------------------


def _check_variable(line, i):
    tok = line.tokens[i]
    if not (PLAIN_RE.fullmatch(tok) or APPLICATION_RE.fullmatch(tok)):
        raise line.error(FormatSyntaxError, f"invalid variable {tok!r}", i)


def parse_instance(text: str, structure: Structure | None = None) -> Instance:
    """Parse an instance file; with ``structure`` given, atoms are checked against it."""
    r = _Reader(text)
    head = r.next("'instance'")
    if head.keyword != "instance" or len(head.tokens) != 4 or head.tokens[2] != "over":
        raise head.error(FormatSyntaxError, "usage: instance <csp|scsp|cond> over <structure>")
    kind = head.tokens[1].lower()
    if kind not in KINDS:
        raise head.error(FormatSyntaxError, f"unknown instance kind {head.tokens[1]!r}", 1)
    sname = head.tokens[3]
    if structure is not None and structure.name != sname:
        raise head.error(UnknownValueError,
                         f"instance is over {sname!r}, structure given is {structure.name!r}", 3)
    variables = []
    declared = set()
    atoms = []
    eqs = []
    while True:
        line = r.next("'vars', 'atom', 'eq' or 'end'")
        kw = line.keyword
        if kw == "end":
            if len(line.tokens) != 1:
                raise line.error(FormatSyntaxError, "'end' takes no arguments", 1)
            break
        if kw == "vars":
            for i in range(1, len(line.tokens)):
                _check_variable(line, i)
                v = line.tokens[i]
                if v in declared:
                    raise line.error(FormatSyntaxError, f"variable {v!r} declared twice", i)
                declared.add(v)
                variables.append(v)
        elif kw == "atom":
            if len(line.tokens) < 2:
                raise line.error(FormatSyntaxError, "usage: atom <symbol> <variables...>")
            symbol = line.tokens[1]
            args = tuple(line.tokens[2:])
            for i, v in enumerate(args, start=2):
                if v not in declared:
                    raise line.error(UnknownValueError, f"variable {v!r} is not declared", i)
            if structure is not None:
                if not structure.has_relation(symbol):
                    raise line.error(UnknownValueError, f"{structure.name} has no relation {symbol!r}", 1)
                arity = structure.relation(symbol).arity
                if arity != len(args):
                    raise line.error(ArityMismatchError,
                                     f"{symbol} has arity {arity}, atom lists {len(args)} variables", 1)
            atoms.append(Atom(symbol, args))
        elif kw == "eq":
            if len(line.tokens) != 3:
                raise line.error(FormatSyntaxError, "usage: eq <u> <v>")
            for i in (1, 2):
                if line.tokens[i] not in declared:
                    raise line.error(UnknownValueError, f"variable {line.tokens[i]!r} is not declared", i)
            eqs.append((line.tokens[1], line.tokens[2]))
        else:
            raise line.error(FormatSyntaxError, f"unknown keyword {kw!r}")
    r.finish()
    try:
        return Instance(kind, tuple(variables), AndFormula(atoms, eqs).deduplicated(), sname)
    except FormatError:
        raise
    except Exception as exc:
        raise FormatSyntaxError(str(exc), head.number, 1) from None


def serialize_instance(inst: Instance, wrap=16) -> str:
    out = [f"instance {inst.kind} over {inst.structure}"]
    vs = list(inst.variables)
    for i in range(0, len(vs), wrap):
        out.append("  vars " + " ".join(vs[i:i + wrap]))
    for a in inst.formula.atoms:
        out.append("  atom " + " ".join((a.symbol,) + a.args))
    for u, v in inst.formula.equalities:
        out.append(f"  eq {u} {v}")
    out.append("end")
    return "\n".join(out) + "\n"


# -- encodings -----------------------------------------------------------------


def parse_encoding(text: str, structure: Structure | None = None) -> Encoding:
    r = _Reader(text)
    head = r.next("'encoding'")
    if head.keyword != "encoding" or len(head.tokens) != 4 or head.tokens[2] != "over":
        raise head.error(FormatSyntaxError, "usage: encoding <name> over <structure>")
    name, sname = head.tokens[1], head.tokens[3]
    if structure is not None and structure.name != sname:
        raise head.error(UnknownValueError,
                         f"encoding is over {sname!r}, structure given is {structure.name!r}", 3)
    dom_line = r.expect("domain")
    domain = tuple(dom_line.tokens[1:])
    _unique(dom_line, domain, "domain value")
    for i in range(1, len(dom_line.tokens)):
        _check_plain(dom_line, i)
    dset = set(domain)
    values = set(structure.universe) if structure is not None else None
    maps = []
    names = set()
    while True:
        line = r.next("'map' or 'end'")
        if line.keyword == "end":
            if len(line.tokens) != 1:
                raise line.error(FormatSyntaxError, "'end' takes no arguments", 1)
            break
        if line.keyword != "map" or len(line.tokens) != 3:
            raise line.error(FormatSyntaxError, "usage: map <name> <arity>")
        _check_plain(line, 1)
        fname = line.tokens[1]
        if fname in names:
            raise line.error(FormatSyntaxError, f"duplicate map {fname!r}", 1)
        names.add(fname)
        arity = _natural(line, 2)
        table = {}
        while True:
            row = r.next(f"an entry of {fname} or 'end'")
            if row.tokens == ["end"]:
                break
            if "->" not in row.tokens:
                raise row.error(FormatSyntaxError, "entries look like 'd1 ... dk -> b'")
            arrow = row.tokens.index("->")
            args = tuple(row.tokens[:arrow])
            rest = row.tokens[arrow + 1:]
            if len(rest) != 1:
                raise row.error(FormatSyntaxError, "exactly one value must follow '->'", arrow)
            if len(args) != arity:
                raise row.error(ArityMismatchError, f"map {fname} has arity {arity}, entry has {len(args)} arguments")
            for i, d in enumerate(args):
                if d not in dset:
                    raise row.error(UnknownValueError, f"{d!r} is not in the domain", i)
            if values is not None and rest[0] not in values:
                raise row.error(UnknownValueError, f"{rest[0]!r} is not in {structure.name}", arrow + 1)
            if args in table and table[args] != rest[0]:
                raise row.error(FormatSyntaxError, f"conflicting entries for {fname}{args}")
            table[args] = rest[0]
        expected = list(itertools.product(domain, repeat=arity))
        if len(table) != len(expected):
            raise line.error(FormatSyntaxError, f"map {fname} is not total: {len(table)} of {len(expected)} entries")
        maps.append(EncodingMap(fname, arity, tuple((a, table[a]) for a in expected)))
    r.finish()
    try:
        return Encoding(name, domain, tuple(maps), sname)
    except Exception as exc:
        raise FormatSyntaxError(str(exc), head.number, 1) from None


def serialize_encoding(enc: Encoding) -> str:
    out = [f"encoding {enc.name} over {enc.structure}", "  domain " + " ".join(enc.domain)]
    for f in enc.maps:
        out.append(f"  map {f.name} {f.arity}")
        for args, b in f.table:
            out.append("    " + " ".join(args + ("->", b)))
        out.append("  end")
    out.append("end")
    return "\n".join(out) + "\n"


# -- induced templates ------------------------------------------------------------


def parse_template_specs(text: str):
    """Read a template file into ``(name, structure_name, encoding_name, {symbol: specs})``."""
    r = _Reader(text)
    head = r.next("'template'")
    t = head.tokens
    if t[0] != "template" or len(t) != 6 or t[2] != "over" or t[4] != "encoding":
        raise head.error(FormatSyntaxError, "usage: template <name> over <structure> encoding <encoding>")
    specs = {}
    while True:
        line = r.next("'relation' or 'end'")
        if line.keyword == "end":
            break
        if line.keyword != "relation" or len(line.tokens) != 3:
            raise line.error(FormatSyntaxError, "usage: relation <symbol> <arity>")
        symbol = line.tokens[1]
        if symbol in specs:
            raise line.error(FormatSyntaxError, f"duplicate relation {symbol!r}", 1)
        arity = _natural(line, 2)
        items = []
        while True:
            row = r.next(f"a spec of {symbol} or 'end'")
            if row.tokens == ["end"]:
                break
            if row.keyword != "spec" or len(row.tokens) < 2:
                raise row.error(FormatSyntaxError, "usage: spec <base|=> <applications...>")
            apps = []
            for i in range(2, len(row.tokens)):
                tok = row.tokens[i]
                if not APPLICATION_RE.fullmatch(tok):
                    raise row.error(FormatSyntaxError, f"invalid application {tok!r}", i)
                apps.append(parse_application(tok))
            try:
                items.append(InducedRelationSpec(row.tokens[1], tuple(apps), arity))
            except FormatError as exc:
                raise type(exc)(exc.message, row.number, row.col(2)) from None
        if not items:
            raise line.error(FormatSyntaxError, f"relation {symbol} has no specs")
        specs[symbol] = tuple(items)
    r.finish()
    return t[1], t[3], t[5], specs


def parse_template(text: str, structure: Structure, encoding: Encoding) -> InducedTemplate:
    name, sname, ename, specs = parse_template_specs(text)
    if sname != structure.name:
        raise UnknownValueError(f"template is over {sname!r}, structure given is {structure.name!r}", 1, 1)
    if ename != encoding.name:
        raise UnknownValueError(f"template uses encoding {ename!r}, encoding given is {encoding.name!r}", 1, 1)
    return induced_template(structure, encoding, specs, name=name)


def serialize_template(tmpl: InducedTemplate) -> str:
    out = [f"template {tmpl.name} over {tmpl.base} encoding {tmpl.encoding}"]
    for rel in tmpl.structure.relations:
        out.append(f"  relation {rel.symbol} {rel.arity}")
        for spec in tmpl.specs[rel.symbol]:
            out.append("    spec " + " ".join((spec.base,) + tuple(a.name for a in spec.applications)))
        out.append("  end")
    out.append("end")
    return "\n".join(out) + "\n"


# -- files -----------------------------------------------------------------------


def read_text(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def load_structure(path) -> Structure:
    return parse_structure(read_text(path))


def load_encoding(path, structure=None) -> Encoding:
    return parse_encoding(read_text(path), structure)


def load_instance(path, structure=None) -> Instance:
    return parse_instance(read_text(path), structure)


__all__ = [
    "parse_structure", "serialize_structure", "parse_instance", "serialize_instance",
    "parse_encoding", "serialize_encoding", "parse_template", "parse_template_specs",
    "serialize_template", "load_structure", "load_encoding", "load_instance",
]
