"""Compiling CSP instances over an induced template into SCSP instances."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .core import (COND, SCSP, AndFormula, Atom, Instance, Structure, eliminate_equalities,
                   satisfies)
from .encoding import (EQUALITY, Encoding, InducedTemplate, closure_formula,
                       contains_all_constants)
from .errors import GadgetryError
from .search import decide


@lru_cache(maxsize=64)
def _closure(structure: Structure, V: tuple, encoding: Encoding) -> Instance:
    return closure_formula(structure, V, encoding)


def translate_atoms(instance: Instance, template: InducedTemplate):
    """psi1: each atom S(x1..xs) becomes one conjunct per spec of S, with u_i := x_i."""
    atoms, eqs = [], []
    for atom in instance.formula.atoms:
        specs = template.specs_for(atom.symbol)
        for spec in specs:
            if spec.arity != len(atom.args):
                raise GadgetryError(f"atom {atom} does not match the arity of {atom.symbol}")
            sub = {f"u{i}": x for i, x in enumerate(atom.args, start=1)}
            names = tuple(a.rename(sub).name for a in spec.applications)
            if spec.base == EQUALITY:
                if names[0] != names[1]:
                    eqs.append(names)
            else:
                atoms.append(Atom(spec.base, names))
    return atoms, eqs


def reduce(instance: Instance, template: InducedTemplate, structure: Structure,
           encoding: Encoding) -> Instance:
    """The SCSP instance psi0 AND psi1 over the applications of the instance's variables.

    Equalities in the input are eliminated first. The answer is preserved
    whenever the structure is stable under the encoding.
    """
    if instance.formula.equalities:
        instance = eliminate_equalities(instance)
    V = tuple(instance.variables)
    if not V:
        raise GadgetryError("cannot reduce an instance with no variables")
    psi0 = _closure(structure, V, encoding)
    atoms, eqs = translate_atoms(instance, template)
    formula = (psi0.formula & AndFormula(tuple(atoms), tuple(eqs))).deduplicated()
    return Instance(SCSP, psi0.variables, formula, structure.name)


# -- certification -------------------------------------------------------------


def brute_force_csp(instance: Instance, structure: Structure) -> bool:
    """Satisfiability by trying every assignment; the oracle for small inputs."""
    names = instance.variables
    for values in itertools.product(structure.universe, repeat=len(names)):
        if satisfies(dict(zip(names, values)), instance, structure):
            return True
    return False


@dataclass
class CertifyReport:
    csp: bool
    scsp: bool
    cond: bool | None  # None when not checked
    variables: int = 0
    atoms: int = 0

    @property
    def agree(self):
        if self.csp != self.scsp:
            return False
        return self.cond is None or self.cond == self.scsp

    @property
    def verdict(self):
        return "agree" if self.agree else "DISAGREE"

    def row(self):
        def yn(x):
            return "-" if x is None else ("yes" if x else "no")
        return f"{yn(self.csp)} {yn(self.scsp)} {yn(self.cond)} {self.verdict}"


def certify(instance: Instance, template: InducedTemplate, structure: Structure,
            encoding: Encoding) -> CertifyReport:
    """Compare the source CSP answer with the SCSP (and COND) answer of its reduction.

    The COND side is checked only when the encoding contains all constants
    and one of the other answers is yes; otherwise it is reported as ``-``.
    """
    csp = brute_force_csp(instance, template.structure)
    reduced = reduce(instance, template, structure, encoding)
    scsp = decide(reduced, structure)
    cond = None
    if (csp or scsp) and contains_all_constants(encoding, structure):
        cond = decide(reduced.with_kind(COND), structure)
    return CertifyReport(csp, scsp, cond, len(reduced.variables), len(reduced.formula.atoms))
