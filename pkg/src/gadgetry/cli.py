"""Command-line front end.

Decisions print their verdict on the first line, followed by ``key: value``
lines. Exit status is 0 when the command ran, 2 on usage or parse errors and
3 when an internal invariant check fails.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import casestudies, textio
from .core import (COND, CSP, covers_relations, eliminate_equalities, equality_classes,
                   expand_assignment)
from .encoding import (check_inner_symmetry, closure_formula, induced_template,
                       parse_permutation, variable_names)
from .errors import GadgetryError, InvariantViolation
from .kernel import kernel_bound, kernelize
from .reduction import certify, reduce
from .rng import instance_stream
from .search import SearchConfig, decide, iter_solutions
from .stability import decide_stability

# default generator sizes for certify, per case
CERTIFY_SIZES = {"norainbow": (5, 6), "4cycle": (3, 4), "boolean-eu": (4, 5)}


class UsageError(GadgetryError):
    pass


def _case(name):
    try:
        return casestudies.BUILTINS[name]()
    except KeyError:
        raise UsageError(f"unknown case study {name!r}; choose from {', '.join(casestudies.BUILTINS)}") from None


def _builtin_structures():
    return {
        "C4": casestudies.reflexive_4cycle_structure,
        "N": casestudies.no_rainbow_structure,
        "BNAE": casestudies.boolean_nae_structure,
    }


def _structure(args, fallback_name=None):
    if getattr(args, "structure", None):
        return textio.load_structure(args.structure)
    if getattr(args, "case", None):
        return _case(args.case).structure
    if fallback_name in _builtin_structures():
        return _builtin_structures()[fallback_name]()
    raise UsageError("a structure is required (--structure FILE or --case NAME)")


def _structure_and_encoding(args):
    if getattr(args, "case", None) and not (args.structure or args.encoding):
        cs = _case(args.case)
        return cs.structure, cs.encoding
    if not (args.structure and args.encoding):
        raise UsageError("give --structure and --encoding files, or --case NAME")
    structure = textio.load_structure(args.structure)
    return structure, textio.load_encoding(args.encoding, structure)


def _template(args, structure, encoding):
    if getattr(args, "template", None):
        return textio.parse_template(textio.read_text(args.template), structure, encoding)
    if getattr(args, "case", None):
        cs = _case(args.case)
        return induced_template(structure, encoding, cs.specs, name=f"{cs.name}_template")
    raise UsageError("a template is required (--template FILE or --case NAME)")


def _yn(flag):
    return "YES" if flag else "NO"


def _assignment_line(assignment):
    return " ".join(f"{k}={v}" for k, v in assignment.items())


# -- subcommands ------------------------------------------------------------------


def cmd_solve(args, out):
    text = textio.read_text(args.instance)
    probe = textio.parse_instance(text)
    structure = _structure(args, probe.structure)
    inst = textio.parse_instance(text, structure)
    if not args.enumerate:
        out.append(_yn(decide(inst, structure)))
        out.append(f"kind: {inst.kind}")
        out.append(f"variables: {len(inst.variables)}")
        return
    # cond witnesses are surjective solutions filtered for relation coverage
    config = SearchConfig(surjective=inst.kind != CSP)
    reps = equality_classes(inst)
    reduced = eliminate_equalities(inst)
    sols = []
    truncated = False
    for sol in iter_solutions(reduced, structure, config):
        full = expand_assignment(sol, reps)
        full = {v: full[v] for v in inst.variables}
        if inst.kind == COND and not covers_relations(full, inst, structure):
            continue
        if args.cap is not None and len(sols) >= args.cap:
            truncated = True
            break
        sols.append(full)
    out.append(_yn(bool(sols)))
    out.append(f"kind: {inst.kind}")
    out.append(f"variables: {len(inst.variables)}")
    out.append(f"solutions: {len(sols)}")
    out.append(f"truncated: {'true' if truncated else 'false'}")
    for s in sols:
        out.append("solution: " + _assignment_line(s))


def cmd_reduce(args, out):
    structure, encoding = _structure_and_encoding(args)
    template = _template(args, structure, encoding)
    inst = textio.parse_instance(textio.read_text(args.instance), template.structure)
    reduced = reduce(inst, template, structure, encoding)
    out.append(textio.serialize_instance(reduced).rstrip("\n"))


def cmd_certify(args, out):
    cs = _case(args.case)
    template = cs.template()
    mv, ma = CERTIFY_SIZES[args.case]
    mv = args.max_vars or mv
    ma = args.max_atoms if args.max_atoms is not None else ma
    rows = []
    agree = 0
    for k, inst in enumerate(instance_stream(args.seed, args.count, template.structure, mv, ma)):
        rep = certify(inst, template, cs.structure, cs.encoding)
        agree += rep.agree
        atoms = ";".join(str(a) for a in inst.formula.atoms) or "-"
        rows.append(f"{k + 1} {rep.row()} vars={len(inst.variables)} atoms={atoms}")
    out.append("AGREE" if agree == args.count else "DISAGREE")
    out.append(f"case: {args.case}")
    out.append(f"seed: {args.seed}")
    out.append(f"count: {args.count}")
    out.append(f"agree: {agree}/{args.count}")
    out.append("# id csp scsp cond verdict detail")
    out.extend(rows)
    if agree != args.count:
        exc = InvariantViolation(f"{args.count - agree} instance(s) disagree")
        exc.partial = out
        raise exc


def cmd_check_stability(args, out):
    structure, encoding = _structure_and_encoding(args)
    verdict = decide_stability(structure, encoding, args.bound)
    out.append(verdict.status)
    out.append("checked_sizes: " + ",".join(str(s) for s in verdict.checked_sizes))
    if verdict.surjective_solutions:
        out.append("surjective_solutions: " + ",".join(
            f"{k}={v}" for k, v in sorted(verdict.surjective_solutions.items())))
    ce = verdict.counterexample
    if ce is not None:
        out.append(f"counterexample_size: {ce.size}")
        out.append(f"counterexample_reason: {ce.reason}")
        out.append("counterexample: " + _assignment_line(ce.assignment))


def cmd_closure(args, out):
    structure, encoding = _structure_and_encoding(args)
    if args.vars < 1:
        raise UsageError("--vars must be at least 1")
    psi0 = closure_formula(structure, variable_names(args.vars), encoding)
    out.append(textio.serialize_instance(psi0).rstrip("\n"))


def cmd_induced(args, out):
    structure, encoding = _structure_and_encoding(args)
    if args.spec:
        tmpl = textio.parse_template(textio.read_text(args.spec), structure, encoding)
    else:
        tmpl = _template(args, structure, encoding)
    out.append(textio.serialize_structure(tmpl.structure).rstrip("\n"))


def cmd_inner_sym(args, out):
    structure, encoding = _structure_and_encoding(args)
    try:
        rho = parse_permutation(args.rho, encoding.domain)
        tau = parse_permutation(args.tau, structure.universe)
    except GadgetryError as exc:
        raise UsageError(str(exc)) from None
    rep = check_inner_symmetry(structure, encoding, rho, tau)
    out.append(_yn(rep.ok))
    if rep.ok:
        out.append("transpositions: " + (" ".join(f"({a} {b})" for a, b in rep.transpositions()) or "-"))
        out.append("cycles: " + " ".join("(" + " ".join(c) + ")" for c in rep.cycles()))
    else:
        out.append(f"reason: {rep.reason}")


def cmd_kernelize(args, out):
    text = textio.read_text(args.instance)
    probe = textio.parse_instance(text)
    structure = _structure(args, probe.structure)
    inst = textio.parse_instance(text, structure)
    kernel, stats = kernelize(inst, structure)
    if stats.kernel_size > kernel_bound(stats.n):
        raise InvariantViolation("kernel exceeds the rank bound")
    if args.stats:
        out.append(f"# n: {stats.n}")
        out.append(f"# m: {stats.m}")
        out.append(f"# rank: {stats.rank}")
        out.append(f"# kernel_size: {stats.kernel_size}")
    out.append(textio.serialize_instance(kernel).rstrip("\n"))


def write_case_files(cs, directory: Path):
    directory.mkdir(parents=True, exist_ok=True)
    tmpl = cs.template()
    files = {
        "structure.txt": textio.serialize_structure(cs.structure),
        "encoding.txt": textio.serialize_encoding(cs.encoding),
        "template.txt": textio.serialize_template(tmpl),
        "induced.txt": textio.serialize_structure(tmpl.structure),
    }
    written = []
    for name, text in files.items():
        (directory / name).write_text(text, encoding="utf-8")
        written.append(directory / name)
    return written


def cmd_casestudy(args, out):
    cs = _case(args.name)
    cs.check()
    written = write_case_files(cs, Path(args.out))
    out.append(f"case: {cs.name}")
    for p in written:
        out.append(f"wrote: {p}")


# -- parser -----------------------------------------------------------------------


def _add_pieces(p, template=False):
    p.add_argument("--structure", help="structure file")
    p.add_argument("--encoding", help="encoding file")
    if template:
        p.add_argument("--template", help="template file")
    p.add_argument("--case", help="use a built-in case study: " + ", ".join(casestudies.BUILTINS))


def build_parser():
    ap = argparse.ArgumentParser(prog="gadgetry", description="Surjective CSP gadget workbench")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="decide or enumerate an instance")
    p.add_argument("instance")
    p.add_argument("--structure", help="structure file (built-in C4, N and BNAE are found by name)")
    p.add_argument("--enumerate", action="store_true")
    p.add_argument("--cap", type=int)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("reduce", help="compile a template CSP instance into an SCSP instance")
    p.add_argument("instance")
    _add_pieces(p, template=True)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("certify", help="randomised reduction check against brute force")
    p.add_argument("--case", required=True, choices=sorted(casestudies.BUILTINS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--max-vars", type=int)
    p.add_argument("--max-atoms", type=int)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("check-stability", help="decide stability of an encoding")
    _add_pieces(p)
    p.add_argument("--bound", type=int)
    p.set_defaults(func=cmd_check_stability)

    p = sub.add_parser("closure", help="emit the closure formula as an instance file")
    _add_pieces(p)
    p.add_argument("--vars", type=int, required=True)
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("induced", help="compute the relations of an induced template")
    _add_pieces(p)
    p.add_argument("--spec", help="template spec file")
    p.set_defaults(func=cmd_induced)

    p = sub.add_parser("inner-sym", help="check an inner symmetry (rho on D, tau on B)")
    _add_pieces(p)
    p.add_argument("--rho", required=True, help="e.g. 1:3,3:1 or identity")
    p.add_argument("--tau", required=True)
    p.set_defaults(func=cmd_inner_sym)

    p = sub.add_parser("kernelize", help="GF(2) kernel of a no-rainbow SCSP instance")
    p.add_argument("instance")
    p.add_argument("--structure")
    p.add_argument("--stats", action="store_true")
    p.set_defaults(func=cmd_kernelize)

    p = sub.add_parser("casestudy", help="write a built-in case study to files")
    p.add_argument("name", choices=sorted(casestudies.BUILTINS))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_casestudy)
    return ap


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = []
    try:
        args.func(args, out)
    except InvariantViolation as exc:
        partial = getattr(exc, "partial", None)
        if partial:
            stdout.write("\n".join(partial) + "\n")
        stderr.write(f"invariant violation: {exc}\n")
        return 3
    except (GadgetryError, OSError) as exc:
        stderr.write(f"error: {exc}\n")
        return 2
    stdout.write("\n".join(out) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
