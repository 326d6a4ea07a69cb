"""Workbench for surjective constraint satisfaction gadgets: closure formulas,
stability of encodings, induced templates, reductions and a GF(2) kernel."""
from .core import (COND, CSP, SCSP, AndFormula, Atom, Instance, Relation, Structure,
                   eliminate_equalities, satisfies)
from .encoding import (EQUALITY, Application, Encoding, InducedRelationSpec, build_applications,
                       check_inner_symmetry, closure_formula, coded_assignment,
                       contains_all_constants, induced_relation, induced_template)
from .errors import (ArityMismatchError, FormatError, FormatSyntaxError, GadgetryError,
                     InvariantViolation, UndecidedError, UnknownValueError)
from .kernel import encode, kernelize
from .reduction import certify, reduce
from .search import (FiniteOperation, SearchConfig, automorphisms, decide, diagonal,
                     enumerate_solutions, polymorphisms, unary_partial_polymorphisms)
from .stability import (INCONCLUSIVE, STABLE, UNSTABLE, decide_stability,
                        decide_surjectively_closed)
from .textio import (parse_encoding, parse_instance, parse_structure, serialize_encoding,
                     serialize_instance, serialize_structure)

__version__ = "0.1.0"
