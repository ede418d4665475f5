"""Equationally defined binary relations and their order-theoretic checks.

A carrier is either a :class:`FiniteAlgebra` or a :class:`FreeAlgebra`;
elements are referred to by index. Bulk checks work on the boolean
relation matrix, computed once per (carrier, spec).
"""
from __future__ import annotations

import itertools
import weakref
from dataclasses import dataclass, field

import numpy as np

from .algebra import FiniteAlgebra
from .free import FreeAlgebra
from .terms import App, Signature, Term, TermError, Var, VariableSet, check_term, evaluate, parse_term

RELATION_VARS = VariableSet(("x", "y"))


@dataclass(frozen=True)
class PreorderSpec:
    """x <= y iff lhs(x, y) = rhs(x, y)."""

    lhs: Term
    rhs: Term

    @classmethod
    def parse(cls, lhs: str, rhs: str, sig: Signature) -> PreorderSpec:
        RELATION_VARS.check_disjoint(sig)
        return cls(parse_term(lhs, sig, RELATION_VARS), parse_term(rhs, sig, RELATION_VARS))

    def check(self, sig: Signature) -> None:
        check_term(self.lhs, sig, RELATION_VARS)
        check_term(self.rhs, sig, RELATION_VARS)


def boolean_natural_order(sig: Signature, meet: str = "and") -> PreorderSpec:
    """x <= y iff x meet y = x, over the declared Boolean meet symbol."""
    if meet not in sig:
        raise TermError(f"meet symbol {meet!r} not in signature")
    if sig.arity(meet) != 2:
        raise TermError(f"meet symbol {meet!r} must be binary")
    return PreorderSpec(App(meet, (Var(0), Var(1))), Var(0))


def _idx(e) -> int:
    return getattr(e, "index", e)


def holds(spec: PreorderSpec, carrier, a, b) -> bool:
    """Evaluate both sides at x=a, y=b directly (no cached matrix)."""
    a, b = _idx(a), _idx(b)
    if isinstance(carrier, FreeAlgebra):
        vecs = [carrier.values[a], carrier.values[b]]
        return bool(np.array_equal(carrier.evaluate_vectors(spec.lhs, vecs),
                                   carrier.evaluate_vectors(spec.rhs, vecs)))
    return evaluate(spec.lhs, carrier, (a, b)) == evaluate(spec.rhs, carrier, (a, b))


def _algebra_matrix(spec: PreorderSpec, alg: FiniteAlgebra) -> np.ndarray:
    n = alg.size
    out = np.zeros((n, n), dtype=bool)
    for a, b in itertools.product(range(n), repeat=2):
        out[a, b] = evaluate(spec.lhs, alg, (a, b)) == evaluate(spec.rhs, alg, (a, b))
    return out


_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def relation_matrix(spec: PreorderSpec, carrier) -> np.ndarray:
    """Boolean matrix M with M[a, b] iff a <= b.

    On F the relation holds iff it holds at every coordinate, so the matrix
    is the conjunction of the generators' matrices read through each
    coordinate.
    """
    per_carrier = _cache.setdefault(carrier, {})
    if spec in per_carrier:
        return per_carrier[spec]
    if isinstance(carrier, FreeAlgebra):
        gens = {}
        out = np.ones((carrier.size, carrier.size), dtype=bool)
        for j, (g, _) in enumerate(carrier.coordinates):
            if g not in gens:
                gens[g] = _algebra_matrix(spec, carrier.presentation.generators[g])
            col = carrier.values[:, j]
            out &= gens[g][col[:, None], col[None, :]]
    else:
        out = _algebra_matrix(spec, carrier)
    out.setflags(write=False)
    per_carrier[spec] = out
    return out


@dataclass
class PreorderReport:
    reflexive: bool
    transitive: bool
    antisymmetric: bool
    counterexamples: dict = field(default_factory=dict)

    @property
    def is_preorder(self) -> bool:
        return self.reflexive and self.transitive


def check_preorder_matrix(leq: np.ndarray) -> PreorderReport:
    n = leq.shape[0]
    cex = {}
    diag = np.diag(leq)
    reflexive = bool(diag.all())
    if not reflexive:
        cex["reflexive"] = (int(np.flatnonzero(~diag)[0]),)
    # a<=b, b<=c but not a<=c
    two_step = (leq.astype(np.int64) @ leq.astype(np.int64)) > 0
    bad = two_step & ~leq
    transitive = not bad.any()
    if not transitive:
        a, c = (int(i) for i in np.argwhere(bad)[0])
        b = int(np.flatnonzero(leq[a] & leq[:, c])[0])
        cex["transitive"] = (a, b, c)
    sym = leq & leq.T & ~np.eye(n, dtype=bool)
    antisymmetric = not sym.any()
    if not antisymmetric:
        cex["antisymmetric"] = tuple(int(i) for i in np.argwhere(sym)[0])
    return PreorderReport(reflexive, transitive, antisymmetric, cex)


def verify_preorder(spec: PreorderSpec, carrier) -> PreorderReport:
    return check_preorder_matrix(relation_matrix(spec, carrier))


def strict_matrix(leq: np.ndarray) -> np.ndarray:
    return leq & ~leq.T


def cover_matrix(leq: np.ndarray) -> np.ndarray:
    """C[a, c] iff a < c with nothing strictly between."""
    lt = strict_matrix(leq)
    between = (lt.astype(np.int64) @ lt.astype(np.int64)) > 0
    return lt & ~between


def strictly_less(spec: PreorderSpec, carrier, a, b) -> bool:
    leq = relation_matrix(spec, carrier)
    a, b = _idx(a), _idx(b)
    return bool(leq[a, b] and not leq[b, a])


def covers(spec: PreorderSpec, carrier, a, c) -> bool:
    """True iff c covers a."""
    return bool(cover_matrix(relation_matrix(spec, carrier))[_idx(a), _idx(c)])


def cover_set(spec: PreorderSpec, carrier, a, b=None) -> list[int]:
    """All covers of a, optionally restricted to those below b."""
    leq = relation_matrix(spec, carrier)
    row = cover_matrix(leq)[_idx(a)]
    if b is not None:
        row = row & leq[:, _idx(b)]
    return [int(c) for c in np.flatnonzero(row)]


def find_cover_in_interval(spec: PreorderSpec, carrier, a, b) -> int:
    """Least-index c with a < c <= b and no x with a < x < c."""
    if not strictly_less(spec, carrier, a, b):
        raise ValueError(f"precondition violated: {_idx(a)} is not strictly below {_idx(b)}")
    found = cover_set(spec, carrier, a, b)
    if not found:  # impossible for a pre-order on a finite carrier
        raise RuntimeError(f"no cover of {_idx(a)} below {_idx(b)}")
    return found[0]


def atomic_counterexample(leq: np.ndarray) -> tuple[int, int] | None:
    """First strict pair a < b with no cover of a in (a, b], or None."""
    lt = strict_matrix(leq)
    reach = (cover_matrix(leq).astype(np.int64) @ leq.astype(np.int64)) > 0
    bad = lt & ~reach
    if bad.any():
        a, b = np.argwhere(bad)[0]
        return int(a), int(b)
    return None


def is_atomic(spec: PreorderSpec, carrier):
    """``(True, None)`` or ``(False, (a, b))`` for an interval without a cover of a."""
    cex = atomic_counterexample(relation_matrix(spec, carrier))
    return cex is None, cex


def strict_pairs(spec: PreorderSpec, carrier) -> list[tuple[int, int]]:
    lt = strict_matrix(relation_matrix(spec, carrier))
    return [(int(a), int(b)) for a, b in np.argwhere(lt)]
