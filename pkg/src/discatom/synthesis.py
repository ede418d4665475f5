"""Cover-term synthesis for definable pre-orders on free algebras.

Given alpha < beta in F, pick a coordinate h: F -> A separating them, take a
cover c of h(alpha) below h(beta) in the finite algebra A, describe A by its
diagram over representative terms, compile the diagram into one equation
delta = epsilon with the switching term, and return

    gamma = switch(delta, epsilon, rho(c), alpha).

Everything is then re-checked exhaustively on the materialised F.
"""
from __future__ import annotations

import itertools
import weakref
from dataclasses import dataclass, field

import numpy as np

from .algebra import FiniteAlgebra, Homomorphism, VarietyPresentation, subalgebra, subalgebra_closure
from .free import FreeAlgebra, FreeElement, element_of_term, term_closure
from .preorder import (
    PreorderSpec,
    cover_matrix,
    find_cover_in_interval,
    relation_matrix,
    verify_preorder,
)
from .terms import App, Signature, Term, Var, VariableSet, derive_discriminator, evaluate, instantiate, print_term


# ---------------------------------------------------------------- diagram

@dataclass(frozen=True)
class DiagramFormula:
    """Conjunction of equations and disequations between terms over X."""

    equations: tuple[tuple[Term, Term], ...]
    disequations: tuple[tuple[Term, Term], ...]

    def __len__(self):
        return len(self.equations) + len(self.disequations)

    def first_failure(self, alg: FiniteAlgebra, asg) -> tuple[str, int] | None:
        for i, (p, q) in enumerate(self.equations):
            if evaluate(p, alg, asg) != evaluate(q, alg, asg):
                return "equation", i
        for i, (p, q) in enumerate(self.disequations):
            if evaluate(p, alg, asg) == evaluate(q, alg, asg):
                return "disequation", i
        return None

    def holds_in(self, alg: FiniteAlgebra, asg) -> bool:
        return self.first_failure(alg, asg) is None

    def render(self, variables: VariableSet) -> tuple[list[list[str]], list[list[str]]]:
        eqs = [[print_term(p, variables), print_term(q, variables)] for p, q in self.equations]
        neqs = [[print_term(p, variables), print_term(q, variables)] for p, q in self.disequations]
        return eqs, neqs


@dataclass(frozen=True)
class EquationPair:
    delta: Term
    epsilon: Term
    strategy: str  # "constants-witness" | "designated-pair"
    designated: tuple[Term, Term] | None = None


def build_representatives(A: FiniteAlgebra, assignment, sig: Signature, m: int) -> tuple[Term, ...]:
    """Smallest term over X naming each element of A under ``assignment``.

    ``A`` must be generated by the assigned values.
    """
    closure = term_closure([A], [(0, tuple(assignment))], sig, m)
    rho: list[Term | None] = [None] * A.size
    for i, value in enumerate(closure.values[:, 0]):
        rho[int(value)] = closure.witnesses[i]
    missing = [a for a, t in enumerate(rho) if t is None]
    if missing:
        raise ValueError(f"elements {missing} of {A.name} are not generated by {tuple(assignment)}")
    return tuple(rho)


def build_diagram(A: FiniteAlgebra, rho, m: int, assignment, sig: Signature) -> DiagramFormula:
    """Generator equations, operation-table equations and pairwise disequations."""
    equations = [(Var(i), rho[assignment[i]]) for i in range(m)]
    for symbol, arity in sig.symbols:
        for args in itertools.product(range(A.size), repeat=arity):
            equations.append((App(symbol, [rho[a] for a in args]), rho[A.apply(symbol, args)]))
    disequations = [(rho[a], rho[b]) for a, b in itertools.combinations(range(A.size), 2)]
    return DiagramFormula(tuple(equations), tuple(disequations))


def compile_to_equation(eta: DiagramFormula, vp: VarietyPresentation, designated=None) -> EquationPair:
    """Fold the diagram into a single equation using the switching term.

    A disequation p != q becomes switch(p, q, u, w) = w for a pair (u, w)
    that is distinct wherever the diagram holds: two constants distinct in
    every generator if the signature has them, otherwise ``designated``
    (default: the sides of the first disequation). Conjunction uses the
    ternary discriminator t:

        (p = q) and (d = e)   iff   t(p, q, d) = t(q, p, e)

    with the running pair in the third slot so term size stays linear.
    """
    if len(eta) == 0:
        raise ValueError("cannot compile an empty diagram")
    consts = vp.distinct_constants()
    if consts is not None:
        strategy = "constants-witness"
        u, w = App(consts[0]), App(consts[1])
    elif eta.disequations:
        strategy = "designated-pair"
        u, w = designated if designated is not None else eta.disequations[0]
    else:
        strategy = "designated-pair"
        u = w = None
    clauses = list(eta.equations)
    for p, q in eta.disequations:
        clauses.append((instantiate(vp.switch, [p, q, u, w]), w))
    disc = derive_discriminator(vp.switch)
    delta, epsilon = clauses[0]
    for p, q in clauses[1:]:
        delta = instantiate(disc, [p, q, delta])
        epsilon = instantiate(disc, [q, p, epsilon])
    return EquationPair(delta, epsilon, strategy, None if u is None else (u, w))


def build_gamma(pair: EquationPair, rho_c: Term, alpha_witness: Term, vp: VarietyPresentation) -> Term:
    return instantiate(vp.switch, [pair.delta, pair.epsilon, rho_c, alpha_witness])


# ---------------------------------------------------------------- per-coordinate data

@dataclass(frozen=True, eq=False)
class CoordinateData:
    """Everything in the construction that depends only on the coordinate."""

    coordinate: int
    A: FiniteAlgebra
    h: Homomorphism
    assignment: tuple[int, ...]
    rho: tuple[Term, ...]
    eta: DiagramFormula
    pair: EquationPair


_coord_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def coordinate_diagram(fa: FreeAlgebra, j: int) -> CoordinateData:
    cache = _coord_cache.setdefault(fa, {})
    if j in cache:
        return cache[j]
    gen = fa.generator_of(j)
    asg = fa.coordinates[j][1]
    A = subalgebra(gen, subalgebra_closure(gen, asg))
    pos = {e: i for i, e in enumerate(A.embedding)}
    h = Homomorphism(fa, A, tuple(pos[int(v)] for v in fa.values[:, j]))
    if not h.is_surjective():
        raise AssertionError("projection onto the generated subalgebra is not surjective")
    a_asg = tuple(pos[v] for v in asg)
    m = len(fa.variables)
    rho = build_representatives(A, a_asg, fa.signature, m)
    eta = build_diagram(A, rho, m, a_asg, fa.signature)
    pair = compile_to_equation(eta, fa.presentation)
    data = CoordinateData(j, A, h, a_asg, rho, eta, pair)
    cache[j] = data
    return data


def find_separating_hom(fa: FreeAlgebra, spec: PreorderSpec, alpha, beta) -> CoordinateData:
    """First coordinate h with h(beta) not <= h(alpha), with A = h(F)."""
    a, b = getattr(alpha, "index", alpha), getattr(beta, "index", beta)
    leq = relation_matrix(spec, fa)
    if not (leq[a, b] and not leq[b, a]):
        raise ValueError(f"precondition violated: element {a} is not strictly below {b}")
    gen_cache = {}
    for j, (g, _) in enumerate(fa.coordinates):
        if g not in gen_cache:
            gen_cache[g] = relation_matrix(spec, fa.presentation.generators[g])
        if not gen_cache[g][fa.values[b, j], fa.values[a, j]]:
            return coordinate_diagram(fa, j)
    raise AssertionError("no separating coordinate although beta is not below alpha")


# ---------------------------------------------------------------- certificates

@dataclass
class CheckTranscript:
    alpha_le_gamma: bool
    gamma_le_beta: bool
    gamma_not_le_alpha: bool
    dichotomy: bool
    dichotomy_witness: int | None
    oracle_cover: bool
    gamma_term_matches: bool
    h_delta_eq_epsilon: bool
    h_gamma_is_c: bool

    @property
    def passed(self) -> bool:
        return all((
            self.alpha_le_gamma, self.gamma_le_beta, self.gamma_not_le_alpha, self.dichotomy,
            self.oracle_cover, self.gamma_term_matches, self.h_delta_eq_epsilon, self.h_gamma_is_c,
        ))

    def as_dict(self) -> dict:
        return {
            "alpha_le_gamma": self.alpha_le_gamma,
            "gamma_le_beta": self.gamma_le_beta,
            "gamma_not_le_alpha": self.gamma_not_le_alpha,
            "dichotomy": self.dichotomy,
            "dichotomy_witness": self.dichotomy_witness,
            "oracle_cover": self.oracle_cover,
            "gamma_term_matches": self.gamma_term_matches,
            "h_delta_eq_epsilon": self.h_delta_eq_epsilon,
            "h_gamma_is_c": self.h_gamma_is_c,
            "passed": self.passed,
        }


@dataclass
class CoverCertificate:
    alpha: FreeElement
    beta: FreeElement
    coordinate: int
    A: FiniteAlgebra
    h: Homomorphism
    c: int
    rho: tuple[Term, ...]
    eta: DiagramFormula
    pair: EquationPair
    gamma_term: Term
    gamma: FreeElement
    checks: CheckTranscript | None = None

    def to_dict(self, fa: FreeAlgebra) -> dict:
        X = fa.variables
        g, asg = fa.coordinates[self.coordinate]
        emb = self.A.embedding
        eqs, neqs = self.eta.render(X)
        return {
            "alpha": print_term(self.alpha.witness, X),
            "beta": print_term(self.beta.witness, X),
            "coordinate": {
                "index": self.coordinate,
                "generator": fa.presentation.generators[g].name,
                "assignment": dict(zip(X.names, asg)),
            },
            "subalgebra": list(emb),
            "c": emb[self.c],
            "rho": {str(emb[a]): print_term(t, X) for a, t in enumerate(self.rho)},
            "eta_equations": eqs,
            "eta_disequations": neqs,
            "delta": print_term(self.pair.delta, X),
            "epsilon": print_term(self.pair.epsilon, X),
            "gamma": {
                "term": print_term(self.gamma_term, X),
                "index": self.gamma.index,
                "values": list(self.gamma.values),
                "witness": print_term(self.gamma.witness, X),
            },
            "checks": None if self.checks is None else self.checks.as_dict(),
        }


def verify_certificate(cert: CoverCertificate, fa: FreeAlgebra, spec: PreorderSpec) -> CheckTranscript:
    """Exhaustive re-check of the cover property on F; failures are recorded."""
    leq = relation_matrix(spec, fa)
    a, b, g = cert.alpha.index, cert.beta.index, cert.gamma.index
    # tau with alpha <= tau <= gamma, but neither tau <= alpha nor gamma <= tau
    bad = leq[a] & leq[:, g] & ~leq[:, a] & ~leq[g]
    witness = int(np.flatnonzero(bad)[0]) if bad.any() else None
    term_el = element_of_term(fa, cert.gamma_term)
    j = cert.coordinate
    gen = fa.generator_of(j)
    asg = fa.coordinates[j][1]
    h_delta = evaluate(cert.pair.delta, gen, asg)
    h_eps = evaluate(cert.pair.epsilon, gen, asg)
    return CheckTranscript(
        alpha_le_gamma=bool(leq[a, g]),
        gamma_le_beta=bool(leq[g, b]),
        gamma_not_le_alpha=not bool(leq[g, a]),
        dichotomy=witness is None,
        dichotomy_witness=witness,
        oracle_cover=bool(cover_matrix(leq)[a, g]),
        gamma_term_matches=term_el.index == g,
        h_delta_eq_epsilon=h_delta == h_eps,
        h_gamma_is_c=cert.h(g) == cert.c,
    )


def _require_preorder(fa: FreeAlgebra, spec: PreorderSpec) -> None:
    report = verify_preorder(spec, fa)
    if not report.is_preorder:
        raise ValueError(f"relation is not a pre-order on F: {report.counterexamples}")


def synthesize_cover(fa: FreeAlgebra, spec: PreorderSpec, alpha, beta, verify: bool = True) -> CoverCertificate:
    _require_preorder(fa, spec)
    alpha = alpha if isinstance(alpha, FreeElement) else fa.element(alpha)
    beta = beta if isinstance(beta, FreeElement) else fa.element(beta)
    data = find_separating_hom(fa, spec, alpha, beta)
    h = data.h
    c = find_cover_in_interval(spec, data.A, h(alpha.index), h(beta.index))
    gamma_term = build_gamma(data.pair, data.rho[c], alpha.witness, fa.presentation)
    gamma = element_of_term(fa, gamma_term)
    cert = CoverCertificate(alpha, beta, data.coordinate, data.A, h, c, data.rho, data.eta,
                            data.pair, gamma_term, gamma)
    if verify:
        cert.checks = verify_certificate(cert, fa, spec)
    return cert


# ---------------------------------------------------------------- embeddings and audits

@dataclass
class EmbeddingCheck:
    eta_holds: bool
    image: tuple[int, ...]
    injective: bool
    homomorphism: bool

    @property
    def embeds(self) -> bool:
        return self.eta_holds and self.injective and self.homomorphism


def induced_map(rho, B: FiniteAlgebra, asg) -> tuple[int, ...]:
    """a -> k(rho(a)) for the evaluation k given by ``asg`` into B."""
    return tuple(evaluate(t, B, asg) for t in rho)


def embedding_check(A: FiniteAlgebra, rho, eta: DiagramFormula, B: FiniteAlgebra, asg) -> EmbeddingCheck:
    image = induced_map(rho, B, asg)
    injective = len(set(image)) == len(image)
    hom = all(
        image[A.apply(symbol, args)] == B.apply(symbol, [image[a] for a in args])
        for symbol, arity in A.signature.symbols
        for args in itertools.product(range(A.size), repeat=arity)
    )
    return EmbeddingCheck(eta.holds_in(B, asg), image, injective, hom)


@dataclass
class CompilationAudit:
    coordinate: int
    assignments: int = 0
    eta_true: int = 0
    escapes: int = 0
    degenerate_seen: int = 0
    degenerate_escapes: int = 0
    soundness_violations: list = field(default_factory=list)
    converse_violations: list = field(default_factory=list)
    embedding_violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.soundness_violations or self.converse_violations or self.embedding_violations)


def audit_compilation(fa: FreeAlgebra, data: CoordinateData, inventory=None) -> CompilationAudit:
    """Check eta <-> delta = epsilon over every SI member and assignment.

    The converse may fail only where the induced map collapses A to one
    point; then every element of F must take that same value.
    """
    vp = fa.presentation
    inventory = inventory if inventory is not None else vp.si_inventory()
    m = len(fa.variables)
    audit = CompilationAudit(data.coordinate)
    witnesses = [fa.witness(i) for i in range(fa.size)]
    for B in inventory:
        for asg in itertools.product(range(B.size), repeat=m):
            audit.assignments += 1
            where = (B.name, asg)
            eta = data.eta.holds_in(B, asg)
            same = evaluate(data.pair.delta, B, asg) == evaluate(data.pair.epsilon, B, asg)
            degenerate = len(set(asg)) == 1 and subalgebra_closure(B, asg) == frozenset(asg)
            audit.degenerate_seen += degenerate
            if eta:
                audit.eta_true += 1
                if not same:
                    audit.soundness_violations.append(where)
                check = embedding_check(data.A, data.rho, data.eta, B, asg)
                if not check.embeds:
                    audit.embedding_violations.append(where)
            elif same:
                image = set(induced_map(data.rho, B, asg))
                values = {evaluate(t, B, asg) for t in witnesses}
                if len(image) == 1 and values == image:
                    audit.escapes += 1
                    audit.degenerate_escapes += degenerate
                else:
                    audit.converse_violations.append(where)
    return audit
