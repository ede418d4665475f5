"""Finitely generated free algebras, materialised as value vectors.

An element of F(X) is the vector of values of a term at every coordinate,
a coordinate being one assignment of X into one generator. Elements are
discovered by term size (node count), so each carries a smallest witness.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .algebra import CapExceeded, FiniteAlgebra, Homomorphism, VarietyPresentation
from .terms import App, Signature, Term, TermError, Var, VariableSet, default_variables, evaluate, _postorder

DEFAULT_MAX_ELEMENTS = 20_000
_BATCH_CELLS = 4_000_000


def _void_keys(rows: np.ndarray) -> np.ndarray:
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    return rows.view(np.dtype((np.void, rows.dtype.itemsize * rows.shape[1]))).ravel()


def _compositions(total: int, parts: int, sizes: Sequence[int]):
    """Tuples of ``parts`` sizes from ``sizes`` summing to ``total``, lexicographic."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for s in sizes:
        if s > total:
            break
        for rest in _compositions(total - s, parts - 1, sizes):
            yield (s,) + rest


class _Pointwise:
    """Pointwise operations over a list of coordinates (generator, assignment)."""

    def __init__(self, algebras: Sequence[FiniteAlgebra], coords: Sequence[tuple[int, tuple[int, ...]]]):
        self.algebras = algebras
        self.coords = coords
        groups = []
        for j, (g, _) in enumerate(coords):
            if groups and groups[-1][0] == g:
                groups[-1][2] = j + 1
            else:
                groups.append([g, j, j + 1])
        self.groups = [(algebras[g], slice(a, b)) for g, a, b in groups]

    def variable_vectors(self, m: int) -> list[np.ndarray]:
        return [np.array([asg[i] for _, asg in self.coords], dtype=np.int64) for i in range(m)]

    def apply(self, symbol: str, operands: Sequence[np.ndarray]) -> np.ndarray:
        """Apply to operand batches of shape (len_i, C); returns shape (len_1..len_k, C)."""
        k = len(operands)
        shape = tuple(op.shape[0] for op in operands)
        out = np.empty(shape + (len(self.coords),), dtype=np.int64)
        for alg, cols in self.groups:
            tab = alg.table_array(symbol)
            if k == 0:
                out[..., cols] = tab[()]
                continue
            args = []
            for i, op in enumerate(operands):
                view = op[:, cols]
                args.append(view.reshape((1,) * i + (shape[i],) + (1,) * (k - i - 1) + (view.shape[1],)))
            out[..., cols] = tab[tuple(args)]
        return out

    def evaluate(self, t: Term, var_values: Sequence[np.ndarray]) -> np.ndarray:
        memo: dict[int, np.ndarray] = {}
        for node in _postorder(t):
            if isinstance(node, Var):
                try:
                    memo[id(node)] = var_values[node.index]
                except IndexError:
                    raise TermError(f"unassigned variable index {node.index}") from None
            else:
                ops = [memo[id(a)][None, :] for a in node.args]
                memo[id(node)] = self.apply(node.symbol, ops).reshape(-1)
        return memo[id(t)]


@dataclass
class Closure:
    """Result of :func:`term_closure`."""

    values: np.ndarray
    recipes: list[tuple]
    sizes: list[int]
    layers: list[tuple[int, int]]

    @cached_property
    def witnesses(self) -> list[Term]:
        out: list[Term] = []
        for symbol, operands in self.recipes:
            if symbol is None:
                out.append(Var(operands))
            else:
                out.append(App(symbol, [out[i] for i in operands]))
        return out


def term_closure(
    algebras: Sequence[FiniteAlgebra],
    coords: Sequence[tuple[int, tuple[int, ...]]],
    sig: Signature,
    m: int,
    cap: int = DEFAULT_MAX_ELEMENTS,
) -> Closure:
    """Closure of the variable vectors under all pointwise operations.

    Level s holds the values first reached by a term of s nodes. Within a
    level the order is: variables, then symbols in signature order, operand
    tuples in lexicographic order of operand index. Since indices grow with
    size, this is also lexicographic in the operands themselves.
    """
    pw = _Pointwise(algebras, coords)
    C = len(coords)
    seen: dict[bytes, int] = {}
    rows: list[np.ndarray] = []
    recipes: list[tuple] = []
    sizes: list[int] = []
    by_size: dict[int, list[int]] = {}
    layers: list[tuple[int, int]] = []

    def add(row: np.ndarray, recipe, size: int) -> None:
        key = row.tobytes()
        if key in seen:
            return
        seen[key] = len(rows)
        by_size.setdefault(size, []).append(len(rows))
        rows.append(row.copy())
        recipes.append(recipe)
        sizes.append(size)
        if len(rows) > cap:
            raise CapExceeded("free algebra", cap, len(rows))

    for i, vec in enumerate(pw.variable_vectors(m)):
        add(vec, (None, i), 1)
    for symbol in sig.constants:
        add(pw.apply(symbol, []), (symbol, ()), 1)
    layers.append((1, len(rows)))

    max_arity = sig.max_arity
    level = 2
    while max_arity and level <= 1 + max_arity * max(sizes, default=0):
        before = len(rows)
        avail = sorted(by_size)
        arrays = {s: np.array(by_size[s], dtype=np.int64) for s in avail}
        V = np.array(rows, dtype=np.int64).reshape(len(rows), C)
        for symbol, arity in sig.symbols:
            if arity == 0:
                continue
            for comp in _compositions(level - 1, arity, avail):
                idx = [arrays[s] for s in comp]
                rest = int(np.prod([len(a) for a in idx[1:]], dtype=np.int64)) if arity > 1 else 1
                step = max(1, _BATCH_CELLS // max(1, rest * C))
                for start in range(0, len(idx[0]), step):
                    chunk = [idx[0][start : start + step]] + idx[1:]
                    shape = tuple(len(a) for a in chunk)
                    batch = pw.apply(symbol, [V[a] for a in chunk]).reshape(-1, C)
                    _, first = np.unique(_void_keys(batch), return_index=True)
                    for flat in np.sort(first):
                        row = batch[flat]
                        if row.tobytes() in seen:
                            continue
                        pos = np.unravel_index(flat, shape)
                        operands = tuple(int(chunk[i][p]) for i, p in enumerate(pos))
                        add(row, (symbol, operands), level)
        if len(rows) > before:
            layers.append((level, len(rows) - before))
        level += 1
    values = np.array(rows, dtype=np.int64).reshape(len(rows), C)
    return Closure(values, recipes, sizes, layers)


@dataclass(frozen=True)
class FreeElement:
    index: int
    values: tuple[int, ...]
    witness: Term


class FreeAlgebra:
    """F(X) for a presentation, as the subalgebra of the product of all
    coordinate copies of the generators generated by the variable vectors."""

    def __init__(self, presentation: VarietyPresentation, variables: VariableSet, closure: Closure, coordinates):
        self.presentation = presentation
        self.variables = variables
        self.coordinates = coordinates
        self.closure = closure
        self.values = closure.values
        self.size = len(closure.recipes)
        self._pw = _Pointwise(presentation.generators, coordinates)
        keys = _void_keys(self.values)
        self._order = np.argsort(keys, kind="stable")
        self._sorted_keys = keys[self._order]
        self._lookup = {row.tobytes(): i for i, row in enumerate(self.values)}

    @property
    def signature(self) -> Signature:
        return self.presentation.signature

    @property
    def layers(self) -> list[tuple[int, int]]:
        return self.closure.layers

    def __len__(self) -> int:
        return self.size

    def witness(self, i: int) -> Term:
        return self.closure.witnesses[i]

    def element(self, i: int) -> FreeElement:
        return FreeElement(i, tuple(int(v) for v in self.values[i]), self.witness(i))

    @property
    def elements(self) -> list[FreeElement]:
        return [self.element(i) for i in range(self.size)]

    def index_of(self, values) -> int | None:
        row = np.asarray(values, dtype=np.int64).reshape(-1)
        return self._lookup.get(row.tobytes())

    def indices_of(self, rows: np.ndarray) -> np.ndarray:
        """Element indices of many value rows at once (all must be members)."""
        keys = _void_keys(rows.reshape(-1, len(self.coordinates)))
        pos = np.searchsorted(self._sorted_keys, keys)
        pos = np.minimum(pos, len(self._sorted_keys) - 1)
        if not np.all(self._sorted_keys[pos] == keys):
            raise ValueError("vector outside the free algebra")
        return self._order[pos]

    def generator_of(self, j: int) -> FiniteAlgebra:
        return self.presentation.generators[self.coordinates[j][0]]

    def coordinate_label(self, j: int) -> str:
        g, asg = self.coordinates[j]
        pairs = ",".join(f"{n}={v}" for n, v in zip(self.variables.names, asg))
        return f"{self.presentation.generators[g].name}:{pairs}"

    def evaluate_vectors(self, t: Term, var_values: Sequence[np.ndarray]) -> np.ndarray:
        return self._pw.evaluate(t, var_values)

    def apply(self, symbol: str, indices: Sequence[int]) -> int:
        row = self._pw.apply(symbol, [self.values[[i]] for i in indices]).reshape(-1)
        return self.index_of(row)

    def as_algebra(self) -> FiniteAlgebra:
        """Operation tables of F over element indices (cached)."""
        if "_as_algebra" not in self.__dict__:
            everything = np.arange(self.size)
            tables = {}
            for symbol, arity in self.signature.symbols:
                batch = self._pw.apply(symbol, [self.values[everything]] * arity)
                tables[symbol] = tuple(int(i) for i in self.indices_of(batch))
            self._as_algebra = FiniteAlgebra("F", self.size, self.signature, tables)
        return self._as_algebra


def build_free_algebra(
    vp: VarietyPresentation,
    m: int,
    cap: int = DEFAULT_MAX_ELEMENTS,
    variables: VariableSet | None = None,
) -> FreeAlgebra:
    if m < 0:
        raise ValueError("number of generators must be non-negative")
    variables = variables or default_variables(m)
    if len(variables) != m:
        raise ValueError(f"{len(variables)} variable names for {m} generators")
    variables.check_disjoint(vp.signature)
    coords = [
        (g, asg)
        for g, alg in enumerate(vp.generators)
        for asg in itertools.product(range(alg.size), repeat=m)
    ]
    closure = term_closure(vp.generators, coords, vp.signature, m, cap)
    return FreeAlgebra(vp, variables, closure, coords)


def element_of_term(fa: FreeAlgebra, t: Term) -> FreeElement:
    gens = fa._pw.variable_vectors(len(fa.variables))
    row = fa.evaluate_vectors(t, gens)
    i = fa.index_of(row)
    if i is None:
        raise ValueError("term value is not an element of the free algebra")
    return fa.element(i)


def separating_coordinates(fa: FreeAlgebra, a, b) -> list[int]:
    va = fa.values[getattr(a, "index", a)]
    vb = fa.values[getattr(b, "index", b)]
    return [int(j) for j in np.flatnonzero(va != vb)]


def validate_identity(vp: VarietyPresentation, lhs: Term, rhs: Term, n_vars: int):
    """Check lhs = rhs in every generator under every assignment.

    Returns ``(True, None)`` or ``(False, (generator name, assignment))``.
    """
    for g in vp.generators:
        for asg in itertools.product(range(g.size), repeat=n_vars):
            if evaluate(lhs, g, asg) != evaluate(rhs, g, asg):
                return False, (g.name, asg)
    return True, None


def induced_hom(fa: FreeAlgebra, asg: Sequence[int], target: FiniteAlgebra) -> Homomorphism:
    """The homomorphism F -> target extending ``asg`` (values in target).

    ``target`` must be a generator or a subalgebra of one; the map is read
    off the witness terms and cross-checked against F's coordinate.
    """
    root = target.root
    gens = fa.presentation.generators
    if not any(root is g for g in gens):
        raise ValueError(f"{target.name} is not a subalgebra of a generator")
    if len(asg) != len(fa.variables) or any(not 0 <= a < target.size for a in asg):
        raise ValueError(f"assignment {tuple(asg)} does not map into {target.name}")
    g = next(i for i, gen in enumerate(gens) if gen is root)
    j = fa.coordinates.index((g, tuple(target.to_root(a) for a in asg)))
    values = tuple(evaluate(fa.witness(i), target, asg) for i in range(fa.size))
    if any(target.to_root(v) != fa.values[i, j] for i, v in enumerate(values)):
        raise AssertionError("witness evaluation disagrees with the free algebra coordinate")
    return Homomorphism(fa, target, values)
