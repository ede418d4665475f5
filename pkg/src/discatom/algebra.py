"""Finite algebras given by operation tables.

Covers the algebra file format, validation, switching-term checks,
subuniverse enumeration, a congruence oracle and homomorphisms.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .terms import SWITCH_VARS, Signature, Term, TermError, evaluate


class AlgebraFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class SwitchingTermError(ValueError):
    def __init__(self, algebra: str, counterexample: tuple[int, int, int, int], value: int):
        self.algebra = algebra
        self.counterexample = counterexample
        self.value = value
        x, y, u, v = counterexample
        super().__init__(
            f"switching term fails on {algebra} at (x,y,u,v)=({x},{y},{u},{v}): got {value}"
        )


class CapExceeded(RuntimeError):
    def __init__(self, what: str, cap: int, reached: int):
        self.cap = cap
        self.reached = reached
        super().__init__(f"{what}: cap {cap} exceeded (reached {reached})")


def _index(args: Sequence[int], n: int) -> int:
    idx = 0
    for a in args:
        idx = idx * n + a
    return idx


@dataclass(frozen=True, eq=False)
class FiniteAlgebra:
    """Carrier {0..size-1} with one flat row-major table per symbol.

    Subalgebras keep a reference to their ``parent`` and the ``embedding``
    listing which parent element each of their elements stands for.
    """

    name: str
    size: int
    signature: Signature
    tables: dict[str, tuple[int, ...]]
    parent: FiniteAlgebra | None = None
    embedding: tuple[int, ...] | None = None

    def apply(self, symbol: str, args: Sequence[int]) -> int:
        return self.tables[symbol][_index(args, self.size)]

    def table_array(self, symbol: str) -> np.ndarray:
        cache = self.__dict__.setdefault("_arrays", {})
        if symbol not in cache:
            k = self.signature.arity(symbol)
            cache[symbol] = np.asarray(self.tables[symbol], dtype=np.int64).reshape((self.size,) * k)
        return cache[symbol]

    @property
    def root(self) -> FiniteAlgebra:
        alg = self
        while alg.parent is not None:
            alg = alg.parent
        return alg

    def to_root(self, element: int) -> int:
        alg = self
        while alg.parent is not None:
            element = alg.embedding[element]
            alg = alg.parent
        return element

    def __repr__(self):
        return f"FiniteAlgebra({self.name!r}, size={self.size})"


@dataclass
class ValidationReport:
    algebra: str
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_algebra(alg: FiniteAlgebra) -> ValidationReport:
    report = ValidationReport(alg.name)
    if alg.size < 1:
        report.violations.append(f"size must be positive, got {alg.size}")
        return report
    for symbol, arity in alg.signature.symbols:
        table = alg.tables.get(symbol)
        if table is None:
            report.violations.append(f"op {symbol}: missing table")
            continue
        expected = alg.size**arity
        if len(table) != expected:
            report.violations.append(
                f"op {symbol}: totality violation, {len(table)} entries instead of {expected}"
            )
        for i, value in enumerate(table):
            if not 0 <= value < alg.size:
                report.violations.append(
                    f"op {symbol}: range violation, entry {i} is {value} (size {alg.size})"
                )
    for symbol in alg.tables:
        if symbol not in alg.signature:
            report.violations.append(f"op {symbol}: table without signature entry")
    return report


def verify_switching_term(alg: FiniteAlgebra, switch: Term):
    """Exhaustive check of switch(x,y,u,v) = u if x=y else v.

    Returns ``(True, None)`` or ``(False, ((x, y, u, v), value))`` for the
    first failing tuple in lexicographic order.
    """
    for tup in itertools.product(range(alg.size), repeat=4):
        x, y, u, v = tup
        value = evaluate(switch, alg, tup)
        if value != (u if x == y else v):
            return False, (tup, value)
    return True, None


# ---------------------------------------------------------------- file format

def parse_algebra(text: str) -> FiniteAlgebra:
    """Read the line-oriented ``algebra/size/op`` format.

    Table entries may span several lines. Count mismatches are left for
    :func:`validate_algebra` to report; malformed tokens raise.
    """
    name = None
    size = None
    symbols: list[tuple[str, int]] = []
    tables: dict[str, list[int]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        head = words[0]
        if head == "algebra":
            if len(words) != 2 or name is not None:
                raise AlgebraFormatError("expected a single 'algebra <name>' line", lineno)
            name = words[1]
        elif head == "size":
            if len(words) != 2 or size is not None or not words[1].isdigit():
                raise AlgebraFormatError("expected 'size <n>'", lineno)
            size = int(words[1])
        elif head == "op":
            if len(words) != 3 or not words[2].isdigit():
                raise AlgebraFormatError("expected 'op <symbol> <arity>'", lineno)
            if name is None or size is None:
                raise AlgebraFormatError("'op' before 'algebra' and 'size'", lineno)
            if words[1] in tables:
                raise AlgebraFormatError(f"duplicate op {words[1]!r}", lineno)
            current = words[1]
            symbols.append((current, int(words[2])))
            tables[current] = []
        else:
            if current is None:
                raise AlgebraFormatError(f"unexpected line {line!r}", lineno)
            for word in words:
                try:
                    tables[current].append(int(word))
                except ValueError:
                    raise AlgebraFormatError(f"non-integer table entry {word!r}", lineno) from None
    if name is None or size is None:
        raise AlgebraFormatError("missing 'algebra' or 'size' header")
    try:
        sig = Signature(tuple(symbols))
    except TermError as exc:
        raise AlgebraFormatError(str(exc)) from None
    return FiniteAlgebra(name, size, sig, {s: tuple(t) for s, t in tables.items()})


def format_algebra(alg: FiniteAlgebra) -> str:
    lines = [f"algebra {alg.name}", f"size {alg.size}"]
    for symbol, arity in alg.signature.symbols:
        lines.append(f"op {symbol} {arity}")
        table = alg.tables[symbol]
        row = alg.size if arity else 1
        for i in range(0, len(table), row):
            lines.append(" ".join(map(str, table[i : i + row])))
    return "\n".join(lines) + "\n"


def load_algebra(path) -> FiniteAlgebra:
    with open(path, encoding="utf-8") as fh:
        return parse_algebra(fh.read())


# ---------------------------------------------------------------- subalgebras

def subalgebra_closure(alg: FiniteAlgebra, seed) -> frozenset[int]:
    """Least subuniverse containing ``seed`` (constants included)."""
    current = set(seed)
    while True:
        new = set()
        for symbol, arity in alg.signature.symbols:
            for args in itertools.product(sorted(current), repeat=arity):
                value = alg.apply(symbol, args)
                if value not in current:
                    new.add(value)
        if not new:
            return frozenset(current)
        current |= new


def _canonical(universes) -> list[tuple[int, ...]]:
    return sorted((tuple(sorted(u)) for u in universes), key=lambda u: (len(u), u))


def all_subalgebras(alg: FiniteAlgebra, cap: int = 16) -> list[tuple[int, ...]]:
    """Every nonempty subuniverse, sorted by (size, elements).

    Every subuniverse is a join of one-generated ones, so the search grows
    found universes by one element at a time.
    """
    if alg.size > cap:
        raise CapExceeded("subalgebra enumeration", cap, alg.size)
    found = set()
    frontier = []
    empty = subalgebra_closure(alg, ())
    if empty:
        found.add(empty)
        frontier.append(empty)
    for a in range(alg.size):
        u = subalgebra_closure(alg, empty | {a})
        if u not in found:
            found.add(u)
            frontier.append(u)
    while frontier:
        nxt = []
        for u in frontier:
            for a in range(alg.size):
                if a in u:
                    continue
                w = subalgebra_closure(alg, u | {a})
                if w not in found:
                    found.add(w)
                    nxt.append(w)
        frontier = nxt
    return _canonical(found)


def subalgebra(alg: FiniteAlgebra, universe, name: str | None = None) -> FiniteAlgebra:
    """Renumbered copy of ``alg`` restricted to a subuniverse."""
    elems = tuple(sorted(universe))
    pos = {e: i for i, e in enumerate(elems)}
    tables = {}
    for symbol, arity in alg.signature.symbols:
        row = []
        for args in itertools.product(elems, repeat=arity):
            value = alg.apply(symbol, args)
            if value not in pos:
                raise ValueError(f"{set(elems)} is not closed under {symbol}")
            row.append(pos[value])
        tables[symbol] = tuple(row)
    if name is None:
        name = f"{alg.name}[{','.join(map(str, elems))}]"
    return FiniteAlgebra(name, len(elems), alg.signature, tables, parent=alg, embedding=elems)


# ---------------------------------------------------------------- congruences

def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


def _close_congruence(alg: FiniteAlgebra, pairs) -> tuple[int, ...]:
    """Congruence generated by ``pairs``, as block labels (least member)."""
    n = alg.size
    parent = list(range(n))
    work = list(pairs)
    while work:
        a, b = work.pop()
        ra, rb = _find(parent, a), _find(parent, b)
        if ra == rb:
            continue
        parent[max(ra, rb)] = min(ra, rb)
        # compatibility under unary basic translations of the merged pair
        for symbol, arity in alg.signature.symbols:
            for i in range(arity):
                for rest in itertools.product(range(n), repeat=arity - 1):
                    args_a = rest[:i] + (a,) + rest[i:]
                    args_b = rest[:i] + (b,) + rest[i:]
                    work.append((alg.apply(symbol, args_a), alg.apply(symbol, args_b)))
    return tuple(_find(parent, a) for a in range(n))


def enumerate_congruences(alg: FiniteAlgebra, cap: int = 8) -> list[tuple[int, ...]]:
    """All congruences as block-label vectors, from principal ones by joins."""
    if alg.size > cap:
        raise CapExceeded("congruence enumeration", cap, alg.size)
    n = alg.size
    identity = tuple(range(n))
    principal = {_close_congruence(alg, [(a, b)]) for a in range(n) for b in range(a + 1, n)}
    found = {identity} | principal
    frontier = list(found)
    while frontier:
        nxt = []
        for theta in frontier:
            for phi in principal:
                pairs = [(a, theta[a]) for a in range(n)] + [(a, phi[a]) for a in range(n)]
                joined = _close_congruence(alg, pairs)
                if joined not in found:
                    found.add(joined)
                    nxt.append(joined)
        frontier = nxt
    return sorted(found, key=lambda lab: (-len(set(lab)), lab))


# ---------------------------------------------------------------- homomorphisms

class HomomorphismError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Homomorphism:
    """Map from ``source`` to ``target``; commutation is checked on construction."""

    source: object
    target: FiniteAlgebra
    values: tuple[int, ...]
    checked: bool = True

    def __post_init__(self):
        if self.checked:
            bad = self.first_violation()
            if bad is not None:
                raise HomomorphismError(f"not a homomorphism: {bad}")

    def __call__(self, element: int) -> int:
        return self.values[element]

    def first_violation(self):
        src = self.source if isinstance(self.source, FiniteAlgebra) else self.source.as_algebra()
        vals = np.asarray(self.values, dtype=np.int64)
        if len(vals) != src.size or (vals.size and (vals.min() < 0 or vals.max() >= self.target.size)):
            return "value map has wrong length or range"
        for symbol, arity in src.signature.symbols:
            src_tab = src.table_array(symbol)
            tgt_tab = self.target.table_array(symbol)
            lhs = vals[src_tab]
            grids = np.meshgrid(*([vals] * arity), indexing="ij") if arity else []
            rhs = tgt_tab[tuple(grids)] if arity else tgt_tab
            if not np.array_equal(lhs, rhs):
                where = np.argwhere(lhs != rhs)[0]
                return f"{symbol} at {tuple(int(i) for i in where)}"
        return None

    @property
    def image(self) -> frozenset[int]:
        return frozenset(self.values)

    def is_injective(self) -> bool:
        return len(set(self.values)) == len(self.values)

    def is_surjective(self) -> bool:
        return self.image == frozenset(range(self.target.size))


@dataclass(frozen=True)
class VarietyPresentation:
    """Variety generated by finitely many finite algebras with a switching term."""

    generators: tuple[FiniteAlgebra, ...]
    switch: Term

    def __post_init__(self):
        if not self.generators:
            raise ValueError("a presentation needs at least one generator")
        sig = self.generators[0].signature
        for g in self.generators:
            if g.signature != sig:
                raise ValueError(f"generator {g.name} has a different signature")
            report = validate_algebra(g)
            if not report.ok:
                raise AlgebraFormatError(f"{g.name}: {report.violations[0]}")
            if g.size < 2:
                raise ValueError(f"generator {g.name} must have at least 2 elements")
            SWITCH_VARS.check_disjoint(sig)
            ok, bad = verify_switching_term(g, self.switch)
            if not ok:
                raise SwitchingTermError(g.name, *bad)

    @property
    def signature(self) -> Signature:
        return self.generators[0].signature

    def distinct_constants(self) -> tuple[str, str] | None:
        """First pair of constant symbols with different values in every generator."""
        consts = self.signature.constants
        for c1, c2 in itertools.combinations(consts, 2):
            if all(g.apply(c1, ()) != g.apply(c2, ()) for g in self.generators):
                return c1, c2
        return None

    def si_inventory(self, cap: int = 16) -> list[FiniteAlgebra]:
        """Subalgebras of all generators: the subdirectly irreducible members used here."""
        members = []
        for g in self.generators:
            for universe in all_subalgebras(g, cap):
                members.append(g if len(universe) == g.size else subalgebra(g, universe))
        return members
