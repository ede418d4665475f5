"""Signatures, terms, s-expression parsing/printing and term evaluation.

Terms are immutable and hash-consed only by structure; large terms built by
the cover construction share subterms, so every traversal here is iterative
and memoised on node identity.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class TermError(ValueError):
    """Raised for malformed term text or ill-formed terms."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


@dataclass(frozen=True)
class Signature:
    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [name for name, _ in self.symbols]
        if len(set(names)) != len(names):
            raise TermError(f"duplicate operation symbols in {names}")
        for name, arity in self.symbols:
            if not IDENT.fullmatch(name):
                raise TermError(f"bad symbol name {name!r}")
            if arity < 0:
                raise TermError(f"negative arity for {name!r}")
        object.__setattr__(self, "_arity", dict(self.symbols))

    def __contains__(self, name: str) -> bool:
        return name in self._arity

    def arity(self, name: str) -> int:
        try:
            return self._arity[name]
        except KeyError:
            raise TermError(f"unknown symbol {name!r}") from None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.symbols)

    @property
    def constants(self) -> tuple[str, ...]:
        return tuple(name for name, arity in self.symbols if arity == 0)

    @property
    def max_arity(self) -> int:
        return max((arity for _, arity in self.symbols), default=0)


@dataclass(frozen=True)
class VariableSet:
    names: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise TermError(f"duplicate variable names in {self.names}")
        for name in self.names:
            if not IDENT.fullmatch(name):
                raise TermError(f"bad variable name {name!r}")

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def check_disjoint(self, sig: Signature) -> None:
        clash = set(self.names) & set(sig.names)
        if clash:
            raise TermError(f"variables clash with operation symbols: {sorted(clash)}")


def default_variables(m: int) -> VariableSet:
    """Generator names: x, y, z, w for m <= 4, otherwise x0 .. x{m-1}."""
    if m <= 4:
        return VariableSet(("x", "y", "z", "w")[:m])
    return VariableSet(tuple(f"x{i}" for i in range(m)))


SWITCH_VARS = VariableSet(("x", "y", "u", "v"))
DISCRIMINATOR_VARS = VariableSet(("x", "y", "z"))


class Term:
    """Base class; see :class:`Var` and :class:`App`."""

    __slots__ = ("_hash", "size", "depth")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Term) or hash(self) != hash(other):
            return False
        stack = [(self, other)]
        seen = set()
        while stack:
            a, b = stack.pop()
            if a is b or (id(a), id(b)) in seen:
                continue
            seen.add((id(a), id(b)))
            if type(a) is not type(b) or a._hash != b._hash:
                return False
            if isinstance(a, Var):
                if a.index != b.index:
                    return False
            else:
                if a.symbol != b.symbol or len(a.args) != len(b.args):
                    return False
                stack.extend(zip(a.args, b.args))
        return True

    def __hash__(self):
        return self._hash


class Var(Term):
    __slots__ = ("index",)

    def __init__(self, index: int):
        self.index = index
        self._hash = hash(("var", index))
        self.size = 1
        self.depth = 0

    def __repr__(self):
        return f"Var({self.index})"


class App(Term):
    __slots__ = ("symbol", "args")

    def __init__(self, symbol: str, args: Iterable[Term] = ()):
        self.symbol = symbol
        self.args = tuple(args)
        self._hash = hash((symbol, tuple(a._hash for a in self.args)))
        self.size = 1 + sum(a.size for a in self.args)
        self.depth = 1 + max((a.depth for a in self.args), default=-1)

    def __repr__(self):
        return f"App({self.symbol!r}, {list(self.args)!r})"


def _postorder(t: Term):
    """Yield distinct nodes of ``t`` children-first."""
    done = set()
    stack = [(t, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in done:
            continue
        if expanded or isinstance(node, Var):
            done.add(id(node))
            yield node
            continue
        stack.append((node, True))
        for child in reversed(node.args):
            if id(child) not in done:
                stack.append((child, False))


def variables_of(t: Term) -> set[int]:
    return {node.index for node in _postorder(t) if isinstance(node, Var)}


def check_term(t: Term, sig: Signature, vars: VariableSet) -> None:
    for node in _postorder(t):
        if isinstance(node, Var):
            if not 0 <= node.index < len(vars):
                raise TermError(f"variable index {node.index} outside {vars.names}")
        elif sig.arity(node.symbol) != len(node.args):
            raise TermError(
                f"symbol {node.symbol!r} has arity {sig.arity(node.symbol)}, "
                f"got {len(node.args)} arguments"
            )


_TOKEN = re.compile(r"\s*(?:(\()|(\))|([A-Za-z_][A-Za-z0-9_]*))")


def parse_term(text: str, sig: Signature, vars: VariableSet) -> Term:
    """Parse a prefix s-expression such as ``(and x (not y))``.

    Constants may be written bare (``zero``) or applied (``(zero)``).
    """
    pos = 0
    end = len(text.rstrip())
    stack: list[tuple[str, int, list[Term]]] = []
    result: Term | None = None
    while pos < end:
        if result is not None:
            raise TermError("trailing input", pos)
        m = _TOKEN.match(text, pos)
        if m is None:
            raise TermError(f"unexpected character {text[pos:].lstrip()[:1]!r}", pos)
        start = m.start(m.lastindex)
        pos = m.end()
        if m.group(1):
            m2 = _TOKEN.match(text, pos)
            if m2 is None or not m2.group(3):
                raise TermError("expected operation symbol after '('", pos)
            name = m2.group(3)
            if name not in sig:
                raise TermError(f"unknown symbol {name!r}", m2.start(3))
            stack.append((name, start, []))
            pos = m2.end()
            continue
        if m.group(2):
            if not stack:
                raise TermError("unbalanced ')'", start)
            name, opened, args = stack.pop()
            if len(args) != sig.arity(name):
                raise TermError(
                    f"arity mismatch: {name!r} takes {sig.arity(name)} arguments, "
                    f"got {len(args)}",
                    opened,
                )
            node: Term = App(name, args)
        else:
            name = m.group(3)
            if name in vars.names:
                node = Var(vars.index(name))
            elif name in sig:
                if sig.arity(name) != 0:
                    raise TermError(f"arity mismatch: bare symbol {name!r} is not a constant", start)
                node = App(name)
            else:
                raise TermError(f"unknown symbol {name!r}", start)
        if stack:
            stack[-1][2].append(node)
        else:
            result = node
    if stack:
        raise TermError("unbalanced '('", stack[-1][1])
    if result is None:
        raise TermError("empty term", 0)
    return result


def print_term(t: Term, vars: VariableSet) -> str:
    """Inverse of :func:`parse_term`; constants are printed bare."""
    parts: list[str] = []
    stack: list[Term | str] = [t]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            parts.append(item)
        elif isinstance(item, Var):
            parts.append(vars.names[item.index])
        elif not item.args:
            parts.append(item.symbol)
        else:
            parts.append("(" + item.symbol)
            stack.append(")")
            for child in reversed(item.args):
                stack.append(child)
                stack.append(" ")
    return "".join(parts)


def substitute(t: Term, mapping: Sequence[Term]) -> Term:
    """Replace variable ``i`` by ``mapping[i]``, preserving sharing."""
    memo: dict[int, Term] = {}
    for node in _postorder(t):
        if isinstance(node, Var):
            memo[id(node)] = mapping[node.index]
        else:
            memo[id(node)] = App(node.symbol, [memo[id(a)] for a in node.args])
    return memo[id(t)]


def evaluate(t: Term, alg, asg: Sequence[int] | Mapping[int, int]) -> int:
    """Value of the term function of ``t`` in the finite algebra ``alg``.

    ``asg`` maps variable indices to element indices of ``alg``.
    """
    memo: dict[int, int] = {}
    for node in _postorder(t):
        if isinstance(node, Var):
            try:
                memo[id(node)] = asg[node.index]
            except (IndexError, KeyError):
                raise TermError(f"unassigned variable index {node.index}") from None
        else:
            memo[id(node)] = alg.apply(node.symbol, [memo[id(a)] for a in node.args])
    return memo[id(t)]


def derive_discriminator(switch: Term) -> Term:
    """Ternary discriminator t(x, y, z) := switch(x, y, z, x), over DISCRIMINATOR_VARS."""
    used = variables_of(switch)
    if not used <= {0, 1, 2, 3}:
        raise TermError("switching term must be over exactly 4 variables (x, y, u, v)")
    x, y, z = Var(0), Var(1), Var(2)
    return substitute(switch, [x, y, z, x])


def instantiate(template: Term, args: Sequence[Term]) -> Term:
    """Apply a term of k variables to k argument terms."""
    return substitute(template, list(args))
