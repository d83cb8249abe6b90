"""First-order clauses, binary resolution, factoring and subsumption.

Representation
--------------
A term is either a variable (a non-negative ``int``, local to its clause) or
an application ``(functor, *args)``; constants are ``(name,)``.  A literal is
the pair ``(positive, atom)`` where ``atom`` is an application whose functor is
a predicate symbol.  Clauses hold a normalized tuple of literals: literals are
stably ordered by a variable-blind key and variables are renamed ``0, 1, ...``
in left-to-right order of first occurrence.
"""

from __future__ import annotations

from dataclasses import dataclass

from clausekit import _kernels
from clausekit._kernels import apply, match, unify

__all__ = [
    "Origin",
    "Clause",
    "INPUT",
    "RESOLVE",
    "FACTOR",
    "unify",
    "match",
    "apply",
    "resolve",
    "factor",
    "subsumes",
    "is_variant",
    "is_tautology",
    "term_vars",
    "term_depth",
    "term_size",
    "format_term",
    "format_literal",
]

INPUT = "input"
RESOLVE = "resolve"
FACTOR = "factor"


@dataclass(frozen=True)
class Origin:
    """Provenance of a clause: an input with a role, or an inference."""

    rule: str
    parents: tuple = ()
    positions: tuple = ()
    role: str | None = None
    name: str | None = None

    @classmethod
    def input(cls, role="axiom", name=None):
        return cls(INPUT, role=role, name=name)


# -- terms ------------------------------------------------------------------


def term_vars(t, out=None):
    """Variables of ``t`` in left-to-right order of first occurrence."""
    if out is None:
        out = []
    stack = [t]
    while stack:
        t = stack.pop()
        if type(t) is int:
            if t not in out:
                out.append(t)
        else:
            stack.extend(reversed(t[1:]))
    return out


def term_depth(t):
    if type(t) is int or len(t) == 1:
        return 1
    return 1 + max(term_depth(a) for a in t[1:])


def term_size(t):
    if type(t) is int:
        return 1
    return 1 + sum(term_size(a) for a in t[1:])


def format_term(t):
    if type(t) is int:
        return f"X{t}"
    if len(t) == 1:
        return t[0]
    return f"{t[0]}({','.join(format_term(a) for a in t[1:])})"


def format_literal(lit):
    positive, atom = lit
    return format_term(atom) if positive else "~" + format_term(atom)


def _shape(t):
    if type(t) is int:
        return "_"
    if len(t) == 1:
        return t[0]
    return f"{t[0]}({','.join(_shape(a) for a in t[1:])})"


def _rename(t, mapping):
    if type(t) is int:
        return mapping[t]
    if len(t) == 1:
        return t
    return (t[0],) + tuple(_rename(a, mapping) for a in t[1:])


def normalize_literals(literals):
    """Canonical literal order and variable numbering.  Idempotent."""
    ordered = sorted(literals, key=lambda lit: (not lit[0], _shape(lit[1])))
    mapping = {}
    for _, atom in ordered:
        for v in term_vars(atom):
            if v not in mapping:
                mapping[v] = len(mapping)
    if all(k == v for k, v in mapping.items()):
        return tuple(ordered)
    return tuple((sign, _rename(atom, mapping)) for sign, atom in ordered)


# -- clauses ----------------------------------------------------------------


class Clause:
    """A normalized clause.

    Equality and hashing are structural (on the normalized literals); ``id``
    and ``origin`` are provenance only.
    """

    __slots__ = ("literals", "id", "origin", "_nvars")

    def __init__(self, literals=(), id=None, origin=None, normalized=False):
        self.literals = tuple(literals) if normalized else normalize_literals(literals)
        self.id = id
        self.origin = origin if origin is not None else Origin.input()
        self._nvars = None

    def with_id(self, id, origin=None):
        return Clause(self.literals, id, origin or self.origin, normalized=True)

    def __len__(self):
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    def __eq__(self, other):
        return isinstance(other, Clause) and self.literals == other.literals

    def __hash__(self):
        return hash(self.literals)

    def __repr__(self):
        return f"Clause({self.id}: {self})"

    def __str__(self):
        if not self.literals:
            return "$false"
        return " | ".join(format_literal(lit) for lit in self.literals)

    @property
    def is_empty(self):
        return not self.literals

    @property
    def num_vars(self):
        if self._nvars is None:
            found = []
            for _, atom in self.literals:
                term_vars(atom, found)
            self._nvars = len(found)
        return self._nvars

    @property
    def weight(self):
        return sum(term_size(atom) for _, atom in self.literals)

    @property
    def role(self):
        return self.origin.role


def _shift(t, offset):
    if type(t) is int:
        return t + offset
    if len(t) == 1:
        return t
    return (t[0],) + tuple(_shift(a, offset) for a in t[1:])


def _check_index(c, i):
    if not 0 <= i < len(c.literals):
        raise IndexError(f"literal index {i} out of range for clause of length {len(c.literals)}")


def resolve(c1, c2, i, j):
    """Binary resolvent of ``c1`` and ``c2`` on literals ``i`` and ``j``, or None.

    ``c2`` is renamed apart from ``c1`` internally.
    """
    _check_index(c1, i)
    _check_index(c2, j)
    s1, a1 = c1.literals[i]
    s2, a2 = c2.literals[j]
    if s1 == s2 or a1[0] != a2[0] or len(a1) != len(a2):
        return None
    offset = c1.num_vars
    lits2 = [(s, _shift(a, offset)) for s, a in c2.literals] if offset else list(c2.literals)
    mgu = unify(a1, lits2[j][1], {})
    if mgu is None:
        return None
    rest = [lit for k, lit in enumerate(c1.literals) if k != i]
    rest += [lit for k, lit in enumerate(lits2) if k != j]
    lits = [(s, apply(a, mgu)) for s, a in rest]
    return Clause(lits, origin=Origin(RESOLVE, (c1.id, c2.id), (i, j)))


def factor(c, i, j):
    """Factor of ``c`` unifying literals ``i`` and ``j`` (``j`` dropped), or None."""
    _check_index(c, i)
    _check_index(c, j)
    if i == j:
        raise ValueError("factoring needs two distinct literal positions")
    s1, a1 = c.literals[i]
    s2, a2 = c.literals[j]
    if s1 != s2 or a1[0] != a2[0] or len(a1) != len(a2):
        return None
    mgu = unify(a1, a2, {})
    if mgu is None:
        return None
    lits = [(s, apply(a, mgu)) for k, (s, a) in enumerate(c.literals) if k != j]
    return Clause(lits, origin=Origin(FACTOR, (c.id,), (i, j)))


def subsumes(c1, c2):
    """True iff ``c1`` sigma is a sub-multiset of ``c2`` for some sigma."""
    return _kernels.subsumes_literals(c1.literals, c2.literals)


def is_variant(c1, c2):
    return len(c1) == len(c2) and subsumes(c1, c2) and subsumes(c2, c1)


def is_tautology(c):
    pos = {atom for sign, atom in c.literals if sign}
    return any(not sign and atom in pos for sign, atom in c.literals)
