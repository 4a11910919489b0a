"""Alphabets, neighborhoods, and local rules with permutivity testing.

A local rule maps assignments of a finite set of integer offsets (the
neighborhood) to a single symbol in 0..m-1.  Bodies come in two flavors:

* ``LinearBody`` -- a modular linear combination of the cells;
* ``ExprBody`` -- an integer expression tree (see ``rule_lang``) that is
  evaluated exactly over the nonnegative integers and reduced mod m once
  at the very end.  Intermediate values are never reduced, which is what
  makes floor-division terms well defined.

Permutivity in one variable is decided by the gcd shortcut for linear
rules and by exhaustive enumeration of all contexts otherwise.  The
enumeration is vectorized: the full response table of the rule is built
with one numpy axis per neighborhood cell, so the default budget of
2**28 assignments stays comfortably interactive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np

from .errors import (
    BudgetExceededError,
    CamixError,
    IncompletePatternError,
    UnknownOffsetError,
    WrongRepresentationError,
)

#: Default cap on the number of enumerated assignments (m ** cells).
DEFAULT_BUDGET = 2**28

Offset = tuple[int, ...]


def symbol_dtype(m: int):
    """Smallest unsigned numpy dtype that holds symbols 0..m-1."""
    if m <= 2**8:
        return np.uint8
    if m <= 2**16:
        return np.uint16
    return np.int64


def _value_dtype(bound: int):
    """Dtype large enough for exact intermediate values up to ``bound``."""
    if bound <= np.iinfo(np.uint8).max:
        return np.uint8
    if bound <= np.iinfo(np.uint16).max:
        return np.uint16
    if bound <= np.iinfo(np.int32).max:
        return np.int32
    if bound <= np.iinfo(np.int64).max:
        return np.int64
    raise CamixError(
        f"intermediate expression values may reach {bound}, beyond 64-bit range"
    )


@dataclass(frozen=True)
class Alphabet:
    """The symbol set 0..m-1."""

    m: int

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 2:
            raise ValueError(f"alphabet needs at least two symbols, got m={self.m}")


@dataclass(frozen=True)
class Neighborhood:
    """Ordered, duplicate-free collection of integer offsets in Z^d.

    Duplicates are rejected rather than merged: merging would silently
    change nonlinear rules that mention a cell twice.
    """

    offsets: tuple[Offset, ...]

    def __post_init__(self):
        offs = tuple(tuple(int(c) for c in o) for o in self.offsets)
        object.__setattr__(self, "offsets", offs)
        if not offs:
            raise ValueError("neighborhood must be nonempty")
        d = len(offs[0])
        if d < 1:
            raise ValueError("offsets need at least one coordinate")
        if any(len(o) != d for o in offs):
            raise ValueError("all offsets must have the same arity")
        if len(set(offs)) != len(offs):
            raise ValueError("duplicate offsets are not allowed")

    @property
    def d(self) -> int:
        return len(self.offsets[0])

    def __iter__(self):
        return iter(self.offsets)

    def __len__(self):
        return len(self.offsets)

    def __contains__(self, offset) -> bool:
        return tuple(offset) in self.offsets

    def index(self, offset) -> int:
        return self.offsets.index(tuple(offset))

    @cached_property
    def bounds(self) -> tuple[tuple[int, int], ...]:
        """Per-axis (min, max): the smallest box enclosing the offsets."""
        return tuple(
            (min(o[j] for o in self.offsets), max(o[j] for o in self.offsets))
            for j in range(self.d)
        )

    @property
    def extent(self) -> tuple[int, ...]:
        return tuple(hi - lo for lo, hi in self.bounds)


@dataclass(frozen=True)
class LinearBody:
    """Coefficients of a mod-m linear combination, one per neighborhood cell."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))


@dataclass(frozen=True)
class ExprBody:
    """Expression-tree body.

    ``root`` must provide ``variables()`` (the index vectors mentioned),
    ``eval(env)`` (exact integer evaluation, also valid elementwise on
    numpy arrays) and ``bound(max_symbol)`` (an upper bound on the value
    when every variable is at most ``max_symbol``).  ``rule_lang``
    supplies such trees.
    """

    root: object


@dataclass(frozen=True)
class LocalRule:
    """A map from neighborhood patterns to symbols."""

    alphabet: Alphabet
    neighborhood: Neighborhood
    body: LinearBody | ExprBody

    def __post_init__(self):
        if isinstance(self.body, LinearBody):
            if len(self.body.coeffs) != len(self.neighborhood):
                raise ValueError("one coefficient per neighborhood offset required")
            if any(not 0 <= c < self.m for c in self.body.coeffs):
                raise ValueError(f"coefficients must lie in 0..{self.m - 1}")
        elif isinstance(self.body, ExprBody):
            extra = [
                v for v in self.body.root.variables() if v not in self.neighborhood
            ]
            if extra:
                raise ValueError(f"body references unknown offsets: {extra}")
        else:
            raise TypeError("body must be LinearBody or ExprBody")

    @staticmethod
    def linear(m: int, terms) -> "LocalRule":
        """Build a linear rule from (offset, coefficient) pairs or a mapping.

        Offset order is preserved; coefficients are taken mod m.
        """
        pairs = list(terms.items()) if isinstance(terms, Mapping) else list(terms)
        offsets = tuple(tuple(o) for o, _ in pairs)
        coeffs = tuple(int(c) % m for _, c in pairs)
        return LocalRule(Alphabet(m), Neighborhood(offsets), LinearBody(coeffs))

    @staticmethod
    def from_expression(m: int, root, offsets=None) -> "LocalRule":
        """Build an expression rule; neighborhood defaults to the variables used."""
        if offsets is None:
            seen = []
            for v in root.variables():
                if v not in seen:
                    seen.append(v)
            offsets = seen
        return LocalRule(Alphabet(m), Neighborhood(tuple(offsets)), ExprBody(root))

    @property
    def m(self) -> int:
        return self.alphabet.m

    @property
    def d(self) -> int:
        return self.neighborhood.d

    @property
    def is_linear(self) -> bool:
        return isinstance(self.body, LinearBody)

    def coefficient(self, offset) -> int:
        if not self.is_linear:
            raise WrongRepresentationError("rule has no linear coefficients")
        return self.body.coeffs[self.neighborhood.index(offset)]

    def coefficients(self) -> dict[Offset, int]:
        if not self.is_linear:
            raise WrongRepresentationError("rule has no linear coefficients")
        return dict(zip(self.neighborhood.offsets, self.body.coeffs))

    def evaluate(self, pattern: Mapping[Offset, int]) -> int:
        """Apply the rule to one pattern covering the neighborhood."""
        missing = [o for o in self.neighborhood if o not in pattern]
        if missing:
            raise IncompletePatternError(f"pattern missing offsets {missing}")
        vals = {o: int(pattern[o]) for o in self.neighborhood}
        if any(not 0 <= v < self.m for v in vals.values()):
            raise ValueError(f"pattern symbols must lie in 0..{self.m - 1}")
        if self.is_linear:
            return (
                sum(c * vals[o] for o, c in zip(self.neighborhood, self.body.coeffs))
                % self.m
            )
        return int(self.body.root.eval(vals)) % self.m

    def evaluate_arrays(self, arrays: Mapping[Offset, np.ndarray]) -> np.ndarray:
        """Elementwise rule application on broadcastable symbol arrays."""
        m = self.m
        if self.is_linear:
            acc = None
            for o, c in zip(self.neighborhood, self.body.coeffs):
                if c == 0:
                    continue
                term = np.asarray(arrays[o], dtype=np.int64) * c
                acc = term if acc is None else acc + term
            if acc is None:
                shape = np.broadcast_shapes(
                    *(np.shape(arrays[o]) for o in self.neighborhood)
                )
                return np.zeros(shape, dtype=symbol_dtype(m))
            return (acc % m).astype(symbol_dtype(m))
        root = self.body.root
        dtype = _value_dtype(root.bound(m - 1))
        env = {v: np.asarray(arrays[v], dtype=dtype) for v in set(root.variables())}
        out = np.asarray(root.eval(env))
        return (out % m).astype(symbol_dtype(m))


def output_table(rule: LocalRule, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Dense response table of the rule, axis k ranging over offsets[k]."""
    m = rule.m
    n = len(rule.neighborhood)
    needed = m**n
    if needed > budget:
        raise BudgetExceededError(needed, budget)
    arrays = {}
    for k, o in enumerate(rule.neighborhood):
        shape = [1] * n
        shape[k] = m
        arrays[o] = np.arange(m, dtype=symbol_dtype(m)).reshape(shape)
    out = rule.evaluate_arrays(arrays)
    return np.broadcast_to(out, (m,) * n)


def _axis_is_permutation(table: np.ndarray, axis: int, m: int) -> bool:
    moved = np.moveaxis(table, axis, -1)
    ordered = np.sort(moved, axis=-1)
    return bool((ordered == np.arange(m, dtype=ordered.dtype)).all())


def is_permutive_at(rule: LocalRule, offset, budget: int = DEFAULT_BUDGET) -> bool:
    """Exhaustively test whether the rule permutes the alphabet at ``offset``.

    For every assignment of the other cells, the map a -> rule(.., a, ..)
    must be a bijection of 0..m-1.
    """
    if offset not in rule.neighborhood:
        raise UnknownOffsetError(f"{tuple(offset)} is not a neighborhood offset")
    table = output_table(rule, budget)
    return _axis_is_permutation(table, rule.neighborhood.index(offset), rule.m)


def linear_is_permutive_at(rule: LocalRule, offset) -> bool:
    """gcd criterion: a linear rule is permutive at j iff gcd(a_j, m) = 1."""
    if not rule.is_linear:
        raise WrongRepresentationError("gcd criterion needs a linear rule")
    if offset not in rule.neighborhood:
        raise UnknownOffsetError(f"{tuple(offset)} is not a neighborhood offset")
    return math.gcd(rule.coefficient(offset), rule.m) == 1


def permutive_offsets(rule: LocalRule, budget: int = DEFAULT_BUDGET) -> tuple:
    """All offsets at which the rule is permutive, in neighborhood order."""
    table = output_table(rule, budget)
    m = rule.m
    return tuple(
        o
        for k, o in enumerate(rule.neighborhood)
        if _axis_is_permutation(table, k, m)
    )
