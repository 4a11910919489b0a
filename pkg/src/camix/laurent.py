"""Sparse Laurent polynomials over Z_m and iterated linear rules.

A linear rule with coefficient a_j at offset j corresponds to the
polynomial with coefficient a_j at exponent -j.  Multiplying by this
polynomial is one application of the global map, so its n-th power is
the n-step rule; powers use repeated squaring, which keeps supports of
mod-2 rules minimal along the way.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import IncompatibleOperandsError, WrongRepresentationError
from .rule_model import LocalRule

Vec = tuple[int, ...]


@dataclass(frozen=True)
class LaurentPoly:
    """Finitely supported exponent -> coefficient map over Z_m.

    Terms are stored sorted by exponent with zero coefficients dropped,
    so equal polynomials compare equal structurally.
    """

    d: int
    m: int
    terms: tuple[tuple[Vec, int], ...]

    @staticmethod
    def from_terms(d: int, m: int, terms) -> "LaurentPoly":
        acc: dict[Vec, int] = {}
        items = terms.items() if hasattr(terms, "items") else terms
        for exp, coeff in items:
            e = tuple(int(c) for c in exp)
            if len(e) != d:
                raise IncompatibleOperandsError(
                    f"exponent {e} does not have arity {d}"
                )
            acc[e] = (acc.get(e, 0) + int(coeff)) % m
        kept = tuple(sorted((e, c) for e, c in acc.items() if c))
        return LaurentPoly(d, m, kept)

    @staticmethod
    def one(d: int, m: int) -> "LaurentPoly":
        return LaurentPoly.from_terms(d, m, {(0,) * d: 1})

    @staticmethod
    def zero(d: int, m: int) -> "LaurentPoly":
        return LaurentPoly(d, m, ())

    @property
    def support(self) -> tuple[Vec, ...]:
        return tuple(e for e, _ in self.terms)

    def coefficient(self, exp) -> int:
        e = tuple(exp)
        for exp_, coeff in self.terms:
            if exp_ == e:
                return coeff
        return 0

    def _check_compatible(self, other: "LaurentPoly"):
        if self.d != other.d or self.m != other.m:
            raise IncompatibleOperandsError(
                f"cannot combine Z_{self.m}[d={self.d}] with Z_{other.m}[d={other.d}]"
            )

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check_compatible(other)
        return LaurentPoly.from_terms(
            self.d, self.m, list(self.terms) + list(other.terms)
        )

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check_compatible(other)
        acc: dict[Vec, int] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                acc[e] = (acc.get(e, 0) + c1 * c2) % self.m
        return LaurentPoly(self.d, self.m, tuple(sorted((e, c) for e, c in acc.items() if c)))

    def __pow__(self, n: int) -> "LaurentPoly":
        if n < 0:
            raise ValueError("exponent must be nonnegative")
        result = LaurentPoly.one(self.d, self.m)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(
            f"{c}*x^(" + ",".join(str(e) for e in exp) + ")"
            for exp, c in self.terms
        )


def multiply(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    return p * q


def power(p: LaurentPoly, n: int) -> LaurentPoly:
    return p**n


def chi(rule: LocalRule) -> LaurentPoly:
    """Encode a linear rule: coefficient a_j lands at exponent -j."""
    if not rule.is_linear:
        raise WrongRepresentationError("only linear rules have a polynomial form")
    return LaurentPoly.from_terms(
        rule.d,
        rule.m,
        {
            tuple(-c for c in offset): coeff
            for offset, coeff in rule.coefficients().items()
        },
    )


def chi_inverse(poly: LaurentPoly) -> LocalRule:
    """Decode a polynomial back into the linear rule it encodes.

    The zero polynomial decodes to the zero rule on the origin cell
    (a rule needs a nonempty neighborhood).
    """
    terms = [(tuple(-c for c in exp), coeff) for exp, coeff in poly.terms]
    if not terms:
        terms = [((0,) * poly.d, 0)]
    return LocalRule.linear(poly.m, sorted(terms))


def iterated_rule(rule: LocalRule, n: int) -> LocalRule:
    """The linear rule computing n steps at once; neighborhood = support."""
    if n < 1:
        raise ValueError("iteration count must be positive")
    return chi_inverse(chi(rule) ** n)
