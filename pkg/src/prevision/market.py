"""Coherence of previsions on general gambles, pricing measures and the
linear extension of a coherent prevision to the span of the market."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .book import Book, CoherenceVerdict, search_book
from .errors import ContractError, EngineDefect, InputError
from .lp import EQ, Infeasible, Optimal, linear_program, solve_checked
from .model import Market, PricingMeasure, expectation
from .numbers import RationalLike, to_fraction

ZERO = Fraction(0)


@dataclass(frozen=True)
class LinearCombination:
    """``sum coefficient * gamble`` over gambles of a market, by name."""

    terms: tuple[tuple[str, Fraction], ...]

    def __post_init__(self):
        terms = tuple((str(name), to_fraction(c, f"coefficient of {name}")) for name, c in self.terms)
        object.__setattr__(self, "terms", terms)

    @classmethod
    def of(cls, **coefficients: RationalLike) -> LinearCombination:
        return cls(tuple(coefficients.items()))

    def resolve(self, m: Market) -> None:
        for name, _ in self.terms:
            m.gamble(name)

    def payoff(self, m: Market) -> tuple[Fraction, ...]:
        self.resolve(m)
        n = len(m.space)
        out = [ZERO] * n
        for name, c in self.terms:
            for j, v in enumerate(m.gamble(name).payoffs):
                out[j] += c * v
        return tuple(out)

    def price(self, m: Market) -> Fraction:
        """``sum c * prevision``; no coherence check (see
        :func:`linear_extension_price`)."""
        self.resolve(m)
        return sum((c * m.prevision(name) for name, c in self.terms), ZERO)


def find_book(m: Market) -> Book | None:
    return search_book(m.gambles, m.previsions, len(m.space))


def pricing_constraints(m: Market) -> list[tuple]:
    """``sum q == 1`` and ``E_q[h] == prevision(h)`` for every gamble."""
    n = len(m.space)
    cons = [([1] * n, EQ, 1)]
    for g, p in zip(m.gambles, m.previsions):
        cons.append((list(g.payoffs), EQ, p))
    return cons


def find_pricing_measure(m: Market) -> PricingMeasure | None:
    n = len(m.space)
    lp = linear_program([0] * n, pricing_constraints(m), lower=0)
    out = solve_checked(lp)
    if isinstance(out, Infeasible):
        return None
    q = PricingMeasure(out.primal)
    for g, p in zip(m.gambles, m.previsions):
        if expectation(q, g) != p:
            raise EngineDefect(f"pricing measure misprices {g.name}")
    return q


@lru_cache(maxsize=256)
def market_verdict(m: Market) -> CoherenceVerdict:
    """Coherence verdict for *m*, cross-checked between the book LP and the
    pricing-measure LP. Cached: markets are immutable."""
    book = find_book(m)
    q = find_pricing_measure(m)
    if (book is None) == (q is None):
        raise EngineDefect(
            "book search and pricing-measure search disagree "
            f"(book={'yes' if book else 'no'}, measure={'yes' if q else 'no'})"
        )
    return CoherenceVerdict(True, q) if book is None else CoherenceVerdict(False, book)


def require_coherent(m: Market) -> CoherenceVerdict:
    verdict = market_verdict(m)
    if not verdict.coherent:
        raise ContractError("the market prevision is incoherent", book=verdict.book)
    return verdict


def linear_extension_price(m: Market, combo: LinearCombination) -> Fraction:
    """Price of a combination of market gambles under the linear extension.

    Also checks that the price does not depend on the representation: the
    minimum and maximum of ``sum a_i prevision_i`` over all ``a`` with the
    same payoff vector must both equal the direct price.
    """
    require_coherent(m)
    price = combo.price(m)
    payoff = combo.payoff(m)
    cons = [([g.payoffs[j] for g in m.gambles], EQ, payoff[j]) for j in range(len(m.space))]
    for sense in ("max", "min"):
        out = solve_checked(linear_program(list(m.previsions), cons, sense=sense))
        if not isinstance(out, Optimal) or out.value != price:
            raise EngineDefect(f"linear extension is representation dependent ({sense} side: {out!r})")
    return price


def combination_from_vector(m: Market, coefficients: Sequence[RationalLike]) -> LinearCombination:
    if len(coefficients) != len(m.gambles):
        raise InputError("one coefficient per market gamble expected")
    return LinearCombination(tuple((g.name, c) for g, c in zip(m.gambles, coefficients) if c != 0))
