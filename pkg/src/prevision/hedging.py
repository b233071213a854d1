"""Super- and subhedging prices, the range of pricing-measure expectations,
and coherent extension of a market by a new gamble.

The hedging side and the measure side are computed by two separate LPs and
compared; any gap between them is reported as an engine defect.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .book import CoherenceVerdict
from .errors import EngineDefect, InputError
from .lp import GE, LE, Optimal, linear_program, solve_checked
from .market import (
    LinearCombination,
    combination_from_vector,
    find_book,
    find_pricing_measure,
    pricing_constraints,
    require_coherent,
)
from .model import Gamble, Market, PricingMeasure, expectation
from .numbers import RationalLike, to_fraction


@dataclass(frozen=True)
class PriceInterval:
    lower: Fraction
    upper: Fraction
    lower_hedge: LinearCombination
    upper_hedge: LinearCombination
    lower_measure: PricingMeasure
    upper_measure: PricingMeasure

    def __contains__(self, price) -> bool:
        return self.lower <= to_fraction(price) <= self.upper

    @property
    def degenerate(self) -> bool:
        return self.lower == self.upper

    def verify(self, m: Market, g: Gamble) -> bool:
        """Check every certificate in the bundle against *m* and *g*."""
        if self.lower > self.upper:
            return False
        up, lo = self.upper_hedge.payoff(m), self.lower_hedge.payoff(m)
        if any(u < v for u, v in zip(up, g.payoffs)) or any(l > v for l, v in zip(lo, g.payoffs)):
            return False
        if self.upper_hedge.price(m) != self.upper or self.lower_hedge.price(m) != self.lower:
            return False
        for q, target in ((self.upper_measure, self.upper), (self.lower_measure, self.lower)):
            if expectation(q, g) != target:
                return False
            if any(expectation(q, h) != p for h, p in zip(m.gambles, m.previsions)):
                return False
        return True


def _as_gamble(m: Market, g: Gamble | tuple | list) -> Gamble:
    if not isinstance(g, Gamble):
        g = Gamble("g", tuple(g))
    if len(g) != len(m.space):
        raise InputError(f"gamble {g.name!r} has {len(g)} payoffs for {len(m.space)} scenarios")
    return g


def _hedge(m: Market, g: Gamble, upper: bool):
    n = len(m.space)
    rel = GE if upper else LE
    cons = [([h.payoffs[j] for h in m.gambles], rel, g.payoffs[j]) for j in range(n)]
    lp = linear_program(list(m.previsions), cons, sense="min" if upper else "max")
    out = solve_checked(lp)
    if not isinstance(out, Optimal):
        raise EngineDefect(f"hedging LP of a coherent market must be optimal, got {type(out).__name__}")
    return out.value, combination_from_vector(m, out.primal)


def superhedge(m: Market, g) -> tuple[Fraction, LinearCombination]:
    """Cheapest combination of market gambles dominating *g*."""
    require_coherent(m)
    return _hedge(m, _as_gamble(m, g), upper=True)


def subhedge(m: Market, g) -> tuple[Fraction, LinearCombination]:
    """Dearest combination of market gambles dominated by *g*."""
    require_coherent(m)
    return _hedge(m, _as_gamble(m, g), upper=False)


def measure_range(m: Market, g) -> tuple[Fraction, Fraction, PricingMeasure, PricingMeasure]:
    """Min and max of ``E_q[g]`` over pricing measures, with attaining measures."""
    require_coherent(m)
    g = _as_gamble(m, g)
    n = len(m.space)
    results = []
    for sense in ("min", "max"):
        out = solve_checked(linear_program(list(g.payoffs), pricing_constraints(m), sense=sense, lower=0))
        if not isinstance(out, Optimal):
            raise EngineDefect(f"measure LP of a coherent market must be optimal, got {type(out).__name__}")
        results.append((out.value, PricingMeasure(out.primal[:n])))
    (lo, q_lo), (hi, q_hi) = results
    return lo, hi, q_lo, q_hi


def price_interval(m: Market, g) -> PriceInterval:
    g = _as_gamble(m, g)
    upper, upper_hedge = superhedge(m, g)
    lower, lower_hedge = subhedge(m, g)
    lo, hi, q_lo, q_hi = measure_range(m, g)
    if upper != hi or lower != lo:
        raise EngineDefect(
            f"duality gap: hedging [{lower}, {upper}] vs measures [{lo}, {hi}]"
        )
    interval = PriceInterval(lower, upper, lower_hedge, upper_hedge, q_lo, q_hi)
    if not interval.verify(m, g):
        raise EngineDefect("price interval certificates do not verify")
    return interval


def check_extension_coherence(m: Market, g, g0: RationalLike) -> CoherenceVerdict:
    """Is pricing *g* at *g0* coherent together with the market?"""
    require_coherent(m)
    g = _as_gamble(m, g)
    if g.name in {h.name for h in m.gambles}:
        g = Gamble(g.name + "'", g.payoffs)
    extended = m.extended(g, g0)
    book = find_book(extended)
    if book is not None:
        return CoherenceVerdict(False, book)
    q = find_pricing_measure(extended)
    if q is None:
        raise EngineDefect("extended market has neither a book nor a pricing measure")
    return CoherenceVerdict(True, q)
