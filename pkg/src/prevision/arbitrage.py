"""Arbitrage taxonomy on a finite market.

Three nested notions, from strongest to weakest:

uniformly strong
    payoff >= eps > 0 in every scenario (the same thing as a book);
strong
    payoff > 0 in every scenario;
P-arbitrage
    payoff >= 0 P-almost surely and > 0 with positive P-probability.

Strictness is always decided by an auxiliary LP optimum being > 0.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .book import (
    Book,
    Leg,
    optimize_strategy,
    strategy_payoff,
    strictly_positive_strategy,
)
from .errors import EngineDefect, InputError
from .lp import GE, Optimal, linear_program, solve_checked
from .market import find_book, pricing_constraints
from .model import Market, PricingMeasure, ReferenceMeasure
from .numbers import dot

ZERO = Fraction(0)


@dataclass(frozen=True)
class PArbitrage:
    """A strategy that never loses on the support of *reference* and gains
    with positive probability."""

    legs: tuple[Leg, ...]
    payoff: tuple[Fraction, ...]
    reference: ReferenceMeasure
    expected_gain: Fraction

    def verify(self) -> bool:
        if strategy_payoff(self.legs, len(self.payoff)) != self.payoff:
            return False
        w = self.reference.weights
        if any(w[j] > 0 and v < 0 for j, v in enumerate(self.payoff)):
            return False
        if dot(w, self.payoff) != self.expected_gain:
            return False
        return self.expected_gain > 0


@dataclass(frozen=True)
class ArbitrageReport:
    uniformly_strong: Book | None
    strong: Book | None
    p_arbitrage: PArbitrage | None
    reference: ReferenceMeasure
    notes: tuple[str, ...] = field(default=())

    @property
    def arbitrage_free(self) -> bool:
        return self.uniformly_strong is None and self.strong is None and self.p_arbitrage is None


def _payoff_rows(m: Market) -> list[list[Fraction]]:
    """``rows[j][i] = prevision_i - gamble_i(w_j)``."""
    return [[p - g.payoffs[j] for g, p in zip(m.gambles, m.previsions)] for j in range(len(m.space))]


def _legs(m: Market, beta: Sequence[Fraction]) -> list[Leg]:
    return [Leg(g, b, p) for g, b, p in zip(m.gambles, beta, m.previsions) if b != 0]


def find_strong_arbitrage(m: Market) -> Book | None:
    """Strategy with strictly positive payoff in every scenario, or ``None``."""
    rows = _payoff_rows(m)
    beta = strictly_positive_strategy(rows)
    if beta is None:
        return None
    book = Book.from_legs(_legs(m, beta), len(m.space))
    if not book.verify():
        raise EngineDefect("strong arbitrage certificate does not verify")
    return book


def find_p_arbitrage(m: Market, reference: ReferenceMeasure) -> PArbitrage | None:
    n = len(m.space)
    support = reference.support()
    rows = _payoff_rows(m)
    objective = [sum((reference.weights[j] * rows[j][i] for j in support), ZERO) for i in range(len(m.gambles))]
    value, beta = optimize_strategy(objective, [rows[j] for j in support])
    if value <= 0:
        return None
    legs = _legs(m, beta)
    payoff = strategy_payoff(legs, n)
    cert = PArbitrage(tuple(legs), payoff, reference, dot(reference.weights, payoff))
    if not cert.verify():
        raise EngineDefect("P-arbitrage certificate does not verify")
    return cert


def _as_reference(m: Market, reference) -> ReferenceMeasure:
    if reference is None:
        return ReferenceMeasure.uniform(len(m.space))
    weights = reference.weights if isinstance(reference, PricingMeasure) else reference
    ref = ReferenceMeasure(tuple(weights))
    if len(ref) != len(m.space):
        raise InputError(f"reference measure has {len(ref)} weights for {len(m.space)} scenarios")
    return ref


def classify(m: Market, reference=None) -> ArbitrageReport:
    """Run all three arbitrage checks and assert the implication chain."""
    notes = []
    if reference is None:
        notes.append("no reference measure given; using the uniform measure")
    ref = _as_reference(m, reference)
    uniformly = find_book(m)
    strong = find_strong_arbitrage(m)
    p_arb = find_p_arbitrage(m, ref)
    if uniformly is not None and strong is None:
        raise EngineDefect("uniformly strong arbitrage without strong arbitrage")
    if strong is not None and p_arb is None:
        raise EngineDefect("strong arbitrage without P-arbitrage")
    if strong is not None and uniformly is None:
        raise EngineDefect("strong arbitrage without a uniform margin on a finite space")
    if strong is not None:
        notes.append("finite scenario space: strong arbitrage has margin min payoff = " + str(strong.minimum))
    if not ref.full_support:
        dropped = [m.space.labels[j] for j in range(len(m.space)) if ref.weights[j] == 0]
        notes.append("scenarios of reference probability zero ignored: " + ", ".join(dropped))
    return ArbitrageReport(uniformly, strong, p_arb, ref, tuple(notes))


def find_full_support_measure(m: Market) -> PricingMeasure | None:
    """Pricing measure maximizing its smallest weight; ``None`` unless that
    smallest weight is strictly positive."""
    n = len(m.space)
    cons = [([*c, 0], rel, b) for c, rel, b in pricing_constraints(m)]
    for j in range(n):
        row = [0] * (n + 1)
        row[j], row[n] = 1, -1
        cons.append((row, GE, 0))
    out = solve_checked(linear_program([0] * n + [1], cons, lower=[0] * n + [None]))
    if not isinstance(out, Optimal) or out.value <= 0:
        return None
    return PricingMeasure(out.primal[:n])
