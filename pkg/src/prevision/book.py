"""Books (Dutch books) and the margin-maximization search shared by the
event and gamble coherence checks."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import EngineDefect
from .lp import GE, LE, Optimal, linear_program, solve_checked
from .model import Event, Gamble, PricingMeasure

ZERO = Fraction(0)

Instrument = Union[Event, Gamble]


def instrument_values(instrument: Instrument, n: int) -> tuple[Fraction, ...]:
    if isinstance(instrument, Event):
        return instrument.indicator(n)
    return instrument.payoffs


@dataclass(frozen=True)
class Leg:
    """Sell ``coefficient`` units of *instrument* at *price*.

    A negative coefficient means buying. The bookmaker's payoff from the
    leg in scenario w is ``coefficient * (price - instrument(w))``.
    """

    instrument: Instrument
    coefficient: Fraction
    price: Fraction

    def payoff(self, n: int) -> tuple[Fraction, ...]:
        return tuple(self.coefficient * (self.price - v) for v in instrument_values(self.instrument, n))


def strategy_payoff(legs: Sequence[Leg], n: int) -> tuple[Fraction, ...]:
    total = [ZERO] * n
    for leg in legs:
        for j, v in enumerate(leg.payoff(n)):
            total[j] += v
    return tuple(total)


@dataclass(frozen=True)
class Book:
    """Certificate of incoherence: the legs, a guaranteed floor ``epsilon``
    and the payoff in every scenario."""

    legs: tuple[Leg, ...]
    epsilon: Fraction
    payoff: tuple[Fraction, ...]

    @classmethod
    def from_legs(cls, legs: Sequence[Leg], n: int, epsilon: Fraction | None = None) -> Book:
        payoff = strategy_payoff(legs, n)
        eps = min(payoff) if epsilon is None else epsilon
        return cls(tuple(legs), eps, payoff)

    @property
    def minimum(self) -> Fraction:
        return min(self.payoff)

    def verify(self) -> bool:
        """Recompute the payoff from the legs and check the floor exactly."""
        n = len(self.payoff)
        if strategy_payoff(self.legs, n) != self.payoff:
            return False
        if self.epsilon > 0 and self.minimum < self.epsilon:
            return False
        return self.epsilon >= 0 and self.minimum > 0


@dataclass(frozen=True)
class CoherenceVerdict:
    coherent: bool
    witness: Book | PricingMeasure

    def __post_init__(self):
        expected = PricingMeasure if self.coherent else Book
        if not isinstance(self.witness, expected):
            raise EngineDefect(f"verdict coherent={self.coherent} with witness {type(self.witness).__name__}")

    @property
    def book(self) -> Book | None:
        return None if self.coherent else self.witness

    @property
    def measure(self) -> PricingMeasure | None:
        return self.witness if self.coherent else None


def max_margin(prices: Sequence[Fraction], payoffs: Sequence[Sequence[Fraction]], n: int):
    """Maximize ``min_w sum_i b_i (prices_i - payoffs_i(w))`` over ``sum |b_i| <= 1``.

    Returns ``(epsilon, b)``. Variables are laid out as ``b+``, ``b-``, eps.
    """
    k = len(prices)
    if k == 0:
        return ZERO, ()
    cons = []
    for j in range(n):
        row = [prices[i] - payoffs[i][j] for i in range(k)]
        cons.append((row + [-v for v in row] + [-1], GE, 0))
    cons.append(([1] * (2 * k) + [0], LE, 1))
    objective = [0] * (2 * k) + [1]
    lower = [0] * (2 * k) + [None]
    out = solve_checked(linear_program(objective, cons, lower=lower))
    if not isinstance(out, Optimal):
        raise EngineDefect(f"margin LP must have an optimum, got {type(out).__name__}")
    x = out.primal
    beta = tuple(x[i] - x[k + i] for i in range(k))
    return out.value, beta


def search_book(instruments: Sequence[Instrument], prices: Sequence[Fraction], n: int) -> Book | None:
    """Book over *instruments* maximizing the uniform margin, or ``None``."""
    payoffs = [instrument_values(inst, n) for inst in instruments]
    eps, beta = max_margin(prices, payoffs, n)
    if eps <= 0:
        return None
    legs = [Leg(inst, b, p) for inst, b, p in zip(instruments, beta, prices) if b != 0]
    book = Book.from_legs(legs, n, eps)
    if not book.verify():
        raise EngineDefect("book returned by the margin LP does not verify")
    return book


def optimize_strategy(objective: Sequence[Fraction], nonneg_rows: Sequence[Sequence[Fraction]]):
    """Maximize ``objective . b`` subject to ``row . b >= 0`` for every row and
    ``sum |b| <= 1``. Returns ``(value, b)``; the program is always bounded."""
    k = len(objective)
    if k == 0:
        return ZERO, ()

    def split(row):
        return list(row) + [-v for v in row]

    cons = [(split(row), GE, 0) for row in nonneg_rows]
    cons.append(([1] * (2 * k), LE, 1))
    out = solve_checked(linear_program(split(objective), cons, lower=0))
    if not isinstance(out, Optimal):
        raise EngineDefect(f"normalized strategy LP must have an optimum, got {type(out).__name__}")
    x = out.primal
    return out.value, tuple(x[i] - x[k + i] for i in range(k))


def strictly_positive_strategy(
    strict_rows: Sequence[Sequence[Fraction]], nonneg_rows: Sequence[Sequence[Fraction]] = ()
):
    """Find ``b`` with ``row . b > 0`` on *strict_rows* and ``>= 0`` on
    *nonneg_rows*, or return ``None``.

    One LP per strict row maximizes that row among strategies that are
    nonnegative everywhere; the average of the maximizers is strictly
    positive exactly on the union of the achievable supports.
    """
    rows = [list(r) for r in strict_rows]
    constraints = rows + [list(r) for r in nonneg_rows]
    if not rows:
        return None
    k = len(rows[0])
    total = [ZERO] * k
    covered: set[int] = set()
    count = 0
    for j, row in enumerate(rows):
        if j in covered:
            continue
        value, beta = optimize_strategy(row, constraints)
        if value <= 0:
            return None
        count += 1
        total = [a + b for a, b in zip(total, beta)]
        covered.update(i for i, r in enumerate(rows) if sum(x * y for x, y in zip(r, beta)) > 0)
    return tuple(b / count for b in total)
