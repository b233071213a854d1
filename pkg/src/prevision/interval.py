"""Gambles on the continuum (0, 1].

Gambles are piecewise affine with rational breakpoints and half-open
pieces ``(b_i, b_{i+1}]``, so 0 is never part of the domain. Infima are
computed exactly and may fail to be attained, which is what separates
strong from uniformly strong arbitrage and lets a coherent prevision have
no countably additive pricing measure.
"""

from __future__ import annotations

import bisect
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .book import Leg, max_margin, strictly_positive_strategy
from .errors import EngineDefect, InputError
from .lp import EQ, Infeasible, linear_program, solve_checked
from .model import Gamble, Market, ScenarioSpace
from .numbers import RationalLike, to_fraction

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class PiecewiseLinearGamble:
    """``w -> slopes[i] * w + intercepts[i]`` on ``(breakpoints[i], breakpoints[i+1]]``."""

    name: str
    breakpoints: tuple[Fraction, ...]
    slopes: tuple[Fraction, ...]
    intercepts: tuple[Fraction, ...]

    def __post_init__(self):
        b = tuple(to_fraction(x, f"breakpoint of {self.name}") for x in self.breakpoints)
        c = tuple(to_fraction(x, f"slope of {self.name}") for x in self.slopes)
        d = tuple(to_fraction(x, f"intercept of {self.name}") for x in self.intercepts)
        if len(b) < 2 or b[0] != 0 or b[-1] != 1:
            raise InputError(f"{self.name}: breakpoints must run from 0 to 1")
        if any(x >= y for x, y in zip(b, b[1:])):
            raise InputError(f"{self.name}: breakpoints must be strictly increasing")
        if len(c) != len(b) - 1 or len(d) != len(b) - 1:
            raise InputError(f"{self.name}: need one slope and one intercept per piece")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "slopes", c)
        object.__setattr__(self, "intercepts", d)

    @classmethod
    def constant(cls, value: RationalLike, name: str = "unit") -> PiecewiseLinearGamble:
        return cls(name, (ZERO, ONE), (ZERO,), (to_fraction(value),))

    @classmethod
    def identity(cls, name: str = "f") -> PiecewiseLinearGamble:
        return cls(name, (ZERO, ONE), (ONE,), (ZERO,))

    @classmethod
    def from_pieces(cls, name: str, pieces: Sequence[tuple]) -> PiecewiseLinearGamble:
        """*pieces* is a list of ``(start, end, slope, intercept)``; they must tile (0, 1]."""
        if not pieces:
            raise InputError(f"{name}: no pieces given")
        ps = [tuple(to_fraction(v, f"piece of {name}") for v in p) for p in pieces]
        for (s0, e0, *_), (s1, *_rest) in zip(ps, ps[1:]):
            if e0 != s1:
                raise InputError(f"{name}: pieces leave a gap or overlap at {e0} / {s1}")
        breaks = (ps[0][0],) + tuple(p[1] for p in ps)
        return cls(name, breaks, tuple(p[2] for p in ps), tuple(p[3] for p in ps))

    @property
    def num_pieces(self) -> int:
        return len(self.slopes)

    def piece_index(self, w: RationalLike) -> int:
        w = to_fraction(w)
        if not 0 < w <= 1:
            raise InputError(f"{w} is outside (0, 1]")
        return bisect.bisect_left(self.breakpoints, w) - 1

    def __call__(self, w: RationalLike) -> Fraction:
        w = to_fraction(w)
        i = self.piece_index(w)
        return self.slopes[i] * w + self.intercepts[i]

    def left_limit(self, i: int) -> Fraction:
        return self.slopes[i] * self.breakpoints[i] + self.intercepts[i]

    def right_value(self, i: int) -> Fraction:
        return self.slopes[i] * self.breakpoints[i + 1] + self.intercepts[i]

    def is_unit(self) -> bool:
        return all(c == 0 for c in self.slopes) and all(d == 1 for d in self.intercepts)

    def refine(self, breakpoints: Sequence[Fraction]) -> PiecewiseLinearGamble:
        """Same function expressed on a finer partition."""
        b = tuple(breakpoints)
        if not set(self.breakpoints) <= set(b):
            raise InputError("refinement must contain the original breakpoints")
        slopes, intercepts = [], []
        for lo in b[:-1]:
            i = bisect.bisect_right(self.breakpoints, lo) - 1
            slopes.append(self.slopes[i])
            intercepts.append(self.intercepts[i])
        return PiecewiseLinearGamble(self.name, b, tuple(slopes), tuple(intercepts))

    def integral(self) -> Fraction:
        """Exact integral over (0, 1], i.e. the expectation under the uniform law."""
        total = ZERO
        for i in range(self.num_pieces):
            lo, hi = self.breakpoints[i], self.breakpoints[i + 1]
            total += self.slopes[i] * (hi * hi - lo * lo) / 2 + self.intercepts[i] * (hi - lo)
        return total

    def equals(self, other: PiecewiseLinearGamble) -> bool:
        b = merge_breakpoints([self, other])
        a, c = self.refine(b), other.refine(b)
        return a.slopes == c.slopes and a.intercepts == c.intercepts


def merge_breakpoints(gambles: Sequence[PiecewiseLinearGamble]) -> tuple[Fraction, ...]:
    return tuple(sorted(set().union(*(g.breakpoints for g in gambles))))


def combine(
    terms: Sequence[tuple[RationalLike, PiecewiseLinearGamble]],
    constant: RationalLike = 0,
    name: str = "combination",
) -> PiecewiseLinearGamble:
    """``constant + sum coefficient * gamble``."""
    const = to_fraction(constant)
    gambles = [g for _, g in terms]
    b = merge_breakpoints(gambles) if gambles else (ZERO, ONE)
    k = len(b) - 1
    slopes, intercepts = [ZERO] * k, [const] * k
    for coef, g in terms:
        coef = to_fraction(coef)
        r = g.refine(b)
        for i in range(k):
            slopes[i] += coef * r.slopes[i]
            intercepts[i] += coef * r.intercepts[i]
    return PiecewiseLinearGamble(name, b, tuple(slopes), tuple(intercepts))


@dataclass(frozen=True)
class InfResult:
    value: Fraction
    attained: bool
    location: Fraction


def exact_inf(f: PiecewiseLinearGamble) -> InfResult:
    """Exact infimum over (0, 1].

    On each half-open piece the infimum is the smaller of the right-end
    value (attained) and the left-end limit (never attained on that
    piece). An attaining candidate is preferred on ties.
    """
    # (value, is_open_limit, location)
    candidates = []
    for i in range(f.num_pieces):
        candidates.append((f.right_value(i), False, f.breakpoints[i + 1]))
        candidates.append((f.left_limit(i), True, f.breakpoints[i]))
    value = min(c[0] for c in candidates)
    best = min((c for c in candidates if c[0] == value), key=lambda c: (c[1], c[2]))
    return InfResult(value, not best[1], best[2])


def is_strictly_positive(f: PiecewiseLinearGamble) -> bool:
    """``f(w) > 0`` for every ``w`` in (0, 1]."""
    return all(f.right_value(i) > 0 and f.left_limit(i) >= 0 for i in range(f.num_pieces))


@dataclass(frozen=True)
class IntervalMarket:
    gambles: tuple[PiecewiseLinearGamble, ...]
    previsions: tuple[Fraction, ...]

    def __post_init__(self):
        gambles = tuple(self.gambles)
        prev = tuple(to_fraction(p, "prevision") for p in self.previsions)
        if len(prev) != len(gambles):
            raise InputError("every gamble needs exactly one prevision")
        names = [g.name for g in gambles]
        if len(set(names)) != len(names):
            raise InputError(f"gamble names must be unique: {names}")
        if not any(g.is_unit() for g in gambles):
            raise InputError("the market must contain the constant-one gamble")
        object.__setattr__(self, "gambles", gambles)
        object.__setattr__(self, "previsions", prev)

    @property
    def unit_price_flag(self) -> str | None:
        """A message if the constant-one gamble is not priced 1."""
        for g, p in zip(self.gambles, self.previsions):
            if g.is_unit() and p != 1:
                return f"constant-one gamble {g.name!r} is priced {p}, not 1"
        return None

    def breakpoints(self) -> tuple[Fraction, ...]:
        return merge_breakpoints(self.gambles)

    def payoff(self, beta: Sequence[Fraction]) -> PiecewiseLinearGamble:
        """``sum beta_i (prevision_i - gamble_i)`` as a function of w."""
        const = sum((b * p for b, p in zip(beta, self.previsions)), ZERO)
        return combine([(-b, g) for b, g in zip(beta, self.gambles)], const, name="payoff")


@dataclass(frozen=True)
class IntervalBook:
    """A strategy on (0, 1] with its payoff function and exact infimum.

    ``epsilon`` is the guaranteed floor; it is 0 for a strong arbitrage
    whose infimum 0 is not attained.
    """

    legs: tuple[Leg, ...]
    epsilon: Fraction
    payoff: PiecewiseLinearGamble
    infimum: InfResult

    def recompute(self) -> PiecewiseLinearGamble:
        const = sum((leg.coefficient * leg.price for leg in self.legs), ZERO)
        return combine([(-leg.coefficient, leg.instrument) for leg in self.legs], const, name="payoff")

    def verify(self) -> bool:
        if not self.recompute().equals(self.payoff):
            return False
        if exact_inf(self.payoff) != self.infimum:
            return False
        if self.infimum.value < self.epsilon or self.epsilon < 0:
            return False
        return is_strictly_positive(self.payoff)


def _candidate_rows(m: IntervalMarket):
    """Per merged piece, the strategy-payoff coefficients at the right end
    (attained) and at the left-end limit (not attained)."""
    b = m.breakpoints()
    refined = [g.refine(b) for g in m.gambles]
    right, left = [], []
    for i in range(len(b) - 1):
        right.append([p - g.right_value(i) for g, p in zip(refined, m.previsions)])
        left.append([p - g.left_limit(i) for g, p in zip(refined, m.previsions)])
    return right, left


def _interval_book(m: IntervalMarket, beta: Sequence[Fraction], epsilon: Fraction | None = None) -> IntervalBook:
    legs = tuple(Leg(g, b, p) for g, b, p in zip(m.gambles, beta, m.previsions) if b != 0)
    payoff = m.payoff(beta)
    inf = exact_inf(payoff)
    book = IntervalBook(legs, inf.value if epsilon is None else epsilon, payoff, inf)
    if not book.verify():
        raise EngineDefect("interval certificate does not verify")
    return book


def find_book_interval(m: IntervalMarket) -> IntervalBook | None:
    """Strategy whose payoff infimum over (0, 1] is strictly positive.

    The infimum of an affine piece is its value at one of the two ends
    (using the limit at the open end), so maximizing the smallest candidate
    value under ``sum |beta| <= 1`` decides the question.
    """
    right, left = _candidate_rows(m)
    candidates = right + left
    k = len(m.gambles)
    # max_margin wants prices and payoffs; encode the rows as price 0, payoff -row
    payoffs = [[-row[i] for row in candidates] for i in range(k)]
    eps, beta = max_margin([ZERO] * k, payoffs, len(candidates))
    if eps <= 0:
        return None
    return _interval_book(m, beta, eps)


def strong_arbitrage_interval(m: IntervalMarket) -> IntervalBook | None:
    """Strategy with strictly positive payoff at every point of (0, 1].

    Equivalent to: every right-end value > 0 and every left-end limit >= 0.
    """
    right, left = _candidate_rows(m)
    beta = strictly_positive_strategy(right, left)
    if beta is None:
        return None
    return _interval_book(m, beta)


@dataclass(frozen=True)
class Diagnosis:
    coherent: bool
    book: IntervalBook | None = None
    strong_arbitrage: IntervalBook | None = None
    countably_additive_measure_exists: bool | None = None
    discrete_measure: tuple[tuple[Fraction, Fraction], ...] | None = None
    concentration_point: Fraction | None = None
    notes: tuple[str, ...] = field(default=())


def find_discrete_measure(m: IntervalMarket) -> tuple[tuple[Fraction, Fraction], ...] | None:
    """Finitely many point masses in (0, 1] pricing every gamble, or ``None``.

    Works on the end values of each merged piece. Mass on a left-end limit
    that is not attained (at 0+ or at a jump) is only realizable together
    with mass on the same piece's right end: the pair is then merged into
    one atom inside the piece. Pieces where that cannot happen have their
    left-end mass forced to zero, and the search repeats.
    """
    b = m.breakpoints()
    refined = [g.refine(b) for g in m.gambles]
    pieces = len(b) - 1
    open_left = [
        i == 0 or any(g.left_limit(i) != g.right_value(i - 1) for g in refined) for i in range(pieces)
    ]
    # variables: right-end mass R_i (index i), left-end mass L_i (index pieces + i)
    width = 2 * pieces
    base = [([1] * width, EQ, 1)]
    for g, p in zip(refined, m.previsions):
        row = [g.right_value(i) for i in range(pieces)] + [g.left_limit(i) for i in range(pieces)]
        base.append((row, EQ, p))

    forced: set[int] = set()
    while True:
        cons = list(base)
        for i in sorted(forced):
            row = [0] * width
            row[pieces + i] = 1
            cons.append((row, EQ, 0))
        points = []
        changed = False
        for i in range(pieces):
            if not open_left[i] or i in forced:
                continue
            obj = [0] * width
            obj[i] = 1
            out = solve_checked(linear_program(obj, cons, lower=0))
            if isinstance(out, Infeasible):
                return None
            if out.value == 0:
                forced.add(i)
                changed = True
                break
            points.append(out.primal)
        if changed:
            continue
        if not points:
            out = solve_checked(linear_program([0] * width, cons, lower=0))
            if isinstance(out, Infeasible):
                return None
            points.append(out.primal)
        w = [sum(col) / len(points) for col in zip(*points)]
        break

    atoms: dict[Fraction, Fraction] = {}
    for i in range(pieces):
        r, l = w[i], w[pieces + i]
        lo, hi = b[i], b[i + 1]
        if open_left[i]:
            if l > 0 or r > 0:
                where = (l * lo + r * hi) / (l + r)
                atoms[where] = atoms.get(where, ZERO) + l + r
        else:
            if r > 0:
                atoms[hi] = atoms.get(hi, ZERO) + r
            if l > 0:
                atoms[lo] = atoms.get(lo, ZERO) + l
    result = tuple(sorted(atoms.items()))
    if sum(x for _, x in result) != 1:
        raise EngineDefect("discrete measure is not normalized")
    for g, p in zip(m.gambles, m.previsions):
        if sum((mass * g(pt) for pt, mass in result), ZERO) != p:
            raise EngineDefect(f"discrete measure misprices {g.name}")
    return result


def countable_additivity_diagnosis(m: IntervalMarket) -> Diagnosis:
    """Coherence, strong arbitrage, and whether a countably additive pricing
    measure can exist.

    A coherent market with a strong arbitrage can only be priced by a
    finitely additive charge whose mass sits where the arbitrage payoff
    approaches its non-attained infimum 0.
    """
    book = find_book_interval(m)
    if book is not None:
        return Diagnosis(False, book=book, notes=("market is incoherent; diagnosis stops here",))
    strong = strong_arbitrage_interval(m)
    discrete = find_discrete_measure(m)
    if strong is not None:
        if discrete is not None:
            raise EngineDefect("strong arbitrage coexists with a countably additive pricing measure")
        loc = strong.infimum.location
        note = (
            f"the strategy payoff is > 0 everywhere but its infimum {strong.infimum.value} "
            f"is not attained (approached as w -> {loc}+); any pricing charge gives mass 1 "
            "only to sets A on which the infimum of that payoff is 0"
        )
        return Diagnosis(
            True,
            strong_arbitrage=strong,
            countably_additive_measure_exists=False,
            concentration_point=loc,
            notes=(note,),
        )
    if discrete is None:
        return Diagnosis(
            True,
            countably_additive_measure_exists=False,
            notes=("prices lie outside the convex hull of attainable payoff vectors",),
        )
    return Diagnosis(True, countably_additive_measure_exists=True, discrete_measure=discrete)


def discretize(m: IntervalMarket, n: int) -> Market:
    """Restrict every gamble to the grid ``{1/n, 2/n, ..., 1}``."""
    if n < 1:
        raise InputError("grid size must be at least 1")
    grid = [Fraction(k, n) for k in range(1, n + 1)]
    space = ScenarioSpace(tuple(str(w) for w in grid))
    gambles = tuple(Gamble(g.name, tuple(g(w) for w in grid)) for g in m.gambles)
    return Market(space, gambles, m.previsions)
