"""Coherence of a bookmaker's quotes on events.

Two independent routes decide coherence: the probability axioms
(:func:`~prevision.model.validate_measure_axioms`) and an LP search for a
book. :func:`check_coherence_events` runs both and refuses to answer if
they disagree.
"""

from __future__ import annotations

from fractions import Fraction

from .book import Book, CoherenceVerdict, Leg, search_book
from .errors import EngineDefect, InputError
from .model import (
    AxiomViolation,
    EventQuoteSystem,
    measure_from_quotes,
    validate_measure_axioms,
)

ONE = Fraction(1)


def find_book_events(q: EventQuoteSystem, relevant_only: bool = False) -> Book | None:
    """Search for a book over the events of *q*.

    With ``relevant_only`` the bets are restricted to events quoted
    strictly positive. The returned book maximizes the guaranteed margin
    among strategies with ``sum |alpha| <= 1``.
    """
    events = q.relevant_events() if relevant_only else q.algebra.events
    prices = [q[e] for e in events]
    return search_book(events, prices, len(q.space))


def check_coherence_events(q: EventQuoteSystem) -> CoherenceVerdict:
    report = validate_measure_axioms(q)
    book = find_book_events(q)
    if report.is_probability and book is not None:
        raise EngineDefect("quotes satisfy the axioms yet a book was found")
    if not report.is_probability and book is None:
        raise EngineDefect(
            "quotes violate the axioms yet no book was found: "
            + "; ".join(v.describe(q.space) for v in report)
        )
    if book is not None:
        return CoherenceVerdict(False, book)
    measure = measure_from_quotes(q)
    for e, v in q.quotes:
        if measure.of_event(e) != v:
            raise EngineDefect(f"atom measure does not reproduce the quote of {e.label(q.space)}")
    return CoherenceVerdict(True, measure)


def construct_book_from_violation(q: EventQuoteSystem, violation: AxiomViolation) -> Book:
    """The explicit book that exploits one axiom violation.

    * negativity on A: buy A (alpha = -1); payoff ``1_A - p(A) >= -p(A)``;
    * normalization: one leg on Omega, bought if ``p(Omega) < 1`` and sold
      otherwise, paying ``|1 - p(Omega)|`` everywhere;
    * additivity on disjoint A, B: buy A and B and sell A|B when
      ``p(A|B) > p(A) + p(B)`` (reverse every sign otherwise), paying
      ``|p(A|B) - p(A) - p(B)|`` everywhere.

    ``epsilon`` is set to the violation magnitude.
    """
    n = len(q.space)
    kind = violation.kind
    if kind == "negativity":
        (a,) = violation.events
        if a not in q.algebra or q[a] >= 0:
            raise InputError(f"p({a.label(q.space)}) is not negative")
        legs = [Leg(a, -ONE, q[a])]
        magnitude = -q[a]
    elif kind == "normalization":
        (omega,) = violation.events
        if omega != q.space.omega:
            raise InputError("a normalization violation must refer to the whole space")
        gap = q[omega] - 1
        if gap == 0:
            raise InputError("p(Omega) = 1: no normalization violation")
        legs = [Leg(omega, ONE if gap > 0 else -ONE, q[omega])]
        magnitude = abs(gap)
    elif kind == "additivity":
        a, b, u = violation.events
        if not a.isdisjoint(b) or u != a | b or any(e not in q.algebra for e in (a, b, u)):
            raise InputError("additivity violation needs disjoint A, B in the algebra and their union")
        gap = q[u] - q[a] - q[b]
        if gap == 0:
            raise InputError("p(A|B) = p(A) + p(B): no additivity violation")
        s = ONE if gap > 0 else -ONE
        legs = [Leg(a, -s, q[a]), Leg(b, -s, q[b]), Leg(u, s, q[u])]
        magnitude = abs(gap)
    else:
        raise InputError(f"unknown violation kind {kind!r}")
    book = Book.from_legs(legs, n, magnitude)
    if not book.verify():
        raise EngineDefect(f"constructed book for {kind} violation does not verify")
    return book
