"""JSON serialization of certificates and their re-verification from the
serialized form alone.

Every rational is written as a ``"p/q"`` string. :func:`verify_report`
rebuilds each certificate from the report and the original market file and
checks it with exact arithmetic, without trusting anything the engine
computed.
"""

from __future__ import annotations

import json
from collections.abc import Sequence
from fractions import Fraction
from typing import Any

from .arbitrage import PArbitrage
from .book import Book, Leg
from .errors import InputError, PrevisionError
from .hedging import PriceInterval
from .interval import (
    InfResult,
    IntervalBook,
    IntervalMarket,
    PiecewiseLinearGamble,
    discretize,
)
from .market import LinearCombination
from .marketfile import MarketFile
from .model import (
    Event,
    Gamble,
    Market,
    PricingMeasure,
    ReferenceMeasure,
    ScenarioSpace,
    expectation,
)
from .numbers import fmt, fmt_all, to_fraction

ZERO = Fraction(0)


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


# -- serialization -----------------------------------------------------------


def _instrument(inst, space: ScenarioSpace | None) -> dict:
    if isinstance(inst, Event):
        return {"event": [space.labels[i] for i in sorted(inst.members)]}
    return {"gamble": inst.name}


def _legs(legs: Sequence[Leg], space: ScenarioSpace | None) -> list[dict]:
    return [
        {"instrument": _instrument(leg.instrument, space), "coefficient": fmt(leg.coefficient), "price": fmt(leg.price)}
        for leg in legs
    ]


def book_json(book: Book, space: ScenarioSpace, context: str = "input") -> dict:
    return {
        "kind": "book",
        "context": context,
        "legs": _legs(book.legs, space),
        "epsilon": fmt(book.epsilon),
        "payoff": fmt_all(book.payoff),
    }


def strong_json(book: Book, space: ScenarioSpace, context: str = "input") -> dict:
    return {**book_json(book, space, context), "kind": "strong_arbitrage"}


def measure_json(q: PricingMeasure, context: str = "input", full_support: bool = False) -> dict:
    out = {"kind": "pricing_measure", "context": context, "weights": fmt_all(q.weights)}
    if full_support:
        out["full_support"] = True
        out["min_weight"] = fmt(min(q.weights))
    return out


def p_arbitrage_json(cert: PArbitrage) -> dict:
    return {
        "kind": "p_arbitrage",
        "context": "input",
        "legs": _legs(cert.legs, None),
        "payoff": fmt_all(cert.payoff),
        "reference": fmt_all(cert.reference.weights),
        "expected_gain": fmt(cert.expected_gain),
    }


def _combo(c: LinearCombination) -> list[list[str]]:
    return [[name, fmt(v)] for name, v in c.terms]


def interval_json(iv: PriceInterval, query: Gamble) -> dict:
    return {
        "kind": "price_interval",
        "context": "input",
        "query": query.name,
        "lower": fmt(iv.lower),
        "upper": fmt(iv.upper),
        "lower_hedge": _combo(iv.lower_hedge),
        "upper_hedge": _combo(iv.upper_hedge),
        "lower_measure": fmt_all(iv.lower_measure.weights),
        "upper_measure": fmt_all(iv.upper_measure.weights),
    }


def pieces_json(f: PiecewiseLinearGamble) -> list[list[str]]:
    b = f.breakpoints
    return [[fmt(b[i]), fmt(b[i + 1]), fmt(f.slopes[i]), fmt(f.intercepts[i])] for i in range(f.num_pieces)]


def interval_book_json(book: IntervalBook, kind: str) -> dict:
    inf = book.infimum
    return {
        "kind": kind,
        "context": "input",
        "legs": _legs(book.legs, None),
        "epsilon": fmt(book.epsilon),
        "payoff": pieces_json(book.payoff),
        "infimum": {"value": fmt(inf.value), "attained": inf.attained, "location": fmt(inf.location)},
    }


def discrete_measure_json(atoms) -> dict:
    return {
        "kind": "discrete_measure",
        "context": "input",
        "atoms": [[fmt(p), fmt(w)] for p, w in atoms],
    }


# -- verification ------------------------------------------------------------


def _frac(value, where: str) -> Fraction:
    if not isinstance(value, str):
        raise InputError(f"{where}: rationals must be serialized as strings")
    return to_fraction(value, where)


def _fracs(values, where: str) -> tuple[Fraction, ...]:
    if not isinstance(values, list):
        raise InputError(f"{where}: expected a list")
    return tuple(_frac(v, f"{where}[{i}]") for i, v in enumerate(values))


def _context_market(mf: MarketFile, context: str) -> Market:
    if context == "input":
        return mf.finite_market()
    if context == "extended":
        if mf.query is None or mf.price is None:
            raise InputError("extended context needs a query gamble and a price")
        m = mf.finite_market()
        g = mf.query
        if g.name in {h.name for h in m.gambles}:
            g = Gamble(g.name + "'", g.payoffs)
        return m.extended(g, mf.price)
    if context.startswith("grid:"):
        return discretize(mf.interval_market, int(context[5:]))
    raise InputError(f"unknown certificate context {context!r}")


def _resolve_legs(raw, mf: MarketFile, m: Market | None) -> list[Leg]:
    legs = []
    for i, entry in enumerate(raw):
        where = f"legs[{i}]"
        inst = entry["instrument"]
        coef = _frac(entry["coefficient"], f"{where}.coefficient")
        price = _frac(entry["price"], f"{where}.price")
        if "event" in inst:
            q = mf.quotes
            if q is None:
                raise InputError(f"{where}: event legs need an events-mode file")
            event = q.space.event(*inst["event"])
            if q[event] != price:
                raise InputError(f"{where}: price {price} differs from the quote {q[event]}")
            legs.append(Leg(event, coef, price))
        else:
            name = inst["gamble"]
            if m is not None:
                g, p = m.gamble(name), m.prevision(name)
            else:
                im = mf.interval_market
                table = {h.name: (h, pr) for h, pr in zip(im.gambles, im.previsions)}
                if name not in table:
                    raise InputError(f"{where}: unknown gamble {name!r}")
                g, p = table[name]
            if p != price:
                raise InputError(f"{where}: price {price} differs from the prevision {p}")
            legs.append(Leg(g, coef, price))
    return legs


def _prices_all(q: PricingMeasure, m: Market) -> bool:
    return all(expectation(q, g) == p for g, p in zip(m.gambles, m.previsions))


def _check_book(cert: dict, mf: MarketFile, strong: bool) -> bool:
    m = _context_market(mf, cert["context"])
    legs = _resolve_legs(cert["legs"], mf, m)
    book = Book(tuple(legs), _frac(cert["epsilon"], "epsilon"), _fracs(cert["payoff"], "payoff"))
    if not book.verify():
        return False
    return strong or book.epsilon > 0


def _check_measure(cert: dict, mf: MarketFile) -> bool:
    m = _context_market(mf, cert["context"])
    q = PricingMeasure(_fracs(cert["weights"], "weights"))
    if len(q) != len(m.space) or not _prices_all(q, m):
        return False
    if cert.get("full_support"):
        return q.full_support and _frac(cert["min_weight"], "min_weight") == min(q.weights)
    return True


def _check_p_arbitrage(cert: dict, mf: MarketFile) -> bool:
    m = _context_market(mf, cert["context"])
    legs = _resolve_legs(cert["legs"], mf, m)
    ref = ReferenceMeasure(_fracs(cert["reference"], "reference"))
    pa = PArbitrage(
        tuple(legs), _fracs(cert["payoff"], "payoff"), ref, _frac(cert["expected_gain"], "expected_gain")
    )
    return pa.verify()


def _check_interval(cert: dict, mf: MarketFile) -> bool:
    m = _context_market(mf, cert["context"])
    if mf.query is None or mf.query.name != cert["query"]:
        return False

    def combo(raw):
        return LinearCombination(tuple((name, _frac(v, "coefficient")) for name, v in raw))

    iv = PriceInterval(
        _frac(cert["lower"], "lower"),
        _frac(cert["upper"], "upper"),
        combo(cert["lower_hedge"]),
        combo(cert["upper_hedge"]),
        PricingMeasure(_fracs(cert["lower_measure"], "lower_measure")),
        PricingMeasure(_fracs(cert["upper_measure"], "upper_measure")),
    )
    return iv.verify(m, mf.query)


def _check_interval_book(cert: dict, mf: MarketFile, uniform: bool) -> bool:
    legs = _resolve_legs(cert["legs"], mf, None)
    pieces = [tuple(_frac(v, "piece") for v in p) for p in cert["payoff"]]
    payoff = PiecewiseLinearGamble.from_pieces("payoff", pieces)
    raw = cert["infimum"]
    inf = InfResult(_frac(raw["value"], "infimum.value"), bool(raw["attained"]), _frac(raw["location"], "location"))
    book = IntervalBook(tuple(legs), _frac(cert["epsilon"], "epsilon"), payoff, inf)
    if not book.verify():
        return False
    return book.epsilon > 0 if uniform else True


def _check_discrete(cert: dict, mf: MarketFile) -> bool:
    im: IntervalMarket = mf.interval_market
    atoms = [(_frac(p, "point"), _frac(w, "mass")) for p, w in cert["atoms"]]
    if any(not 0 < p <= 1 or w < 0 for p, w in atoms) or sum((w for _, w in atoms), ZERO) != 1:
        return False
    return all(sum((w * g(p) for p, w in atoms), ZERO) == pr for g, pr in zip(im.gambles, im.previsions))


def verify_certificate(cert: dict, mf: MarketFile) -> bool:
    """Re-check one serialized certificate against the parsed input file."""
    kind = cert.get("kind")
    try:
        if kind == "book":
            if mf.mode == "interval" and cert.get("context") == "input":
                return _check_interval_book(cert, mf, uniform=True)
            return _check_book(cert, mf, strong=False)
        if kind == "strong_arbitrage":
            if mf.mode == "interval":
                return _check_interval_book(cert, mf, uniform=False)
            return _check_book(cert, mf, strong=True)
        if kind == "pricing_measure":
            return _check_measure(cert, mf)
        if kind == "p_arbitrage":
            return _check_p_arbitrage(cert, mf)
        if kind == "price_interval":
            return _check_interval(cert, mf)
        if kind == "discrete_measure":
            return _check_discrete(cert, mf)
    except (PrevisionError, KeyError, TypeError, ValueError):
        return False
    return False


def verify_report(report: dict, mf: MarketFile) -> list[tuple[int, str, bool]]:
    """``(index, kind, ok)`` for every certificate in *report*."""
    return [(i, c.get("kind", "?"), verify_certificate(c, mf)) for i, c in enumerate(report.get("certificates", []))]


def report_from_json(text: str) -> Any:
    return json.loads(text)
