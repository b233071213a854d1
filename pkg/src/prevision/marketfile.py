"""Reading market description files (JSON).

Three modes share one document layout; see ``docs/market-file.md``.
Numbers may be ``"p/q"`` strings, decimal strings, or JSON numbers (read
exactly, never through binary floating point).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import InputError
from .interval import IntervalMarket, PiecewiseLinearGamble
from .model import (
    Event,
    EventQuoteSystem,
    Gamble,
    Market,
    ReferenceMeasure,
    ScenarioSpace,
    generate_algebra,
    unit_gamble,
)
from .numbers import to_fraction

MODES = ("events", "gambles", "interval")


@dataclass(frozen=True)
class MarketFile:
    mode: str
    space: ScenarioSpace | None = None
    quotes: EventQuoteSystem | None = None
    market: Market | None = None
    interval_market: IntervalMarket | None = None
    reference: ReferenceMeasure | None = None
    query: Gamble | None = None
    price: Fraction | None = None
    notes: tuple[str, ...] = field(default=())

    def finite_market(self) -> Market:
        """The market of gambles; in events mode, one indicator gamble per event."""
        if self.market is not None:
            return self.market
        if self.quotes is not None:
            return quote_market(self.quotes)
        raise InputError(f"mode {self.mode!r} has no finite market")


def quote_market(q: EventQuoteSystem) -> Market:
    n = len(q.space)
    gambles = tuple(Gamble(e.label(q.space), e.indicator(n)) for e in q.algebra)
    return Market(q.space, gambles, tuple(v for _, v in q.quotes))


def loads_json(text: str) -> Any:
    try:
        return json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def load(path: str | Path) -> MarketFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse(loads_json(text))


def _num(value, where: str) -> Fraction:
    if isinstance(value, (dict, list)) or value is None:
        raise InputError(f"{where}: expected a number, got {type(value).__name__}")
    return to_fraction(value, where)


def _list(doc: dict, key: str, where: str) -> list:
    value = doc.get(key)
    if not isinstance(value, list):
        raise InputError(f"{where}{key}: expected a list")
    return value


def _scenarios(doc: dict) -> ScenarioSpace:
    labels = _list(doc, "scenarios", "")
    if not all(isinstance(x, str) for x in labels):
        raise InputError("scenarios: every scenario name must be a string")
    return ScenarioSpace(tuple(labels))


def _event(space: ScenarioSpace, members, where: str) -> Event:
    if not isinstance(members, list):
        raise InputError(f"{where}: expected a list of scenario names")
    try:
        return space.event(*members)
    except InputError as exc:
        raise InputError(f"{where}: {exc}") from None


def parse_reference(value, space_size: int, where: str = "reference_measure") -> ReferenceMeasure:
    if isinstance(value, dict):
        value = value.get("weights")
    if not isinstance(value, list):
        raise InputError(f"{where}: expected a list of weights")
    weights = tuple(_num(v, f"{where}[{i}]") for i, v in enumerate(value))
    if len(weights) != space_size:
        raise InputError(f"{where}: {len(weights)} weights for {space_size} scenarios")
    try:
        return ReferenceMeasure(weights)
    except InputError as exc:
        raise InputError(f"{where}: {exc}") from None


def _parse_events(doc: dict) -> tuple[ScenarioSpace, EventQuoteSystem]:
    space = _scenarios(doc)
    entries = _list(doc, "events", "")
    events, values = [], []
    for i, entry in enumerate(entries):
        where = f"events[{i}]"
        if not isinstance(entry, dict):
            raise InputError(f"{where}: expected an object with 'members' and 'quote'")
        events.append(_event(space, entry.get("members"), f"{where}.members"))
        values.append(_num(entry.get("quote"), f"{where}.quote"))
    algebra = generate_algebra(space, events)
    return space, EventQuoteSystem(algebra, tuple(zip(events, values)))


def _parse_gamble(entry, n: int, where: str) -> Gamble:
    if not isinstance(entry, dict):
        raise InputError(f"{where}: expected an object")
    name = entry.get("name")
    if not isinstance(name, str) or not name:
        raise InputError(f"{where}.name: expected a non-empty string")
    payoffs = entry.get("payoffs")
    if not isinstance(payoffs, list):
        raise InputError(f"{where}.payoffs: expected a list")
    if len(payoffs) != n:
        raise InputError(f"{where}.payoffs: {len(payoffs)} values for {n} scenarios")
    return Gamble(name, tuple(_num(v, f"{where}.payoffs[{j}]") for j, v in enumerate(payoffs)))


def _parse_gambles(doc: dict) -> tuple[ScenarioSpace, Market, list[str]]:
    space = _scenarios(doc)
    n = len(space)
    gambles, prices = [], []
    for i, entry in enumerate(_list(doc, "gambles", "")):
        where = f"gambles[{i}]"
        gambles.append(_parse_gamble(entry, n, where))
        prices.append(_num(entry.get("prevision"), f"{where}.prevision"))
    notes = []
    if not any(g.is_unit() for g in gambles):
        unit_price = _num(doc.get("unit_price", "1"), "unit_price")
        name = "unit"
        while name in {g.name for g in gambles}:
            name += "_"
        gambles.insert(0, unit_gamble(n, name))
        prices.insert(0, unit_price)
        notes.append(f"constant-one gamble {name!r} added with prevision {unit_price}")
    return space, Market(space, tuple(gambles), tuple(prices)), notes


def _parse_pieces(entry: dict, where: str) -> PiecewiseLinearGamble:
    name = entry.get("name")
    if not isinstance(name, str) or not name:
        raise InputError(f"{where}.name: expected a non-empty string")
    pieces = entry.get("pieces")
    if not isinstance(pieces, list) or not pieces:
        raise InputError(f"{where}.pieces: expected a non-empty list")
    rows = []
    for k, p in enumerate(pieces):
        pw = f"{where}.pieces[{k}]"
        if isinstance(p, dict):
            try:
                p = [p["from"], p["to"], p["slope"], p["intercept"]]
            except KeyError as exc:
                raise InputError(f"{pw}: missing key {exc.args[0]!r}") from None
        if not isinstance(p, list) or len(p) != 4:
            raise InputError(f"{pw}: expected [from, to, slope, intercept]")
        rows.append(tuple(_num(v, f"{pw}[{j}]") for j, v in enumerate(p)))
    try:
        return PiecewiseLinearGamble.from_pieces(name, rows)
    except InputError as exc:
        raise InputError(f"{where}: {exc}") from None


def _parse_interval(doc: dict) -> tuple[IntervalMarket, list[str]]:
    gambles, prices = [], []
    for i, entry in enumerate(_list(doc, "gambles", "")):
        where = f"gambles[{i}]"
        if not isinstance(entry, dict):
            raise InputError(f"{where}: expected an object")
        gambles.append(_parse_pieces(entry, where))
        prices.append(_num(entry.get("prevision"), f"{where}.prevision"))
    notes = []
    if not any(g.is_unit() for g in gambles):
        unit_price = _num(doc.get("unit_price", "1"), "unit_price")
        name = "unit"
        while name in {g.name for g in gambles}:
            name += "_"
        gambles.insert(0, PiecewiseLinearGamble.constant(1, name))
        prices.insert(0, unit_price)
        notes.append(f"constant-one gamble {name!r} added with prevision {unit_price}")
    market = IntervalMarket(tuple(gambles), tuple(prices))
    if market.unit_price_flag:
        notes.append(market.unit_price_flag)
    return market, notes


def parse(doc: Any) -> MarketFile:
    if not isinstance(doc, dict):
        raise InputError("market file must be a JSON object")
    mode = doc.get("mode")
    if mode not in MODES:
        raise InputError(f"mode: expected one of {', '.join(MODES)}, got {mode!r}")
    notes: list[str] = []
    space = quotes = market = imarket = None
    if mode == "events":
        space, quotes = _parse_events(doc)
    elif mode == "gambles":
        space, market, notes = _parse_gambles(doc)
    else:
        imarket, notes = _parse_interval(doc)

    reference = None
    if doc.get("reference_measure") is not None:
        if space is None:
            raise InputError("reference_measure: not supported in interval mode")
        reference = parse_reference(doc["reference_measure"], len(space))

    query = None
    if doc.get("query") is not None:
        if space is None:
            raise InputError("query: not supported in interval mode")
        q = doc["query"]
        if isinstance(q, list):
            q = {"name": "g", "payoffs": q}
        if isinstance(q, dict) and "name" not in q:
            q = {**q, "name": "g"}
        query = _parse_gamble(q, len(space), "query")
    price = None
    if doc.get("price") is not None:
        if query is None:
            raise InputError("price: given without a query gamble")
        price = _num(doc["price"], "price")

    return MarketFile(mode, space, quotes, market, imarket, reference, query, price, tuple(notes))
