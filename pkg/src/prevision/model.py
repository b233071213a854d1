"""Scenario spaces, event algebras, quote systems, gambles, markets and measures.

Everything here is immutable; all scalars are :class:`~fractions.Fraction`.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import InputError
from .numbers import RationalLike, dot, to_fraction, to_fractions

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class ScenarioSpace:
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if not labels:
            raise InputError("a scenario space needs at least one scenario")
        if len(set(labels)) != len(labels):
            raise InputError(f"scenario labels must be unique: {list(labels)}")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"unknown scenario {label!r}") from None

    def event(self, *labels: str) -> Event:
        return Event(frozenset(self.index(x) for x in labels))

    @property
    def omega(self) -> Event:
        return Event(frozenset(range(len(self))))

    @property
    def empty(self) -> Event:
        return Event(frozenset())


@dataclass(frozen=True)
class Event:
    """A set of scenario indices."""

    members: frozenset[int]

    def __post_init__(self):
        members = frozenset(self.members)
        for i in members:
            if not isinstance(i, int) or isinstance(i, bool) or i < 0:
                raise InputError(f"invalid scenario index {i!r}")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, *indices: int) -> Event:
        return cls(frozenset(indices))

    def sort_key(self) -> tuple:
        return (len(self.members), tuple(sorted(self.members)))

    def __lt__(self, other: Event) -> bool:
        return self.sort_key() < other.sort_key()

    def __contains__(self, index: int) -> bool:
        return index in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __or__(self, other: Event) -> Event:
        return Event(self.members | other.members)

    def __and__(self, other: Event) -> Event:
        return Event(self.members & other.members)

    def complement(self, n: int) -> Event:
        return Event(frozenset(range(n)) - self.members)

    def issubset(self, other: Event) -> bool:
        return self.members <= other.members

    def isdisjoint(self, other: Event) -> bool:
        return self.members.isdisjoint(other.members)

    def indicator(self, n: int) -> tuple[Fraction, ...]:
        return tuple(ONE if j in self.members else ZERO for j in range(n))

    def label(self, space: ScenarioSpace | None = None) -> str:
        idx = sorted(self.members)
        names = [space.labels[i] for i in idx] if space else [str(i) for i in idx]
        return "{" + ",".join(names) + "}"


@dataclass(frozen=True)
class EventAlgebra:
    space: ScenarioSpace
    events: tuple[Event, ...]

    def __post_init__(self):
        n = len(self.space)
        evs = tuple(sorted(set(self.events)))
        for e in evs:
            if e.members and max(e.members) >= n:
                raise InputError(f"event {sorted(e.members)} references a scenario outside 0..{n - 1}")
        present = set(evs)
        if self.space.empty not in present or self.space.omega not in present:
            raise InputError("an algebra must contain the empty event and the whole space")
        for e in evs:
            if e.complement(n) not in present:
                raise InputError(f"algebra not closed under complement at {e.label(self.space)}")
        for a, b in combinations(evs, 2):
            if a | b not in present:
                raise InputError(
                    f"algebra not closed under union at {a.label(self.space)}, {b.label(self.space)}"
                )
        object.__setattr__(self, "events", evs)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def __contains__(self, event: Event) -> bool:
        return event in set(self.events)

    def atoms(self) -> tuple[Event, ...]:
        """Minimal non-empty events; they partition the scenario space."""
        nonempty = [e for e in self.events if e.members]
        return tuple(e for e in nonempty if not any(f.members < e.members for f in nonempty))


def generate_algebra(space: ScenarioSpace, generators: Iterable[Event]) -> EventAlgebra:
    """Smallest algebra on *space* containing *generators*.

    Built from the atoms: two scenarios share an atom iff every generator
    contains both or neither; the algebra is all unions of atoms.
    """
    n = len(space)
    gens = []
    for g in generators:
        if not isinstance(g, Event):
            g = Event(frozenset(g))
        if g.members and max(g.members) >= n:
            raise InputError(f"event {sorted(g.members)} references a scenario outside 0..{n - 1}")
        gens.append(g)
    signature: dict[tuple[bool, ...], list[int]] = {}
    for j in range(n):
        signature.setdefault(tuple(j in g for g in gens), []).append(j)
    atoms = [frozenset(v) for v in signature.values()]
    events = set()
    for r in range(len(atoms) + 1):
        for combo in combinations(atoms, r):
            events.add(Event(frozenset().union(*combo)))
    return EventAlgebra(space, tuple(events))


@dataclass(frozen=True)
class EventQuoteSystem:
    """A bookmaker's quotes: one rational per event of the algebra."""

    algebra: EventAlgebra
    quotes: tuple[tuple[Event, Fraction], ...]

    def __post_init__(self):
        raw = self.quotes.items() if isinstance(self.quotes, Mapping) else self.quotes
        table: dict[Event, Fraction] = {}
        for e, v in raw:
            if e not in self.algebra:
                raise InputError(f"quoted event {e.label(self.algebra.space)} is not in the algebra")
            if e in table:
                raise InputError(f"event {e.label(self.algebra.space)} is quoted twice")
            table[e] = to_fraction(v, f"quote of {e.label(self.algebra.space)}")
        missing = [e for e in self.algebra if e not in table]
        if missing:
            names = ", ".join(e.label(self.algebra.space) for e in missing)
            raise InputError(f"missing quotes for events: {names}")
        object.__setattr__(self, "quotes", tuple((e, table[e]) for e in self.algebra))

    @classmethod
    def from_mapping(cls, algebra: EventAlgebra, quotes: Mapping[Event, RationalLike]) -> EventQuoteSystem:
        return cls(algebra, tuple(quotes.items()))

    @property
    def space(self) -> ScenarioSpace:
        return self.algebra.space

    def __getitem__(self, event: Event) -> Fraction:
        for e, v in self.quotes:
            if e == event:
                return v
        raise KeyError(event)

    def relevant_events(self) -> tuple[Event, ...]:
        return tuple(e for e, v in self.quotes if v > 0)


@dataclass(frozen=True)
class Gamble:
    name: str
    payoffs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "payoffs", to_fractions(self.payoffs, f"payoffs of {self.name}"))

    def __len__(self) -> int:
        return len(self.payoffs)

    def is_unit(self) -> bool:
        return all(v == 1 for v in self.payoffs)


def unit_gamble(n: int, name: str = "unit") -> Gamble:
    return Gamble(name, (ONE,) * n)


@dataclass(frozen=True)
class Market:
    """Gambles with their previsions; must contain the constant-one gamble."""

    space: ScenarioSpace
    gambles: tuple[Gamble, ...]
    previsions: tuple[Fraction, ...]

    def __post_init__(self):
        n = len(self.space)
        gambles = tuple(self.gambles)
        if isinstance(self.previsions, Mapping):
            try:
                prev = tuple(self.previsions[g.name] for g in gambles)
            except KeyError as exc:
                raise InputError(f"no prevision given for gamble {exc.args[0]!r}") from None
            if len(self.previsions) != len(gambles):
                raise InputError("previsions mention gambles that are not in the market")
        else:
            prev = tuple(self.previsions)
        if len(prev) != len(gambles):
            raise InputError("every gamble needs exactly one prevision")
        names = [g.name for g in gambles]
        if len(set(names)) != len(names):
            raise InputError(f"gamble names must be unique: {names}")
        for g in gambles:
            if len(g) != n:
                raise InputError(f"gamble {g.name!r} has {len(g)} payoffs for {n} scenarios")
        if not any(g.is_unit() for g in gambles):
            raise InputError("the market must contain the constant-one gamble")
        object.__setattr__(self, "gambles", gambles)
        object.__setattr__(
            self, "previsions", tuple(to_fraction(p, f"prevision of {g.name}") for p, g in zip(prev, gambles))
        )

    @classmethod
    def build(
        cls,
        space: ScenarioSpace | Sequence[str],
        gambles: Mapping[str, Sequence[RationalLike]],
        previsions: Mapping[str, RationalLike],
        unit_price: RationalLike | None = 1,
    ) -> Market:
        """Build from plain mappings, adding a ``unit`` gamble priced
        *unit_price* unless a constant-one gamble is already present."""
        if not isinstance(space, ScenarioSpace):
            space = ScenarioSpace(tuple(space))
        gs = [Gamble(name, tuple(v)) for name, v in gambles.items()]
        prev = [previsions[name] for name in gambles]
        if unit_price is not None and not any(g.is_unit() for g in gs):
            gs.insert(0, unit_gamble(len(space)))
            prev.insert(0, unit_price)
        return cls(space, tuple(gs), tuple(prev))

    def __len__(self) -> int:
        return len(self.gambles)

    def gamble(self, name: str) -> Gamble:
        for g in self.gambles:
            if g.name == name:
                return g
        raise InputError(f"unknown gamble {name!r}")

    def prevision(self, name: str) -> Fraction:
        for g, p in zip(self.gambles, self.previsions):
            if g.name == name:
                return p
        raise InputError(f"unknown gamble {name!r}")

    def extended(self, gamble: Gamble, price: RationalLike) -> Market:
        return Market(self.space, self.gambles + (gamble,), self.previsions + (to_fraction(price),))


@dataclass(frozen=True)
class PricingMeasure:
    """A probability vector over the scenarios (exact)."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        w = to_fractions(self.weights, "weights")
        if not w:
            raise InputError("a measure needs at least one weight")
        if any(x < 0 for x in w):
            raise InputError(f"measure has a negative weight: {[str(x) for x in w]}")
        if sum(w) != 1:
            raise InputError(f"measure weights sum to {sum(w)}, not 1")
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def full_support(self) -> bool:
        return all(x > 0 for x in self.weights)

    def support(self) -> tuple[int, ...]:
        return tuple(j for j, x in enumerate(self.weights) if x > 0)

    def of_event(self, event: Event) -> Fraction:
        return sum((self.weights[j] for j in event.members), ZERO)

    @classmethod
    def uniform(cls, n: int) -> PricingMeasure:
        return cls((Fraction(1, n),) * n)


class ReferenceMeasure(PricingMeasure):
    """The fixed probability used to define almost-sure arbitrage."""


def expectation(q: PricingMeasure, f: Gamble | Sequence[RationalLike]) -> Fraction:
    payoffs = f.payoffs if isinstance(f, Gamble) else to_fractions(f, "gamble")
    if len(payoffs) != len(q.weights):
        raise InputError(f"measure has {len(q.weights)} weights but gamble has {len(payoffs)} payoffs")
    return dot(q.weights, payoffs)


@dataclass(frozen=True)
class AxiomViolation:
    """One failed instance of the probability axioms.

    ``kind`` is ``"negativity"`` (events = (A,)), ``"normalization"``
    (events = (Omega,)) or ``"additivity"`` (events = (A, B, A|B)).
    ``gap`` is signed: ``p(A)`` for negativity, ``p(Omega) - 1`` for
    normalization, ``p(A|B) - p(A) - p(B)`` for additivity.
    """

    kind: str
    events: tuple[Event, ...]
    gap: Fraction

    @property
    def magnitude(self) -> Fraction:
        return abs(self.gap)

    def describe(self, space: ScenarioSpace | None = None) -> str:
        labels = [e.label(space) for e in self.events]
        if self.kind == "negativity":
            return f"p({labels[0]}) = {self.gap} < 0"
        if self.kind == "normalization":
            return f"p(Omega) = {self.gap + 1} != 1"
        return f"p({labels[2]}) - p({labels[0]}) - p({labels[1]}) = {self.gap} != 0"


@dataclass(frozen=True)
class AxiomReport:
    violations: tuple[AxiomViolation, ...]

    def __bool__(self) -> bool:
        return bool(self.violations)

    def __iter__(self) -> Iterator[AxiomViolation]:
        return iter(self.violations)

    def __len__(self) -> int:
        return len(self.violations)

    @property
    def is_probability(self) -> bool:
        return not self.violations

    def of_kind(self, kind: str) -> tuple[AxiomViolation, ...]:
        return tuple(v for v in self.violations if v.kind == kind)


def validate_measure_axioms(q: EventQuoteSystem) -> AxiomReport:
    """List every violated instance of non-negativity, normalization and
    finite additivity (over all disjoint pairs, the empty event included)."""
    out = []
    table = dict(q.quotes)
    events = q.algebra.events
    for e in events:
        if table[e] < 0:
            out.append(AxiomViolation("negativity", (e,), table[e]))
    omega = q.space.omega
    if table[omega] != 1:
        out.append(AxiomViolation("normalization", (omega,), table[omega] - 1))
    for i, a in enumerate(events):
        for b in events[i:]:
            if a.isdisjoint(b):
                u = a | b
                gap = table[u] - table[a] - table[b]
                if gap:
                    out.append(AxiomViolation("additivity", (a, b, u), gap))
    return AxiomReport(tuple(out))


def measure_from_quotes(q: EventQuoteSystem) -> PricingMeasure:
    """Scenario weights reproducing the quotes on the algebra.

    Each atom's quote is placed on its lowest-index scenario; the other
    scenarios of the atom get zero. Only meaningful when the quotes satisfy
    the axioms.
    """
    w = [ZERO] * len(q.space)
    for atom in q.algebra.atoms():
        w[min(atom.members)] = q[atom]
    return PricingMeasure(tuple(w))
