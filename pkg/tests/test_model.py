from decimal import Decimal
from fractions import Fraction

import pytest

from prevision.errors import InputError
from prevision.model import (
    Event,
    EventAlgebra,
    EventQuoteSystem,
    Gamble,
    Market,
    PricingMeasure,
    ScenarioSpace,
    expectation,
    generate_algebra,
    measure_from_quotes,
    validate_measure_axioms,
)
from prevision.numbers import to_fraction

AB = ScenarioSpace(("a", "b"))


def quotes_ab(pa, pb, pomega, pempty=0):
    alg = generate_algebra(AB, [AB.event("a")])
    return EventQuoteSystem.from_mapping(
        alg, {AB.empty: pempty, AB.event("a"): pa, AB.event("b"): pb, AB.omega: pomega}
    )


class TestNumbers:
    @pytest.mark.parametrize(
        "raw, expected",
        [("3/10", Fraction(3, 10)), ("0.25", Fraction(1, 4)), (Decimal("1.5"), Fraction(3, 2)), (2, Fraction(2)), (0.1, Fraction(1, 10))],
    )
    def test_parse(self, raw, expected):
        assert to_fraction(raw) == expected

    @pytest.mark.parametrize("raw", ["abc", "1/0", True, float("nan"), Decimal("Infinity"), None])
    def test_reject(self, raw):
        with pytest.raises(InputError):
            to_fraction(raw, "x")


class TestAlgebra:
    def test_generated_algebra_is_closed(self):
        space = ScenarioSpace(("a", "b", "c"))
        alg = generate_algebra(space, [space.event("a", "b")])
        assert len(alg) == 4
        assert [len(e) for e in alg.atoms()] == [1, 2]

    def test_unclosed_family_rejected(self):
        with pytest.raises(InputError):
            EventAlgebra(AB, (AB.empty, AB.event("a"), AB.omega))

    def test_event_ops(self):
        a, b = Event.of(0), Event.of(1)
        assert (a | b) == AB.omega
        assert (a & b) == AB.empty
        assert a.complement(2) == b
        assert a.isdisjoint(b) and a.issubset(AB.omega)
        assert a.indicator(2) == (1, 0)

    def test_missing_quote_rejected(self):
        alg = generate_algebra(AB, [AB.event("a")])
        with pytest.raises(InputError, match="missing"):
            EventQuoteSystem.from_mapping(alg, {AB.omega: 1})

    def test_unknown_scenario(self):
        with pytest.raises(InputError):
            AB.event("z")


class TestAxioms:
    def test_probability_has_empty_report(self):
        report = validate_measure_axioms(quotes_ab(Fraction(3, 10), Fraction(7, 10), 1))
        assert report.is_probability
        assert len(report) == 0

    def test_normalization_violation(self):
        report = validate_measure_axioms(quotes_ab(Fraction(3, 10), Fraction(6, 10), Fraction(9, 10)))
        kinds = {v.kind for v in report}
        assert "normalization" in kinds
        (norm,) = report.of_kind("normalization")
        assert norm.magnitude == Fraction(1, 10)

    def test_additivity_violation_on_atoms(self):
        report = validate_measure_axioms(quotes_ab(Fraction(1, 2), Fraction(1, 2), Fraction(6, 5)))
        add = [v for v in report.of_kind("additivity") if v.events[:2] == (AB.event("a"), AB.event("b"))]
        assert len(add) == 1
        assert add[0].gap == Fraction(1, 5)

    def test_every_violation_listed(self):
        report = validate_measure_axioms(quotes_ab(Fraction(-1, 2), Fraction(1, 2), Fraction(6, 5), Fraction(1, 10)))
        kinds = {v.kind for v in report}
        assert kinds == {"negativity", "normalization", "additivity"}

    def test_measure_from_quotes(self):
        q = quotes_ab(Fraction(3, 10), Fraction(7, 10), 1)
        assert measure_from_quotes(q).weights == (Fraction(3, 10), Fraction(7, 10))


class TestMarketTypes:
    def test_unit_gamble_required(self):
        with pytest.raises(InputError):
            Market(AB, (Gamble("S", (2, 0)),), (1,))

    def test_build_adds_unit(self):
        m = Market.build(AB, {"S": (2, 0)}, {"S": 1})
        assert m.gamble("unit").is_unit()
        assert m.prevision("unit") == 1

    def test_measure_validation(self):
        with pytest.raises(InputError):
            PricingMeasure((Fraction(1, 2), Fraction(1, 3)))
        with pytest.raises(InputError):
            PricingMeasure((Fraction(3, 2), Fraction(-1, 2)))
        q = PricingMeasure.uniform(2)
        assert q.full_support
        assert expectation(q, (2, 0)) == 1
