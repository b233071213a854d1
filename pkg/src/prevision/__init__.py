"""Exact coherence, arbitrage and pricing-bound analysis for bookmakers'
quotes and previsions on finite and interval scenario spaces."""

from .arbitrage import (
    ArbitrageReport,
    PArbitrage,
    classify,
    find_full_support_measure,
    find_p_arbitrage,
    find_strong_arbitrage,
)
from .book import Book, CoherenceVerdict, Leg
from .errors import ContractError, EngineDefect, InputError, PrevisionError
from .events import check_coherence_events, construct_book_from_violation, find_book_events
from .hedging import PriceInterval, check_extension_coherence, measure_range, price_interval, subhedge, superhedge
from .interval import (
    Diagnosis,
    IntervalBook,
    IntervalMarket,
    PiecewiseLinearGamble,
    countable_additivity_diagnosis,
    discretize,
    exact_inf,
    find_book_interval,
    find_discrete_measure,
    strong_arbitrage_interval,
)
from .market import (
    LinearCombination,
    find_book,
    find_pricing_measure,
    linear_extension_price,
    market_verdict,
)
from .model import (
    AxiomReport,
    AxiomViolation,
    Event,
    EventAlgebra,
    EventQuoteSystem,
    Gamble,
    Market,
    PricingMeasure,
    ReferenceMeasure,
    ScenarioSpace,
    expectation,
    generate_algebra,
    validate_measure_axioms,
)

__version__ = "0.1.0"
