"""Command-line interface.

    prevision COMMAND FILE [options]

Exit codes: 0 coherent / nothing found, 1 certificate found, 2 input error,
3 internal engine defect. The JSON report goes to stdout, diagnostics to
stderr.
"""

from __future__ import annotations

import argparse
import sys
import time
from collections.abc import Sequence
from fractions import Fraction
from pathlib import Path

from .arbitrage import classify, find_full_support_measure, find_p_arbitrage
from .errors import EngineDefect, InputError
from .events import check_coherence_events, find_book_events
from .hedging import check_extension_coherence, price_interval
from .interval import (
    countable_additivity_diagnosis,
    find_book_interval,
    find_discrete_measure,
    strong_arbitrage_interval,
)
from .interval import discretize as discretize_interval
from .market import find_book, market_verdict
from .marketfile import MarketFile, load, loads_json, parse_reference
from .model import ReferenceMeasure, validate_measure_axioms
from .numbers import fmt
from .report import (
    book_json,
    discrete_measure_json,
    dumps,
    interval_book_json,
    interval_json,
    measure_json,
    p_arbitrage_json,
    strong_json,
    verify_report,
)

COMMANDS = ("check", "book", "measure", "classify", "bounds", "diagnose")

EXIT_CLEAN, EXIT_CERTIFICATE, EXIT_INPUT, EXIT_DEFECT = 0, 1, 2, 3


class _Run:
    """Collects verdicts, certificates, notes and summary lines for one command."""

    def __init__(self, command: str, mf: MarketFile):
        self.command = command
        self.mf = mf
        self.verdict: dict = {}
        self.certificates: list[dict] = []
        self.notes: list[str] = list(mf.notes)
        self.summary: list[str] = []
        self.extra: dict = {}

    def book(self, book, context="input"):
        self.certificates.append(book_json(book, self.mf.space, context))


# -- commands ----------------------------------------------------------------


def _check(r: _Run, opts) -> int:
    mf = r.mf
    if mf.mode == "events":
        q = mf.quotes
        axioms = validate_measure_axioms(q)
        r.verdict["axiom_violations"] = [v.describe(q.space) for v in axioms]
        if opts.relevant_only:
            book = find_book_events(q, relevant_only=True)
            r.verdict["coherent"] = book is None
            r.verdict["bets"] = "relevant events only"
            if book is not None:
                r.book(book)
                r.summary.append(f"Quotes admit a book on relevant events with margin {book.epsilon}.")
                return EXIT_CERTIFICATE
            if axioms.is_probability:
                r.certificates.append(measure_json(check_coherence_events(q).measure))
            else:
                r.notes.append("no book on relevant events, but the quotes violate the probability axioms")
            r.summary.append("No book exists when betting on relevant events only.")
            return EXIT_CLEAN
        verdict = check_coherence_events(q)
    elif mf.mode == "gambles":
        verdict = market_verdict(mf.market)
    else:
        book = find_book_interval(mf.interval_market)
        r.verdict["coherent"] = book is None
        if book is not None:
            r.certificates.append(interval_book_json(book, "book"))
            r.summary.append(f"Previsions are incoherent: a book pays at least {book.epsilon} everywhere.")
        else:
            r.notes.append("no finite witness of coherence on (0, 1]; see the diagnose command")
            r.summary.append("Previsions are coherent: no book exists on (0, 1].")
        _grid(r, opts)
        return EXIT_CLEAN if book is None else EXIT_CERTIFICATE

    r.verdict["coherent"] = verdict.coherent
    if verdict.coherent:
        r.certificates.append(measure_json(verdict.measure))
        r.summary.append("Coherent: a probability measure reproduces every quote.")
        return EXIT_CLEAN
    r.book(verdict.book)
    r.summary.append(f"Incoherent: a book pays at least {verdict.book.epsilon} in every scenario.")
    return EXIT_CERTIFICATE


def _book(r: _Run, opts) -> int:
    mf = r.mf
    if mf.mode == "events":
        book = find_book_events(mf.quotes, relevant_only=opts.relevant_only)
    elif mf.mode == "gambles":
        book = find_book(mf.market)
    else:
        book = find_book_interval(mf.interval_market)
    r.verdict["book_found"] = book is not None
    if book is None:
        r.summary.append("No book found.")
        return EXIT_CLEAN
    if mf.mode == "interval":
        r.certificates.append(interval_book_json(book, "book"))
    else:
        r.book(book)
    r.summary.append(f"Book found with guaranteed margin {book.epsilon}.")
    return EXIT_CERTIFICATE


def _measure(r: _Run, opts) -> int:
    mf = r.mf
    if mf.mode == "interval":
        if opts.full_support:
            raise InputError("--full-support applies to finite scenario spaces only")
        im = mf.interval_market
        book = find_book_interval(im)
        if book is not None:
            r.verdict["measure_found"] = False
            r.certificates.append(interval_book_json(book, "book"))
            r.summary.append("Incoherent previsions have no pricing measure.")
            return EXIT_CERTIFICATE
        atoms = find_discrete_measure(im)
        r.verdict["measure_found"] = atoms is not None
        if atoms is not None:
            r.certificates.append(discrete_measure_json(atoms))
            r.summary.append(f"A discrete pricing measure with {len(atoms)} atom(s) exists.")
            return EXIT_CLEAN
        strong = strong_arbitrage_interval(im)
        if strong is not None:
            r.certificates.append(interval_book_json(strong, "strong_arbitrage"))
        r.notes.append("coherent, but no countably additive pricing measure with finitely many atoms exists")
        r.summary.append("No discrete pricing measure exists.")
        return EXIT_CERTIFICATE

    m = mf.finite_market()
    verdict = market_verdict(m)
    if not verdict.coherent:
        r.verdict["measure_found"] = False
        r.book(verdict.book)
        r.summary.append("Incoherent previsions have no pricing measure.")
        return EXIT_CERTIFICATE
    if not opts.full_support:
        r.verdict["measure_found"] = True
        r.certificates.append(measure_json(verdict.measure))
        r.summary.append("A pricing measure exists.")
        return EXIT_CLEAN
    q = find_full_support_measure(m)
    r.verdict["measure_found"] = q is not None
    r.verdict["full_support"] = True
    if q is not None:
        r.certificates.append(measure_json(q, full_support=True))
        r.summary.append(f"A full-support pricing measure exists; its smallest weight is {min(q.weights)}.")
        return EXIT_CLEAN
    pa = find_p_arbitrage(m, ReferenceMeasure.uniform(len(m.space)))
    if pa is None:
        raise EngineDefect("no full-support pricing measure yet no arbitrage under the uniform measure")
    r.certificates.append(p_arbitrage_json(pa))
    r.summary.append("No full-support pricing measure: an arbitrage never loses and sometimes gains.")
    return EXIT_CERTIFICATE


def _reference(r: _Run, opts) -> ReferenceMeasure | None:
    if opts.reference:
        try:
            text = Path(opts.reference).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read reference file {opts.reference}: {exc.strerror}") from None
        try:
            return parse_reference(loads_json(text), len(r.mf.space), "reference file")
        except InputError as exc:
            raise InputError(f"{opts.reference}: {exc}") from None
    return r.mf.reference


def _classify(r: _Run, opts) -> int:
    mf = r.mf
    if mf.mode == "interval":
        im = mf.interval_market
        book = find_book_interval(im)
        strong = strong_arbitrage_interval(im)
        if book is not None and strong is None:
            raise EngineDefect("uniformly strong arbitrage without strong arbitrage")
        r.verdict.update(uniformly_strong=book is not None, strong=strong is not None)
        r.verdict["arbitrage_free"] = strong is None
        if book is not None:
            r.certificates.append(interval_book_json(book, "book"))
        if strong is not None:
            r.certificates.append(interval_book_json(strong, "strong_arbitrage"))
        r.notes.append("P-arbitrage is not evaluated on (0, 1]")
        r.summary.append(_taxonomy_line(r.verdict))
        return EXIT_CLEAN if strong is None else EXIT_CERTIFICATE

    m = mf.finite_market()
    rep = classify(m, _reference(r, opts))
    r.verdict.update(
        uniformly_strong=rep.uniformly_strong is not None,
        strong=rep.strong is not None,
        p_arbitrage=rep.p_arbitrage is not None,
        arbitrage_free=rep.arbitrage_free,
        reference=[fmt(w) for w in rep.reference.weights],
    )
    r.notes.extend(rep.notes)
    if rep.uniformly_strong is not None:
        r.book(rep.uniformly_strong)
    if rep.strong is not None:
        r.certificates.append(strong_json(rep.strong, mf.space))
    if rep.p_arbitrage is not None:
        r.certificates.append(p_arbitrage_json(rep.p_arbitrage))
    r.summary.append(_taxonomy_line(r.verdict))
    return EXIT_CLEAN if rep.arbitrage_free else EXIT_CERTIFICATE


def _taxonomy_line(v: dict) -> str:
    present = [k.replace("_", " ") for k in ("uniformly_strong", "strong", "p_arbitrage") if v.get(k)]
    if not present:
        return "No arbitrage of any kind."
    return "Arbitrage present: " + ", ".join(present) + "."


def _bounds(r: _Run, opts) -> int:
    mf = r.mf
    if mf.mode == "interval":
        raise InputError("bounds applies to finite scenario spaces only")
    if mf.query is None:
        raise InputError("query: bounds needs a query gamble in the market file")
    m = mf.finite_market()
    verdict = market_verdict(m)
    r.verdict["market_coherent"] = verdict.coherent
    if not verdict.coherent:
        r.book(verdict.book)
        r.summary.append("The market itself is incoherent; no price bounds exist.")
        return EXIT_CERTIFICATE
    iv = price_interval(m, mf.query)
    r.verdict["lower"], r.verdict["upper"] = fmt(iv.lower), fmt(iv.upper)
    r.certificates.append(interval_json(iv, mf.query))
    r.summary.append(f"Coherent prices for {mf.query.name} form [{iv.lower}, {iv.upper}].")
    if mf.price is None:
        return EXIT_CLEAN
    ext = check_extension_coherence(m, mf.query, mf.price)
    if ext.coherent != (mf.price in iv):
        raise EngineDefect("extension verdict disagrees with the price interval")
    r.verdict["price"] = fmt(mf.price)
    r.verdict["extension_coherent"] = ext.coherent
    if ext.coherent:
        r.certificates.append(measure_json(ext.measure, context="extended"))
        r.summary.append(f"Pricing {mf.query.name} at {mf.price} keeps the market coherent.")
        return EXIT_CLEAN
    r.book(ext.book, context="extended")
    r.summary.append(f"Pricing {mf.query.name} at {mf.price} creates a book.")
    return EXIT_CERTIFICATE


def _diagnose(r: _Run, opts) -> int:
    mf = r.mf
    if mf.mode != "interval":
        raise InputError("diagnose applies to interval mode only")
    d = countable_additivity_diagnosis(mf.interval_market)
    r.verdict["coherent"] = d.coherent
    r.notes.extend(d.notes)
    if d.book is not None:
        r.certificates.append(interval_book_json(d.book, "book"))
        r.summary.append("Incoherent: a book exists.")
        _grid(r, opts)
        return EXIT_CERTIFICATE
    r.verdict["strong_arbitrage"] = d.strong_arbitrage is not None
    r.verdict["countably_additive_measure_exists"] = d.countably_additive_measure_exists
    if d.concentration_point is not None:
        r.verdict["concentration_point"] = fmt(d.concentration_point)
    if d.strong_arbitrage is not None:
        r.certificates.append(interval_book_json(d.strong_arbitrage, "strong_arbitrage"))
    if d.discrete_measure is not None:
        r.certificates.append(discrete_measure_json(d.discrete_measure))
    if d.countably_additive_measure_exists:
        r.summary.append("Coherent, and a countably additive pricing measure exists.")
    elif d.concentration_point is not None:
        r.summary.append(
            "Coherent, but no countably additive pricing measure exists: a strategy pays > 0 "
            f"everywhere with infimum {d.strong_arbitrage.infimum.value} approached near {d.concentration_point}."
        )
    else:
        r.summary.append("Coherent, but no countably additive pricing measure was found.")
    _grid(r, opts)
    return EXIT_CLEAN if d.countably_additive_measure_exists else EXIT_CERTIFICATE


def _grid(r: _Run, opts) -> None:
    """Compare with the restriction of the market to ``{1/N, ..., 1}``."""
    if opts.grid is None:
        return
    if r.mf.mode != "interval":
        raise InputError("--grid applies to interval mode only")
    n = opts.grid
    im = r.mf.interval_market
    gm = discretize_interval(im, n)
    verdict = market_verdict(gm)
    context = f"grid:{n}"
    entry = {"n": n, "coherent": verdict.coherent}
    strong = strong_arbitrage_interval(im)
    if strong is not None:
        grid_min = min(strong.payoff(Fraction(k, n)) for k in range(1, n + 1))
        entry["strong_arbitrage_grid_minimum"] = fmt(grid_min)
    if verdict.coherent:
        r.certificates.append(measure_json(verdict.measure, context=context))
    else:
        r.certificates.append(book_json(verdict.book, gm.space, context))
        entry["book_epsilon"] = fmt(verdict.book.epsilon)
    r.extra["grid"] = entry
    r.summary.append(
        f"On the grid of {n} points the restricted market is {'coherent' if verdict.coherent else 'incoherent'}."
    )


_HANDLERS = {
    "check": _check,
    "book": _book,
    "measure": _measure,
    "classify": _classify,
    "bounds": _bounds,
    "diagnose": _diagnose,
}


def run(command: str, path, opts) -> tuple[int, dict]:
    """Run *command* on the market file at *path*; return ``(exit_code, report)``."""
    if command not in _HANDLERS:
        raise InputError(f"unknown command {command!r}")
    started = time.perf_counter()
    mf = load(path)
    if getattr(opts, "grid", None) is not None and mf.mode != "interval":
        raise InputError("--grid applies to interval mode only")
    r = _Run(command, mf)
    code = _HANDLERS[command](r, opts)
    report: dict = {"command": command, "mode": mf.mode}
    if mf.space is not None:
        report["scenarios"] = list(mf.space.labels)
    report["verdict"] = r.verdict
    report.update(r.extra)
    report["certificates"] = r.certificates
    checks = verify_report(report, mf)
    failed = [f"{i}:{kind}" for i, kind, ok in checks if not ok]
    if failed:
        raise EngineDefect("certificates failed re-verification: " + ", ".join(failed))
    report["self_check"] = {"certificates": len(checks), "verified": len(checks) - len(failed)}
    report["notes"] = r.notes
    report["exit_code"] = code
    if opts.summary:
        report["summary"] = r.summary
    if getattr(opts, "timing", False):
        report["timing"] = {"seconds": f"{time.perf_counter() - started:.6f}"}
    return code, report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="prevision",
        description="Coherence, arbitrage and price-bound analysis of a market file.",
        epilog="exit codes: 0 clean, 1 certificate found, 2 input error, 3 engine defect",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("file", help="market description (JSON)")
    p.add_argument("--relevant-only", action="store_true", help="bet only on events quoted > 0 (events mode)")
    p.add_argument("--full-support", action="store_true", help="measure: require every weight > 0")
    p.add_argument("--reference", metavar="FILE", help="classify: reference measure (JSON list of weights)")
    p.add_argument("--summary", action="store_true", help="add human-readable sentences to the report")
    p.add_argument("--grid", type=int, metavar="N", help="interval mode: compare with the grid {1/N, ..., 1}")
    p.add_argument("--timing", action="store_true", help="add wall-clock timing to the report")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    opts = build_parser().parse_args(argv)
    if opts.grid is not None and opts.grid < 1:
        print("error: --grid: N must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        code, report = run(opts.command, opts.file, opts)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EngineDefect as exc:
        print(f"engine defect: {exc}", file=sys.stderr)
        return EXIT_DEFECT
    sys.stdout.write(dumps(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
