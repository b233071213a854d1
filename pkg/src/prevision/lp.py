"""Exact rational linear programming with verifiable certificates.

Every outcome carries a certificate over the *normalized rows* of the
program (see :meth:`LinearProgram.normalized_rows`), so that it can be
checked with nothing but exact arithmetic:

* ``Optimal``: a feasible primal point and a dual vector ``u`` with
  ``sum_i u_i a_i == c`` and ``sum_i u_i b_i == value``.  ``u_i >= 0`` on
  inequality rows when maximizing, ``u_i <= 0`` when minimizing.
* ``Unbounded``: a feasible point and a ray of improvement.
* ``Infeasible``: a Farkas vector ``u`` (``u_i >= 0`` on inequality rows)
  with ``sum_i u_i a_i == 0`` and ``sum_i u_i b_i == -1``.

The solver is a two-phase tableau simplex with Bland's rule, so it
terminates and is deterministic. The tableau runs on ``gmpy2.mpq`` when
gmpy2 is installed and on :class:`~fractions.Fraction` otherwise; outcomes
are always returned as Fractions.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import EngineDefect, InputError
from .numbers import RationalLike, dot, to_fraction, to_fractions

LE = "<="
EQ = "=="
GE = ">="
_RELATIONS = {"<=": LE, "==": EQ, "=": EQ, ">=": GE}

MAXIMIZE = "max"
MINIMIZE = "min"

ZERO = Fraction(0)
ONE = Fraction(1)

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - exercised by forcing _Q = Fraction in tests
    _Q = Fraction


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(int(v.numerator), int(v.denominator))


@dataclass(frozen=True)
class Constraint:
    coefficients: tuple[Fraction, ...]
    relation: str
    rhs: Fraction

    def __post_init__(self):
        rel = _RELATIONS.get(self.relation)
        if rel is None:
            raise InputError(f"unsupported relation {self.relation!r} (strict inequalities are not allowed)")
        object.__setattr__(self, "relation", rel)
        object.__setattr__(self, "coefficients", to_fractions(self.coefficients, "coefficients"))
        object.__setattr__(self, "rhs", to_fraction(self.rhs, "rhs"))


@dataclass(frozen=True)
class Row:
    """One normalized row: ``coefficients . x <= rhs`` or ``== rhs``."""

    coefficients: tuple[Fraction, ...]
    rhs: Fraction
    equality: bool


@dataclass(frozen=True)
class LinearProgram:
    """``max`` or ``min`` of ``objective . x`` subject to constraints and bounds.

    Variables are free unless ``lower``/``upper`` give a bound (``None`` in
    either tuple means unbounded in that direction).
    """

    objective: tuple[Fraction, ...]
    constraints: tuple[Constraint, ...] = ()
    sense: str = MAXIMIZE
    lower: tuple[Fraction | None, ...] | None = None
    upper: tuple[Fraction | None, ...] | None = None

    def __post_init__(self):
        obj = to_fractions(self.objective, "objective")
        n = len(obj)
        if n == 0:
            raise InputError("a linear program needs at least one variable")
        if self.sense not in (MAXIMIZE, MINIMIZE):
            raise InputError(f"sense must be 'max' or 'min', got {self.sense!r}")
        cons = []
        for i, c in enumerate(self.constraints):
            if not isinstance(c, Constraint):
                c = Constraint(*c)
            if len(c.coefficients) != n:
                raise InputError(
                    f"constraint {i} has {len(c.coefficients)} coefficients, expected {n}"
                )
            cons.append(c)
        object.__setattr__(self, "objective", obj)
        object.__setattr__(self, "constraints", tuple(cons))
        for name in ("lower", "upper"):
            bounds = getattr(self, name)
            if bounds is None:
                bounds = (None,) * n
            if len(bounds) != n:
                raise InputError(f"{name} bounds have length {len(bounds)}, expected {n}")
            bounds = tuple(None if b is None else to_fraction(b, f"{name} bound") for b in bounds)
            object.__setattr__(self, name, bounds)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def normalized_rows(self) -> list[Row]:
        """Rows in certificate order: constraints first, then per-variable
        lower bound and upper bound rows (only the finite ones)."""
        n = self.num_vars
        rows = []
        for c in self.constraints:
            if c.relation == LE:
                rows.append(Row(c.coefficients, c.rhs, False))
            elif c.relation == GE:
                rows.append(Row(tuple(-a for a in c.coefficients), -c.rhs, False))
            else:
                rows.append(Row(c.coefficients, c.rhs, True))
        for j in range(n):
            unit = tuple(ONE if k == j else ZERO for k in range(n))
            if self.lower[j] is not None:
                rows.append(Row(tuple(-a for a in unit), -self.lower[j], False))
            if self.upper[j] is not None:
                rows.append(Row(unit, self.upper[j], False))
        return rows


def linear_program(
    objective: Sequence[RationalLike],
    constraints: Sequence[tuple] = (),
    sense: str = MAXIMIZE,
    lower=None,
    upper=None,
) -> LinearProgram:
    """Convenience constructor; ``constraints`` is a list of ``(coeffs, rel, rhs)``.

    ``lower``/``upper`` may be a scalar applied to every variable.
    """
    n = len(objective)
    if lower is not None and not isinstance(lower, (list, tuple)):
        lower = (lower,) * n
    if upper is not None and not isinstance(upper, (list, tuple)):
        upper = (upper,) * n
    return LinearProgram(
        tuple(objective),
        tuple(Constraint(tuple(a), rel, b) for a, rel, b in constraints),
        sense,
        None if lower is None else tuple(lower),
        None if upper is None else tuple(upper),
    )


@dataclass(frozen=True)
class Optimal:
    value: Fraction
    primal: tuple[Fraction, ...]
    dual: tuple[Fraction, ...]


@dataclass(frozen=True)
class Unbounded:
    ray: tuple[Fraction, ...]
    point: tuple[Fraction, ...]


@dataclass(frozen=True)
class Infeasible:
    farkas: tuple[Fraction, ...]


LPOutcome = Union[Optimal, Unbounded, Infeasible]


class _Tableau:
    """Dense simplex tableau for ``M z == r, z >= 0`` with one artificial
    column per row appended (so B^-1 can always be read back)."""

    def __init__(self, matrix: list[list[Fraction]], rhs: list[Fraction]):
        m = len(matrix)
        self.m = m
        self.n_real = len(matrix[0]) if m else 0
        self.width = self.n_real + m
        zero, one = _Q(0), _Q(1)
        self.rows = []
        for i, (row, b) in enumerate(zip(matrix, rhs)):
            art = [one if k == i else zero for k in range(m)]
            self.rows.append([_Q(v) for v in row] + art + [_Q(b)])
        self.basis = [self.n_real + i for i in range(m)]
        self.obj = [zero] * (self.width + 1)

    def reduced_cost(self, j: int) -> Fraction:
        return _frac(self.obj[j])

    def entry(self, k: int, j: int) -> Fraction:
        return _frac(self.rows[k][j])

    def set_costs(self, costs: list[Fraction]):
        # obj[j] holds the reduced cost c_j - c_B B^-1 A_j; obj[-1] holds -value
        costs = [_Q(c) for c in costs]
        obj = list(costs) + [_Q(0)]
        for k, b in enumerate(self.basis):
            cb = costs[b]
            if cb:
                row = self.rows[k]
                for j in range(self.width + 1):
                    if row[j]:
                        obj[j] -= cb * row[j]
        self.obj = obj

    def pivot(self, p: int, q: int):
        prow = self.rows[p]
        piv = prow[q]
        if piv != 1:
            prow[:] = [v / piv for v in prow]
        nz = [j for j, v in enumerate(prow) if v]
        for k, row in enumerate(self.rows):
            if k != p:
                f = row[q]
                if f:
                    for j in nz:
                        row[j] -= f * prow[j]
        f = self.obj[q]
        if f:
            for j in nz:
                self.obj[j] -= f * prow[j]
        self.basis[p] = q

    def run(self, eligible: int):
        """Maximize with Bland's rule over columns ``< eligible``.

        Returns ``None`` at optimality or the entering column of an
        unbounded direction.
        """
        while True:
            q = next((j for j in range(eligible) if self.obj[j] > 0), None)
            if q is None:
                return None
            p = None
            best = None
            for k, row in enumerate(self.rows):
                a = row[q]
                if a > 0:
                    ratio = row[-1] / a
                    if (
                        best is None
                        or ratio < best
                        or (ratio == best and self.basis[k] < self.basis[p])
                    ):
                        best, p = ratio, k
            if p is None:
                return q
            self.pivot(p, q)

    def basic_solution(self) -> list[Fraction]:
        z = [ZERO] * self.width
        for k, b in enumerate(self.basis):
            z[b] = _frac(self.rows[k][-1])
        return z


def solve(lp: LinearProgram) -> LPOutcome:
    """Solve *lp* exactly and return a certified outcome.

    Finite bounds are handled by substitution (``x = l + y`` or
    ``x = u - y`` with ``y >= 0``), free variables are split, and only the
    remaining rows enter the tableau. Multipliers of substituted bound rows
    are recovered afterwards from stationarity.
    """
    if not isinstance(lp, LinearProgram):
        raise InputError("solve expects a LinearProgram")
    n = lp.num_vars
    rows = lp.normalized_rows()
    n_cons = len(lp.constraints)

    # column layout: one column per bounded variable, two per free variable
    cols: list[list[tuple[int, int]]] = []  # per variable: (column, sign)
    offset = [ZERO] * n
    native = {}  # variable -> index of its substituted bound row
    kept = list(range(n_cons))  # normalized rows that become tableau rows
    ncol = 0
    r = n_cons
    for j in range(n):
        lo, up = lp.lower[j], lp.upper[j]
        if lo is not None:
            cols.append([(ncol, 1)])
            offset[j] = lo
            native[j] = r
            if up is not None:
                kept.append(r + 1)
            ncol += 1
        elif up is not None:
            cols.append([(ncol, -1)])
            offset[j] = up
            native[j] = r
            ncol += 1
        else:
            cols.append([(ncol, 1), (ncol + 1, -1)])
            ncol += 2
        r += (lo is not None) + (up is not None)

    ineq = [i for i in kept if not rows[i].equality]
    slack_col = {i: ncol + s for s, i in enumerate(ineq)}
    n_real = ncol + len(ineq)

    matrix, rhs, sign = [], [], []
    for i in kept:
        row = rows[i]
        line = [ZERO] * n_real
        for j, a in enumerate(row.coefficients):
            if a:
                for c, s in cols[j]:
                    line[c] += s * a
        if i in slack_col:
            line[slack_col[i]] = ONE
        b = row.rhs - dot(row.coefficients, offset)
        s = -1 if b < 0 else 1
        if s < 0:
            line = [-v for v in line]
        matrix.append(line)
        rhs.append(s * b)
        sign.append(s)

    def to_x(z: Sequence[Fraction], shift: bool) -> tuple[Fraction, ...]:
        return tuple(
            (offset[j] if shift else ZERO) + sum((s * z[c] for c, s in cols[j]), ZERO) for j in range(n)
        )

    def complete(partial: dict[int, Fraction], target: Sequence[Fraction]) -> list[Fraction]:
        u = [ZERO] * len(rows)
        for i, w in partial.items():
            u[i] = w
        coeffs, _ = _combine(rows, u, n)
        for j, i in native.items():
            # bound row i is -e_j (lower) or +e_j (upper)
            residual = target[j] - coeffs[j]
            u[i] = residual * rows[i].coefficients[j]
        return u

    m = len(kept)
    if m == 0:
        tab = None
        z = [ZERO] * n_real
    else:
        tab = _Tableau(matrix, rhs)
        # phase one: maximize -(sum of artificials)
        costs = [ZERO] * n_real + [-ONE] * m
        tab.set_costs(costs)
        tab.run(eligible=tab.width)
        if -tab.obj[-1] < 0:
            y = {kept[k]: sign[k] * (-ONE - tab.reduced_cost(n_real + k)) for k in range(m)}
            u = complete(y, [ZERO] * n)
            _, total = _combine(rows, u, n)
            return Infeasible(tuple(-w / total for w in u))
        # drive zero-level artificials out of the basis where possible
        for k in range(m):
            if tab.basis[k] >= n_real:
                q = next((j for j in range(n_real) if tab.rows[k][j] != 0), None)
                if q is not None:
                    tab.pivot(k, q)

    c_max = list(lp.objective) if lp.sense == MAXIMIZE else [-c for c in lp.objective]
    col_cost = [ZERO] * n_real
    for j in range(n):
        for c, s in cols[j]:
            col_cost[c] += s * c_max[j]

    if tab is None:
        entering = next((c for c in range(n_real) if col_cost[c] > 0), None)
        if entering is None:
            point = to_x(z, True)
            u = complete({}, c_max)
            dual = [-w for w in u] if lp.sense == MINIMIZE else u
            return Optimal(dot(lp.objective, point), point, tuple(dual))
        dz = [ZERO] * n_real
        dz[entering] = ONE
        return Unbounded(to_x(dz, False), to_x(z, True))

    tab.set_costs(col_cost + [ZERO] * m)
    entering = tab.run(eligible=n_real)
    z = tab.basic_solution()
    point = to_x(z, True)
    if entering is not None:
        dz = [ZERO] * tab.width
        dz[entering] = ONE
        for k, b in enumerate(tab.basis):
            dz[b] = -tab.entry(k, entering)
        return Unbounded(to_x(dz, False), point)

    y = {kept[k]: sign[k] * -tab.reduced_cost(n_real + k) for k in range(m)}
    u = complete(y, c_max)
    dual = [-w for w in u] if lp.sense == MINIMIZE else u
    return Optimal(dot(lp.objective, point), point, tuple(dual))


def _objective_direction(lp: LinearProgram) -> tuple[Fraction, ...]:
    c = lp.objective
    return tuple(c) if lp.sense == MAXIMIZE else tuple(-v for v in c)


def _row_ok(row: Row, x: Sequence[Fraction]) -> bool:
    lhs = dot(row.coefficients, x)
    return lhs == row.rhs if row.equality else lhs <= row.rhs


def is_feasible(lp: LinearProgram, x: Sequence[Fraction]) -> bool:
    if len(x) != lp.num_vars:
        return False
    return all(_row_ok(r, x) for r in lp.normalized_rows())


def _combine(rows: list[Row], u: Sequence[Fraction], n: int) -> tuple[list[Fraction], Fraction]:
    coeffs = [ZERO] * n
    rhs = ZERO
    for r, w in zip(rows, u):
        if w:
            for j, a in enumerate(r.coefficients):
                coeffs[j] += w * a
            rhs += w * r.rhs
    return coeffs, rhs


def verify_certificate(lp: LinearProgram, out: LPOutcome) -> bool:
    """Check *out* against *lp* with exact arithmetic; never raises."""
    try:
        return _verify(lp, out)
    except (TypeError, ValueError, AttributeError, ZeroDivisionError):
        return False


def _verify(lp: LinearProgram, out: LPOutcome) -> bool:
    n = lp.num_vars
    rows = lp.normalized_rows()
    if isinstance(out, Optimal):
        if len(out.primal) != n or len(out.dual) != len(rows):
            return False
        if not is_feasible(lp, out.primal):
            return False
        if dot(lp.objective, out.primal) != out.value:
            return False
        for r, u in zip(rows, out.dual):
            if r.equality:
                continue
            if lp.sense == MAXIMIZE and u < 0:
                return False
            if lp.sense == MINIMIZE and u > 0:
                return False
        coeffs, rhs = _combine(rows, out.dual, n)
        return coeffs == list(lp.objective) and rhs == out.value
    if isinstance(out, Unbounded):
        if len(out.ray) != n or len(out.point) != n:
            return False
        if not is_feasible(lp, out.point):
            return False
        for r in rows:
            slope = dot(r.coefficients, out.ray)
            if (r.equality and slope != 0) or slope > 0:
                return False
        gain = dot(lp.objective, out.ray)
        return gain > 0 if lp.sense == MAXIMIZE else gain < 0
    if isinstance(out, Infeasible):
        if len(out.farkas) != len(rows):
            return False
        if any(u < 0 for r, u in zip(rows, out.farkas) if not r.equality):
            return False
        coeffs, rhs = _combine(rows, out.farkas, n)
        return all(c == 0 for c in coeffs) and rhs == -1
    return False


def solve_checked(lp: LinearProgram) -> LPOutcome:
    """:func:`solve` followed by the certificate self-check."""
    out = solve(lp)
    if not verify_certificate(lp, out):
        raise EngineDefect(f"LP certificate failed to verify: {out!r}")
    return out
