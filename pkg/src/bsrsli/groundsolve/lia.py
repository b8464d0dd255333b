"""Integer feasibility of conjunctions of linear constraints.

Rational Fourier-Motzkin projection with integral back-substitution, plus
branch-and-bound when the sample point is not integral.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping

from ..core import BsrError, Constraint, LimitError, Lin, Rel, Shape, int_gcd

# A row is (coeffs: tuple of (symbol, int) sorted, offset: int, is_eq: bool),
# meaning  sum(coeffs) + offset <= 0  (or = 0 when is_eq).


def _row(e: Lin, is_eq: bool):
    return _tighten(e.coeffs, e.offset, is_eq)


def _tighten(coeffs, offset, is_eq):
    """Divide by the coefficient gcd; None marks an infeasible row, () a trivially true one."""
    if not coeffs:
        ok = offset == 0 if is_eq else offset <= 0
        return () if ok else None
    g = int_gcd(c for _, c in coeffs)
    if is_eq:
        if offset % g:
            return None
        return (tuple((s, c // g) for s, c in coeffs), offset // g, True)
    # a.x + b <= 0  <=>  (a/g).x <= floor(-b/g)  <=>  (a/g).x + ceil(b/g) <= 0
    return (tuple((s, c // g) for s, c in coeffs), -((-offset) // g), False)


def rows_of(constraints: Iterable[Constraint]):
    out = []
    for c in constraints:
        if c.shape is not Shape.GROUND_GROUND:
            raise BsrError(f"constraint {c} is not ground")
        d = c.lhs - c.rhs
        if c.rel is Rel.LE:
            out.append(_row(d, False))
        elif c.rel is Rel.LT:
            out.append(_row(d + 1, False))
        elif c.rel is Rel.GE:
            out.append(_row(-d, False))
        elif c.rel is Rel.GT:
            out.append(_row(-d + 1, False))
        elif c.rel is Rel.EQ:
            out.append(_row(d, True))
        else:
            raise BsrError("disequations must be split before the feasibility check")
    return out


def lia_feasible(constraints: Iterable[Constraint], symbols: Iterable[str] = ()) -> dict | None:
    """Integer sample satisfying all constraints, or None when infeasible.

    ``symbols`` lists extra unknowns to include in the sample (value 0 when
    unconstrained).  Raises LimitError when branch-and-bound exceeds its depth cap.
    """
    return feasible_rows(rows_of(constraints), symbols)


def feasible_rows(rows, symbols: Iterable[str] = ()) -> dict | None:
    clean = []
    for r in rows:
        if r is None:
            return None
        if r == ():
            continue
        clean.append(r)
    syms = sorted({s for r in clean for s, _ in r[0]} | set(symbols))
    clean, solved = _solve_unit_equalities(clean)
    if clean is None:
        return None
    live = sorted({s for r in clean for s, _ in r[0]})
    sample = _branch(clean, live, 0, 10 * max(len(live), 1))
    if sample is None:
        return None
    values = {s: sample.get(s, 0) for s in syms if s not in solved}
    for s, (coeffs, off) in reversed(solved.items()):
        values[s] = off + sum(k * values.get(t, 0) for t, k in coeffs)
    return {s: values.get(s, 0) for s in syms}


def _solve_unit_equalities(rows):
    """Substitute away variables with a unit coefficient in some equality (exact over the integers).

    Returns the remaining rows (None when infeasible) and, in elimination
    order, ``symbol -> (coeffs, offset)`` meaning ``symbol = offset + Σ k·t``.
    """
    solved: dict = {}
    rows = list(rows)
    while True:
        pick = None
        for i, (coeffs, off, is_eq) in enumerate(rows):
            if is_eq:
                unit = next((s for s, k in coeffs if abs(k) == 1), None)
                if unit is not None:
                    pick = (i, unit)
                    break
        if pick is None:
            return rows, solved
        i, s = pick
        coeffs, off, _ = rows.pop(i)
        k = dict(coeffs)[s]
        # k·s + rest + off = 0  =>  s = -(rest + off)/k
        expr = tuple((t, -c * k) for t, c in coeffs if t != s)
        e_off = -off * k
        solved[s] = (expr, e_off)
        out = []
        for c2, o2, eq2 in rows:
            d = dict(c2)
            a = d.pop(s, 0)
            if a:
                for t, c in expr:
                    d[t] = d.get(t, 0) + a * c
                o2 = o2 + a * e_off
            r = _tighten(tuple(sorted((t, c) for t, c in d.items() if c)), o2, eq2)
            if r is None:
                return None, solved
            if r != ():
                out.append(r)
        rows = out


def _branch(rows, syms, depth, cap):
    sol = _rational_sample(rows, syms)
    if sol is None:
        return None
    for s in sol:  # back-substitution order: the first fractional value is the culprit
        v = sol[s]
        if v.denominator != 1:
            if depth >= cap:
                raise LimitError(f"branch-and-bound depth cap {cap} exceeded")
            lo = ((((s, 1),), -math.floor(v), False))  # s - floor(v) <= 0
            hi = ((((s, -1),), math.ceil(v), False))  # ceil(v) - s <= 0
            for extra in (lo, hi):
                r = _branch(rows + [extra], syms, depth + 1, cap)
                if r is not None:
                    return r
            return None
    return {s: int(v) for s, v in sol.items()}


def _rational_sample(rows, syms):
    """Rational solution (integral where the projection allows), or None."""
    # expand equalities to two inequalities for the projection
    system = []
    for coeffs, off, is_eq in rows:
        system.append((dict(coeffs), Fraction(off)))
        if is_eq:
            system.append(({s: -c for s, c in coeffs}, Fraction(-off)))
    order = [s for s in syms if any(s in r[0] for r in system)]
    levels = []
    cur = system
    for s in reversed(order):
        levels.append((s, cur))
        cur = _eliminate(cur, s)
        for coeffs, off in cur:
            if not coeffs and off > 0:
                return None
    values: dict = {s: Fraction(0) for s in syms if s not in order}
    for s, sys_ in reversed(levels):
        lo, hi = None, None
        for coeffs, off in sys_:
            a = coeffs.get(s, 0)
            if a == 0:
                continue
            rest = off + sum(c * values[t] for t, c in coeffs.items() if t != s)
            bound = -rest / a
            if a > 0:
                hi = bound if hi is None else min(hi, bound)
            else:
                lo = bound if lo is None else max(lo, bound)
        if lo is not None and hi is not None and lo > hi:
            return None
        values[s] = _pick(lo, hi)
    return values


def _pick(lo, hi) -> Fraction:
    if lo is not None:
        v = Fraction(math.ceil(lo))
        if hi is None or v <= hi:
            return v
        return lo
    if hi is not None:
        return Fraction(math.floor(hi))
    return Fraction(0)


def _eliminate(system, s):
    pos, neg, rest = [], [], []
    for coeffs, off in system:
        a = coeffs.get(s, 0)
        if a > 0:
            pos.append((coeffs, off))
        elif a < 0:
            neg.append((coeffs, off))
        else:
            rest.append((coeffs, off))
    seen = set()
    out = []
    for r in rest:
        key = (tuple(sorted(r[0].items())), r[1])
        if key not in seen:
            seen.add(key)
            out.append(r)
    for pc, po in pos:
        for nc, no in neg:
            a, b = pc[s], -nc[s]
            coeffs = {}
            for t in set(pc) | set(nc):
                if t == s:
                    continue
                v = b * pc.get(t, 0) + a * nc.get(t, 0)
                if v:
                    coeffs[t] = v
            off = b * po + a * no
            g = int_gcd(list(coeffs.values())) if coeffs else 0
            if g > 1:
                coeffs = {t: v // g for t, v in coeffs.items()}
                off = off / g
            key = (tuple(sorted(coeffs.items())), off)
            if key not in seen:
                seen.add(key)
                out.append((coeffs, off))
    return out


def evaluate_constraint(c: Constraint, values: Mapping[str, int]) -> bool:
    return c.rel.holds(c.lhs.evaluate(values), c.rhs.evaluate(values))
