"""Hierarchic models: ground and uniform (projection-table) forms, interval
partitions, extrapolation along an instantiation trace, and model checking."""

from __future__ import annotations

import itertools
import json
import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from ..core import (
    MINF,
    PINF,
    SENTINELS,
    BsrError,
    Clause,
    ClauseSet,
    Constraint,
    Equation,
    FreeAtom,
    FreeConst,
    Lin,
    Sort,
    TheoryAtom,
    Var,
    point_sort_key,
)

SCHEMA_VERSION = 1


# --------------------------------------------------------------------------- partitions


@dataclass(frozen=True)
class Cell:
    lo: int | None  # None is -infinity
    hi: int | None  # None is +infinity
    rep: str  # representative instantiation point
    rep_value: int | None

    def contains(self, r: int) -> bool:
        return (self.lo is None or self.lo <= r) and (self.hi is None or r <= self.hi)

    def __str__(self) -> str:
        lo = "(-inf" if self.lo is None else f"[{self.lo}"
        hi = "+inf)" if self.hi is None else f"{self.hi}]"
        return f"{lo}, {hi}"


@dataclass(frozen=True)
class Partition:
    direction: str
    cells: tuple

    def cell_of(self, r: int) -> Cell:
        for c in self.cells:
            if c.contains(r):
                return c
        raise AssertionError("partition does not cover the integers")

    def intervals(self) -> list[tuple]:
        return [(c.lo, c.hi) for c in self.cells]


def _value_of(name: str, values: Mapping[str, int]) -> int | None:
    if re.fullmatch(r"-?\d+", name):
        return int(name)
    return values.get(name)


def make_partition(points: Iterable[str], base_values: Mapping[str, int], direction: str = "lower") -> Partition:
    """Interval partition of the integers induced by the values of ``points``.

    Lower: (-inf, r1-1], [r1, r2-1], ..., [rk, +inf), the first cell represented
    by the lower sentinel.  Upper: (-inf, r1], [r1+1, r2], ..., [rk+1, +inf),
    the last cell represented by the upper sentinel.
    """
    direction = getattr(direction, "value", direction)
    open_sentinel = MINF if direction == "lower" else PINF
    by_value: dict[int, str] = {}
    for p in sorted(set(points), key=point_sort_key):
        if p == open_sentinel:
            continue
        v = _value_of(p, base_values)
        if v is None:
            if p in SENTINELS:
                continue  # the other sentinel is an ordinary point once it has a value
            raise BsrError(f"no value for instantiation point {p}")
        by_value.setdefault(v, p)
    rs = sorted(by_value)
    cells = []
    if direction == "lower":
        sent_val = base_values.get(MINF)
        if not rs:
            return Partition("lower", (Cell(None, None, MINF, sent_val),))
        cells.append(Cell(None, rs[0] - 1, MINF, sent_val))
        for i, r in enumerate(rs):
            hi = rs[i + 1] - 1 if i + 1 < len(rs) else None
            cells.append(Cell(r, hi, by_value[r], r))
    elif direction == "upper":
        sent_val = base_values.get(PINF)
        if not rs:
            return Partition("upper", (Cell(None, None, PINF, sent_val),))
        for i, r in enumerate(rs):
            lo = rs[i - 1] + 1 if i > 0 else None
            cells.append(Cell(lo, r, by_value[r], r))
        cells.append(Cell(rs[-1] + 1, None, PINF, sent_val))
    else:
        raise BsrError(f"unknown partition direction {direction}")
    return Partition(direction, tuple(cells))


# --------------------------------------------------------------------------- models


@dataclass
class HierarchicModel:
    base_values: dict = field(default_factory=dict)
    free_domain: list = field(default_factory=list)
    free_values: dict = field(default_factory=dict)
    extensions: dict = field(default_factory=dict)  # pred -> set of value tuples
    # uniform form: pred -> per position either ("Z", [Cell...]) or ("S", {element: element}); absent = identity
    projections: dict = field(default_factory=dict)

    def value(self, t, beta: Mapping[Var, object] | None = None):
        beta = beta or {}
        if isinstance(t, Var):
            return beta[t]
        if isinstance(t, FreeConst):
            if t.name not in self.free_values:
                raise BsrError(f"model has no value for free constant {t.name}")
            return self.free_values[t.name]
        if isinstance(t, Lin):
            try:
                return t.evaluate(self.base_values)
            except KeyError as e:
                raise BsrError(f"model has no value for constant {e.args[0]}") from None
        raise BsrError(f"cannot evaluate {t}")

    def project(self, pred: str, vals: tuple) -> tuple:
        table = self.projections.get(pred)
        if not table:
            return vals
        out = []
        for v, proj in zip(vals, table):
            if proj is None:
                out.append(v)
            elif proj[0] == "Z":
                out.append(_cell_lookup(proj[1], v))
            else:
                out.append(proj[1].get(v, v))
        return tuple(out)

    def holds(self, pred: str, vals: tuple) -> bool:
        return self.project(pred, tuple(vals)) in self.extensions.get(pred, set())

    @property
    def is_uniform(self) -> bool:
        return bool(self.projections)

    # serialization ------------------------------------------------------
    def to_json(self) -> dict:
        proj = {}
        for pred, table in sorted(self.projections.items()):
            proj[pred] = [
                None
                if p is None
                else {"sort": "Z", "cells": [[c.lo, c.hi, c.rep_value] for c in p[1]]}
                if p[0] == "Z"
                else {"sort": "S", "map": dict(sorted(p[1].items()))}
                for p in table
            ]
        return {
            "schema_version": SCHEMA_VERSION,
            "base_values": dict(sorted(self.base_values.items())),
            "free_domain": list(self.free_domain),
            "free_values": dict(sorted(self.free_values.items())),
            "extensions": {p: sorted([list(t) for t in ts], key=_tuple_key) for p, ts in sorted(self.extensions.items())},
            "projections": proj,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @staticmethod
    def from_json(d: Mapping) -> "HierarchicModel":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise BsrError(f"unsupported model schema version {d.get('schema_version')}")
        proj = {}
        for pred, table in d.get("projections", {}).items():
            rows = []
            for p in table:
                if p is None:
                    rows.append(None)
                elif p["sort"] == "Z":
                    rows.append(("Z", [Cell(lo, hi, "", v) for lo, hi, v in p["cells"]]))
                else:
                    rows.append(("S", dict(p["map"])))
            proj[pred] = rows
        return HierarchicModel(
            base_values=dict(d["base_values"]),
            free_domain=list(d["free_domain"]),
            free_values=dict(d["free_values"]),
            extensions={p: {tuple(t) for t in ts} for p, ts in d["extensions"].items()},
            projections=proj,
        )


def _tuple_key(t):
    return [(0, x, "") if isinstance(x, int) else (1, 0, str(x)) for x in t]


def _cell_lookup(cells, v: int):
    for c in cells:
        if (c.lo is None or c.lo <= v) and (c.hi is None or v <= c.hi):
            return c.rep_value
    raise AssertionError("projection table does not cover the integers")


# --------------------------------------------------------------------------- extrapolation


def _complete_sentinels(values: dict, trace) -> dict:
    """Values for sentinels that the ground model never fixed: beyond every other value."""
    values = dict(values)
    nums = [v for k, v in values.items() if k not in SENTINELS]
    for step in trace.steps:
        for pts in (step.snapshot or {}).values():
            nums.extend(int(p) for p in pts if re.fullmatch(r"-?\d+", p))
    lo = min(nums, default=0) - 1
    hi = max(nums, default=0) + 1
    values.setdefault(MINF, lo)
    values.setdefault(PINF, hi)
    return values


def extrapolate_model(model: HierarchicModel, original: ClauseSet, trace) -> HierarchicModel:
    """Uniform model of the set the trace started from, built from a model of its result.

    Each elimination step contributes a projection per argument position
    (interval cells for base positions, point maps for free positions); the
    composed projection is constant on the cells of the first step touching
    that position, so one table per position suffices.
    """
    if trace.baseline != "none":
        raise BsrError("model extrapolation needs a trace of closure-based eliminations")
    if any(s.snapshot is None for s in trace.steps):
        raise BsrError("trace lacks per-step closure snapshots")
    values = _complete_sentinels(model.base_values, trace)
    sig = (trace.start or original).signature
    preds = dict(sig.preds)
    # default element for free projections: value of the least point
    steps = []
    for s in trace.steps:
        per_pos = {}
        for key, pts in s.snapshot.items():
            pred, idx = key.rsplit("/", 1)
            idx = int(idx)
            if s.direction == "free":
                vals = {model.free_values[p] for p in pts}
                default = model.free_values[sorted(pts)[0]]
                per_pos[(pred, idx)] = ("S", {e: (e if e in vals else default) for e in model.free_domain})
            else:
                part = make_partition(pts, values, s.direction)
                per_pos[(pred, idx)] = ("Z", part)
        steps.append(per_pos)

    projections = {}
    for pred, sorts in sorted(preds.items()):
        table = []
        touched = False
        for idx, srt in enumerate(sorts, start=1):
            maps = [st[(pred, idx)] for st in steps if (pred, idx) in st]
            if not maps:
                table.append(None)
                continue
            touched = True
            if srt is Sort.BASE:
                first = maps[0][1]
                cells = []
                for c in first.cells:
                    v = c.rep_value if c.rep_value is not None else values[c.rep]
                    for m in maps[1:]:
                        v = m[1].cell_of(v).rep_value if m[1].cell_of(v).rep_value is not None else values[m[1].cell_of(v).rep]
                    cells.append(Cell(c.lo, c.hi, c.rep, v))
                table.append(("Z", cells))
            else:
                mp = {e: e for e in model.free_domain}
                for m in maps:
                    mp = {e: m[1].get(v, v) for e, v in mp.items()}
                table.append(("S", mp))
        if touched:
            projections[pred] = table
    return HierarchicModel(
        base_values=values,
        free_domain=list(model.free_domain),
        free_values=dict(model.free_values),
        extensions={p: set(ts) for p, ts in model.extensions.items()},
        projections=projections,
    )


# --------------------------------------------------------------------------- checking


@dataclass
class VerifyReport:
    violations: list = field(default_factory=list)  # (clause id, assignment dict)
    checked: int = 0
    skipped: list = field(default_factory=list)  # clause ids with theory atoms
    exhaustive: bool = True

    @property
    def ok(self) -> bool:
        return not self.violations


def eval_clause(c: Clause, model: HierarchicModel, beta: Mapping[Var, object]) -> bool:
    for a in c.lam:
        if not a.rel.holds(model.value(a.lhs, beta), model.value(a.rhs, beta)):
            return True
    for a in c.gamma:
        if not eval_atom(a, model, beta):
            return True
    return any(eval_atom(a, model, beta) for a in c.delta)


def eval_atom(a, model: HierarchicModel, beta) -> bool:
    if isinstance(a, FreeAtom):
        return model.holds(a.pred, tuple(model.value(t, beta) for t in a.args))
    if isinstance(a, Equation):
        return model.value(a.lhs, beta) == model.value(a.rhs, beta)
    if isinstance(a, Constraint):
        return a.rel.holds(model.value(a.lhs, beta), model.value(a.rhs, beta))
    raise BsrError(f"cannot evaluate {a}")


def _base_candidates(model: HierarchicModel, c: Clause, rng: random.Random, window: int) -> list[int]:
    pts = set()
    for v in model.base_values.values():
        pts.update((v - 1, v, v + 1))
    for table in model.projections.values():
        for p in table:
            if p is not None and p[0] == "Z":
                for cell in p[1]:
                    for b in (cell.lo, cell.hi):
                        if b is not None:
                            pts.update((b - 1, b, b + 1))
    for a in c.lam:
        for t in (a.lhs, a.rhs):
            if isinstance(t, Lin):
                try:
                    v = t.evaluate(model.base_values)
                except KeyError:
                    continue
                pts.update((v - 1, v, v + 1))
    pts.update(rng.randint(-window, window) for _ in range(4))
    return sorted(pts)


def verify_model(
    cs: ClauseSet,
    model: HierarchicModel,
    samples: int = 1000,
    seed: int = 0,
    window: int = 20,
    exhaustive_limit: int = 20000,
) -> VerifyReport:
    """Exact check for ground assignments; exhaustive or sampled over cell boundaries otherwise."""
    rng = random.Random(seed)
    rep = VerifyReport()
    domain = list(model.free_domain) or ["e"]
    for c in cs.clauses:
        if any(isinstance(a, TheoryAtom) for a in c.atoms()):
            rep.skipped.append(c.id)
            continue
        vs = c.variables()
        if not vs:
            rep.checked += 1
            if not eval_clause(c, model, {}):
                rep.violations.append((c.id, {}))
            continue
        base_cands = _base_candidates(model, c, rng, window)
        pools = []
        for v in vs:
            if v.sort is Sort.FREE:
                pools.append(domain)
            else:
                t = c.defining_term(v)
                if t is not None:
                    pools.append([model.value(t)])
                else:
                    pools.append(base_cands)
        total = 1
        for p in pools:
            total *= len(p)
        if total <= exhaustive_limit:
            it = itertools.product(*pools)
        else:
            rep.exhaustive = False

            def sampler():
                for _ in range(samples):
                    yield tuple(
                        rng.choice(p) if v.sort is Sort.FREE or rng.random() < 0.7 else rng.randint(-window, window)
                        for v, p in zip(vs, pools)
                    )

            it = sampler()
        for combo in it:
            beta = dict(zip(vs, combo))
            # defined variables keep their defining value
            for v, p in zip(vs, pools):
                if len(p) == 1 and v.sort is Sort.BASE and c.defining_term(v) is not None:
                    beta[v] = p[0]
            rep.checked += 1
            if not eval_clause(c, model, beta):
                rep.violations.append((c.id, {v.name: x for v, x in beta.items()}))
                break
    return rep


def sample_uniformity(model: HierarchicModel, seed: int = 0, per_cell: int = 2) -> bool:
    """Membership is constant on each cell: compare two points per base cell."""
    rng = random.Random(seed)
    for pred, table in model.projections.items():
        for i, p in enumerate(table):
            if p is None or p[0] != "Z":
                continue
            for cell in p[1]:
                lo = cell.lo if cell.lo is not None else (cell.hi - 50 if cell.hi is not None else -50)
                hi = cell.hi if cell.hi is not None else lo + 50
                picks = [rng.randint(lo, hi) for _ in range(per_cell)]
                projected = {model.project(pred, (x,) if len(table) == 1 else tuple(x if j == i else 0 for j in range(len(table))))[i] for x in picks}
                if len(projected) != 1:
                    return False
    return True
