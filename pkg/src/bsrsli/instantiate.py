"""Instantiation points, variable elimination, simplification and sort-predicate encoding."""

from __future__ import annotations

import itertools
import json
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable

from .core import (
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
    NameSupply,
    Origin,
    Rel,
    Shape,
    Sort,
    Var,
    apply_substitution,
    base_constants,
    canonical_key,
    constraint,
    inter_sentinel_clause,
    is_psi,
    point_name,
    point_sort_key,
    point_term,
    psi_clause,
    psi_missing,
)
from .propagate import ArgPos, PropagationPreorder, build_prop


class Direction(str, Enum):
    LOWER = "lower"
    UPPER = "upper"
    FREE = "free"
    AUTO = "auto"


class Baseline(str, Enum):
    NONE = "none"
    EXHAUSTIVE = "exhaustive"
    ARG_FILTERED = "filtered"


@dataclass(frozen=True)
class InstantiationSet:
    owner: str
    direction: Direction
    points: tuple

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, name) -> bool:
        return name in self.points

    def as_set(self) -> set[str]:
        return set(self.points)


def _sorted_points(names: Iterable[str]) -> tuple:
    return tuple(sorted(set(names), key=point_sort_key))


# --------------------------------------------------------------------------- per-position sets


@dataclass
class PointTables:
    """Per-position instantiation points of one clause set (T-atoms ignored)."""

    lower: dict
    upper: dict
    free: dict
    fconsts: list

    @staticmethod
    def of(cs: ClauseSet) -> "PointTables":
        lower: dict = defaultdict(set)
        upper: dict = defaultdict(set)
        free: dict = defaultdict(set)
        fconsts = cs.signature.free_consts()
        everything: set = set()
        for c in cs.clauses:
            bounds: dict[Var, list[Constraint]] = defaultdict(list)
            for a in c.lam:
                if a.shape is Shape.VAR_GROUND:
                    bounds[a.lhs].append(a)
            eq_vars = set()
            for a in c.delta:
                if isinstance(a, Equation):
                    for t in (a.lhs, a.rhs):
                        if isinstance(t, Var):
                            eq_vars.add(t)
            for a in c.atoms():
                if not isinstance(a, FreeAtom):
                    continue
                for i, t in enumerate(a.args, start=1):
                    p = ArgPos(a.pred, i)
                    if isinstance(t, FreeConst):
                        free[p].add(t.name)
                    elif isinstance(t, Var):
                        if t.sort is Sort.BASE:
                            for b in bounds.get(t, ()):
                                if b.rel in (Rel.EQ, Rel.GE):
                                    lower[p].add(_point(b.rhs))
                                if b.rel in (Rel.EQ, Rel.LE):
                                    upper[p].add(_point(b.rhs))
                        elif t in eq_vars:
                            everything.add(p)
        for p in everything:
            free[p].update(fconsts)
        return PointTables(dict(lower), dict(upper), dict(free), fconsts)


def _point(t: Lin) -> str:
    if not t.is_constant:
        raise BsrError(f"instantiation point {t} is not a constant (normalize first)")
    return point_name(t)


def _check_pos(prop_or_cs, p: ArgPos, sort: Sort):
    sig = prop_or_cs.signature if isinstance(prop_or_cs, ClauseSet) else None
    if sig is not None:
        sorts = sig.preds.get(p.pred)
        if sorts is None or not 1 <= p.index <= len(sorts):
            raise BsrError(f"unknown argument position {p}")
        if sorts[p.index - 1] is not sort:
            raise BsrError(f"{p} is not a {'base' if sort is Sort.BASE else 'free'} position")


def base_points_lower(cs: ClauseSet, pred: str, index: int) -> set[str]:
    p = ArgPos(pred, index)
    _check_pos(cs, p, Sort.BASE)
    return set(PointTables.of(cs).lower.get(p, ()))


def base_points_upper(cs: ClauseSet, pred: str, index: int) -> set[str]:
    p = ArgPos(pred, index)
    _check_pos(cs, p, Sort.BASE)
    return set(PointTables.of(cs).upper.get(p, ()))


def closure_points(
    cs: ClauseSet,
    prop: PropagationPreorder,
    p: ArgPos,
    direction: Direction,
    tables: PointTables | None = None,
) -> InstantiationSet:
    direction = Direction(direction)
    _check_pos(cs, p, Sort.BASE)
    tables = tables or PointTables.of(cs)
    if direction is Direction.LOWER:
        pts = {MINF}
        for q in prop.downcl(p):
            pts |= tables.lower.get(q, set())
        return InstantiationSet(f"down{p}", direction, _sorted_points(pts))
    if direction is Direction.UPPER:
        pts = {PINF}
        for q in prop.upcl(p):
            pts |= tables.upper.get(q, set())
        return InstantiationSet(f"up{p}", direction, _sorted_points(pts))
    raise BsrError(f"direction {direction.value} is not LOWER or UPPER")


def free_points(cs: ClauseSet, prop: PropagationPreorder, p: ArgPos, tables: PointTables | None = None) -> InstantiationSet:
    _check_pos(cs, p, Sort.FREE)
    tables = tables or PointTables.of(cs)
    pts: set = set()
    for q in prop.downcl(p):
        pts |= tables.free.get(q, set())
    if not pts:
        if not tables.fconsts:
            raise BsrError("no free constant available (normalize first)")
        pts = {tables.fconsts[0]}
    return InstantiationSet(f"down{p}", Direction.FREE, tuple(sorted(pts)))


# --------------------------------------------------------------------------- Ψ axioms


def psi_axioms(cs: ClauseSet, direction: Direction) -> list[Clause]:
    direction = Direction(direction)
    sentinel = MINF if direction is Direction.LOWER else PINF
    other = PINF if sentinel == MINF else MINF
    consts = sorted(base_constants(cs.clauses) - set(SENTINELS), key=point_sort_key)
    out = [psi_clause(sentinel, c) for c in consts]
    if other in cs.sentinels_present():
        out.append(inter_sentinel_clause())
    return out


def ensure_psi(cs: ClauseSet) -> ClauseSet:
    """Append any missing Ψ clauses for the sentinels occurring in ``cs``."""
    missing = psi_missing(cs, MINF) + psi_missing(cs, PINF)
    seen = set()
    extra = []
    for c in missing:
        if c.id not in seen:
            seen.add(c.id)
            extra.append(c)
    if not extra:
        return cs
    return replace(cs, clauses=cs.clauses + tuple(extra))


# --------------------------------------------------------------------------- simplification


def _psi_orders(cs: ClauseSet) -> tuple[set, set, bool]:
    below, above, both = set(), set(), False
    for c in cs.clauses:
        if not is_psi(c):
            continue
        if c.origin.detail == "both":
            both = True
        elif c.origin.detail == MINF:
            below.add(point_name(c.lam[0].rhs))
        elif c.origin.detail == PINF:
            above.add(point_name(c.lam[0].rhs))
    return below, above, both


def eval_ground(a: Constraint, below: set, above: set, both: bool) -> bool | None:
    """Truth value of a ground constraint under the sentinel order, or None when symbolic."""
    diff = a.lhs - a.rhs
    if diff.is_numeral:
        return a.rel.holds(diff.offset, 0)
    if not (a.lhs.is_constant and a.rhs.is_constant):
        return None
    ln, rn = point_name(a.lhs), point_name(a.rhs)

    def cmp_known(x: str, y: str) -> int | None:
        # sign of value(x) - value(y) when the order is fixed by Ψ
        if x == MINF:
            if y == PINF:
                return -1 if both else None
            return -1 if y in below else None
        if x == PINF:
            if y == MINF:
                return 1 if both else None
            return 1 if y in above else None
        return None

    s = cmp_known(ln, rn)
    if s is None:
        s2 = cmp_known(rn, ln)
        s = -s2 if s2 is not None else None
    if s is None:
        return None
    return a.rel.holds(s, 0)


def _dedupe(items) -> tuple:
    return tuple(dict.fromkeys(items))


def simplify(cs: ClauseSet) -> ClauseSet:
    """Evaluate ground constraints under the sentinel order and drop duplicate clauses."""
    below, above, both = _psi_orders(cs)
    out: list[Clause] = []
    seen: set = set()
    for c in cs.clauses:
        if is_psi(c):
            out.append(c)
            continue
        lam = []
        dead = False
        for a in _dedupe(c.lam):
            if a.shape is Shape.GROUND_GROUND:
                v = eval_ground(a, below, above, both)
                if v is True:
                    continue
                if v is False:
                    dead = True
                    break
            lam.append(a)
        if dead:
            continue
        c2 = Clause(tuple(lam), _dedupe(c.gamma), _dedupe(c.delta), c.id, c.origin)
        key = canonical_key(c2)
        if key in seen:
            continue
        seen.add(key)
        out.append(c2)
    return replace(cs, clauses=tuple(out))


def count_nonredundant(cs: ClauseSet) -> int:
    return sum(1 for c in cs.clauses if not is_psi(c))


# --------------------------------------------------------------------------- elimination


def _find_var(c: Clause, var) -> Var:
    for v in c.variables():
        if v == var or (isinstance(var, str) and v.name == var):
            return v
    raise BsrError(f"variable {var} does not occur in clause {c.id}")


def _instance_id(cid: str, v: Var, pt: str) -> str:
    return f"{cid}[{v.name}:={pt}]"


def _replace_clause(cs: ClauseSet, cid: str, instances: list[Clause]) -> ClauseSet:
    out = []
    for c in cs.clauses:
        if c.id == cid:
            out.extend(instances)
        else:
            out.append(c)
    return replace(cs, clauses=tuple(out), normal_form_certified=False)


def eliminate_var(
    cs: ClauseSet,
    clause_id: str,
    var,
    direction: Direction,
    prop: PropagationPreorder | None = None,
    tables: PointTables | None = None,
) -> ClauseSet:
    direction = Direction(direction)
    if direction not in (Direction.LOWER, Direction.UPPER):
        raise BsrError("direction must be resolved to LOWER or UPPER before elimination")
    c = cs.by_id(clause_id)
    v = _find_var(c, var)
    if v.sort is not Sort.BASE:
        raise BsrError(f"{v} is not a base variable")
    prop = prop or build_prop(cs)
    pts = closure_points(cs, prop, prop.home(c.id, v), direction, tables)
    return _instantiate(cs, c, v, pts.points, add_psi=True)


def eliminate_free_var(
    cs: ClauseSet,
    clause_id: str,
    var,
    prop: PropagationPreorder | None = None,
    tables: PointTables | None = None,
) -> ClauseSet:
    c = cs.by_id(clause_id)
    v = _find_var(c, var)
    if v.sort is not Sort.FREE:
        raise BsrError(f"{v} is not a free-sort variable")
    prop = prop or build_prop(cs)
    pts = free_points(cs, prop, prop.home(c.id, v), tables)
    return _instantiate(cs, c, v, pts.points, add_psi=False)


def _instantiate(cs: ClauseSet, c: Clause, v: Var, points, add_psi: bool) -> ClauseSet:
    insts = []
    for pt in points:
        t = point_term(pt) if v.sort is Sort.BASE else FreeConst(pt)
        inst = apply_substitution(c, {v: t}, _instance_id(c.id, v, pt))
        insts.append(replace(inst, origin=Origin("instance", c.id, f"{v.name}:={pt}")))
    out = _replace_clause(cs, c.id, insts)
    if add_psi:
        out = ensure_psi(out)
    return out


# --------------------------------------------------------------------------- strategy and trace


@dataclass
class Strategy:
    directions: dict = field(default_factory=dict)  # variable name -> Direction
    default_direction: Direction = Direction.AUTO
    order: list | None = None
    baseline: Baseline = Baseline.NONE
    designate: list | None = None
    complete: bool = True  # ground the remaining variables after the designated phase

    def direction_for(self, name: str) -> Direction:
        return Direction(self.directions.get(name, self.default_direction))


@dataclass
class TraceStep:
    step: int
    clause_id: str
    variable: str
    direction: str
    points: list
    instances_after: int
    phase: str = "designated"
    snapshot: dict | None = None  # position -> points of its closure in the step's input set

    def to_json(self, with_snapshot: bool = False) -> dict:
        d = {
            "step": self.step,
            "clause": self.clause_id,
            "variable": self.variable,
            "direction": self.direction,
            "points": list(self.points),
            "instances_after": self.instances_after,
            "phase": self.phase,
        }
        if with_snapshot and self.snapshot is not None:
            d["snapshot"] = self.snapshot
        return d


@dataclass
class InstantiationTrace:
    steps: list = field(default_factory=list)
    baseline: str = Baseline.NONE.value
    designated_count: int | None = None
    final_count: int = 0
    start: ClauseSet | None = None

    def to_jsonl(self, with_snapshot: bool = False) -> str:
        return "".join(json.dumps(s.to_json(with_snapshot), sort_keys=True) + "\n" for s in self.steps)

    @property
    def count(self) -> int:
        return self.final_count if self.designated_count is None else self.designated_count


class _Step:
    """Point tables and closures of one intermediate set, computed lazily."""

    def __init__(self, cs: ClauseSet):
        self.cs = cs
        self.prop = build_prop(cs)
        self.tables = PointTables.of(cs)
        self.cache: dict = {}

    def points(self, p: ArgPos, direction: Direction) -> InstantiationSet:
        key = (p, direction)
        if key not in self.cache:
            if direction is Direction.FREE:
                self.cache[key] = free_points(self.cs, self.prop, p, self.tables)
            else:
                self.cache[key] = closure_points(self.cs, self.prop, p, direction, self.tables)
        return self.cache[key]

    def resolve(self, p: ArgPos, d: Direction) -> InstantiationSet:
        if d is Direction.AUTO:
            lo = self.points(p, Direction.LOWER)
            up = self.points(p, Direction.UPPER)
            return up if len(up) < len(lo) else lo
        return self.points(p, d)

    def snapshot(self, direction: Direction) -> dict:
        out = {}
        for p in self.prop.positions:
            s = self.prop.sorts[p]
            if direction is Direction.FREE and s is Sort.FREE:
                out[f"{p.pred}/{p.index}"] = list(self.points(p, Direction.FREE).points)
            elif direction is not Direction.FREE and s is Sort.BASE:
                out[f"{p.pred}/{p.index}"] = list(self.points(p, direction).points)
        return out


def undefined_base_vars(c: Clause) -> list[Var]:
    free = c.free_part_vars()
    return sorted(
        (v for v in c.variables() if v.sort is Sort.BASE and c.defining_term(v) is None and v in free),
        key=lambda v: v.name,
    )


def free_vars(c: Clause) -> list[Var]:
    return sorted((v for v in c.variables() if v.sort is Sort.FREE), key=lambda v: v.name)


def is_essentially_ground(cs: ClauseSet) -> bool:
    return all(c.is_essentially_ground() for c in cs.clauses)


def _pick(step: _Step, strategy: Strategy, allowed, want_free: bool):
    best = None
    for idx, c in enumerate(step.cs.clauses):
        cands = free_vars(c) if want_free else undefined_base_vars(c)
        for v in cands:
            if allowed is not None and v.name not in allowed:
                continue
            p = step.prop.home(c.id, v)
            if want_free:
                pts = step.points(p, Direction.FREE)
            else:
                pts = step.resolve(p, strategy.direction_for(v.name))
            key = (len(pts), idx, v.name)
            if best is None or key < best[0]:
                best = (key, c, v, pts)
    return best


def _eliminate_step(cs: ClauseSet, trace: InstantiationTrace, strategy: Strategy, c: Clause, v: Var, step: _Step, pts, phase):
    direction = pts.direction
    snap = step.snapshot(direction)
    out = _instantiate(cs, c, v, pts.points, add_psi=v.sort is Sort.BASE)
    out = simplify(out)
    trace.steps.append(
        TraceStep(len(trace.steps) + 1, c.id, v.name, direction.value, list(pts.points), count_nonredundant(out), phase, snap)
    )
    return out


def _run_order(cs, trace, strategy, names, phase):
    for name in names:
        while True:
            step = _Step(cs)
            target = None
            for c in cs.clauses:
                for v in undefined_base_vars(c) + free_vars(c):
                    if v.name == name:
                        target = (c, v)
                        break
                if target:
                    break
            if target is None:
                break
            c, v = target
            p = step.prop.home(c.id, v)
            if v.sort is Sort.FREE:
                pts = step.points(p, Direction.FREE)
            else:
                pts = step.resolve(p, strategy.direction_for(name))
            cs = _eliminate_step(cs, trace, strategy, c, v, step, pts, phase)
    return cs


def _run_auto(cs, trace, strategy, allowed, phase):
    for want_free in (False, True):
        while True:
            step = _Step(cs)
            best = _pick(step, strategy, allowed, want_free)
            if best is None:
                break
            _, c, v, pts = best
            cs = _eliminate_step(cs, trace, strategy, c, v, step, pts, phase)
    return cs


def _baseline_points(cs: ClauseSet, baseline: Baseline, c: Clause, v: Var, prop, tables) -> list[str]:
    if baseline is Baseline.EXHAUSTIVE:
        pts = base_constants(cs.clauses) - set(SENTINELS)
    else:
        pts = set()
        for q in prop.component(prop.home(c.id, v)):
            pts |= tables.lower.get(q, set()) | tables.upper.get(q, set())
        pts -= set(SENTINELS)
    return list(_sorted_points(pts)) or ["0"]


def _run_baseline(cs, trace, strategy, allowed):
    prop = build_prop(cs)
    tables = PointTables.of(cs)
    out = []
    per_var: dict[str, list] = {}
    for c in cs.clauses:
        vs = [v for v in undefined_base_vars(c) if allowed is None or v.name in allowed]
        if not vs:
            out.append(c)
            continue
        lists = [_baseline_points(cs, strategy.baseline, c, v, prop, tables) for v in vs]
        for v, pts in zip(vs, lists):
            per_var[(c.id, v.name)] = pts
        for combo in itertools.product(*lists):
            binding = {v: point_term(pt) for v, pt in zip(vs, combo)}
            cid = c.id + "".join(f"[{v.name}:={pt}]" for v, pt in zip(vs, combo))
            inst = apply_substitution(c, binding, cid)
            out.append(replace(inst, origin=Origin("instance", c.id, strategy.baseline.value)))
    cs = simplify(replace(cs, clauses=tuple(out), normal_form_certified=False))
    n = count_nonredundant(cs)
    for (cid, name), pts in per_var.items():
        trace.steps.append(TraceStep(len(trace.steps) + 1, cid, name, strategy.baseline.value, pts, n, "designated"))
    return cs


def ground_all(cs: ClauseSet, strategy: Strategy | None = None) -> tuple[ClauseSet, InstantiationTrace]:
    """Instantiate until the set is essentially ground (or only the designated variables)."""
    strategy = strategy or Strategy()
    trace = InstantiationTrace(baseline=Baseline(strategy.baseline).value, start=cs)
    allowed = set(strategy.designate) if strategy.designate is not None else None
    if Baseline(strategy.baseline) is Baseline.NONE:
        if strategy.order:
            cs = _run_order(cs, trace, strategy, [n for n in strategy.order if allowed is None or n in allowed], "designated")
        cs = _run_auto_base_only(cs, trace, strategy, allowed) if allowed is not None else cs
    else:
        cs = _run_baseline(cs, trace, strategy, allowed)
    if allowed is not None or Baseline(strategy.baseline) is not Baseline.NONE:
        trace.designated_count = count_nonredundant(cs)
    if strategy.complete:
        cs = _run_auto(cs, trace, strategy, None, "forced" if trace.designated_count is not None else "designated")
    trace.final_count = count_nonredundant(cs)
    return cs, trace


def _run_auto_base_only(cs, trace, strategy, allowed):
    while True:
        step = _Step(cs)
        best = _pick(step, strategy, allowed, False)
        if best is None:
            return cs
        _, c, v, pts = best
        cs = _eliminate_step(cs, trace, strategy, c, v, step, pts, "designated")


# --------------------------------------------------------------------------- sort-predicate encoding


def encode_sort_predicates(cs: ClauseSet, plan) -> ClauseSet:
    """Guard deferred variables with fresh finite-domain predicates.

    ``plan`` is a sequence of ``(variable name, Direction)`` pairs or names.
    Point sets are computed in plan order on a simulated explicit
    instantiation, so later variables see the sets the explicit route would.
    """
    entries = []
    for item in plan:
        if isinstance(item, str):
            entries.append((item, Direction.AUTO))
        else:
            entries.append((item[0], Direction(item[1])))
    if not entries:
        return cs
    sim = cs
    homes: list[tuple[str, Var, InstantiationSet]] = []
    for name, d in entries:
        owner = next((c for c in cs.clauses if any(v.name == name for v in undefined_base_vars(c))), None)
        if owner is None:
            raise BsrError(f"variable {name} is not an undefined base variable of any clause")
        v = next(v for v in undefined_base_vars(owner) if v.name == name)
        step = _Step(sim)
        target = next((c for c in sim.clauses if v in undefined_base_vars(c)), None)
        if target is None:
            pts = InstantiationSet("", Direction.LOWER, (MINF,))
        else:
            pts = step.resolve(step.prop.home(target.id, v), d)
        homes.append((owner.id, v, pts))
        sim = _run_order(sim, InstantiationTrace(), Strategy(directions={name: pts.direction}), [name], "sim")

    sig = cs.signature
    names = NameSupply(sig.names())
    var_names = NameSupply(v.name for c in cs.clauses for v in c.variables())
    guards: dict[str, list] = defaultdict(list)
    units: list[Clause] = []
    for cid, v, pts in homes:
        pname = names.fresh_like(f"S_{v.name}")
        sig = sig.with_pred(pname, (Sort.BASE,))
        guards[cid].append(FreeAtom(pname, (v,)))
        for pt in pts.points:
            w = Var(var_names.fresh(v.name + "_"), Sort.BASE)
            units.append(
                Clause((constraint(w, Rel.EQ, point_term(pt)),), (), (FreeAtom(pname, (w,)),), f"{pname}[{pt}]", Origin("encoding", cid, pt))
            )
    out = []
    for c in cs.clauses:
        if c.id in guards:
            c = Clause(c.lam, c.gamma + tuple(guards[c.id]), c.delta, c.id, Origin("encoding", c.id, "guarded"))
        out.append(c)
    result = ClauseSet(sig, tuple(out) + tuple(units))
    return ensure_psi(result)


def encoding_family_size(cs: ClauseSet, clause_id: str) -> int:
    """Guarded clause plus the unit clauses defining its guard predicates."""
    c = cs.by_id(clause_id)
    preds = {a.pred for a in c.gamma if isinstance(a, FreeAtom) and a.pred.startswith("S_")}
    return 1 + sum(1 for d in cs.clauses if d.origin.kind == "encoding" and d.origin.parent == clause_id and d.id != clause_id and any(a.pred in preds for a in d.delta))
