"""Uninterpreted functions: stratification levels, flattening into marked predicates,
guard checks, finite-range axioms for marked predicates and theory-atom guards."""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field

from .core import (
    BsrError,
    Clause,
    ClauseSet,
    Equation,
    FreeAtom,
    FreeConst,
    Lin,
    NameSupply,
    Origin,
    Rel,
    Signature,
    Sort,
    TApp,
    TheoryAtom,
    Var,
    constraint,
    equation,
    point_term,
)


@dataclass(frozen=True)
class App:
    """Application of a user function symbol (only before flattening)."""

    fn: str
    args: tuple

    def __str__(self) -> str:
        return f"{self.fn}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class FunClauseSet:
    signature: Signature
    clauses: tuple
    funs: dict  # name -> (arg sorts, result sort)

    def __iter__(self):
        return iter(self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)


def _vars_of_term(t):
    if isinstance(t, Var):
        yield t
    elif isinstance(t, (App, TApp)):
        for a in t.args:
            yield from _vars_of_term(a)


def has_apps(clauses) -> bool:
    def walk(t):
        if isinstance(t, App):
            return True
        if isinstance(t, TApp):
            return any(walk(a) for a in t.args)
        return False

    for c in clauses:
        for a in c.atoms():
            terms = (a.lhs, a.rhs) if isinstance(a, Equation) else a.args
            if any(walk(t) for t in terms):
                return True
    return False


# --------------------------------------------------------------------------- levels


class _UF:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


@dataclass
class LevelMap:
    level: dict = field(default_factory=dict)  # (symbol, index) -> int
    cycle: list | None = None  # strict cycle witness when stratification fails

    @property
    def ok(self) -> bool:
        return self.cycle is None

    def __getitem__(self, key) -> int:
        return self.level[key]

    def get(self, key, default=0) -> int:
        return self.level.get(key, default)


def _solve_levels(keys, equal, strict) -> LevelMap:
    uf = _UF()
    for k in keys:
        uf.find(k)
    for a, b in equal:
        uf.union(a, b)
    succ: dict = defaultdict(set)
    for hi, lo in strict:
        succ[uf.find(hi)].add(uf.find(lo))
    classes = sorted({uf.find(k) for k in uf.parent})
    members: dict = defaultdict(list)
    for k in uf.parent:
        members[uf.find(k)].append(k)
    # depth-first search with colouring; a back edge yields a cycle
    colour: dict = {}
    level: dict = {}
    stack_path: list = []

    def visit(r):
        colour[r] = 1
        stack_path.append(r)
        best = -1
        for s in sorted(succ[r]):
            if colour.get(s) == 1:
                i = stack_path.index(s)
                raise _Cycle(stack_path[i:] + [s])
            if colour.get(s) is None:
                visit(s)
            best = max(best, level[s])
        level[r] = best + 1
        colour[r] = 2
        stack_path.pop()

    try:
        for r in classes:
            if colour.get(r) is None:
                visit(r)
    except _Cycle as e:
        witness = []
        for r in e.path[:-1]:  # the last class closes the cycle
            witness.extend(sorted(members[r]))
        return LevelMap({}, witness)
    return LevelMap({k: level[uf.find(k)] for k in uf.parent})


class _Cycle(Exception):
    def __init__(self, path):
        self.path = path


def compute_levels(cs) -> LevelMap:
    """Level assignment for argument positions, or a cycle witness.

    For a FunClauseSet the conditions are taken over function nestings,
    shared variables and equations; for a function-free ClauseSet over the
    propagation preorder plus the marked-predicate inequalities.  LIA
    constraint slots and theory symbols never contribute.
    """
    if isinstance(cs, FunClauseSet):
        return _fun_levels(cs)
    from .propagate import build_prop

    prop = build_prop(cs)
    keys = [(p.pred, p.index) for p in prop.positions]
    equal = [((q.pred, q.index), (p.pred, p.index)) for q, p in prop.edges]
    strict = []
    for r in sorted(cs.signature.marked):
        m = len(cs.signature.preds[r]) - 1
        for i in range(1, m + 1):
            strict.append(((r, i), (r, m + 1)))
    return _solve_levels(keys, equal, strict)


def _fun_levels(fcs: FunClauseSet) -> LevelMap:
    keys = []
    for name, sorts in fcs.signature.preds.items():
        keys.extend((name, i) for i in range(1, len(sorts) + 1))
    strict = []
    for f, (args, _res) in fcs.funs.items():
        m = len(args)
        keys.extend((f, i) for i in range(1, m + 2))
        for i in range(1, m + 1):
            strict.append(((f, i), (f, m + 1)))
    equal = []
    for c in fcs.clauses:
        occ: dict = defaultdict(list)

        def result_key(t):
            if isinstance(t, App):
                return (t.fn, len(t.args) + 1)
            if isinstance(t, FreeConst):
                keys.append((t.name, 1))
                return (t.name, 1)
            return None

        def walk(sym, args):
            for k, t in enumerate(args, start=1):
                slot = (sym, k)
                if isinstance(t, Var):
                    occ[(c.id, t)].append(slot)
                else:
                    r = result_key(t)
                    if r is not None:
                        equal.append((r, slot))
                if isinstance(t, App):
                    walk(t.fn, t.args)
                elif isinstance(t, TApp):
                    walk_theory(t.args)

        def walk_theory(args):
            for t in args:
                if isinstance(t, App):
                    walk(t.fn, t.args)
                elif isinstance(t, TApp):
                    walk_theory(t.args)

        var_links = []
        for a in c.atoms():
            if isinstance(a, FreeAtom):
                walk(a.pred, a.args)
            elif isinstance(a, TheoryAtom):
                walk_theory(a.args)
            elif isinstance(a, Equation):
                for t in (a.lhs, a.rhs):
                    if isinstance(t, App):
                        walk(t.fn, t.args)
                l, r = a.lhs, a.rhs
                rl, rr = result_key(l), result_key(r)
                if rl is not None and rr is not None:
                    equal.append((rl, rr))
                elif isinstance(l, Var) and rr is not None:
                    occ[(c.id, l)].append(rr)
                elif isinstance(r, Var) and rl is not None:
                    occ[(c.id, r)].append(rl)
                elif isinstance(l, Var) and isinstance(r, Var):
                    var_links.append(((c.id, l), (c.id, r)))
        # variables linked by an equation share their level class
        uf = _UF()
        for a, b in var_links:
            uf.union(a, b)
        grouped: dict = defaultdict(list)
        for v, slots in occ.items():
            grouped[uf.find(v)].extend(slots)
        for slots in grouped.values():
            for s in slots[1:]:
                equal.append((slots[0], s))
    return _solve_levels(keys, equal, strict)


# --------------------------------------------------------------------------- flattening


@dataclass(frozen=True)
class PhiDescriptor:
    """Pending functionality (kind 'functional') or totality (kind 'total') axiom."""

    pred: str
    function: str
    kind: str


@dataclass
class FlattenResult:
    clauses: ClauseSet
    pending: list
    pred_of: dict  # function name -> marked predicate


def flatten(fcs: FunClauseSet, levels: LevelMap | None = None) -> FlattenResult:
    """Replace every function by a marked predicate (innermost first, left to right)."""
    if not isinstance(fcs, FunClauseSet):
        return FlattenResult(fcs, [], {})
    levels = levels or compute_levels(fcs)
    if not levels.ok:
        raise BsrError("not stratified: cycle through " + ", ".join(f"<{s},{i}>" for s, i in levels.cycle))
    sig = fcs.signature
    names = NameSupply(sig.names() | set(fcs.funs))
    pred_of: dict[str, str] = {}
    for f in sorted(fcs.funs):
        args, res = fcs.funs[f]
        r = names.fresh_like(f"P_{f}")
        sig = sig.with_pred(r, tuple(args) + (res,), marked=True)
        pred_of[f] = r
    taken = {v.name for c in fcs.clauses for v in c.variables()}
    taken |= {v.name for c in fcs.clauses for a in c.atoms() for t in _atom_terms_deep(a) for v in _vars_of_term(t)}
    var_names = NameSupply(taken)
    out = []
    for c in fcs.clauses:
        out.append(_flatten_clause(c, fcs.funs, pred_of, var_names))
    pending = []
    for f, r in sorted(pred_of.items()):
        pending.append(PhiDescriptor(r, f, "functional"))
        pending.append(PhiDescriptor(r, f, "total"))
    return FlattenResult(ClauseSet(sig, tuple(out)), pending, pred_of)


def _atom_terms_deep(a):
    if isinstance(a, Equation):
        return (a.lhs, a.rhs)
    return a.args


def _flatten_clause(c: Clause, funs, pred_of, var_names: NameSupply) -> Clause:
    guards: list = []
    extra_delta: list = []

    def extract(t):
        """Flattened term for ``t``; nested applications become guards in Γ."""
        if isinstance(t, App):
            args = tuple(extract(a) for a in t.args)
            res_sort = funs[t.fn][1]
            v = Var(var_names.fresh("v"), res_sort)
            guards.append(FreeAtom(pred_of[t.fn], args + (v,)))
            return v
        if isinstance(t, TApp):
            return TApp(t.fn, tuple(extract(a) for a in t.args))
        return t

    def flat_args(t):
        if isinstance(t, App):
            return tuple(extract(a) for a in t.args)
        return None

    gamma, delta = [], []
    for side, target in ((c.gamma, gamma), (c.delta, delta)):
        antecedent = target is gamma
        for a in side:
            if isinstance(a, Equation) and (isinstance(a.lhs, App) or isinstance(a.rhs, App)):
                l, r = (a.lhs, a.rhs) if isinstance(a.lhs, App) else (a.rhs, a.lhs)
                ls = flat_args(l)
                if isinstance(r, App):
                    rs = flat_args(r)
                    v = Var(var_names.fresh("v"), funs[l.fn][1])
                    guards.append(FreeAtom(pred_of[l.fn], ls + (v,)))
                    atom = FreeAtom(pred_of[r.fn], rs + (v,))
                    # fun-fun: both graphs meet in v
                    (guards if antecedent else extra_delta).append(atom)
                else:
                    atom = FreeAtom(pred_of[l.fn], ls + (r,))
                    (guards if antecedent else extra_delta).append(atom)
            elif isinstance(a, FreeAtom):
                target.append(FreeAtom(a.pred, tuple(extract(t) for t in a.args)))
            elif isinstance(a, TheoryAtom):
                target.append(TheoryAtom(a.pred, tuple(extract(t) for t in a.args)))
            else:
                target.append(a)
    return Clause(c.lam, tuple(gamma) + tuple(guards), tuple(delta) + tuple(extra_delta), c.id, Origin("flattened", c.id))


# --------------------------------------------------------------------------- guards


@dataclass(frozen=True)
class GuardIssue:
    clause_id: str
    condition: str  # b | c | level
    description: str


@dataclass
class GuardReport:
    violations: list = field(default_factory=list)
    equations: list = field(default_factory=list)  # (clause id, equation text, c.1 | c.2 | ground | VIOLATION)

    @property
    def ok(self) -> bool:
        return not self.violations


def _guards(c: Clause, marked) -> set:
    return {a.args[-1] for a in c.gamma if isinstance(a, FreeAtom) and a.pred in marked and a.args}


def check_guarded(cs: ClauseSet, prop=None) -> GuardReport:
    from .propagate import ArgPos, build_prop

    sig = cs.signature
    for r in sig.marked:
        if r not in sig.preds:
            raise BsrError(f"marked predicate {r} is not declared")
    marked = set(sig.marked)
    prop = prop or build_prop(cs)
    rep = GuardReport()
    levels = compute_levels(cs)
    if not levels.ok:
        rep.violations.append(
            GuardIssue("", "level", "no level assignment: cycle through " + ", ".join(f"<{s},{i}>" for s, i in levels.cycle))
        )
    marked_inputs = set()
    for r in marked:
        m = len(sig.preds[r]) - 1
        for i in range(1, m + 1):
            marked_inputs |= prop.downcl(ArgPos(r, i))

    def down_of(cid, v):
        try:
            return prop.downcl(prop.home(cid, v))
        except BsrError:
            return frozenset()

    for c in cs.clauses:
        guards = _guards(c, marked)
        for a in c.delta:
            if isinstance(a, FreeAtom) and a.pred in marked and a.args and isinstance(a.args[-1], Var):
                if a.args[-1] not in guards:
                    rep.violations.append(GuardIssue(c.id, "b", f"{a} in the succedent has no guard for {a.args[-1]}"))
        for side, where in ((c.gamma, "antecedent"), (c.delta, "succedent")):
            for a in side:
                if not isinstance(a, Equation):
                    continue
                vs = [t for t in (a.lhs, a.rhs) if isinstance(t, Var)]
                if not vs:
                    rep.equations.append((c.id, str(a), "ground"))
                    continue
                if where == "succedent" and all(v in guards for v in vs):
                    rep.equations.append((c.id, str(a), "c.1"))
                    continue
                if all(not (down_of(c.id, v) & marked_inputs) for v in vs):
                    rep.equations.append((c.id, str(a), "c.2"))
                    continue
                rep.equations.append((c.id, str(a), "VIOLATION"))
                rep.violations.append(GuardIssue(c.id, "c", f"equation {a} is neither guarded nor separated from marked inputs"))
    return rep


def marked_order(cs: ClauseSet, levels: LevelMap | None = None) -> list[str]:
    levels = levels or compute_levels(cs)
    if not levels.ok:
        raise BsrError("not stratified")
    sig = cs.signature
    return sorted(sig.marked, key=lambda r: (-levels.get((r, len(sig.preds[r]))), r))


# --------------------------------------------------------------------------- finite-range axioms


def phi_hat_points(R: str, M: ClauseSet, upper: bool = False) -> list[tuple]:
    from .instantiate import Direction, closure_points, free_points, PointTables
    from .propagate import ArgPos, build_prop

    sig = M.signature
    sorts = sig.preds[R]
    prop = build_prop(M)
    tables = PointTables.of(M)
    per_pos = []
    for i, s in enumerate(sorts[:-1], start=1):
        p = ArgPos(R, i)
        if s is Sort.BASE:
            d = Direction.UPPER if upper else Direction.LOWER
            per_pos.append(closure_points(M, prop, p, d, tables).points)
        else:
            per_pos.append(free_points(M, prop, p, tables).points)
    return list(itertools.product(*per_pos))


def build_phi_hat(R: str, M: ClauseSet, upper: bool = False) -> tuple[Signature, list[Clause]]:
    """Finite-range axioms for the marked predicate ``R`` over the points of ``M``.

    Returns the extended signature and |I| facts, one cover clause, one range
    clause and |I|² pairwise clauses (before normalization).
    """
    sig = M.signature
    if R not in sig.marked:
        raise BsrError(f"{R} is not a marked predicate")
    sorts = sig.preds[R]
    arg_sorts, res = sorts[:-1], sorts[-1]
    tuples = phi_hat_points(R, M, upper)
    names = NameSupply(sig.names())
    var_names = NameSupply(v.name for c in M.clauses for v in c.variables())
    ds = []
    for _ in tuples:
        d = names.fresh("d_" + R)
        sig = sig.with_const(d, res)
        ds.append(d)

    def fresh(s: Sort, prefix: str = "x") -> Var:
        return Var(var_names.fresh(prefix), s)

    def arg_vars():
        return tuple(fresh(s) for s in arg_sorts)

    def result_slot(d: str, lam: list):
        if res is Sort.FREE:
            return FreeConst(d)
        w = fresh(Sort.BASE, "w")
        lam.append(constraint(w, Rel.EQ, Lin.const(d)))
        return w

    def origin(kind):
        return Origin("phi", R, kind)

    out: list[Clause] = []
    for k, (tup, d) in enumerate(zip(tuples, ds)):
        lam: list = []
        args = []
        for s, pt in zip(arg_sorts, tup):
            if s is Sort.BASE:
                x = fresh(Sort.BASE)
                lam.append(constraint(x, Rel.EQ, point_term(pt)))
                args.append(x)
            else:
                args.append(FreeConst(pt))
        args.append(result_slot(d, lam))
        out.append(Clause(tuple(lam), (), (FreeAtom(R, tuple(args)),), f"phi[{R}].fact{k + 1}", origin("fact")))
    xs = arg_vars()
    lam = []
    cover = tuple(FreeAtom(R, xs + (result_slot(d, lam),)) for d in ds)
    out.append(Clause(tuple(lam), (), cover, f"phi[{R}].cover", origin("cover")))
    xs = arg_vars()
    u = fresh(res, "u")
    if res is Sort.FREE:
        out.append(
            Clause((), (FreeAtom(R, xs + (u,)),), tuple(equation(u, FreeConst(d)) for d in ds), f"phi[{R}].range", origin("range"))
        )
    else:
        lam = tuple(constraint(u, Rel.NE, Lin.const(d)) for d in ds)
        out.append(Clause(lam, (FreeAtom(R, xs + (u,)),), (), f"phi[{R}].range", origin("range")))
    k = 0
    for d1 in ds:
        for d2 in ds:
            k += 1
            xs = arg_vars()
            if res is Sort.FREE:
                gamma = (FreeAtom(R, xs + (FreeConst(d1),)), FreeAtom(R, xs + (FreeConst(d2),)))
                out.append(Clause((), gamma, (equation(FreeConst(d1), FreeConst(d2)),), f"phi[{R}].pair{k}", origin("pair")))
            else:
                lam = []
                w1 = result_slot(d1, lam)
                w2 = result_slot(d2, lam)
                lam.append(constraint(Lin.const(d1), Rel.NE, Lin.const(d2)))
                gamma = (FreeAtom(R, xs + (w1,)), FreeAtom(R, xs + (w2,)))
                out.append(Clause(tuple(lam), gamma, (), f"phi[{R}].pair{k}", origin("pair")))
    return sig, out


def phi_hat_size(n_points: int) -> int:
    return n_points + 2 + n_points * n_points


@dataclass
class SaturationStage:
    pred: str
    points: list
    added: int


def saturate_marked(cs: ClauseSet, upper: bool = False, stages: list | None = None) -> ClauseSet:
    """M₀ = ``cs``; each stage adds the finite-range axioms of the next marked predicate."""
    if not cs.signature.marked:
        return cs
    rep = check_guarded(cs)
    if not rep.ok:
        raise BsrError("not stratified and guarded: " + "; ".join(f"{v.clause_id} ({v.condition}) {v.description}" for v in rep.violations))
    order = marked_order(cs)
    M = cs
    for R in order:
        pts = phi_hat_points(R, M, upper)
        sig, extra = build_phi_hat(R, M, upper)
        if stages is not None:
            stages.append(SaturationStage(R, pts, len(extra)))
        M = ClauseSet(sig, M.clauses + tuple(extra))
    return M


# --------------------------------------------------------------------------- theory guards


@dataclass
class TheoryGuardReport:
    violations: list = field(default_factory=list)  # (clause id, atom text, variable)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_theory_guards(cs: ClauseSet) -> TheoryGuardReport:
    marked = set(cs.signature.marked)
    rep = TheoryGuardReport()
    for c in cs.clauses:
        guards = _guards(c, marked)
        for a in c.atoms():
            if not isinstance(a, TheoryAtom):
                continue
            seen = set()
            for t in a.args:
                for v in _vars_of_term(t):
                    if v in seen:
                        continue
                    seen.add(v)
                    if v.sort is Sort.BASE and c.defining_term(v) is not None:
                        continue
                    if v in guards:
                        continue
                    rep.violations.append((c.id, str(a), v.name))
    return rep


def prepare(problem, stages: list | None = None, upper: bool = False):
    """Function problems to a saturated function-free set (normalized); plain sets pass through normalized."""
    from .normalize import normalize

    if isinstance(problem, FunClauseSet):
        levels = compute_levels(problem)
        if not levels.ok:
            raise BsrError("not stratified: cycle through " + ", ".join(f"<{s},{i}>" for s, i in levels.cycle))
        problem = flatten(problem, levels).clauses
    n = normalize(problem)
    if n.signature.marked:
        n = normalize(saturate_marked(n, upper=upper, stages=stages))
    return n
