"""Satisfiability of essentially ground clause sets.

The clause set is abstracted to propositional clauses over three kinds of
atoms: ground free atoms, free-constant equations and normalized linear
constraints (``e <= 0`` and ``e = 0``).  The search asks a theory hook for
arithmetic feasibility, free-equality consistency and predicate congruence,
which answers with lemmas.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..core import (
    BsrError,
    Clause,
    ClauseSet,
    Constraint,
    Equation,
    FreeAtom,
    FreeConst,
    Lin,
    Rel,
    TheoryAtom,
    ground_clause,
    int_gcd,
)
from .dpll import Dpll
from .lia import feasible_rows
from .model import HierarchicModel, verify_model


@dataclass
class Verdict:
    status: str  # "sat" | "unsat"
    model: HierarchicModel | None = None
    core: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status == "sat"

    def to_json(self) -> dict:
        out = {"schema_version": 1, "verdict": self.status}
        if self.model is not None:
            out["model"] = self.model.to_json()
        if self.status == "unsat":
            out["core"] = list(self.core)
        return out


# --------------------------------------------------------------------------- arithmetic atoms


def _norm_le(e: Lin):
    """``e <= 0`` as (key, polarity) or a bool when constant."""
    if not e.coeffs:
        return e.offset <= 0
    g = int_gcd(k for _, k in e.coeffs)
    coeffs = tuple((n, k // g) for n, k in e.coeffs)
    off = -((-e.offset) // g)  # ceil
    if coeffs[0][1] < 0:
        # e <= 0  <=>  not (-e + 1 <= 0)
        coeffs = tuple((n, -k) for n, k in coeffs)
        return (("le", coeffs, -off + 1), False)
    return (("le", coeffs, off), True)


def _norm_eq(e: Lin):
    if not e.coeffs:
        return e.offset == 0
    g = int_gcd(k for _, k in e.coeffs)
    if e.offset % g:
        return False
    coeffs = tuple((n, k // g) for n, k in e.coeffs)
    off = e.offset // g
    if coeffs[0][1] < 0:
        coeffs = tuple((n, -k) for n, k in coeffs)
        off = -off
    return (("eq", coeffs, off), True)


def _neg(x):
    if isinstance(x, bool):
        return not x
    return (x[0], not x[1])


def _constraint_lit(c: Constraint):
    d = c.lhs - c.rhs
    if c.rel is Rel.LE:
        return _norm_le(d)
    if c.rel is Rel.LT:
        return _norm_le(d + 1)
    if c.rel is Rel.GE:
        return _norm_le(-d)
    if c.rel is Rel.GT:
        return _norm_le(-d + 1)
    if c.rel is Rel.EQ:
        return _norm_eq(d)
    return _neg(_norm_eq(d))


def _lin_of(key) -> Lin:
    return Lin(key[2], key[1])


# --------------------------------------------------------------------------- theory


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


class GroundTheory:
    """Arithmetic, free equality and congruence checks over the current assignment."""

    def __init__(self, problem: "_Abstraction"):
        self.p = problem
        self._lia_cache: dict = {}
        self.sample: dict | None = None
        self.lemma_count = 0

    # arithmetic ----------------------------------------------------------
    def _row(self, var: int, value: bool):
        kind, coeffs, off = self.p.key_of[var]
        if kind == "le":
            if value:
                return (coeffs, off, False)
            return (tuple((n, -k) for n, k in coeffs), -off + 1, False)
        return (coeffs, off, True) if value else None

    def _feasible(self, lits: frozenset):
        if lits in self._lia_cache:
            return self._lia_cache[lits]
        rows = [r for r in (self._row(abs(l), l > 0) for l in sorted(lits)) if r is not None]
        res = feasible_rows(rows, self.p.base_symbols)
        self._lia_cache[lits] = res
        return res

    def _lia_lits(self, dpll: Dpll) -> list[int]:
        out = []
        for v in self.p.lia_vars:
            val = dpll.value[v]
            if val is None:
                continue
            if self.p.key_of[v][0] == "eq" and not val:
                continue  # handled by the split clauses
            out.append(v if val else -v)
        return out

    def _minimize(self, lits: list[int], infeasible) -> list[int]:
        core = list(lits)
        i = 0
        while i < len(core):
            trial = core[:i] + core[i + 1 :]
            if infeasible(trial):
                core = trial
            else:
                i += 1
        return core

    def _add(self, dpll: Dpll, lemma: list[int]) -> bool:
        added = dpll.add_lemma(lemma)
        if not added:
            # a known lemma would already have been caught by propagation
            raise RuntimeError("theory produced a duplicate lemma")
        self.lemma_count += 1
        return True

    # free equality -------------------------------------------------------
    def _uf(self, dpll: Dpll, lits=None):
        uf = _UF()
        for v in self.p.feq_vars if lits is None else [l for l in lits if l > 0]:
            if lits is not None or dpll.value[v] is True:
                _, a, b = self.p.key_of[v]
                uf.union(a, b)
        return uf

    def _feq_conflict(self, lits: list[int]) -> bool:
        uf = _UF()
        for l in lits:
            if l > 0:
                _, a, b = self.p.key_of[l]
                uf.union(a, b)
        for l in lits:
            if l < 0:
                _, a, b = self.p.key_of[-l]
                if uf.find(a) == uf.find(b):
                    return True
        return False

    def check(self, dpll: Dpll, final: bool) -> bool:
        lits = self._lia_lits(dpll)
        if self._feasible(frozenset(lits)) is None:
            core = self._minimize(lits, lambda ls: self._feasible(frozenset(ls)) is None)
            return self._add(dpll, [-l for l in core])
        feq = [v if dpll.value[v] else -v for v in self.p.feq_vars if dpll.value[v] is not None]
        if self._feq_conflict(feq):
            core = self._minimize(feq, self._feq_conflict)
            return self._add(dpll, [-l for l in core])
        if not final:
            return False
        self.sample = self._feasible(frozenset(lits))
        return self._congruence(dpll)

    # congruence ----------------------------------------------------------
    def _congruence(self, dpll: Dpll) -> bool:
        uf = self._uf(dpll)
        groups: dict = {}
        for v in self.p.free_vars:
            atom = self.p.key_of[v][1]
            sig = (atom.pred,) + tuple(self.p.eval_arg(a, self.sample, uf) for a in atom.args)
            groups.setdefault(sig, []).append(v)
        added = False
        for sig in sorted(groups, key=repr):
            vs = groups[sig]
            pos = [v for v in vs if dpll.value[v]]
            neg = [v for v in vs if not dpll.value[v]]
            if not pos or not neg:
                continue
            p, q = pos[0], neg[0]
            lemma = [-p, q]
            a1, a2 = self.p.key_of[p][1], self.p.key_of[q][1]
            for s, t in zip(a1.args, a2.args):
                if s == t:
                    continue
                lit = self.p.equality_literal(dpll, s, t)
                if lit is True:
                    continue
                lemma.append(-lit)
            self._add(dpll, lemma)
            added = True
            break
        return added


# --------------------------------------------------------------------------- abstraction


class _Abstraction:
    def __init__(self, cs: ClauseSet):
        self.cs = cs
        self.dpll = Dpll()
        self.var_of: dict = {}
        self.key_of: dict = {0: None}
        self.lia_vars: list[int] = []
        self.feq_vars: list[int] = []
        self.free_vars: list[int] = []
        self.clause_ids: dict[int, str] = {}
        sig = cs.signature
        syms = set(sig.skolem_consts())
        fconsts = set(sig.free_consts())
        for c in cs.clauses:
            for a in list(c.lam) + list(c.atoms()):
                for t in _terms(a):
                    if isinstance(t, Lin):
                        syms.update(t.symbols())
                    elif isinstance(t, FreeConst):
                        fconsts.add(t.name)
        self.base_symbols = tuple(sorted(syms))
        self.free_consts = tuple(sorted(fconsts))

    def var(self, key) -> int:
        v = self.var_of.get(key)
        if v is not None:
            return v
        v = self.dpll.new_var()
        self.var_of[key] = v
        self.key_of[v] = key
        kind = key[0]
        if kind in ("le", "eq"):
            self.lia_vars.append(v)
        elif kind == "feq":
            self.feq_vars.append(v)
        else:
            self.free_vars.append(v)
        if kind == "eq":
            self._split(v, key)
        return v

    def _split(self, v: int, key):
        """e = 0, or e <= -1, or -e <= -1; and e = 0 implies both bounds."""
        e = _lin_of(key)
        lt = self.lit(_norm_le(e + 1))
        gt = self.lit(_norm_le(-e + 1))
        le = self.lit(_norm_le(e))
        ge = self.lit(_norm_le(-e))
        for clause in ([v, lt, gt], [-v, le], [-v, ge]):
            if any(l is True for l in clause):
                continue
            self.dpll.add_lemma([l for l in clause if l is not False])

    def lit(self, x):
        """Propositional literal for a normalized (key, polarity), or a bool."""
        if isinstance(x, bool):
            return x
        key, pol = x
        v = self.var(key)
        return v if pol else -v

    def atom_lit(self, a):
        if isinstance(a, FreeAtom):
            return self.lit((("free", a), True))
        if isinstance(a, Equation):
            return self.lit(_feq(a.lhs, a.rhs))
        if isinstance(a, Constraint):
            return self.lit(_constraint_lit(a))
        raise BsrError(f"unsupported atom {a}")

    def add_clause(self, c: Clause):
        lits = []
        for a in c.lam:
            lits.append(_negl(self.atom_lit(a)))
        for a in c.gamma:
            lits.append(_negl(self.atom_lit(a)))
        for a in c.delta:
            lits.append(self.atom_lit(a))
        if any(l is True for l in lits):
            return
        idx = self.dpll.add_clause([l for l in lits if l is not False])
        self.clause_ids[idx] = c.id

    def eval_arg(self, t, sample, uf):
        if isinstance(t, Lin):
            return ("Z", t.evaluate(sample))
        return ("S", uf.find(t.name))

    def equality_literal(self, dpll: Dpll, s, t):
        if isinstance(s, Lin):
            x = _norm_eq(s - t)
        else:
            x = _feq(s, t)
        return self.lit(x)


def _feq(a: FreeConst, b: FreeConst):
    if a == b:
        return True
    x, y = sorted((a.name, b.name))
    return (("feq", x, y), True)


def _negl(lit):
    if isinstance(lit, bool):
        return not lit
    return -lit


def _terms(a):
    if isinstance(a, (FreeAtom, TheoryAtom)):
        return a.args
    return (a.lhs, a.rhs)


# --------------------------------------------------------------------------- entry point


def solve_ground(cs: ClauseSet, verify: bool = True) -> Verdict:
    """Decide an essentially ground clause set; SAT models are checked before return."""
    grounded = []
    for c in cs.clauses:
        if any(isinstance(a, TheoryAtom) for a in c.atoms()):
            raise BsrError(f"clause {c.id} contains theory atoms; export it instead")
        if not c.is_essentially_ground():
            raise BsrError(f"clause {c.id} is not essentially ground")
        grounded.append(ground_clause(c))
    ab = _Abstraction(cs)
    for c in grounded:
        ab.add_clause(c)
    theory = GroundTheory(ab)
    ok, info = ab.dpll.solve(theory)
    stats = {
        "atoms": ab.dpll.nvars,
        "decisions": ab.dpll.decisions,
        "conflicts": ab.dpll.conflicts,
        "lemmas": theory.lemma_count,
    }
    if not ok:
        core = sorted({ab.clause_ids[i] for i in info if i in ab.clause_ids})
        return Verdict("unsat", core=core, stats=stats)
    model = _build_model(ab, theory, info)
    if verify:
        rep = verify_model(cs, model)
        if not rep.ok:
            raise AssertionError(f"ground model fails clause {rep.violations[0][0]}")
    return Verdict("sat", model=model, stats=stats)


def _build_model(ab: _Abstraction, theory: GroundTheory, values) -> HierarchicModel:
    sample = theory.sample
    if sample is None:
        sample = {s: 0 for s in ab.base_symbols}
    base_values = {s: sample.get(s, 0) for s in ab.base_symbols}
    uf = _UF()
    for v in ab.feq_vars:
        if values[v]:
            _, a, b = ab.key_of[v]
            uf.union(a, b)
    free_values = {c: uf.find(c) for c in ab.free_consts}
    domain = sorted(set(free_values.values())) or ["e"]
    ext: dict = {}
    for v in ab.free_vars:
        if values[v]:
            atom = ab.key_of[v][1]
            tup = tuple(t.evaluate(base_values) if isinstance(t, Lin) else free_values[t.name] for t in atom.args)
            ext.setdefault(atom.pred, set()).add(tup)
    for pred in ab.cs.signature.preds:
        ext.setdefault(pred, set())
    return HierarchicModel(base_values=base_values, free_domain=domain, free_values=free_values, extensions=ext)
