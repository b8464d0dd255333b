"""Normal-form transformation and certification.

A set is in normal form when every non-ground constraint is ``x ⊴ c`` (c a
numeral or Skolem constant, ⊴ one of ≤ = ≥) or ``x ≤ y``, every constrained
variable also occurs in the free part, antecedents hold no ``u ≈ t``, clauses
are variable disjoint and at least one free constant exists.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

from .core import (
    Clause,
    ClauseSet,
    Constraint,
    Equation,
    FreeAtom,
    Lin,
    NameSupply,
    Origin,
    Rel,
    Shape,
    Sort,
    Var,
    atom_terms,
    constraint,
    rename_clause,
)
from .textio import is_purified, purify


@dataclass(frozen=True)
class Violation:
    clause_id: str
    condition: str  # NF1 | NF4 | NF5 | VAR_DISJOINT | HAS_FREE_CONST
    description: str


@dataclass
class NormalFormReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def conditions(self) -> set[str]:
        return {v.condition for v in self.violations}


# --------------------------------------------------------------------------- shadow sets


def _bound(x: Var, c: Constraint):
    """Classify an atom containing x as (kind, other side); kind in lt, le, eq, ue, ut."""
    if c.lhs == x and c.rhs == x:
        return None
    if c.lhs == x:
        other = c.rhs
        return {Rel.LT: "ut", Rel.LE: "ue", Rel.EQ: "eq", Rel.GE: "le", Rel.GT: "lt"}[c.rel], other
    # x on the right only happens for two-variable atoms, which are <= or =
    return ("le" if c.rel is Rel.LE else "eq"), c.lhs


def shadow(x: Var, atoms) -> list[Constraint]:
    """Constraints equivalent to ``∃x. ⋀atoms`` over the integers.

    Each atom must mention ``x`` and must not be a disequation.
    """
    lower, eqs, upper = [], [], []
    for c in atoms:
        if c.rel is Rel.NE:
            raise ValueError("disequations must be split before elimination")
        if c.lhs == x and c.rhs == x:
            if c.rel in (Rel.LE, Rel.EQ, Rel.GE):
                continue
            return [constraint(Lin(0), Rel.LT, Lin(0))]
        kind, t = _bound(x, c)
        if kind in ("lt", "le"):
            lower.append((kind == "lt", t))
        elif kind == "eq":
            eqs.append(t)
        else:
            upper.append((kind == "ut", t))
    out: list[Constraint] = []
    for strict_l, t in lower:
        for strict_u, u in upper + [(False, e) for e in eqs]:
            if strict_l and strict_u:
                out.append(constraint(t + 1, Rel.LT, u))
            elif strict_l or strict_u:
                out.append(constraint(t, Rel.LT, u))
            else:
                out.append(constraint(t, Rel.LE, u))
    for t in eqs:
        for strict_u, u in upper:
            out.append(constraint(t, Rel.LT if strict_u else Rel.LE, u))
    for t, u in itertools.combinations(eqs, 2):
        out.append(constraint(t, Rel.EQ, u))
    return [c for c in out if not _trivially_true(c)]


def _trivially_true(c: Constraint) -> bool:
    return isinstance(c.lhs, Var) and c.lhs == c.rhs and c.rel in (Rel.LE, Rel.EQ, Rel.GE)


# --------------------------------------------------------------------------- normalize


class _Normalizer:
    def __init__(self, cs: ClauseSet, fold_numerals: bool):
        self.cs = cs
        self.sig = cs.signature
        self.fold = fold_numerals
        self.consts = NameSupply(self.sig.names())
        self.pinned: dict[Lin, str] = {}
        self.axioms: list[Clause] = []
        self.var_supply = NameSupply(v.name for c in cs.clauses for v in c.variables())

    def pin(self, t: Lin) -> Lin:
        """Fresh Skolem constant c with axiom ``t ≠ c ∥ → □`` (memoized per term)."""
        if t not in self.pinned:
            name = self.consts.fresh("c")
            self.sig = self.sig.with_const(name, Sort.BASE)
            self.pinned[t] = name
            self.axioms.append(
                Clause((constraint(t, Rel.NE, Lin.const(name)),), (), (), f"ax_{name}", Origin("axiom", None, name))
            )
        return Lin.const(self.pinned[t])

    # (a)
    def split(self, c: Clause) -> list[Clause]:
        for i, a in enumerate(c.lam):
            if a.rel is Rel.NE and a.shape is Shape.VAR_GROUND:
                rest = c.lam[:i] + c.lam[i + 1 :]
                lo = replace(c, lam=rest + (constraint(a.lhs, Rel.LT, a.rhs),))
                hi = replace(c, lam=rest + (constraint(a.lhs, Rel.GT, a.rhs),))
                return self.split(Clause(lo.lam, c.gamma, c.delta, c.id, c.origin)) + self.split(
                    Clause(hi.lam, c.gamma, c.delta, c.id, c.origin)
                )
        return [c]

    # (b), (c)
    def pin_bounds(self, c: Clause) -> Clause:
        lam = []
        for a in c.lam:
            if a.shape is not Shape.VAR_GROUND:
                lam.append(a)
                continue
            x, s = a.lhs, a.rhs
            if a.rel in (Rel.LE, Rel.EQ, Rel.GE):
                lam.append(a if s.is_constant else constraint(x, a.rel, self.pin(s)))
            elif a.rel in (Rel.GT, Rel.LT):
                t = s + 1 if a.rel is Rel.GT else s - 1
                rel = Rel.GE if a.rel is Rel.GT else Rel.LE
                if self.fold and t.is_constant:
                    lam.append(constraint(x, rel, t))
                else:
                    lam.append(constraint(x, rel, self.pin(t)))
            else:
                lam.append(a)
        return Clause(tuple(lam), c.gamma, c.delta, c.id, c.origin)

    # (d)
    def merge_equal_vars(self, c: Clause) -> Clause:
        while True:
            for a in c.lam:
                if a.shape is Shape.VAR_VAR and a.rel is Rel.EQ:
                    x, y = a.lhs, a.rhs
                    lam = tuple(b for b in c.lam if b is not a)
                    c = rename_clause(Clause(lam, c.gamma, c.delta, c.id, c.origin), {y: x})
                    break
            else:
                break
        lam = tuple(a for a in c.lam if not _trivially_true(a))
        return Clause(lam, c.gamma, c.delta, c.id, c.origin)

    # (e)
    def eliminate_lambda_only(self, c: Clause) -> Clause:
        while True:
            free = c.free_part_vars()
            lam_vars = [v for a in c.lam for v in a.variables()]
            target = next((v for v in lam_vars if v not in free), None)
            if target is None:
                return c
            inside = [a for a in c.lam if target in a.variables()]
            rest = tuple(a for a in c.lam if target not in a.variables())
            c = Clause(rest + tuple(shadow(target, inside)), c.gamma, c.delta, c.id, c.origin)

    # (f)
    def drop_antecedent_equations(self, c: Clause) -> Clause:
        while True:
            for a in c.gamma:
                if isinstance(a, Equation) and (isinstance(a.lhs, Var) or isinstance(a.rhs, Var)):
                    u, t = (a.lhs, a.rhs) if isinstance(a.lhs, Var) else (a.rhs, a.lhs)
                    gamma = tuple(b for b in c.gamma if b is not a)
                    c = Clause(c.lam, gamma, c.delta, c.id, c.origin)
                    if u != t:
                        c = rename_clause(c, {u: t})
                    break
            else:
                return c

    # implicit False_v atoms for variables seen only in equations
    def false_device(self, c: Clause) -> tuple[Clause, list[Clause]]:
        in_atoms: set[Var] = set()
        in_eqs: list[Var] = []
        for a in c.atoms():
            for t in atom_terms(a):
                if isinstance(t, Var):
                    if isinstance(a, Equation):
                        if t not in in_eqs:
                            in_eqs.append(t)
                    else:
                        in_atoms.add(t)
        extra_axioms = []
        delta = list(c.delta)
        for v in in_eqs:
            if v in in_atoms:
                continue
            name = self.consts.fresh_like(f"False_{v.name}")
            self.sig = self.sig.with_pred(name, (Sort.FREE,), synthetic=True)
            delta.append(FreeAtom(name, (v,)))
            w = Var(self.var_supply.fresh("w"), Sort.FREE)
            extra_axioms.append(Clause((), (FreeAtom(name, (w,)),), (), f"ax_{name}", Origin("axiom", c.id, "false-device")))
        if not extra_axioms:
            return c, []
        return Clause(c.lam, c.gamma, tuple(delta), c.id, c.origin), extra_axioms

    def run(self) -> ClauseSet:
        out: list[Clause] = []
        device_axioms: list[Clause] = []
        for c in self.cs.clauses:
            pieces = self.split(c)
            for k, p in enumerate(pieces):
                p = self.pin_bounds(p)
                p = self.merge_equal_vars(p)
                p = self.eliminate_lambda_only(p)
                p = self.drop_antecedent_equations(p)
                p, extra = self.false_device(p)
                device_axioms.extend(extra)
                new_id = c.id if len(pieces) == 1 else f"{c.id}.{k + 1}"
                if p.lam != c.lam or p.gamma != c.gamma or p.delta != c.delta or new_id != c.id:
                    p = Clause(p.lam, p.gamma, p.delta, new_id, Origin("normalized", c.id))
                out.append(p)
        out.extend(self.axioms)
        out.extend(device_axioms)
        out = rename_apart(out, self.var_supply)
        if not self.sig.free_consts():
            self.sig = self.sig.with_const(self.consts.fresh("e"), Sort.FREE)
        return ClauseSet(self.sig, tuple(out), True)


def rename_apart(clauses, supply: NameSupply | None = None) -> list[Clause]:
    if supply is None:
        supply = NameSupply(v.name for c in clauses for v in c.variables())
    used: set[str] = set()
    out = []
    for c in clauses:
        mapping = {}
        for v in c.variables():
            if v.name in used:
                mapping[v] = Var(supply.fresh(v.name + "_"), v.sort)
                used.add(mapping[v].name)
            else:
                used.add(v.name)
        out.append(rename_clause(c, mapping) if mapping else c)
    return out


def normalize(cs: ClauseSet, fold_numerals: bool = True) -> ClauseSet:
    """Equisatisfiable normal-form set.

    With ``fold_numerals`` strict bounds against numerals become non-strict
    numeral bounds directly (``x > 5`` to ``x ≥ 6``); otherwise every strict
    bound gets a fresh pinned constant.
    """
    if not is_purified(cs):
        cs = purify(cs)
    return _Normalizer(cs, fold_numerals).run()


# --------------------------------------------------------------------------- check


def check_normal_form(cs: ClauseSet) -> NormalFormReport:
    rep = NormalFormReport()
    owner: dict[str, str] = {}
    for c in cs.clauses:
        for a in c.lam:
            sh = a.shape
            if sh is Shape.VAR_GROUND:
                if a.rel not in (Rel.LE, Rel.EQ, Rel.GE):
                    rep.violations.append(Violation(c.id, "NF1", f"constraint {a} is not of the form x ⊴ c"))
                elif not a.rhs.is_constant:
                    rep.violations.append(Violation(c.id, "NF1", f"constraint {a} compares with a compound term"))
            elif sh is Shape.VAR_VAR and a.rel is not Rel.LE:
                rep.violations.append(Violation(c.id, "NF1", f"constraint {a} is not of the form x <= y"))
        for a in c.atoms():
            if isinstance(a, FreeAtom) and any(isinstance(t, Lin) for t in a.args):
                rep.violations.append(Violation(c.id, "NF1", f"atom {a} is not purified"))
        free = c.free_part_vars()
        for a in c.lam:
            for v in a.variables():
                if v not in free:
                    rep.violations.append(Violation(c.id, "NF4", f"variable {v} occurs only in the constraint part"))
                    break
        for a in c.gamma:
            if isinstance(a, Equation) and (isinstance(a.lhs, Var) or isinstance(a.rhs, Var)):
                rep.violations.append(Violation(c.id, "NF5", f"antecedent equation {a}"))
        for v in c.variables():
            if v.name in owner and owner[v.name] != c.id:
                rep.violations.append(Violation(c.id, "VAR_DISJOINT", f"variable {v} shared with clause {owner[v.name]}"))
            owner.setdefault(v.name, c.id)
    if not cs.signature.free_consts():
        rep.violations.append(Violation("", "HAS_FREE_CONST", "no free-sort constant declared"))
    return rep


def certify(cs: ClauseSet) -> ClauseSet:
    """The same set with the certification flag set, or an error listing violations."""
    from .core import BsrError

    rep = check_normal_form(cs)
    if not rep.ok:
        raise BsrError("not in normal form: " + "; ".join(f"{v.clause_id} {v.condition}: {v.description}" for v in rep.violations))
    return replace(cs, normal_form_certified=True)
