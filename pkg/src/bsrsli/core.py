"""Sorted clause-set data model shared by every pipeline stage.

A clause ``Λ ∥ Γ → Δ`` reads as ``(⋀Λ ∧ ⋀Γ) → ⋁Δ``.  Λ holds linear integer
constraints, Γ and Δ hold free atoms and free-sort equations.  All values are
immutable; helper functions return fresh objects.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from math import gcd
from typing import Iterable, Mapping, Sequence, Union

MINF = "@minf"
PINF = "@pinf"
SENTINELS = (MINF, PINF)


class BsrError(Exception):
    """Input error: malformed, ill-sorted or out-of-fragment problem."""


class LimitError(Exception):
    """An internal resource cap was hit (never a wrong verdict)."""


class Sort(str, Enum):
    BASE = "Z"
    FREE = "S"


class ConstKind(str, Enum):
    NUMERAL = "numeral"
    SKOLEM_BASE = "skolem"
    FREE_CONST = "free"


class Rel(str, Enum):
    LT = "<"
    LE = "<="
    EQ = "="
    NE = "!="
    GE = ">="
    GT = ">"

    def flip(self) -> "Rel":
        """Relation obtained by swapping both sides."""
        return _FLIP[self]

    def negate(self) -> "Rel":
        return _NEG[self]

    def holds(self, a: int, b: int) -> bool:
        if self is Rel.LT:
            return a < b
        if self is Rel.LE:
            return a <= b
        if self is Rel.EQ:
            return a == b
        if self is Rel.NE:
            return a != b
        if self is Rel.GE:
            return a >= b
        return a > b


_FLIP = {Rel.LT: Rel.GT, Rel.LE: Rel.GE, Rel.EQ: Rel.EQ, Rel.NE: Rel.NE, Rel.GE: Rel.LE, Rel.GT: Rel.LT}
_NEG = {Rel.LT: Rel.GE, Rel.LE: Rel.GT, Rel.EQ: Rel.NE, Rel.NE: Rel.EQ, Rel.GE: Rel.LT, Rel.GT: Rel.LE}
_REL_ORDER = {r: i for i, r in enumerate(Rel)}


# --------------------------------------------------------------------------- terms


@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort

    def __str__(self) -> str:
        return "?" + self.name


@dataclass(frozen=True)
class FreeConst:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, init=False)
class Lin:
    """Ground linear integer term ``offset + Σ coeff·c`` over Skolem constants."""

    offset: int
    coeffs: tuple

    def __init__(self, offset: int = 0, coeffs: Mapping[str, int] | Iterable = ()):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        acc: dict[str, int] = {}
        for name, k in items:
            acc[name] = acc.get(name, 0) + int(k)
        object.__setattr__(self, "offset", int(offset))
        object.__setattr__(self, "coeffs", tuple(sorted((n, k) for n, k in acc.items() if k != 0)))

    @staticmethod
    def num(value: int) -> "Lin":
        return Lin(value)

    @staticmethod
    def const(name: str) -> "Lin":
        return Lin(0, {name: 1})

    def __add__(self, other: "Lin | int") -> "Lin":
        if isinstance(other, int):
            return Lin(self.offset + other, self.coeffs)
        return Lin(self.offset + other.offset, self.coeffs + other.coeffs)

    def __neg__(self) -> "Lin":
        return Lin(-self.offset, [(n, -k) for n, k in self.coeffs])

    def __sub__(self, other: "Lin | int") -> "Lin":
        if isinstance(other, int):
            return Lin(self.offset - other, self.coeffs)
        return self + (-other)

    @property
    def is_numeral(self) -> bool:
        return not self.coeffs

    @property
    def is_constant(self) -> bool:
        """A plain numeral or a bare Skolem constant (coefficient 1, offset 0)."""
        return not self.coeffs or (self.offset == 0 and len(self.coeffs) == 1 and self.coeffs[0][1] == 1)

    @property
    def const_name(self) -> str | None:
        if self.offset == 0 and len(self.coeffs) == 1 and self.coeffs[0][1] == 1:
            return self.coeffs[0][0]
        return None

    def symbols(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.coeffs)

    def evaluate(self, values: Mapping[str, int]) -> int:
        total = self.offset
        for name, k in self.coeffs:
            if name not in values:
                raise KeyError(name)
            total += k * values[name]
        return total

    def __str__(self) -> str:
        if not self.coeffs:
            return str(self.offset)
        parts: list[str] = []
        for name, k in self.coeffs:
            sign = "+" if k > 0 else "-"
            for _ in range(abs(k)):
                parts.append(sign)
                parts.append(name)
        if self.offset:
            parts.append("+" if self.offset > 0 else "-")
            parts.append(str(abs(self.offset)))
        if parts[0] == "+":
            parts = parts[1:]
        else:
            parts = ["0"] + parts
        return " ".join(parts)


LiaTerm = Union[Var, Lin]
Term = Union[Var, FreeConst, Lin]


def is_sentinel(t) -> bool:
    return isinstance(t, Lin) and t.const_name in SENTINELS


# --------------------------------------------------------------------------- atoms


class Shape(str, Enum):
    GROUND_GROUND = "ground-ground"
    VAR_GROUND = "var-ground"
    VAR_VAR = "var-var"


@dataclass(frozen=True)
class Constraint:
    """LIA atom; build through :func:`constraint` to get the canonical orientation."""

    lhs: LiaTerm
    rel: Rel
    rhs: LiaTerm

    @property
    def shape(self) -> Shape:
        lv, rv = isinstance(self.lhs, Var), isinstance(self.rhs, Var)
        if lv and rv:
            return Shape.VAR_VAR
        if lv or rv:
            return Shape.VAR_GROUND
        return Shape.GROUND_GROUND

    def variables(self) -> tuple[Var, ...]:
        return tuple(t for t in (self.lhs, self.rhs) if isinstance(t, Var))

    def __str__(self) -> str:
        return f"{_term_str(self.lhs)} {self.rel.value} {_term_str(self.rhs)}"


def constraint(lhs: LiaTerm, rel: Rel | str, rhs: LiaTerm) -> Constraint:
    """Canonical constraint: variable on the left, ``x ≥ y`` stored as ``y ≤ x``."""
    rel = Rel(rel)
    if isinstance(lhs, int):
        lhs = Lin(lhs)
    if isinstance(rhs, int):
        rhs = Lin(rhs)
    lv, rv = isinstance(lhs, Var), isinstance(rhs, Var)
    if lv and rv:
        if rel not in (Rel.LE, Rel.EQ, Rel.GE):
            raise BsrError(f"relation {rel.value} between two variables is outside the fragment")
        if rel is Rel.GE:
            lhs, rhs, rel = rhs, lhs, Rel.LE
        elif rel is Rel.EQ and rhs.name < lhs.name:
            lhs, rhs = rhs, lhs
    elif rv:
        lhs, rhs, rel = rhs, lhs, rel.flip()
    return Constraint(lhs, rel, rhs)


@dataclass(frozen=True)
class FreeAtom:
    pred: str
    args: tuple = ()

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(_term_str(a) for a in self.args)})"


@dataclass(frozen=True)
class Equation:
    lhs: object
    rhs: object

    def __str__(self) -> str:
        return f"{_term_str(self.lhs)} ~ {_term_str(self.rhs)}"


def equation(lhs, rhs) -> Equation:
    if term_key(rhs) < term_key(lhs):
        lhs, rhs = rhs, lhs
    return Equation(lhs, rhs)


@dataclass(frozen=True)
class TApp:
    """Application of a theory function symbol inside a theory atom."""

    fn: str
    args: tuple

    def __str__(self) -> str:
        return f"{self.fn}({', '.join(_term_str(a) for a in self.args)})"


@dataclass(frozen=True)
class TheoryAtom:
    """Atom over an external theory; carried opaquely and never decided here."""

    pred: str
    args: tuple = ()

    def __str__(self) -> str:
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(_term_str(a) for a in self.args)})"


Atom = Union[FreeAtom, Equation, TheoryAtom]


def _term_str(t) -> str:
    return str(t)


def term_key(t) -> tuple:
    if isinstance(t, Lin):
        if t.is_numeral:
            return (0, t.offset, "")
        name = t.const_name
        if name is not None:
            return (1, 0, name)
        return (2, 0, repr((t.offset, t.coeffs)))
    if isinstance(t, FreeConst):
        return (1, 0, t.name)
    if isinstance(t, Var):
        return (3, 0, t.name + ":" + t.sort.value)
    if isinstance(t, TApp):
        return (4, 0, t.fn + repr(tuple(term_key(a) for a in t.args)))
    return (5, 0, repr(t))


def atom_key(a) -> tuple:
    if isinstance(a, Constraint):
        return (term_key(a.lhs), _REL_ORDER[a.rel], term_key(a.rhs))
    if isinstance(a, FreeAtom):
        return (0, a.pred, tuple(term_key(x) for x in a.args))
    if isinstance(a, Equation):
        return (1, "~", (term_key(a.lhs), term_key(a.rhs)))
    if isinstance(a, TheoryAtom):
        return (2, a.pred, tuple(term_key(x) for x in a.args))
    return (3, repr(a), ())


def atom_terms(a) -> Iterable:
    """Top-level argument terms of an atom (recursing into theory applications)."""
    if isinstance(a, FreeAtom):
        yield from a.args
    elif isinstance(a, Equation):
        yield a.lhs
        yield a.rhs
    elif isinstance(a, TheoryAtom):
        stack = list(a.args)
        while stack:
            t = stack.pop(0)
            if isinstance(t, TApp):
                stack[0:0] = list(t.args)
            else:
                yield t
    elif isinstance(a, Constraint):
        yield a.lhs
        yield a.rhs


# --------------------------------------------------------------------------- clauses


@dataclass(frozen=True)
class Origin:
    kind: str = "parsed"  # parsed | normalized | instance | axiom | psi | phi | encoding
    parent: str | None = None
    detail: str = ""


@dataclass(frozen=True)
class Clause:
    lam: tuple = ()
    gamma: tuple = ()
    delta: tuple = ()
    id: str = ""
    origin: Origin = field(default_factory=Origin)

    def __post_init__(self):
        object.__setattr__(self, "lam", tuple(sorted(self.lam, key=atom_key)))
        object.__setattr__(self, "gamma", tuple(sorted(self.gamma, key=atom_key)))
        object.__setattr__(self, "delta", tuple(sorted(self.delta, key=atom_key)))

    def variables(self) -> list[Var]:
        seen: dict[Var, None] = {}
        for a in itertools.chain(self.lam, self.gamma, self.delta):
            for t in atom_terms(a):
                if isinstance(t, Var):
                    seen.setdefault(t, None)
        return list(seen)

    def free_part_vars(self) -> set[Var]:
        out = set()
        for a in itertools.chain(self.gamma, self.delta):
            for t in atom_terms(a):
                if isinstance(t, Var):
                    out.add(t)
        return out

    def atoms(self) -> Iterable:
        return itertools.chain(self.gamma, self.delta)

    @property
    def is_ground(self) -> bool:
        return not self.variables()

    def defining_term(self, x: Var) -> Lin | None:
        """First ground term t with ``x = t`` in Λ, if any."""
        for c in self.lam:
            if c.rel is Rel.EQ and c.lhs == x and isinstance(c.rhs, Lin):
                return c.rhs
        return None

    def is_essentially_ground(self) -> bool:
        for v in self.variables():
            if v.sort is Sort.FREE or self.defining_term(v) is None:
                return False
        return True

    def with_(self, **kw) -> "Clause":
        return replace(self, **kw)

    def __str__(self) -> str:
        lam = ", ".join(str(c) for c in self.lam)
        gam = ", ".join(str(a) for a in self.gamma)
        dl = ", ".join(str(a) for a in self.delta) if self.delta else "false"
        left = f"[{lam}] || {gam}".rstrip()
        return f"{left} -> {dl}"


# --------------------------------------------------------------------------- signature


@dataclass(frozen=True)
class Signature:
    preds: Mapping[str, tuple] = field(default_factory=dict)
    consts: Mapping[str, tuple] = field(default_factory=dict)  # name -> (Sort, ConstKind)
    marked: frozenset = frozenset()
    theory_preds: Mapping[str, tuple] = field(default_factory=dict)
    theory_funs: Mapping[str, tuple] = field(default_factory=dict)  # name -> (arg sorts, result sort)
    synthetic: frozenset = frozenset()

    def names(self) -> set[str]:
        return set(self.preds) | set(self.consts) | set(self.theory_preds) | set(self.theory_funs) | set(SENTINELS)

    def free_consts(self) -> list[str]:
        return sorted(n for n, (s, k) in self.consts.items() if k is ConstKind.FREE_CONST)

    def skolem_consts(self) -> list[str]:
        return sorted(n for n, (s, k) in self.consts.items() if k is ConstKind.SKOLEM_BASE)

    def with_pred(self, name: str, sorts: Sequence[Sort], synthetic: bool = False, marked: bool = False) -> "Signature":
        if name in self.names():
            raise BsrError(f"symbol {name} declared twice")
        preds = dict(self.preds)
        preds[name] = tuple(sorts)
        return replace(
            self,
            preds=preds,
            synthetic=self.synthetic | {name} if synthetic else self.synthetic,
            marked=self.marked | {name} if marked else self.marked,
        )

    def with_const(self, name: str, sort: Sort) -> "Signature":
        if name in self.names():
            raise BsrError(f"symbol {name} declared twice")
        consts = dict(self.consts)
        consts[name] = (sort, ConstKind.SKOLEM_BASE if sort is Sort.BASE else ConstKind.FREE_CONST)
        return replace(self, consts=consts)

    def with_marked(self, name: str) -> "Signature":
        if name not in self.preds:
            raise BsrError(f"cannot mark undeclared predicate {name}")
        if len(self.preds[name]) < 1:
            raise BsrError(f"marked predicate {name} needs arity >= 1")
        return replace(self, marked=self.marked | {name})

    def pred_sorts(self, name: str) -> tuple:
        if name in self.preds:
            return self.preds[name]
        if name in self.theory_preds:
            return self.theory_preds[name]
        raise BsrError(f"undeclared predicate {name}")


class NameSupply:
    """Fresh-name generator with one counter per prefix."""

    def __init__(self, taken: Iterable[str] = ()):
        self.taken = set(taken) | set(SENTINELS)
        self.counters: dict[str, int] = {}

    def fresh(self, prefix: str) -> str:
        if prefix not in self.counters:
            pat = re.compile(re.escape(prefix) + r"\d*$")
            self.counters[prefix] = sum(1 for n in self.taken if pat.match(n))
        k = self.counters[prefix]
        while prefix + str(k) in self.taken:
            k += 1
        self.counters[prefix] = k + 1
        name = prefix + str(k)
        self.taken.add(name)
        return name

    def fresh_like(self, name: str) -> str:
        """``name`` itself when unused, otherwise a numbered variant."""
        if name not in self.taken:
            self.taken.add(name)
            return name
        return self.fresh(name + "_")


def fresh_name(prefix: str, signature: Signature) -> str:
    return NameSupply(signature.names()).fresh(prefix)


# --------------------------------------------------------------------------- clause sets


@dataclass(frozen=True)
class ClauseSet:
    signature: Signature = field(default_factory=Signature)
    clauses: tuple = ()
    normal_form_certified: bool = False

    def __iter__(self):
        return iter(self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)

    def by_id(self, cid: str) -> Clause:
        for c in self.clauses:
            if c.id == cid:
                return c
        raise BsrError(f"no clause with id {cid}")

    def with_clauses(self, clauses: Iterable[Clause], certified: bool = False) -> "ClauseSet":
        return ClauseSet(self.signature, tuple(clauses), certified)

    def base_constants(self) -> set[str]:
        return base_constants(self.clauses)

    def sentinels_present(self) -> set[str]:
        out = set()
        for c in self.clauses:
            for a in itertools.chain(c.lam, c.gamma, c.delta):
                for t in atom_terms(a):
                    if isinstance(t, Lin):
                        out.update(n for n in t.symbols() if n in SENTINELS)
        return out

    @property
    def psi_minus_included(self) -> bool:
        return psi_missing(self, MINF) == []

    @property
    def psi_plus_included(self) -> bool:
        return psi_missing(self, PINF) == []

    @property
    def has_theory_atoms(self) -> bool:
        return any(isinstance(a, TheoryAtom) for c in self.clauses for a in c.atoms())


def base_constants(clauses: Iterable[Clause]) -> set[str]:
    """Names of base constants: numerals (as decimal strings) and Skolem symbols.

    Numerals count when they appear as a whole side of a constraint or atom
    argument; Skolem symbols count wherever they appear.
    """
    out: set[str] = set()
    for c in clauses:
        for a in itertools.chain(c.lam, c.gamma, c.delta):
            for t in atom_terms(a):
                if isinstance(t, Lin):
                    if t.is_numeral:
                        out.add(str(t.offset))
                    out.update(t.symbols())
    return out


def point_term(name: str) -> Lin:
    """Lin term for a constant name (numeral text or Skolem symbol)."""
    if re.fullmatch(r"-?\d+", name):
        return Lin(int(name))
    return Lin.const(name)


def point_name(t: Lin) -> str:
    if t.is_numeral:
        return str(t.offset)
    name = t.const_name
    if name is None:
        return str(t)
    return name


def point_sort_key(name: str) -> tuple:
    """Order of instantiation points: c₋∞, numerals, Skolem constants, c₊∞."""
    if name == MINF:
        return (0, 0, "")
    if name == PINF:
        return (3, 0, "")
    if re.fullmatch(r"-?\d+", name):
        return (1, int(name), "")
    return (2, 0, name)


def psi_clause(sentinel: str, other: str) -> Clause:
    """``c₋∞ ≥ c ∥ → □`` or ``c₊∞ ≤ c ∥ → □``."""
    rel = Rel.GE if sentinel == MINF else Rel.LE
    lam = (constraint(Lin.const(sentinel), rel, point_term(other)),)
    tag = "m" if sentinel == MINF else "p"
    return Clause(lam, (), (), f"psi{tag}[{other}]", Origin("psi", None, sentinel))


def psi_missing(cs: ClauseSet, sentinel: str) -> list[Clause]:
    """Ψ clauses for ``sentinel`` not yet present (empty when the sentinel is absent)."""
    present = cs.sentinels_present()
    if sentinel not in present:
        return []
    have = {(c.origin.detail, c.lam) for c in cs.clauses if c.origin.kind == "psi"}
    out = []
    for other in sorted(cs.base_constants() - set(SENTINELS), key=point_sort_key):
        pc = psi_clause(sentinel, other)
        if (sentinel, pc.lam) not in have:
            out.append(pc)
    if MINF in present and PINF in present:
        pc = inter_sentinel_clause()
        if ("both", pc.lam) not in have:
            out.append(pc)
    return out


def inter_sentinel_clause() -> Clause:
    return Clause(
        (constraint(Lin.const(MINF), Rel.GE, Lin.const(PINF)),), (), (), "psi[@minf,@pinf]", Origin("psi", None, "both")
    )


def is_psi(c: Clause) -> bool:
    return c.origin.kind == "psi"


# --------------------------------------------------------------------------- substitution


def _subst_lia(t, binding: Mapping[Var, object]):
    if isinstance(t, Var) and t in binding:
        return binding[t]
    return t


def apply_substitution(clause: Clause, binding: Mapping[Var, object], new_id: str | None = None) -> Clause:
    """Instance of ``clause`` under ``binding``.

    Base bindings ``x ↦ t`` substitute inside Λ and append ``x = t``; the free
    part keeps ``x`` so it stays linked through the new equation.  Free
    bindings substitute textually in Γ and Δ.
    """
    if not binding:
        return clause
    base: dict[Var, object] = {}
    free: dict[Var, object] = {}
    for v, t in binding.items():
        if isinstance(t, int):
            t = Lin(t)
        if v.sort is Sort.BASE:
            if not isinstance(t, (Lin, Var)) or (isinstance(t, Var) and t.sort is not Sort.BASE):
                raise BsrError(f"sort mismatch binding {v} to {t}")
            base[v] = t
        else:
            if not isinstance(t, (FreeConst, Var)) or (isinstance(t, Var) and t.sort is not Sort.FREE):
                raise BsrError(f"sort mismatch binding {v} to {t}")
            free[v] = t
    present = set(clause.variables())
    lam = [constraint(_subst_lia(c.lhs, base), c.rel, _subst_lia(c.rhs, base)) for c in clause.lam]
    for v in sorted(base, key=lambda v: v.name):
        if v in present and base[v] != v:
            lam.append(constraint(v, Rel.EQ, base[v]))
    gamma = [rename_atom(a, free) for a in clause.gamma]
    delta = [rename_atom(a, free) for a in clause.delta]
    return Clause(tuple(lam), tuple(gamma), tuple(delta), new_id or clause.id, clause.origin)


def _rename_term(t, mapping: Mapping[Var, object]):
    if isinstance(t, Var):
        return mapping.get(t, t)
    if isinstance(t, TApp):
        return TApp(t.fn, tuple(_rename_term(a, mapping) for a in t.args))
    return t


def rename_atom(a, mapping: Mapping[Var, object]):
    if not mapping:
        return a
    if isinstance(a, FreeAtom):
        return FreeAtom(a.pred, tuple(_rename_term(t, mapping) for t in a.args))
    if isinstance(a, Equation):
        return equation(_rename_term(a.lhs, mapping), _rename_term(a.rhs, mapping))
    if isinstance(a, TheoryAtom):
        return TheoryAtom(a.pred, tuple(_rename_term(t, mapping) for t in a.args))
    if isinstance(a, Constraint):
        return constraint(_rename_term(a.lhs, mapping), a.rel, _rename_term(a.rhs, mapping))
    raise TypeError(a)


def rename_clause(clause: Clause, mapping: Mapping[Var, object], **kw) -> Clause:
    """Textual substitution everywhere (Λ included), no defining equations."""
    return Clause(
        tuple(rename_atom(c, mapping) for c in clause.lam),
        tuple(rename_atom(a, mapping) for a in clause.gamma),
        tuple(rename_atom(a, mapping) for a in clause.delta),
        kw.get("id", clause.id),
        kw.get("origin", clause.origin),
    )


def ground_clause(clause: Clause) -> Clause:
    """Replace each base variable by its defining term (essentially ground input)."""
    mapping = {}
    for v in clause.variables():
        t = clause.defining_term(v)
        if t is None:
            raise BsrError(f"clause {clause.id} is not essentially ground ({v} undefined)")
        mapping[v] = t
    return rename_clause(clause, mapping)


# --------------------------------------------------------------------------- alpha equivalence


def _masked_key(a) -> tuple:
    def mask(t):
        if isinstance(t, Var):
            return (3, 0, "_" + t.sort.value)
        if isinstance(t, TApp):
            return (4, 0, t.fn + repr(tuple(mask(x) for x in t.args)))
        return term_key(t)

    if isinstance(a, Constraint):
        return (mask(a.lhs), _REL_ORDER[a.rel], mask(a.rhs))
    if isinstance(a, FreeAtom):
        return (0, a.pred, tuple(mask(x) for x in a.args))
    if isinstance(a, Equation):
        return (1, "~", tuple(sorted((mask(a.lhs), mask(a.rhs)))))
    return (2, a.pred, tuple(mask(x) for x in a.args))


def canonical_key(clause: Clause) -> tuple:
    """Renaming-invariant key (may separate some α-equivalent clauses, never merges others)."""
    parts = [sorted(clause.lam, key=_masked_key), sorted(clause.gamma, key=_masked_key), sorted(clause.delta, key=_masked_key)]
    order: dict[Var, Var] = {}
    for group in parts:
        for a in group:
            for t in atom_terms(a):
                if isinstance(t, Var) and t not in order:
                    order[t] = Var(f"v{len(order)}", t.sort)
    r = rename_clause(clause, order)
    return (
        tuple(sorted(atom_key(c) for c in r.lam)),
        tuple(sorted(atom_key(a) for a in r.gamma)),
        tuple(sorted(atom_key(a) for a in r.delta)),
    )


def alpha_equivalent(c1: Clause, c2: Clause) -> bool:
    """Exact test: is there a sort-preserving variable bijection mapping c1 onto c2?"""
    if canonical_key(c1) == canonical_key(c2):
        return True
    v1, v2 = c1.variables(), c2.variables()
    if len(v1) != len(v2):
        return False
    if sorted(_masked_key(a) for a in c1.lam) != sorted(_masked_key(a) for a in c2.lam):
        return False
    if sorted(_masked_key(a) for a in c1.atoms()) != sorted(_masked_key(a) for a in c2.atoms()):
        return False
    target = (
        sorted(atom_key(a) for a in c2.lam),
        sorted(atom_key(a) for a in c2.gamma),
        sorted(atom_key(a) for a in c2.delta),
    )
    for perm in itertools.permutations(v2):
        if any(a.sort is not b.sort for a, b in zip(v1, perm)):
            continue
        r = rename_clause(c1, dict(zip(v1, perm)))
        if (
            sorted(atom_key(a) for a in r.lam),
            sorted(atom_key(a) for a in r.gamma),
            sorted(atom_key(a) for a in r.delta),
        ) == target:
            return True
    return False


def sets_alpha_equivalent(a: ClauseSet, b: ClauseSet) -> bool:
    """Clause lists match pairwise up to renaming (order-insensitive)."""
    if len(a.clauses) != len(b.clauses):
        return False
    remaining = list(b.clauses)
    for c in a.clauses:
        for i, d in enumerate(remaining):
            if alpha_equivalent(c, d):
                del remaining[i]
                break
        else:
            return False
    return True


def int_gcd(values: Iterable[int]) -> int:
    g = 0
    for v in values:
        g = gcd(g, abs(v))
    return g
