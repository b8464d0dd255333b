"""Concrete syntax: parser, printer, purification and SMT-LIB2 export.

Grammar of ``.bsr`` files::

    problem    := (decl | clause)*
    decl       := "pred" IDENT (":" sort+)? ";"
                | "const" IDENT ":" sort ";"
                | "fun" IDENT ":" sort+ "->" sort ";"
                | "mark" IDENT ";"
                | "theory" "pred" IDENT (":" sort+)? ";"
                | "theory" "fun" IDENT ":" sort+ "->" sort ";"
    clause     := "clause" "[" constraints? "]" "||" atoms? "->" (atoms | "false") ";"
    constraint := term REL term        REL in < <= = != >= >
    atom       := IDENT "(" args ")" | IDENT | arg "~" arg
    term       := INT | IDENT | VAR | term "+" term | term "-" term      VAR := "?" IDENT

``#`` starts a comment.  ``@minf`` and ``@pinf`` are reserved base constants.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, replace

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
    Signature,
    Sort,
    TApp,
    TheoryAtom,
    Var,
    constraint,
    equation,
    ground_clause,
)

HEADER = "# BSR(SLI) problem\n"

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<op><=|>=|!=|->|\|\||[<>=~;:,()\[\]+\-])
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_']*)
  | (?P<int>\d+)
  | (?P<ident>@?[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"pred", "const", "fun", "mark", "clause", "false", "theory"}
_RELS = {"<", "<=", "=", "!=", ">=", ">"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise BsrError(f"line {line}, col {col}: unexpected character {text[pos]!r}")
        kind = m.lastgroup
        tok = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind not in ("ws", "comment"):
                if kind == "ident" and tok in _KEYWORDS:
                    kind = "kw"
                out.append(Token(kind, tok, line, col))
            col += len(tok)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


# raw syntax produced by the parser before symbol resolution


@dataclass(frozen=True)
class _RVar:
    name: str


@dataclass(frozen=True)
class _RName:
    name: str


@dataclass(frozen=True)
class _RInt:
    value: int


@dataclass(frozen=True)
class _RSum:
    parts: tuple  # (sign, raw term)


@dataclass(frozen=True)
class _RApp:
    name: str
    args: tuple


@dataclass
class _RClause:
    lam: list
    gamma: list
    delta: list
    line: int
    col: int


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.preds: dict[str, tuple] = {}
        self.consts: dict[str, Sort] = {}
        self.funs: dict[str, tuple] = {}
        self.tpreds: dict[str, tuple] = {}
        self.tfuns: dict[str, tuple] = {}
        self.marks: list[tuple[str, Token]] = []
        self.clauses: list[_RClause] = []
        self.declared: set[str] = set()

    # token helpers
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, tok: Token, msg: str) -> BsrError:
        return BsrError(f"line {tok.line}, col {tok.col}: {msg}")

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text or t.kind == "eof":
            raise self.error(t, f"expected {text!r}, found {t.text or 'end of input'!r}")
        return t

    def ident(self) -> Token:
        t = self.next()
        if t.kind != "ident":
            raise self.error(t, f"expected identifier, found {t.text or 'end of input'!r}")
        if t.text.startswith("@"):
            raise self.error(t, f"reserved name {t.text}")
        return t

    def sort(self) -> Sort:
        t = self.next()
        if t.text == "Z":
            return Sort.BASE
        if t.text == "S":
            return Sort.FREE
        raise self.error(t, f"expected sort Z or S, found {t.text!r}")

    def sorts_until(self, stop: set[str]) -> list[Sort]:
        out = []
        while self.peek().text not in stop:
            if self.peek().kind == "eof":
                raise self.error(self.peek(), "unexpected end of input")
            out.append(self.sort())
        return out

    def declare(self, tok: Token):
        if tok.text in self.declared:
            raise self.error(tok, f"symbol {tok.text} declared twice")
        self.declared.add(tok.text)

    # grammar
    def problem(self):
        while self.peek().kind != "eof":
            t = self.peek()
            if t.kind != "kw":
                raise self.error(t, f"expected declaration or clause, found {t.text!r}")
            if t.text == "pred":
                self.next()
                self.pred_decl(self.preds)
            elif t.text == "const":
                self.next()
                name = self.ident()
                self.expect(":")
                s = self.sort()
                self.expect(";")
                self.declare(name)
                self.consts[name.text] = s
            elif t.text == "fun":
                self.next()
                self.fun_decl(self.funs)
            elif t.text == "mark":
                self.next()
                name = self.ident()
                self.expect(";")
                self.marks.append((name.text, name))
            elif t.text == "theory":
                self.next()
                k = self.next()
                if k.text == "pred":
                    self.pred_decl(self.tpreds)
                elif k.text == "fun":
                    self.fun_decl(self.tfuns)
                else:
                    raise self.error(k, "expected 'pred' or 'fun' after 'theory'")
            elif t.text == "clause":
                self.clause()
            else:
                raise self.error(t, f"unexpected keyword {t.text!r}")

    def pred_decl(self, table: dict):
        name = self.ident()
        sorts: list[Sort] = []
        if self.peek().text == ":":
            self.next()
            sorts = self.sorts_until({";"})
            if not sorts:
                raise self.error(self.peek(), "expected at least one sort")
        self.expect(";")
        self.declare(name)
        table[name.text] = tuple(sorts)

    def fun_decl(self, table: dict):
        name = self.ident()
        self.expect(":")
        args = self.sorts_until({"->"})
        if not args:
            raise self.error(self.peek(), "function needs at least one argument sort")
        self.expect("->")
        res = self.sort()
        self.expect(";")
        self.declare(name)
        table[name.text] = (tuple(args), res)

    def clause(self):
        start = self.expect("clause")
        self.expect("[")
        lam = []
        if self.peek().text != "]":
            lam.append(self.constraint())
            while self.peek().text == ",":
                self.next()
                lam.append(self.constraint())
        self.expect("]")
        self.expect("||")
        gamma = []
        if self.peek().text != "->":
            gamma = self.atom_list()
        self.expect("->")
        if self.peek().text == "false":
            self.next()
            delta = []
        else:
            delta = self.atom_list()
        self.expect(";")
        self.clauses.append(_RClause(lam, gamma, delta, start.line, start.col))

    def constraint(self):
        tok = self.peek()
        lhs = self.term()
        r = self.next()
        if r.text not in _RELS:
            raise self.error(r, f"expected relation, found {r.text!r}")
        rhs = self.term()
        return ("lia", lhs, Rel(r.text), rhs, tok)

    def atom_list(self) -> list:
        out = [self.atom()]
        while self.peek().text == ",":
            self.next()
            out.append(self.atom())
        return out

    def atom(self):
        tok = self.peek()
        first = self.term()
        if self.peek().text == "~":
            self.next()
            second = self.term()
            return ("eq", first, second, tok)
        if isinstance(first, _RApp):
            return ("app", first.name, first.args, tok)
        if isinstance(first, _RName):
            return ("app", first.name, (), tok)
        raise self.error(tok, "expected an atom")

    def term(self):
        parts = []
        sign = 1
        if self.peek().text == "-":
            self.next()
            sign = -1
        parts.append((sign, self.primary()))
        while self.peek().text in ("+", "-"):
            op = self.next()
            parts.append((1 if op.text == "+" else -1, self.primary()))
        if len(parts) == 1 and parts[0][0] == 1:
            return parts[0][1]
        return _RSum(tuple(parts))

    def primary(self):
        t = self.next()
        if t.kind == "int":
            return _RInt(int(t.text))
        if t.kind == "var":
            return _RVar(t.text[1:])
        if t.kind == "ident":
            if self.peek().text == "(":
                self.next()
                args = []
                if self.peek().text != ")":
                    args.append(self.term())
                    while self.peek().text == ",":
                        self.next()
                        args.append(self.term())
                self.expect(")")
                return _RApp(t.text, tuple(args))
            return _RName(t.text)
        if t.text == "(":
            inner = self.term()
            self.expect(")")
            return inner
        raise self.error(t, f"unexpected token {t.text or 'end of input'!r}")


class _Resolver:
    """Second pass: symbol lookup, sort inference and AST construction."""

    def __init__(self, p: _Parser, strict: bool):
        self.p = p
        self.strict = strict

    def err(self, rc: _RClause, msg: str) -> BsrError:
        return BsrError(f"line {rc.line}, col {rc.col}: {msg}")

    def const_sort(self, name: str):
        if name in SENTINELS:
            return Sort.BASE
        return self.p.consts.get(name)

    # sort inference -------------------------------------------------------
    def infer(self, rc: _RClause) -> dict[str, Sort]:
        sorts: dict[str, Sort] = {}
        eq_pairs: list[tuple[str, str]] = []

        def note(v: str, s: Sort):
            old = sorts.get(v)
            if old is not None and old is not s:
                raise self.err(rc, f"sort error: variable ?{v} used at both Z and S positions")
            sorts[v] = s

        def walk(t, expected: Sort | None):
            if isinstance(t, _RVar):
                if expected is not None:
                    note(t.name, expected)
            elif isinstance(t, _RSum):
                for _, x in t.parts:
                    walk(x, Sort.BASE)
            elif isinstance(t, _RApp):
                sig = self.fun_sig(t.name, rc)
                if len(sig[0]) != len(t.args):
                    raise self.err(rc, f"arity mismatch for {t.name}: expected {len(sig[0])}, got {len(t.args)}")
                for a, s in zip(t.args, sig[0]):
                    walk(a, s)

        for item in rc.lam:
            walk(item[1], Sort.BASE)
            walk(item[3], Sort.BASE)
        for item in itertools.chain(rc.gamma, rc.delta):
            if item[0] == "eq":
                a, b = item[1], item[2]
                sa, sb = self.term_sort(a, rc), self.term_sort(b, rc)
                s = sa or sb
                if sa and sb and sa is not sb:
                    raise self.err(rc, "sort error: equation between Z and S terms")
                if s is Sort.BASE:
                    raise self.err(rc, "'~' is free-sort equality; use '=' in the constraint part for integers")
                walk(a, Sort.FREE)
                walk(b, Sort.FREE)
                if isinstance(a, _RVar) and isinstance(b, _RVar):
                    eq_pairs.append((a.name, b.name))
            else:
                name, args = item[1], item[2]
                psorts = self.pred_sig(name, rc)
                if len(psorts) != len(args):
                    raise self.err(rc, f"arity mismatch for {name}: expected {len(psorts)}, got {len(args)}")
                for a, s in zip(args, psorts):
                    walk(a, s)
        for a, b in eq_pairs:
            s = sorts.get(a) or sorts.get(b) or Sort.FREE
            note(a, s)
            note(b, s)
        return sorts

    def term_sort(self, t, rc) -> Sort | None:
        if isinstance(t, _RName):
            s = self.const_sort(t.name)
            if s is None:
                raise self.err(rc, f"undeclared symbol {t.name}")
            return s
        if isinstance(t, (_RInt, _RSum)):
            return Sort.BASE
        if isinstance(t, _RApp):
            return self.fun_sig(t.name, rc)[1]
        return None

    def fun_sig(self, name: str, rc) -> tuple:
        if name in self.p.funs:
            return self.p.funs[name]
        if name in self.p.tfuns:
            return self.p.tfuns[name]
        if name in self.p.preds or name in self.p.tpreds:
            raise self.err(rc, f"predicate {name} used as a term")
        raise self.err(rc, f"undeclared symbol {name}")

    def pred_sig(self, name: str, rc) -> tuple:
        if name in self.p.preds:
            return self.p.preds[name]
        if name in self.p.tpreds:
            return self.p.tpreds[name]
        if name in self.p.funs or name in self.p.tfuns or name in self.p.consts:
            raise self.err(rc, f"{name} is not a predicate")
        raise self.err(rc, f"undeclared symbol {name}")

    # construction ---------------------------------------------------------
    def lia(self, t, sorts, rc):
        """A constraint side: base variable or ground linear term."""
        if isinstance(t, _RVar):
            return Var(t.name, Sort.BASE)
        ground = self.ground(t, rc)
        if ground is None:
            raise self.err(rc, "constraint sides must be a single variable or a ground term")
        return ground

    def ground(self, t, rc) -> Lin | None:
        if isinstance(t, _RInt):
            return Lin(t.value)
        if isinstance(t, _RName):
            s = self.const_sort(t.name)
            if s is None:
                raise self.err(rc, f"undeclared symbol {t.name}")
            if s is not Sort.BASE:
                raise self.err(rc, f"sort error: free constant {t.name} used in arithmetic")
            return Lin.const(t.name)
        if isinstance(t, _RSum):
            acc = Lin(0)
            for sign, x in t.parts:
                g = self.ground(x, rc)
                if g is None:
                    return None
                acc = acc + g if sign > 0 else acc - g
            return acc
        if isinstance(t, _RApp):
            raise self.err(rc, f"function application {t.name}(...) inside an arithmetic constraint is not supported")
        return None

    def arg(self, t, expected: Sort, sorts, rc, allow_tfun: bool):
        from .strata import App

        if isinstance(t, _RVar):
            return Var(t.name, sorts.get(t.name, expected))
        if isinstance(t, _RApp):
            if t.name in self.p.tfuns:
                if not allow_tfun:
                    raise self.err(rc, f"theory function {t.name} outside a theory atom")
                asorts, res = self.p.tfuns[t.name]
                if res is not expected:
                    raise self.err(rc, f"sort error: {t.name} returns {res.value}, expected {expected.value}")
                return TApp(t.name, tuple(self.arg(a, s, sorts, rc, True) for a, s in zip(t.args, asorts)))
            asorts, res = self.p.funs[t.name]
            if res is not expected:
                raise self.err(rc, f"sort error: {t.name} returns {res.value}, expected {expected.value}")
            return App(t.name, tuple(self.arg(a, s, sorts, rc, allow_tfun) for a, s in zip(t.args, asorts)))
        if expected is Sort.FREE:
            if isinstance(t, _RName):
                s = self.const_sort(t.name)
                if s is None:
                    raise self.err(rc, f"undeclared symbol {t.name}")
                if s is not Sort.FREE:
                    raise self.err(rc, f"sort error: {t.name} is an integer constant at an S position")
                return FreeConst(t.name)
            raise self.err(rc, "sort error: integer term at an S position")
        g = self.ground(t, rc)
        if g is None:
            raise self.err(rc, "arguments at Z positions must be variables or ground terms")
        if self.strict:
            raise self.err(rc, f"ground term {g} at a Z position (strict mode requires purified input)")
        return g

    def clause(self, rc: _RClause, idx: int) -> Clause:
        sorts = self.infer(rc)
        lam = []
        for _, lhs, rel, rhs, _tok in rc.lam:
            try:
                lam.append(constraint(self.lia(lhs, sorts, rc), rel, self.lia(rhs, sorts, rc)))
            except BsrError as e:
                if str(e).startswith("line"):
                    raise
                raise self.err(rc, str(e)) from None
        return Clause(
            tuple(lam),
            tuple(self.atom(a, sorts, rc) for a in rc.gamma),
            tuple(self.atom(a, sorts, rc) for a in rc.delta),
            f"C{idx}",
            Origin("parsed"),
        )

    def atom(self, item, sorts, rc):
        if item[0] == "eq":
            return equation(self.arg(item[1], Sort.FREE, sorts, rc, False), self.arg(item[2], Sort.FREE, sorts, rc, False))
        name, args = item[1], item[2]
        psorts = self.pred_sig(name, rc)
        theory = name in self.p.tpreds
        built = tuple(self.arg(a, s, sorts, rc, theory) for a, s in zip(args, psorts))
        return TheoryAtom(name, built) if theory else FreeAtom(name, built)


def parse(text: str, strict: bool = False):
    """Parse problem text into a ClauseSet (or a FunClauseSet when ``fun`` is declared)."""
    p = _Parser(text)
    p.problem()
    sig = Signature(
        preds=dict(p.preds),
        consts={},
        theory_preds=dict(p.tpreds),
        theory_funs=dict(p.tfuns),
    )
    for name, s in p.consts.items():
        sig = sig.with_const(name, s)
    for name, tok in p.marks:
        if name not in p.preds:
            raise p.error(tok, f"mark of undeclared predicate {name}")
        if not p.preds[name]:
            raise p.error(tok, f"marked predicate {name} needs arity >= 1")
        sig = sig.with_marked(name)
    r = _Resolver(p, strict)
    clauses = tuple(r.clause(rc, i + 1) for i, rc in enumerate(p.clauses))
    if p.funs:
        from .strata import FunClauseSet

        return FunClauseSet(sig, clauses, dict(p.funs))
    return ClauseSet(sig, clauses)


def parse_file(path, strict: bool = False):
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), strict=strict)


# --------------------------------------------------------------------------- printer


def _sorts(ss) -> str:
    return " ".join(s.value for s in ss)


def print_set(cs, hide_synthetic: bool = False) -> str:
    """Deterministic problem text; re-parses to an α-equivalent set."""
    sig = cs.signature
    lines = [HEADER.rstrip("\n")]
    for name in sorted(sig.preds):
        if hide_synthetic and name in sig.synthetic:
            continue
        ss = sig.preds[name]
        decl = f"pred {name} : {_sorts(ss)};" if ss else f"pred {name};"
        if name in sig.synthetic:
            decl += "  # synthetic"
        lines.append(decl)
    for name in sorted(sig.consts):
        s, _ = sig.consts[name]
        lines.append(f"const {name} : {s.value};")
    funs = getattr(cs, "funs", {})
    for name in sorted(funs):
        args, res = funs[name]
        lines.append(f"fun {name} : {_sorts(args)} -> {res.value};")
    for name in sorted(sig.theory_preds):
        ss = sig.theory_preds[name]
        lines.append(f"theory pred {name} : {_sorts(ss)};" if ss else f"theory pred {name};")
    for name in sorted(sig.theory_funs):
        args, res = sig.theory_funs[name]
        lines.append(f"theory fun {name} : {_sorts(args)} -> {res.value};")
    for name in sorted(sig.marked):
        lines.append(f"mark {name};")
    for c in cs.clauses:
        if hide_synthetic:
            c = replace(c, delta=tuple(a for a in c.delta if not (isinstance(a, FreeAtom) and a.pred in sig.synthetic)))
        lines.append(print_clause(c))
    if len(lines) == 1:
        return HEADER
    return "\n".join(lines) + "\n"


def print_clause(c: Clause) -> str:
    lam = ", ".join(str(x) for x in c.lam)
    gam = ", ".join(str(a) for a in c.gamma)
    dl = ", ".join(str(a) for a in c.delta) if c.delta else "false"
    mid = f" {gam}" if gam else ""
    return f"clause [{lam}] ||{mid} -> {dl};"


# --------------------------------------------------------------------------- purification


def _all_var_names(cs) -> set[str]:
    return {v.name for c in cs.clauses for v in c.variables()}


def purify(cs: ClauseSet) -> ClauseSet:
    """Replace ground terms at Z positions of free atoms by fresh pinned variables."""
    supply = NameSupply(_all_var_names(cs))
    out = []
    changed = False
    for c in cs.clauses:
        extra: list[Constraint] = []

        def fix(a):
            if not isinstance(a, FreeAtom):
                return a
            args = []
            for t in a.args:
                if isinstance(t, Lin):
                    v = Var(supply.fresh("x"), Sort.BASE)
                    extra.append(constraint(v, Rel.EQ, t))
                    args.append(v)
                else:
                    args.append(t)
            return FreeAtom(a.pred, tuple(args))

        gamma = tuple(fix(a) for a in c.gamma)
        delta = tuple(fix(a) for a in c.delta)
        if extra:
            changed = True
            c = Clause(c.lam + tuple(extra), gamma, delta, c.id, c.origin)
        out.append(c)
    if not changed:
        return cs
    return replace(cs, clauses=tuple(out), normal_form_certified=False)


def is_purified(cs: ClauseSet) -> bool:
    return not any(isinstance(t, Lin) for c in cs.clauses for a in c.atoms() if isinstance(a, FreeAtom) for t in a.args)


# --------------------------------------------------------------------------- SMT-LIB2 export

_SIMPLE_SYM = re.compile(r"[A-Za-z~!$%^&*_+=<>.?/\-][A-Za-z0-9~!$%^&*_+=<>.?/\-]*$")
_SMT_RESERVED = {
    "and", "or", "not", "=>", "=", "distinct", "ite", "true", "false", "forall", "exists", "let", "assert",
    "Int", "Bool", "par", "_", "!", "as", "match", "NUMERAL", "DECIMAL", "STRING",
}


def smt_symbol(name: str) -> str:
    if name == MINF:
        return "c_minf"
    if name == PINF:
        return "c_pinf"
    if _SIMPLE_SYM.match(name) and name not in _SMT_RESERVED and not name[0].isdigit():
        return name
    return "|" + name.replace("|", "_").replace("\\", "_") + "|"


def _smt_int(k: int) -> str:
    return str(k) if k >= 0 else f"(- {-k})"


def _smt_lin(t: Lin) -> str:
    parts = []
    for name, k in t.coeffs:
        sym = smt_symbol(name)
        parts.append(sym if k == 1 else f"(* {_smt_int(k)} {sym})")
    if t.offset or not parts:
        parts.append(_smt_int(t.offset))
    return parts[0] if len(parts) == 1 else f"(+ {' '.join(parts)})"


def export_smt2(cs: ClauseSet, theory_map: dict | None = None, free_sort: str | None = None) -> str:
    """SMT-LIB2 (UFLIA) script; essentially ground sets are emitted quantifier-free.

    ``theory_map`` maps theory symbols to SMT-LIB names that need no declaration;
    ``free_sort`` replaces the uninterpreted sort S by a named SMT-LIB sort.
    """
    theory_map = theory_map or {}
    sig = cs.signature
    s_name = free_sort or "S"
    lines = ["(set-logic UFLIA)" if not free_sort and not theory_map else "(set-logic ALL)"]
    if not free_sort:
        lines.append("(declare-sort S 0)")

    def sort_str(s: Sort) -> str:
        return "Int" if s is Sort.BASE else s_name

    clauses = list(cs.clauses)
    ground = [c.is_essentially_ground() for c in clauses]
    skolems = set(sig.skolem_consts())
    for c in clauses:
        for a in itertools.chain(c.lam, c.gamma, c.delta):
            for t in _all_terms(a):
                if isinstance(t, Lin):
                    skolems.update(t.symbols())
    for name in sorted(sig.free_consts()):
        lines.append(f"(declare-fun {smt_symbol(name)} () {s_name})")
    for name in sorted(skolems):
        lines.append(f"(declare-fun {smt_symbol(name)} () Int)")
    for name in sorted(sig.preds):
        lines.append(f"(declare-fun {smt_symbol(name)} ({' '.join(sort_str(s) for s in sig.preds[name])}) Bool)")
    for name in sorted(sig.theory_preds):
        if name not in theory_map:
            ss = sig.theory_preds[name]
            lines.append(f"(declare-fun {smt_symbol(name)} ({' '.join(sort_str(s) for s in ss)}) Bool)")
    for name in sorted(sig.theory_funs):
        if name not in theory_map:
            args, res = sig.theory_funs[name]
            lines.append(f"(declare-fun {smt_symbol(name)} ({' '.join(sort_str(s) for s in args)}) {sort_str(res)})")

    def term(t) -> str:
        if isinstance(t, Var):
            return smt_symbol("?" + t.name)
        if isinstance(t, FreeConst):
            return smt_symbol(t.name)
        if isinstance(t, Lin):
            return _smt_lin(t)
        if isinstance(t, TApp):
            fn = theory_map.get(t.fn, smt_symbol(t.fn))
            return f"({fn} {' '.join(term(a) for a in t.args)})"
        raise TypeError(t)

    def lia(c: Constraint) -> str:
        a, b = term(c.lhs), term(c.rhs)
        if c.rel is Rel.NE:
            return f"(distinct {a} {b})"
        return f"({c.rel.value} {a} {b})"

    def atom(a) -> str:
        if isinstance(a, FreeAtom):
            if not a.args:
                return smt_symbol(a.pred)
            return f"({smt_symbol(a.pred)} {' '.join(term(t) for t in a.args)})"
        if isinstance(a, Equation):
            return f"(= {term(a.lhs)} {term(a.rhs)})"
        if isinstance(a, TheoryAtom):
            fn = theory_map.get(a.pred, smt_symbol(a.pred))
            if not a.args:
                return fn
            return f"({fn} {' '.join(term(t) for t in a.args)})"
        raise TypeError(a)

    for c, is_ground in zip(clauses, ground):
        if is_ground and c.variables():
            c = ground_clause(c)
        lits = [f"(not {lia(x)})" for x in c.lam]
        lits += [f"(not {atom(x)})" for x in c.gamma]
        lits += [atom(x) for x in c.delta]
        body = "false" if not lits else lits[0] if len(lits) == 1 else f"(or {' '.join(lits)})"
        vs = c.variables()
        if vs:
            binders = " ".join(f"({smt_symbol('?' + v.name)} {sort_str(v.sort)})" for v in vs)
            body = f"(forall ({binders}) {body})"
        lines.append(f"(assert {body}) ; {c.id}")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def _all_terms(a):
    from .core import atom_terms

    return atom_terms(a)
