"""Seeded problem generators and brute-force oracles shared by the tests."""

from __future__ import annotations

import itertools
import random
from pathlib import Path

from bsrsli.core import (
    ClauseSet,
    Constraint,
    Equation,
    FreeAtom,
    FreeConst,
    Lin,
    Rel,
    constraint,
    ground_clause,
)

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "bsrsli" / "fixtures"
CORPUS = Path(__file__).resolve().parent / "corpus"

RELS = ["<", "<=", "=", "!=", ">=", ">"]


def fixture(name: str) -> Path:
    return FIXTURES / name


# --------------------------------------------------------------------------- quantified sets


def rand_bsr_text(rng: random.Random, max_clauses: int = 5, max_preds: int = 3, lo: int = -3, hi: int = 3, skolem: bool = True) -> str:
    """Random BSR(SLI) problem text (not necessarily in normal form)."""
    n_preds = rng.randint(1, max_preds)
    preds = []
    use_free = rng.random() < 0.3
    lines = []
    for k in range(n_preds):
        arity = rng.randint(1, 2)
        sorts = ["Z"] * arity
        if use_free and arity == 2 and rng.random() < 0.5:
            sorts[0] = "S"
        preds.append((f"P{k}", sorts))
        lines.append(f"pred P{k} : {' '.join(sorts)};")
    if use_free:
        lines.append("const a : S;")
    has_k = skolem and rng.random() < 0.3
    if has_k:
        lines.append("const k : Z;")
    for ci in range(rng.randint(1, max_clauses)):
        zvars = [f"x{ci}_{i}" for i in range(rng.randint(1, 3))]
        used: set = set()

        def atom():
            name, sorts = rng.choice(preds)
            args = []
            for s in sorts:
                if s == "Z":
                    v = rng.choice(zvars)
                    used.add(v)
                    args.append("?" + v)
                else:
                    args.append(rng.choice(["a", f"?u{ci}"]))
            return f"{name}({', '.join(args)})"

        gamma = [atom() for _ in range(rng.randint(0, 2))]
        delta = [atom() for _ in range(rng.randint(0, 2))]
        if use_free and rng.random() < 0.15:
            delta.append(f"?u{ci} ~ a")
            if not any(f"?u{ci}" in g for g in gamma):
                gamma.append(f"{preds[0][0]}(?u{ci}, ?{zvars[0]})" if preds[0][1][0] == "S" and len(preds[0][1]) == 2 else "")
                gamma = [g for g in gamma if g]
                if not any(f"?u{ci}" in g for g in gamma):
                    delta.pop()
        lam = []
        for v in sorted(used):
            for _ in range(rng.choice([0, 1, 1, 2])):
                r = rng.choice(RELS)
                rhs = "k" if has_k and rng.random() < 0.2 else str(rng.randint(lo, hi))
                lam.append(f"?{v} {r} {rhs}")
        vs = sorted(used)
        if len(vs) >= 2 and rng.random() < 0.4:
            a, b = rng.sample(vs, 2)
            lam.append(f"?{a} {rng.choice(['<=', '=', '>='])} ?{b}")
        if rng.random() < 0.1:
            lam.append(f"?{zvars[-1]} {rng.choice(['<=', '>='])} {rng.randint(lo, hi)}")  # may be Λ-only
        if has_k and rng.random() < 0.2:
            lam.append(f"k {rng.choice(RELS)} {rng.randint(lo, hi)}")
        rng.shuffle(lam)
        d = ", ".join(delta) if delta else "false"
        lines.append(f"clause [{', '.join(lam)}] || {', '.join(gamma)} -> {d};")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------- ground sets


def rand_ground_text(rng: random.Random, max_clauses: int = 8, n_skolem: int | None = None) -> str:
    """Essentially ground problem (relaxed syntax) with every Skolem constant pinned to [-4,4]."""
    n_sk = rng.randint(0, 2) if n_skolem is None else n_skolem
    sk = [f"c{i}" for i in range(n_sk)]
    n_free = rng.randint(0, 3)
    fc = [f"a{i}" for i in range(n_free)]
    lines = ["pred P : Z;", "pred R : Z Z;"]
    if fc:
        lines += ["pred Q : S;", "pred M : S Z;"]
    lines += [f"const {c} : Z;" for c in sk]
    lines += [f"const {a} : S;" for a in fc]

    def zterm():
        r = rng.random()
        if sk and r < 0.45:
            c = rng.choice(sk)
            off = rng.choice([0, 0, 1, -1])
            return c if off == 0 else f"{c} {'+' if off > 0 else '-'} {abs(off)}"
        return str(rng.randint(0, 4))

    zarg = zterm

    def fatom():
        kinds = ["P", "R"] + (["Q", "M", "eq"] if fc else [])
        k = rng.choice(kinds)
        if k == "P":
            return f"P({zarg()})"
        if k == "R":
            return f"R({zarg()}, {zarg()})"
        if k == "Q":
            return f"Q({rng.choice(fc)})"
        if k == "M":
            return f"M({rng.choice(fc)}, {zarg()})"
        a, b = rng.choice(fc), rng.choice(fc)
        return f"{a} ~ {b}"

    def lia():
        lhs = rng.choice(sk) if sk and rng.random() < 0.7 else str(rng.randint(0, 4))
        rhs = rng.choice(sk + [str(rng.randint(0, 4))]) if sk else str(rng.randint(0, 4))
        if rng.random() < 0.3 and len(sk) == 2:
            lhs = f"{sk[0]} + {sk[1]}"
        return f"{lhs} {rng.choice(RELS)} {rhs}"

    for c in sk:
        lo, hi = sorted(rng.sample(range(-4, 5), 2))
        lines.append(f"clause [{c} < {lo if lo >= 0 else '0 - ' + str(-lo)}] || -> false;")
        lines.append(f"clause [{c} > {hi if hi >= 0 else '0 - ' + str(-hi)}] || -> false;")
    for _ in range(rng.randint(1, max_clauses)):
        lam = [lia() for _ in range(rng.choice([0, 0, 1, 2]))]
        gamma = [fatom() for _ in range(rng.randint(0, 2))]
        delta = [fatom() for _ in range(rng.randint(0, 2))]
        d = ", ".join(delta) if delta else "false"
        lines.append(f"clause [{', '.join(lam)}] || {', '.join(gamma)} -> {d};")
    return "\n".join(lines) + "\n"


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def _prop_sat(clauses, n_keys) -> bool:
    """Exhaustive backtracking over key truth values; clauses are lists of (key, polarity)."""
    order = sorted({k for c in clauses for k, _ in c})
    vals: dict = {}

    def ok(c):
        undecided = False
        for k, pol in c:
            v = vals.get(k)
            if v is None:
                undecided = True
            elif v == pol:
                return True
        return undecided

    def rec(i):
        if not all(ok(c) for c in clauses):
            return False
        if i == len(order):
            return True
        for b in (False, True):
            vals[order[i]] = b
            if rec(i + 1):
                return True
        del vals[order[i]]
        return False

    return rec(0)


def ground_bruteforce(cs: ClauseSet, window: int = 10) -> bool:
    """Satisfiability of an essentially ground set by enumeration of Skolem values and free-constant partitions."""
    clauses = [ground_clause(c) for c in cs.clauses]
    syms = sorted({s for c in clauses for a in list(c.lam) + list(c.atoms()) for t in _terms(a) if isinstance(t, Lin) for s in t.symbols()})
    fcs = sorted({t.name for c in clauses for a in c.atoms() for t in _terms(a) if isinstance(t, FreeConst)})
    pure = [c for c in clauses if not c.gamma and not c.delta]
    rest = [c for c in clauses if c.gamma or c.delta]
    partitions = list(_set_partitions(fcs))
    for combo in itertools.product(range(-window, window + 1), repeat=len(syms)):
        val = dict(zip(syms, combo))
        if not all(any(not a.rel.holds(a.lhs.evaluate(val), a.rhs.evaluate(val)) for a in c.lam) for c in pure):
            continue
        for part in partitions:
            cls = {n: i for i, block in enumerate(part) for n in block}
            props = []
            trivially = False
            for c in rest:
                if any(not a.rel.holds(a.lhs.evaluate(val), a.rhs.evaluate(val)) for a in c.lam):
                    continue
                lits = []
                sat = False
                for a, pol in [(a, False) for a in c.gamma] + [(a, True) for a in c.delta]:
                    if isinstance(a, Equation):
                        truth = cls[a.lhs.name] == cls[a.rhs.name]
                        if truth == pol:
                            sat = True
                            break
                        continue
                    key = (a.pred,) + tuple(t.evaluate(val) if isinstance(t, Lin) else ("e", cls[t.name]) for t in a.args)
                    lits.append((key, pol))
                if sat:
                    continue
                if not lits:
                    trivially = True
                    break
                props.append(lits)
            if trivially:
                continue
            if _prop_sat(props, 0):
                return True
    return False


def _terms(a):
    if isinstance(a, FreeAtom):
        return a.args
    return (a.lhs, a.rhs)


# --------------------------------------------------------------------------- arithmetic


def rand_lia(rng: random.Random, max_constraints: int = 6, max_unknowns: int = 3) -> list[Constraint]:
    names = [f"c{i}" for i in range(rng.randint(1, max_unknowns))]
    out = []
    for _ in range(rng.randint(1, max_constraints)):
        coeffs = {}
        for n in rng.sample(names, rng.randint(1, len(names))):
            coeffs[n] = rng.choice([-1, 1, 1, -1, 2, -2]) if rng.random() < 0.15 else rng.choice([-1, 1])
        lhs = Lin(0, coeffs)
        rhs = Lin(rng.randint(-10, 10))
        out.append(constraint(lhs, rng.choice(["<", "<=", "=", ">=", ">"]), rhs))
    return out


def lia_window_oracle(cons: list[Constraint], window: int | None = None) -> bool:
    """Feasibility by enumeration of all but the last unknown over the window, exact in the last.

    The default window is 40, widened to (max coefficient + 1)² times the
    offset mass when some coefficient is not a unit (vertices sit further out).
    """
    import numpy as np

    if window is None:
        mass = sum(abs((c.lhs - c.rhs).offset) for c in cons)
        kmax = max(abs(k) for c in cons for _, k in (c.lhs - c.rhs).coeffs)
        window = 40 if kmax == 1 else max(40, (kmax + 1) ** 2 * mass)

    names = sorted({s for c in cons for t in (c.lhs, c.rhs) for s in t.symbols()})
    *outer, last = names
    grids = np.meshgrid(*[np.arange(-window, window + 1)] * len(outer), indexing="ij") if outer else []
    shape = grids[0].shape if outer else ()
    lo = np.full(shape, -window, dtype=np.int64)
    hi = np.full(shape, window, dtype=np.int64)
    ok = np.ones(shape, dtype=bool)
    for c in cons:
        d = c.lhs - c.rhs
        if c.rel is Rel.LE:
            rows = [(d, False)]
        elif c.rel is Rel.LT:
            rows = [(d + 1, False)]
        elif c.rel is Rel.GE:
            rows = [(-d, False)]
        elif c.rel is Rel.GT:
            rows = [(-d + 1, False)]
        else:
            rows = [(d, False), (-d, False)]
        for e, _ in rows:
            co = dict(e.coeffs)
            rest = np.full(shape, e.offset, dtype=np.int64)
            for n, g in zip(outer, grids):
                rest = rest + co.get(n, 0) * g
            a = co.get(last, 0)
            if a == 0:
                ok &= rest <= 0
            elif a > 0:
                hi = np.minimum(hi, np.floor_divide(-rest, a))
            else:
                lo = np.maximum(lo, -np.floor_divide(-rest, -a))  # ceil(rest / -a)
    return bool(np.any(ok & (lo <= hi)))


# --------------------------------------------------------------------------- function problems


WINDOW = list(range(-3, 4))


def rand_fun_problem(rng: random.Random):
    """Tiny problem with one unary function into S; every base variable is bounded in [-3,3].

    Returns (text, recipe) where recipe drives :func:`fun_bruteforce`.
    """
    consts = ["a"] + (["b"] if rng.random() < 0.5 else [])
    has_p = rng.random() < 0.5
    lines = ["fun f : Z -> S;"] + [f"const {c} : S;" for c in consts]
    if has_p:
        lines.append("pred P : S;")
    recipe = []

    def rng_bounds():
        lo = rng.randint(-3, 3)
        hi = rng.randint(lo, 3)
        return lo, hi

    kinds = ["eq", "eq", "neq", "neq", "mono", "two", "pt"] + (["p", "np", "pc"] if has_p else [])
    for _ in range(rng.randint(3, 5)):
        k = rng.choice(kinds)
        lo, hi = rng_bounds()
        c = rng.choice(consts)
        c2 = rng.choice(consts)
        if k == "eq":
            lines.append(f"clause [{_n(lo)} <= ?i, ?i <= {_n(hi)}] || -> f(?i) ~ {c};")
            recipe.append(("eq", lo, hi, c))
        elif k == "neq":
            lines.append(f"clause [{_n(lo)} <= ?i, ?i <= {_n(hi)}] || f(?i) ~ {c} -> false;")
            recipe.append(("neq", lo, hi, c))
        elif k == "mono":
            lines.append(f"clause [{_n(lo)} <= ?i, ?i <= ?j, ?j <= {_n(hi)}] || f(?i) ~ {c} -> f(?j) ~ {c};")
            recipe.append(("mono", lo, hi, c))
        elif k == "two":
            lines.append(f"clause [{_n(lo)} <= ?i, ?i <= {_n(hi)}] || -> f(?i) ~ {c}, f(?i) ~ {c2};")
            recipe.append(("two", lo, hi, c, c2))
        elif k == "pt":
            w, w2 = rng.randint(-3, 3), rng.randint(-3, 3)
            if rng.random() < 0.3:
                lines.append(f"clause [?i = {_n(w)}, ?j = {_n(w2)}] || -> f(?i) ~ f(?j);")
                recipe.append(("pteq", w, w2))
            else:
                lines.append(f"clause [?i = {_n(w)}, ?j = {_n(w2)}] || f(?i) ~ f(?j) -> false;")
                recipe.append(("ptneq", w, w2))
        elif k == "p":
            lines.append(f"clause [{_n(lo)} <= ?i, ?i <= {_n(hi)}] || -> P(f(?i));")
            recipe.append(("p", lo, hi))
        elif k == "np":
            lines.append(f"clause [{_n(lo)} <= ?i, ?i <= {_n(hi)}] || P(f(?i)) -> false;")
            recipe.append(("np", lo, hi))
        else:
            pol = rng.random() < 0.5
            lines.append(f"clause [] || -> P({c});" if pol else f"clause [] || P({c}) -> false;")
            recipe.append(("pc", c, pol))
    return "\n".join(lines) + "\n", (consts, has_p, recipe)


def _n(v: int) -> str:
    return str(v) if v >= 0 else f"0 - {-v}"


def fun_bruteforce(consts, has_p, recipe) -> bool:
    """Enumerate domains, constant values, P and function tables over the window."""
    for m in range(1, len(consts) + (3 if has_p else 2)):
        dom = range(m)
        for cv in itertools.product(dom, repeat=len(consts)):
            val = dict(zip(consts, cv))
            for pset in itertools.product((False, True), repeat=m if has_p else 0):
                inP = (lambda e: pset[e]) if has_p else (lambda e: False)
                if not all(inP(val[s[1]]) == s[2] for s in recipe if s[0] == "pc"):
                    continue
                if _tables(recipe, val, inP, dom):
                    return True
    return False


def _tables(recipe, val, inP, dom) -> bool:
    f: dict = {}

    def holds_all() -> bool:
        for s in recipe:
            k = s[0]
            if k in ("eq", "neq", "two", "p", "np"):
                for i in range(s[1], s[2] + 1):
                    if i not in f:
                        continue
                    x = f[i]
                    if k == "eq" and x != val[s[3]]:
                        return False
                    if k == "neq" and x == val[s[3]]:
                        return False
                    if k == "two" and x != val[s[3]] and x != val[s[4]]:
                        return False
                    if k == "p" and not inP(x):
                        return False
                    if k == "np" and inP(x):
                        return False
            elif k == "mono":
                for i in range(s[1], s[2] + 1):
                    for j in range(i, s[2] + 1):
                        if i in f and j in f and f[i] == val[s[3]] and f[j] != val[s[3]]:
                            return False
            elif k in ("pteq", "ptneq"):
                i, j = s[1], s[2]
                if i in f and j in f and (f[i] == f[j]) != (k == "pteq"):
                    return False
        return True

    def rec(idx):
        if not holds_all():
            return False
        if idx == len(WINDOW):
            return True
        w = WINDOW[idx]
        for e in dom:
            f[w] = e
            if rec(idx + 1):
                return True
        del f[w]
        return False

    return rec(0)


# --------------------------------------------------------------------------- corpus


def corpus_texts(n: int = 50, seed: int = 2024) -> dict[str, str]:
    out = {}
    for p in sorted(FIXTURES.glob("*.bsr")):
        out[p.name] = p.read_text()
    rng = random.Random(seed)
    i = 0
    while len(out) < n:
        out[f"random_{i:02d}.bsr"] = rand_bsr_text(rng)
        i += 1
    return out


def write_corpus(directory: Path = CORPUS) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for name, text in corpus_texts().items():
        (directory / name).write_text(text)


if __name__ == "__main__":
    write_corpus()


# --------------------------------------------------------------------------- external solver


def z3_verdict(cs: ClauseSet, timeout_ms: int = 5000) -> str:
    """``sat``, ``unsat`` or ``unknown`` from z3 on the exported script."""
    import z3

    from bsrsli.textio import export_smt2

    s = z3.Solver()
    s.set("timeout", timeout_ms)
    s.from_string(export_smt2(cs))
    return str(s.check())


def pipeline_sat(cs: ClauseSet, strategy=None) -> bool:
    """Verdict of explicit instantiation followed by the ground solver."""
    from bsrsli.groundsolve import solve_ground
    from bsrsli.instantiate import ground_all

    g, _ = ground_all(cs, strategy)
    return solve_ground(g).sat


def encoded_sat(cs: ClauseSet, plan) -> bool:
    """Verdict after deferring ``plan`` through sort predicates."""
    from bsrsli.instantiate import encode_sort_predicates

    return pipeline_sat(encode_sort_predicates(cs, plan))
