"""DPLL search with two watched literals, chronological backtracking and a theory hook.

Literals are nonzero ints (``v`` or ``-v`` for variable ``v >= 1``).  Theory
lemmas are kept apart from the watched input clauses and rescanned at every
propagation fixpoint, which keeps them correct across backtracking.
"""

from __future__ import annotations

from collections import defaultdict


class Dpll:
    def __init__(self, nvars: int = 0):
        self.nvars = nvars
        self.value: list = [None] * (nvars + 1)
        self.clauses: list[list[int]] = []
        self.lemmas: list[list[int]] = []
        self._lemma_keys: set = set()
        self.watches: dict = defaultdict(list)
        self.trail: list[tuple[int, str]] = []  # (literal, 'd' decision | 'f' flipped | 'p' propagated)
        self.qhead = 0
        self.units: list[tuple[int, int]] = []  # (literal, clause index) from unit input clauses
        self.empty: list[int] = []  # indices of empty input clauses
        self.used: set = set()  # input clauses that propagated or conflicted
        self.decisions = 0
        self.conflicts = 0

    def new_var(self) -> int:
        self.nvars += 1
        self.value.append(None)
        return self.nvars

    def lit_value(self, lit: int):
        v = self.value[abs(lit)]
        if v is None:
            return None
        return v if lit > 0 else not v

    def add_clause(self, lits) -> int:
        """Input clause; returns its index (the caller maps indices to provenance)."""
        idx = len(self.clauses)
        lits = list(dict.fromkeys(lits))
        if any(-l in lits for l in lits):
            self.clauses.append([])
            return idx  # tautology, never watched
        self.clauses.append(lits)
        if not lits:
            self.empty.append(idx)
        elif len(lits) == 1:
            self.units.append((lits[0], idx))
        else:
            self.watches[lits[0]].append(idx)
            self.watches[lits[1]].append(idx)
        return idx

    def add_lemma(self, lits) -> bool:
        lits = list(dict.fromkeys(lits))
        key = frozenset(lits)
        if key in self._lemma_keys:
            return False
        self._lemma_keys.add(key)
        self.lemmas.append(lits)
        return True

    def _assign(self, lit: int, kind: str):
        self.value[abs(lit)] = lit > 0
        self.trail.append((lit, kind))

    def _propagate_watched(self):
        while self.qhead < len(self.trail):
            lit, _ = self.trail[self.qhead]
            self.qhead += 1
            false_lit = -lit
            ws = self.watches[false_lit]
            i = 0
            while i < len(ws):
                ci = ws[i]
                c = self.clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                if self.lit_value(c[0]) is True:
                    i += 1
                    continue
                moved = False
                for k in range(2, len(c)):
                    if self.lit_value(c[k]) is not False:
                        c[1], c[k] = c[k], c[1]
                        ws[i] = ws[-1]
                        ws.pop()
                        self.watches[c[1]].append(ci)
                        moved = True
                        break
                if moved:
                    continue
                if self.lit_value(c[0]) is False:
                    self.used.add(ci)
                    return ("clause", ci)
                self.used.add(ci)
                self._assign(c[0], "p")
                i += 1
        return None

    def _scan_lemmas(self):
        """('conflict', i), ('unit', i) after assigning, or None at a fixpoint."""
        for i, c in enumerate(self.lemmas):
            unassigned = None
            n_un = 0
            sat = False
            for l in c:
                v = self.lit_value(l)
                if v is True:
                    sat = True
                    break
                if v is None:
                    n_un += 1
                    unassigned = l
                    if n_un > 1:
                        break
            if sat or n_un > 1:
                continue
            if n_un == 0:
                return ("lemma", i)
            self._assign(unassigned, "p")
            return ("unit", i)
        return None

    def propagate(self):
        while True:
            confl = self._propagate_watched()
            if confl is not None:
                return confl
            r = self._scan_lemmas()
            if r is None:
                return None
            if r[0] == "lemma":
                return r

    def backtrack(self) -> bool:
        """Undo to the most recent unflipped decision and flip it."""
        while self.trail:
            lit, kind = self.trail.pop()
            self.value[abs(lit)] = None
            if kind == "d":
                self.qhead = len(self.trail)
                self._assign(-lit, "f")
                return True
        self.qhead = 0
        return False

    def all_assigned(self) -> bool:
        return all(v is not None for v in self.value[1:])

    def solve(self, theory=None):
        """(True, values) or (False, sorted indices of input clauses involved)."""
        if self.empty:
            return False, sorted(self.empty[:1])
        for lit, ci in self.units:
            v = self.lit_value(lit)
            if v is False:
                self.used.add(ci)
                return False, sorted(self.used)
            if v is None:
                self.used.add(ci)
                self._assign(lit, "p")
        # unit input clauses sit below every decision and are never undone
        base = len(self.trail)
        while True:
            confl = self.propagate()
            if confl is None and theory is not None:
                added = theory.check(self, self.all_assigned())
                if added:
                    continue
            if confl is not None:
                self.conflicts += 1
                if not self._backtrack_above(base):
                    return False, sorted(self.used)
                continue
            if self.all_assigned():
                return True, list(self.value)
            var = next(v for v in range(1, self.nvars + 1) if self.value[v] is None)
            self.decisions += 1
            self._assign(-var, "d")

    def _backtrack_above(self, base: int) -> bool:
        if not any(k == "d" for _, k in self.trail[base:]):
            return False
        return self.backtrack()
