"""Propagation preorder over predicate argument positions.

Bounds on a variable flow between argument positions that share a variable,
that are linked by ``u ≤ v`` / ``u = v`` constraints, or that are linked by a
free-sort equation ``u ≈ v``.  The preorder is the reflexive-transitive
closure of these generator edges.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable

from .core import BsrError, ClauseSet, Equation, FreeAtom, Rel, Shape, Sort, Var


@dataclass(frozen=True, order=True)
class ArgPos:
    pred: str
    index: int  # 1-based

    def __str__(self) -> str:
        return f"<{self.pred},{self.index}>"


@dataclass
class PropagationPreorder:
    positions: list
    edges: set = field(default_factory=set)  # (q, p) meaning q ⪯ p
    var_home: dict = field(default_factory=dict)  # (clause id, var) -> ArgPos
    sorts: dict = field(default_factory=dict)  # ArgPos -> Sort
    _up: dict = field(default_factory=dict, repr=False)
    _down: dict = field(default_factory=dict, repr=False)

    def leq(self, q: ArgPos, p: ArgPos) -> bool:
        return p in self.upcl(q)

    def upcl(self, p: ArgPos) -> frozenset:
        if p not in self._up:
            raise BsrError(f"unknown argument position {p}")
        return self._up[p]

    def downcl(self, p: ArgPos) -> frozenset:
        if p not in self._down:
            raise BsrError(f"unknown argument position {p}")
        return self._down[p]

    def home(self, clause_id: str, var: Var) -> ArgPos:
        try:
            return self.var_home[(clause_id, var)]
        except KeyError:
            raise BsrError(f"variable {var} has no free-part occurrence in clause {clause_id}") from None

    def component(self, p: ArgPos) -> frozenset:
        """Positions connected to ``p`` ignoring edge direction."""
        adj = defaultdict(set)
        for q, r in self.edges:
            adj[q].add(r)
            adj[r].add(q)
        seen = {p}
        todo = deque([p])
        while todo:
            q = todo.popleft()
            for r in adj[q]:
                if r not in seen:
                    seen.add(r)
                    todo.append(r)
        return frozenset(seen)

    def to_dot(self) -> str:
        lines = ["digraph prop {"]
        for p in self.positions:
            lines.append(f'  "{p.pred}/{p.index}" [label="{p.pred},{p.index} ({self.sorts[p].value})"];')
        for q, p in sorted(self.edges):
            if q != p:
                lines.append(f'  "{q.pred}/{q.index}" -> "{p.pred}/{p.index}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _occurrences(clause) -> dict[Var, list[ArgPos]]:
    occ: dict[Var, list[ArgPos]] = defaultdict(list)
    for a in clause.atoms():
        if isinstance(a, FreeAtom):
            for i, t in enumerate(a.args, start=1):
                if isinstance(t, Var):
                    occ[t].append(ArgPos(a.pred, i))
    return occ


def generator_edges(cs: ClauseSet) -> tuple[set, dict]:
    edges: set = set()
    homes: dict = {}
    for c in cs.clauses:
        occ = _occurrences(c)
        for v, ps in occ.items():
            homes[(c.id, v)] = min(ps)
            for q in ps:
                for p in ps:
                    edges.add((q, p))
        for a in c.lam:
            if a.shape is Shape.VAR_VAR and a.rel in (Rel.LE, Rel.EQ):
                u, v = a.lhs, a.rhs
                for q in occ.get(u, ()):
                    for p in occ.get(v, ()):
                        edges.add((q, p))
                        if a.rel is Rel.EQ:
                            edges.add((p, q))
        for a in c.atoms():
            if isinstance(a, Equation) and isinstance(a.lhs, Var) and isinstance(a.rhs, Var):
                for q in occ.get(a.lhs, ()):
                    for p in occ.get(a.rhs, ()):
                        edges.add((q, p))
                        edges.add((p, q))
    return edges, homes


def build_prop(cs: ClauseSet, check: bool = False) -> PropagationPreorder:
    """Preorder for ``cs``; with ``check`` the set must be in normal form."""
    if check:
        from .normalize import check_normal_form

        rep = check_normal_form(cs)
        if not rep.ok:
            raise BsrError("propagation preorder needs a normal-form set")
    sig = cs.signature
    positions = []
    sorts = {}
    for name in sorted(sig.preds):
        for i, s in enumerate(sig.preds[name], start=1):
            p = ArgPos(name, i)
            positions.append(p)
            sorts[p] = s
    edges, homes = generator_edges(cs)
    succ = defaultdict(set)
    pred = defaultdict(set)
    for q, p in edges:
        succ[q].add(p)
        pred[p].add(q)
    prop = PropagationPreorder(positions, edges, homes, sorts)
    for p in positions:
        prop._up[p] = _reach(p, succ)
        prop._down[p] = _reach(p, pred)
    return prop


def _reach(start, adj) -> frozenset:
    seen = {start}
    todo = deque([start])
    while todo:
        q = todo.popleft()
        for r in adj.get(q, ()):
            if r not in seen:
                seen.add(r)
                todo.append(r)
    return frozenset(seen)


def downcl(prop: PropagationPreorder, p: ArgPos) -> frozenset:
    return prop.downcl(p)


def upcl(prop: PropagationPreorder, p: ArgPos) -> frozenset:
    return prop.upcl(p)


def base_positions(prop: PropagationPreorder) -> list[ArgPos]:
    return [p for p in prop.positions if prop.sorts[p] is Sort.BASE]


def free_positions(prop: PropagationPreorder) -> list[ArgPos]:
    return [p for p in prop.positions if prop.sorts[p] is Sort.FREE]


def closure_sizes(prop: PropagationPreorder) -> dict[str, tuple[int, int]]:
    return {str(p): (len(prop.downcl(p)), len(prop.upcl(p))) for p in prop.positions}


def positions_of(prop: PropagationPreorder, names: Iterable[str]) -> list[ArgPos]:
    names = set(names)
    return [p for p in prop.positions if p.pred in names]
