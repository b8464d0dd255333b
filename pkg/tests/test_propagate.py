from __future__ import annotations

import random

import numpy as np
import pytest

from gen import fixture, rand_bsr_text
from bsrsli.core import BsrError, Sort
from bsrsli.normalize import normalize
from bsrsli.propagate import ArgPos, build_prop, downcl, upcl
from bsrsli.textio import parse, parse_file


def _random_props(n=60, seed=0):
    rng = random.Random(seed)
    for _ in range(n):
        yield build_prop(normalize(parse(rand_bsr_text(rng, max_clauses=6))))


def test_example_three_edges():
    prop = build_prop(normalize(parse_file(fixture("ex3.bsr"))))
    T, Q, R = ArgPos("T", 1), ArgPos("Q", 1), ArgPos("R", 1)
    assert (T, Q) in prop.edges
    assert (Q, R) in prop.edges
    assert prop.leq(T, R)
    assert {R, Q, T} <= downcl(prop, R)
    assert {T, Q, R} <= upcl(prop, T)


def test_single_atom_only_reflexive():
    prop = build_prop(parse("pred P : Z; pred U : Z; clause [] || -> P(?x);"))
    p, u = ArgPos("P", 1), ArgPos("U", 1)
    assert downcl(prop, p) == {p} and upcl(prop, p) == {p}
    assert downcl(prop, u) == {u}


def test_unknown_position():
    prop = build_prop(parse("pred P : Z; clause [] || -> P(?x);"))
    with pytest.raises(BsrError):
        downcl(prop, ArgPos("P", 2))


def test_skolem_constant_creates_no_edge():
    cs = normalize(parse("pred P : Z; pred Q : Z; const c : Z; clause [?x <= c, c <= ?y] || P(?x) -> Q(?y);"))
    prop = build_prop(cs)
    assert not prop.leq(ArgPos("P", 1), ArgPos("Q", 1))


def test_constraint_chain_is_transitive():
    cs = parse("pred P : Z; pred Q : Z; pred R : Z; const a : S; clause [?x <= ?y, ?y <= ?z] || P(?x), Q(?y) -> R(?z);")
    prop = build_prop(cs)
    assert prop.leq(ArgPos("P", 1), ArgPos("R", 1))
    assert not prop.leq(ArgPos("R", 1), ArgPos("P", 1))


def test_closure_matches_matrix_reachability():
    for prop in _random_props():
        idx = {p: i for i, p in enumerate(prop.positions)}
        n = len(idx)
        m = np.eye(n, dtype=bool)
        for q, p in prop.edges:
            m[idx[q], idx[p]] = True
        reach = m.copy()
        for _ in range(n):
            reach = (reach.astype(int) @ m.astype(int)) > 0
        for q in prop.positions:
            expect = {p for p in prop.positions if reach[idx[q], idx[p]]}
            assert upcl(prop, q) == expect


def test_preorder_laws():
    for prop in _random_props(seed=1):
        for p in prop.positions:
            assert prop.leq(p, p)
            for q in downcl(prop, p):
                assert downcl(prop, q) <= downcl(prop, p)
                assert p in upcl(prop, q)
            for q in upcl(prop, p):
                assert q in prop.positions and p in downcl(prop, q)
                for r in upcl(prop, q):
                    assert prop.leq(p, r)


def test_free_edges_are_symmetric():
    for prop in _random_props(seed=2):
        for q, p in prop.edges:
            if prop.sorts[q] is Sort.FREE and prop.sorts[p] is Sort.FREE:
                assert (p, q) in prop.edges


def test_dot_lists_positions():
    dot = build_prop(parse_file(fixture("ex3.bsr"))).to_dot()
    assert dot.startswith("digraph")
    assert '"T/1" -> "Q/1"' in dot
