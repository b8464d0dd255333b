from __future__ import annotations

import random

import pytest

from gen import CORPUS, fixture, ground_bruteforce, rand_ground_text
from bsrsli.core import BsrError, Sort, sets_alpha_equivalent
from bsrsli.groundsolve import solve_ground
from bsrsli.instantiate import Strategy, ground_all
from bsrsli.normalize import normalize
from bsrsli.textio import export_smt2, is_purified, parse, parse_file, print_set, purify

z3 = pytest.importorskip("z3")

CORPUS_FILES = sorted(CORPUS.glob("*.bsr"))


def _z3_verdict(script: str) -> str:
    s = z3.Solver()
    s.from_string(script)
    return str(s.check())


def test_corpus_has_fifty_files():
    assert len(CORPUS_FILES) == 50


def test_intro_signature():
    cs = parse_file(fixture("intro.bsr"))
    sig = cs.signature
    assert sig.preds["R"] == (Sort.BASE,)
    assert sig.preds["Q"] == (Sort.FREE, Sort.BASE)
    assert sig.consts["d"][0] is Sort.FREE
    assert len(cs.clauses) == 2


def test_empty_text():
    cs = parse("")
    assert cs.clauses == ()
    assert print_set(cs).startswith("#")


def test_intro_prints_first_clause():
    text = print_set(parse_file(fixture("intro.bsr")))
    assert "clause [?x2 != 5] || R(?x1) -> Q(?u1, ?x2);" in text


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
def test_round_trip(path):
    cs = parse_file(path)
    text = print_set(cs)
    again = parse(text)
    assert sets_alpha_equivalent(cs, again)
    assert print_set(again) == text


@pytest.mark.parametrize(
    "text, where",
    [
        ("pred P : Z;\nclause [?x < 1] || P(?x) -> ;", "line 2"),
        ("pred P : Z;\nclause [] || Q(?x) -> false;", "line 2, col 1"),
        ("pred P : Z;\npred Q : S;\nclause [] || P(?x) -> Q(?x);", "line 3"),
        ("pred P : Z;\nclause [] || P(?x, ?y) -> false;", "line 2"),
        ("mark P;", "line 1"),
    ],
)
def test_errors_carry_location(text, where):
    with pytest.raises(BsrError, match=where):
        parse(text)


def test_strict_mode_rejects_numerals_at_positions():
    text = "pred P : Z;\nclause [] || -> P(3);"
    parse(text)
    with pytest.raises(BsrError):
        parse(text, strict=True)


def test_purify_single_literal():
    cs = purify(parse("pred P : Z; clause [] || -> P(3);"))
    assert print_set(cs).splitlines()[-1] == "clause [?x0 = 3] || -> P(?x0);"
    assert is_purified(cs)


def test_purify_folds_ground_sum():
    cs = purify(parse("pred Q : S Z; const d : S; clause [] || -> Q(d, 5+1);"))
    assert print_set(cs).splitlines()[-1] == "clause [?x0 = 6] || -> Q(d, ?x0);"


def test_purify_preserves_satisfiability():
    for seed in range(40):
        cs = parse(rand_ground_text(random.Random(seed), max_clauses=4))
        pure = purify(cs)
        assert is_purified(pure)
        assert ground_bruteforce(pure, window=8) == ground_bruteforce(cs, window=8)
        assert ground_bruteforce(pure, window=8) == solve_ground(pure).sat


def test_export_intro_ground_set_is_sat():
    cs = normalize(parse_file(fixture("intro.bsr")))
    g, _ = ground_all(cs, Strategy())
    script = export_smt2(g)
    assert "(set-logic UFLIA)" in script and "(declare-sort S 0)" in script
    assert _z3_verdict(script) == "sat"
    assert export_smt2(g) == script


def test_export_empty_set():
    assert _z3_verdict(export_smt2(parse(""))) == "sat"


def test_export_agrees_with_ground_solver():
    for seed in range(20):
        cs = purify(parse(rand_ground_text(random.Random(1000 + seed))))
        ours = "sat" if solve_ground(cs).sat else "unsat"
        assert _z3_verdict(export_smt2(cs)) == ours, seed


def test_export_quantified_set_uses_forall():
    script = export_smt2(normalize(parse_file(fixture("ex5.bsr"))))
    assert "forall" in script
    assert _z3_verdict(script) == "sat"
