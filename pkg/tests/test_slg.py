"""Factorization-to-grammar conversion, binarization, pruning."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import mutated_text, random_seq_grammar, random_text
from rlslp.grammar import Grammar, RunRule, SeqRule, expand, validate
from rlslp.lz import (Factorization, ParseError, Phrase,
                      parse_bentley_mcilroy, parse_exact_lz77)
from rlslp.slg import lz_to_slg, prune_slp, slg_to_slp


def test_single_literal():
    g = lz_to_slg(Factorization([Phrase(ord("a"), 0)], 1))
    assert validate(g).ok
    assert expand(g) == b"a"
    assert len(g.rules) <= 2


def test_overlapping_phrase():
    g = lz_to_slg(Factorization([Phrase(ord("a"), 0), Phrase(1, 3)], 4))
    assert expand(g) == b"aaaa"


def test_expand_equality_300_random_texts():
    rng = random.Random(200)
    for _ in range(300):
        t = random_text(rng, max_len=1500)
        g = lz_to_slg(parse_bentley_mcilroy(t, 8))
        assert expand(g) == t


def test_rejects_inconsistent_factorizations():
    with pytest.raises(ParseError):
        lz_to_slg(Factorization([Phrase(ord("a"), 0)], 2))
    with pytest.raises(ParseError):
        lz_to_slg(Factorization([Phrase(ord("a"), 0), Phrase(5, 2)], 3))
    with pytest.raises(ParseError):
        lz_to_slg(Factorization([Phrase(999, 0)], 1))


def test_empty_factorization():
    g = lz_to_slg(Factorization([], 0))
    assert g.rules == []


def _heights(g: Grammar) -> list[int]:
    h = [0] * (len(g.rules) + 1)
    for i, rule in enumerate(g.rules, start=1):
        assert isinstance(rule, SeqRule)
        h[i] = 1 + max((h[s] for s in rule.rhs if s > 0), default=0)
    return h


def test_join_trees_stay_height_balanced():
    rng = random.Random(201)
    for _ in range(40):
        t = mutated_text(rng, base_len=rng.randint(4, 60),
                         total_len=rng.randint(100, 3000))
        g = lz_to_slg(parse_bentley_mcilroy(t, rng.choice([2, 8])))
        h = _heights(g)
        for rule in g.rules:
            if len(rule.rhs) != 2:
                continue
            a, b = rule.rhs
            ha = h[a] if a > 0 else 0
            hb = h[b] if b > 0 else 0
            assert abs(ha - hb) <= 1


def test_size_bound_four_f_log_n():
    rng = random.Random(202)
    for _ in range(60):
        t = random_text(rng, max_len=4000)
        if len(t) < 4:
            continue
        fz = parse_bentley_mcilroy(t, 8)
        g = lz_to_slg(fz)
        bound = 4 * len(fz.phrases) * math.log2(len(t))
        assert len(g.rules) <= bound


def test_binarize_left_comb_count():
    g = Grammar([SeqRule((-1, -2, -3, -4))])
    slp = slg_to_slp(g)
    assert len(slp.rules) == 3
    assert all(len(r.rhs) == 2 for r in slp.rules)
    assert expand(slp) == bytes([0, 1, 2, 3])


def test_binarize_keeps_already_binary():
    g = Grammar([SeqRule((-1, -2)), SeqRule((1, 1))])
    assert slg_to_slp(g).rules == g.rules


def test_binarize_preserves_expansion():
    rng = random.Random(203)
    for _ in range(100):
        g = random_seq_grammar(rng, max_rhs=6)
        slp = slg_to_slp(g)
        assert validate(slp).ok
        assert all(isinstance(r, RunRule) or len(r.rhs) <= 2
                   for r in slp.rules)
        assert expand(slp) == expand(g)


def test_binarize_handles_run_rules():
    g = Grammar([SeqRule((-1, -2, -1)), RunRule(1, 3), SeqRule((1, 2, -2))])
    slp = slg_to_slp(g)
    assert expand(slp) == expand(g)


def test_prune_removes_unreachable():
    g = Grammar([SeqRule((-1, -2)), SeqRule((-3, -3)), SeqRule((1, -4))])
    pruned = prune_slp(g)
    assert len(pruned.rules) == 2
    assert expand(pruned) == expand(g)


def test_prune_collapses_chain():
    g = Grammar([SeqRule((-1, -2)), SeqRule((1,)), SeqRule((2,))])
    pruned = prune_slp(g)
    assert pruned.rules == [SeqRule((-1, -2))]


def test_prune_merges_duplicate_rhs():
    g = Grammar([SeqRule((-1, -2)), SeqRule((-1, -2)), SeqRule((1, 2))])
    pruned = prune_slp(g)
    assert len(pruned.rules) == 2
    assert expand(pruned) == expand(g)
    seen = set()
    for rule in pruned.rules:
        key = (rule.base, rule.exponent) if isinstance(rule, RunRule) \
            else rule.rhs
        assert key not in seen
        seen.add(key)


def test_prune_idempotent_and_semantics_on_corpus():
    rng = random.Random(204)
    for _ in range(150):
        g = random_seq_grammar(rng)
        p1 = prune_slp(g)
        assert validate(p1).ok
        assert expand(p1) == expand(g)
        assert len(p1.rules) <= len(g.rules)
        assert prune_slp(p1).rules == p1.rules


def test_prune_keeps_terminal_singleton_start():
    g = Grammar([SeqRule((-1,))])
    assert prune_slp(g).rules == [SeqRule((-1,))]


@settings(max_examples=120, deadline=None)
@given(st.binary(min_size=1, max_size=400),
       st.sampled_from([2, 8, 64]))
def test_three_stage_semantics_property(t, block_size):
    fz = parse_bentley_mcilroy(t, block_size)
    g = lz_to_slg(fz)
    slp = slg_to_slp(g)
    pruned = prune_slp(slp)
    assert expand(g) == t
    assert expand(slp) == t
    assert expand(pruned) == t


def test_pipeline_stages_on_exact_parse():
    rng = random.Random(205)
    for _ in range(50):
        t = random_text(rng, max_len=800)
        g = prune_slp(slg_to_slp(lz_to_slg(parse_exact_lz77(t))))
        assert expand(g) == t
