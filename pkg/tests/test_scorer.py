import random

import pytest

from helpers import brute_force_counts, oracle_prf, random_corpus, same_shape_prediction
from nerprobe.corpus import Corpus, GenreMap, Sentence, Token
from nerprobe.errors import AlignmentError, UnmappedSourceError
from nerprobe.scorer import (PRF, GroupScore, MatchCounts, ScoreReport, count_matches, prf, rank_types,
                             score)
from nerprobe.spans import Mention


def M(t, s, e):
    return Mention(t, s, e)


def _sent(tags, doc="bn/x", src="bn", idx=0, words=None):
    words = words or [f"w{i}" for i in range(len(tags))]
    return Sentence(tuple(map(Token, words, tags)), doc, src, idx)


def _with_tags(c: Corpus, tag_seqs) -> Corpus:
    return Corpus(tuple(Sentence(tuple(map(Token, s.words, t)), s.doc_id, s.source, s.index)
                        for s, t in zip(c.sentences, tag_seqs)))


def test_identity_counts():
    ms = [[M("PER", 0, 1), M("GPE", 2, 3)], [M("ORG", 0, 2), M("PER", 3, 4), M("PER", 5, 6)]]
    c = count_matches(ms, ms)
    assert (c.tp, c.fp, c.fn) == (5, 0, 0)


def test_empty_prediction():
    c = count_matches([[M("PER", 0, 1), M("GPE", 2, 3), M("GPE", 4, 5)]], [[]])
    assert (c.tp, c.fp, c.fn) == (0, 0, 3)


def test_boundary_mismatch_is_fp_and_fn():
    c = count_matches([[M("PER", 0, 2), M("GPE", 3, 4)]], [[M("PER", 0, 1), M("GPE", 3, 4)]])
    assert (c.tp, c.fp, c.fn) == (1, 1, 1)
    assert c.by_type["PER"] == MatchCounts(0, 1, 1)
    assert c.by_type["GPE"] == MatchCounts(1, 0, 0)


def test_type_mismatch_is_fp_and_fn():
    c = count_matches([[M("PER", 0, 2)]], [[M("ORG", 0, 2)]])
    assert c.by_type["PER"] == MatchCounts(0, 0, 1)
    assert c.by_type["ORG"] == MatchCounts(0, 1, 0)


def test_duplicate_predictions_match_once():
    c = count_matches([[M("PER", 0, 1)]], [[M("PER", 0, 1), M("PER", 0, 1)]])
    assert (c.tp, c.fp, c.fn) == (1, 1, 0)


def test_count_alignment():
    with pytest.raises(AlignmentError):
        count_matches([[]], [[], []])


@pytest.mark.parametrize("counts,expected", [
    ((1, 0, 0), (1.0, 1.0, 1.0)),
    ((0, 0, 0), (0.0, 0.0, 0.0)),
    ((1, 1, 1), (0.5, 0.5, 0.5)),
    ((0, 3, 0), (0.0, 0.0, 0.0)),
    ((3, 1, 0), (0.75, 1.0, 6 / 7)),
])
def test_prf(counts, expected):
    assert prf(MatchCounts(*counts)) == pytest.approx(expected, abs=1e-15)


def test_counts_addition_is_commutative():
    a = MatchCounts(1, 2, 3, {"PER": MatchCounts(1, 2, 3)})
    b = MatchCounts(4, 0, 1, {"GPE": MatchCounts(4, 0, 1)})
    assert a + b == b + a
    assert (a + b).by_type == {"GPE": MatchCounts(4, 0, 1), "PER": MatchCounts(1, 2, 3)}


def test_score_identity(three_source_corpus):
    r = score(three_source_corpus, three_source_corpus, "genre")
    assert r.prf.f1 == 1.0
    assert all(g.prf.f1 == 1.0 for g in r.by_type.values())
    assert all(g.prf is None or g.prf.f1 == 1.0 for g in r.by_genre.values())


def test_score_all_o(three_source_corpus):
    pred = _with_tags(three_source_corpus, [["O"] * len(s) for s in three_source_corpus])
    r = score(three_source_corpus, pred)
    assert r.prf.recall == 0.0 and r.prf.f1 == 0.0
    assert r.counts.fn == 4


def test_score_by_source_fixture():
    gold = Corpus((
        _sent(["B-PER", "I-PER", "O", "B-GPE"], "bn/1", "bn", 0),
        _sent(["B-ORG", "O"], "tc/1", "tc", 0),
        _sent(["B-PER", "O", "B-PER"], "bn/1", "bn", 1),
    ))
    pred = _with_tags(gold, [
        ["B-PER", "O", "O", "B-GPE"],       # PER boundary wrong, GPE right
        ["B-ORG", "B-PER"],                 # ORG right, spurious PER
        ["B-PER", "O", "O"],                # one PER right, one missed
    ])
    r = score(gold, pred, "source")
    # hand enumeration:
    # bn: gold {PER(0,2), GPE(3,4), PER(0,1)', PER(2,3)'} pred {PER(0,1), GPE(3,4), PER(0,1)'}
    #     tp = GPE + PER(0,1)' = 2, fp = PER(0,1) = 1, fn = PER(0,2) + PER(2,3)' = 2
    # tc: gold {ORG(0,1)} pred {ORG(0,1), PER(1,2)} -> tp 1, fp 1, fn 0
    assert (r.by_source["bn"].counts.tp, r.by_source["bn"].counts.fp, r.by_source["bn"].counts.fn) == (2, 1, 2)
    assert (r.by_source["tc"].counts.tp, r.by_source["tc"].counts.fp, r.by_source["tc"].counts.fn) == (1, 1, 0)
    assert r.by_source["bn"].prf == pytest.approx((2 / 3, 0.5, 4 / 7))
    assert r.by_source["tc"].prf == pytest.approx((0.5, 1.0, 2 / 3))
    assert (r.counts.tp, r.counts.fp, r.counts.fn) == (3, 2, 2)
    assert list(r.by_source) == ["bn", "tc"]
    # pooled within source, not averaged
    assert r.prf.f1 == pytest.approx(0.6)


def test_score_alignment_errors(three_source_corpus):
    c = three_source_corpus
    with pytest.raises(AlignmentError) as e:
        score(c, Corpus(c.sentences[:-1]))
    assert e.value.sentence == 4
    short = list(c.sentences)
    short[2] = _sent(["O", "O"], c[2].doc_id, c[2].source, c[2].index)
    with pytest.raises(AlignmentError) as e:
        score(c, Corpus(tuple(short)))
    assert e.value.sentence == 2


def test_check_surfaces(three_source_corpus):
    c = three_source_corpus
    other = list(c.sentences)
    s = other[1]
    other[1] = Sentence(tuple(Token("X", t) for t in s.tags), s.doc_id, s.source, s.index)
    score(c, Corpus(tuple(other)))
    with pytest.raises(AlignmentError):
        score(c, Corpus(tuple(other)), check_surfaces=True)


def test_genre_grouping_unmapped():
    gold = Corpus((_sent(["B-PER"], "xx/1", "xx"),))
    with pytest.raises(UnmappedSourceError):
        score(gold, gold, "genre")
    r = score(gold, gold, "genre", GenreMap({"xx": "other"}))
    assert list(r.by_genre) == ["other"]


def test_group_without_gold_mentions_has_no_prf():
    gold = Corpus((_sent(["B-PER"], "bn/1", "bn"), _sent(["O"], "tc/1", "tc")))
    pred = _with_tags(gold, [["B-PER"], ["B-ORG"]])
    r = score(gold, pred, "source")
    assert r.by_source["tc"].prf is None
    assert r.by_source["tc"].counts.fp == 1
    assert r.by_type["ORG"].prf is None


def test_invalid_group_by(three_source_corpus):
    with pytest.raises(ValueError):
        score(three_source_corpus, three_source_corpus, "document")


def test_macro_f1_is_auxiliary():
    gold = Corpus((_sent(["B-PER", "O", "B-GPE", "B-GPE", "B-GPE"]),))
    pred = _with_tags(gold, [["B-PER", "O", "O", "O", "O"]])
    r = score(gold, pred)
    assert r.macro_f1 == pytest.approx(0.5)
    assert r.prf.f1 == pytest.approx(2 * 1 * 0.25 / 1.25)


def _report(counts: dict) -> ScoreReport:
    by_type = {t: GroupScore.from_counts(MatchCounts(n, 0, 0)) for t, n in sorted(counts.items())}
    total = MatchCounts(sum(counts.values()), 0, 0, {t: g.counts for t, g in by_type.items()})
    return ScoreReport(total, prf(total), by_type)


def test_rank_single_type():
    most, least = rank_types(_report({"PER": 3}), 1)
    assert [r.entity_type for r in most] == [r.entity_type for r in least] == ["PER"]


def test_rank_alphabetical_ties():
    most, least = rank_types(_report({"A": 5, "B": 5, "C": 1}), 2)
    assert [r.entity_type for r in most] == ["A", "B"]
    assert [r.entity_type for r in least] == ["C", "A"]


def test_rank_six_types():
    counts = {"DATE": 40, "GPE": 55, "ORG": 40, "PER": 70, "LAW": 2, "EVENT": 5}
    most, least = rank_types(_report(counts), 4)
    # by hand: 70 PER, 55 GPE, 40 DATE/ORG (alphabetical), then 5 EVENT, 2 LAW
    assert [r.entity_type for r in most] == ["PER", "GPE", "DATE", "ORG"]
    assert [r.entity_type for r in least] == ["LAW", "EVENT", "DATE", "ORG"]
    assert [r.gold for r in most] == [70, 55, 40, 40]


def test_rank_k_larger_than_types():
    most, least = rank_types(_report({"A": 1, "B": 2}), 10)
    assert len(most) == len(least) == 2


def test_rank_ignores_prediction_only_types():
    gold = Corpus((_sent(["B-PER", "O"]),))
    pred = _with_tags(gold, [["B-PER", "B-ORG"]])
    most, _ = rank_types(score(gold, pred), 5)
    assert [r.entity_type for r in most] == ["PER"]


@pytest.mark.parametrize("seed", range(30))
def test_oracle_equivalence(seed):
    rng = random.Random(seed)
    for _ in range(20):
        gold = random_corpus(rng)
        pred = same_shape_prediction(rng, gold)
        r = score(gold, pred)
        per_type, total = brute_force_counts([s.tags for s in gold], [s.tags for s in pred])
        assert [r.counts.tp, r.counts.fp, r.counts.fn] == total
        assert {t: [g.counts.tp, g.counts.fp, g.counts.fn] for t, g in r.by_type.items()} == per_type
        assert r.prf == pytest.approx(oracle_prf(*total), abs=1e-12)


@pytest.mark.parametrize("seed", range(30))
def test_swap_and_micro_consistency(seed):
    rng = random.Random(100 + seed)
    gold = random_corpus(rng, min_sents=1)
    pred = same_shape_prediction(rng, gold)
    a, b = score(gold, pred, "source"), score(pred, gold, "source")
    assert (a.counts.fp, a.counts.fn) == (b.counts.fn, b.counts.fp)
    assert a.prf.precision == b.prf.recall and a.prf.recall == b.prf.precision
    assert a.prf.f1 == pytest.approx(b.prf.f1, abs=1e-15)
    pooled = sum((g.counts for g in a.by_type.values()), MatchCounts())
    assert (pooled.tp, pooled.fp, pooled.fn) == (a.counts.tp, a.counts.fp, a.counts.fn)
    by_src = sum((g.counts for g in a.by_source.values()), MatchCounts())
    assert (by_src.tp, by_src.fp, by_src.fn) == (a.counts.tp, a.counts.fp, a.counts.fn)
    assert prf(pooled) == a.prf


@pytest.mark.parametrize("seed", range(30))
def test_removing_a_true_positive_never_raises_recall(seed):
    rng = random.Random(200 + seed)
    gold = random_corpus(rng, min_sents=1)
    r = score(gold, gold)
    if not r.counts.tp:
        return
    for i, s in enumerate(gold.sentences):
        if any(t != "O" for t in s.tags):
            tags = [list(x.tags) for x in gold.sentences]
            tags[i] = ["O"] * len(s)
            worse = score(gold, _with_tags(gold, tags))
            assert worse.prf.recall <= r.prf.recall
            break


def test_symmetry_every_group(three_source_corpus):
    r = score(three_source_corpus, three_source_corpus, "source")
    for g in list(r.by_source.values()) + list(r.by_type.values()):
        if g.gold:
            assert g.prf.f1 == 1.0


def test_prf_invariant_type():
    assert isinstance(prf(MatchCounts(1, 0, 0)), PRF)
