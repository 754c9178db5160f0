import math
import random
import statistics

import pytest

from liteval.baselines import bleu, meteor, pearson, rouge1, rouge_l
from liteval.chunker import tokenize
from liteval.errors import (
    DegenerateSeriesError,
    EmptyCorpusError,
    EmptyReferenceError,
    LengthMismatchError,
)

WORDS = ["the", "cat", "sat", "on", "mat", "fox", "king", "sea", "night"]


def test_bleu_identity():
    segments = [["the", "cat", "sat"], ["on", "the", "mat"]]
    assert bleu(segments, segments).value == pytest.approx(1.0)


def test_bleu_disjoint_is_zero():
    hyp = [["the", "cat"]]
    ref = [["ein", "hund"]]
    assert bleu(hyp, ref, smoothing=False).value == 0.0
    # order-1 precision is never smoothed, so smoothing cannot lift this
    assert bleu(hyp, ref, smoothing=True).value == 0.0


def test_bleu_short_hypothesis_brevity():
    hyp = [["the", "cat", "sat"]]
    ref = [["the", "cat", "sat", "on", "the", "mat"]]
    score = bleu(hyp, ref, smoothing=False)
    assert score.value == pytest.approx(math.exp(-1.0), abs=1e-6)
    assert score.components["precisions"] == {"1": 1.0, "2": 1.0, "3": 1.0}
    assert score.components["brevity_penalty"] == pytest.approx(math.exp(-1.0))
    assert score.metric == "bleu"


def test_bleu_add_one_smoothing():
    hyp = [["the", "cat"]]
    ref = [["the", "dog"]]
    smoothed = bleu(hyp, ref, smoothing=True)
    # p1 = 1/2 unsmoothed, p2 = (0+1)/(1+1); orders 3 and 4 have no n-grams
    assert smoothed.components["precisions"] == {"1": 0.5, "2": 0.5}
    assert smoothed.value == pytest.approx(0.5)
    assert bleu(hyp, ref, smoothing=False).value == 0.0


def test_bleu_pools_counts_across_segments():
    hyp = [["a", "b"], ["x", "y"]]
    ref = [["a", "b"], ["p", "q"]]
    score = bleu(hyp, ref, smoothing=False)
    assert score.components["matched"] == {"1": 2, "2": 1, "3": 0, "4": 0}
    assert score.components["possible"] == {"1": 4, "2": 2, "3": 0, "4": 0}
    assert score.value == pytest.approx(0.5)


def test_bleu_errors():
    with pytest.raises(LengthMismatchError):
        bleu([["a"]], [])
    with pytest.raises(EmptyCorpusError):
        bleu([], [])


def test_bleu_value_recomputable_from_components():
    rng = random.Random(61)
    for _ in range(50):
        hyp = [[rng.choice(WORDS) for _ in range(rng.randint(1, 10))]
               for _ in range(rng.randint(1, 4))]
        ref = [[rng.choice(WORDS) for _ in range(rng.randint(1, 10))]
               for _ in range(len(hyp))]
        score = bleu(hyp, ref)
        parts = score.components
        precisions = parts["precisions"].values()
        if any(p == 0.0 for p in precisions) or not precisions:
            expected = 0.0
        else:
            expected = parts["brevity_penalty"] * math.exp(
                sum(math.log(p) for p in precisions) / len(precisions))
        assert score.value == pytest.approx(expected, abs=1e-12)
        assert 0.0 <= score.value <= 1.0


def test_meteor_identical_penalized_by_formula():
    assert meteor(["cat"], ["cat"]).value == pytest.approx(0.5)
    three = meteor(["a", "b", "c"], ["a", "b", "c"])
    assert three.value == pytest.approx(1.0 - 0.5 / 27, abs=1e-6)
    assert three.components["chunks"] == 1
    assert three.components["matches"] == 3


def test_meteor_fragmented_match():
    score = meteor(["the", "cat"], ["the", "black", "cat"])
    parts = score.components
    assert parts["matches"] == 2
    assert parts["chunks"] == 2
    assert parts["precision"] == pytest.approx(1.0)
    assert parts["recall"] == pytest.approx(2 / 3)
    assert parts["f_mean"] == pytest.approx(0.6897, abs=1e-4)
    assert parts["penalty"] == pytest.approx(0.5)
    assert score.value == pytest.approx(0.3448, abs=1e-4)
    assert score.value == pytest.approx(10 / 29, abs=1e-9)


def test_meteor_no_matches():
    assert meteor(["aa", "bb"], ["cc", "dd"]).value == 0.0
    assert meteor([], ["cc"]).value == 0.0
    with pytest.raises(EmptyReferenceError):
        meteor(["aa"], [])


def test_meteor_prefers_fewer_chunks():
    # contiguous rendering beats a scrambled one with equal matches
    ref = ["a", "b", "c", "d"]
    contiguous = meteor(["a", "b", "c", "d"], ref)
    scrambled = meteor(["d", "c", "b", "a"], ref)
    assert contiguous.components["chunks"] == 1
    assert scrambled.components["chunks"] == 4
    assert contiguous.value > scrambled.value


def test_meteor_value_recomputable():
    rng = random.Random(67)
    for _ in range(100):
        hyp = [rng.choice(WORDS) for _ in range(rng.randint(0, 8))]
        ref = [rng.choice(WORDS) for _ in range(rng.randint(1, 8))]
        score = meteor(hyp, ref)
        parts = score.components
        assert score.value == pytest.approx(
            parts["f_mean"] * (1.0 - parts["penalty"]), abs=1e-12)
        assert 0.0 <= score.value <= 1.0
        assert parts["variant"] == "exact"


def test_rouge1_examples():
    score = rouge1(["the", "cat"], ["the", "cat", "sat"])
    assert score.value == pytest.approx(0.8, abs=1e-6)
    assert score.components["precision"] == pytest.approx(1.0)
    assert score.components["recall"] == pytest.approx(2 / 3)
    assert score.metric == "rouge1"

    assert rouge1(["a", "b"], ["a", "b"]).value == pytest.approx(1.0)
    assert rouge1(["a"], ["b"]).value == 0.0
    assert rouge1([], ["b"]).value == 0.0
    with pytest.raises(EmptyReferenceError):
        rouge1(["a"], [])


def test_rouge1_clips_repeats():
    score = rouge1(["the", "the", "the"], ["the"])
    assert score.components["overlap"] == 1
    assert score.components["precision"] == pytest.approx(1 / 3)
    assert score.components["recall"] == pytest.approx(1.0)


def test_rouge_l_examples():
    score = rouge_l(["a", "b", "c"], ["a", "x", "c"])
    assert score.components["lcs"] == 2
    assert score.value == pytest.approx(2 / 3, abs=1e-4)
    assert score.metric == "rougeL"

    reversed_score = rouge_l(["c", "b", "a"], ["a", "b", "c"])
    assert reversed_score.components["lcs"] == 1
    assert reversed_score.value == pytest.approx(1 / 3, abs=1e-6)

    assert rouge_l(["a", "b"], ["a", "b"]).value == pytest.approx(1.0)
    assert rouge_l(["a"], ["b"]).value == 0.0
    with pytest.raises(EmptyReferenceError):
        rouge_l(["a"], [])


def test_rouge_l_symmetric_with_swapped_pr():
    rng = random.Random(71)
    for _ in range(50):
        hyp = [rng.choice(WORDS) for _ in range(rng.randint(1, 8))]
        ref = [rng.choice(WORDS) for _ in range(rng.randint(1, 8))]
        ab = rouge_l(hyp, ref)
        ba = rouge_l(ref, hyp)
        assert ab.value == pytest.approx(ba.value, abs=1e-12)
        assert ab.components["precision"] == pytest.approx(
            ba.components["recall"], abs=1e-12)
        assert ab.components["lcs"] == ba.components["lcs"]


def test_metrics_agree_with_shared_tokenizer():
    tokens = tokenize("The cat sat.")
    assert tokens == ["the", "cat", "sat", "."]
    assert rouge1(tokens, tokens).value == pytest.approx(1.0)
    assert meteor(tokens, tokens).value == pytest.approx(1.0 - 0.5 / 64)


def test_pearson_examples():
    xs = [1.0, 2.0, 3.0]
    assert pearson(xs, [3.0, 5.0, 7.0]) == pytest.approx(1.0)
    assert pearson(xs, [-1.0, -2.0, -3.0]) == pytest.approx(-1.0)
    assert pearson(xs, [1.0, 2.0, 4.0]) == pytest.approx(0.9820, abs=1e-4)
    assert pearson(xs, [1.0, 2.0, 4.0]) == pytest.approx(
        statistics.correlation(xs, [1.0, 2.0, 4.0]), abs=1e-12)


def test_pearson_matches_stdlib_on_random_series():
    rng = random.Random(73)
    for _ in range(100):
        n = rng.randint(3, 20)
        xs = [rng.uniform(-5, 5) for _ in range(n)]
        ys = [rng.uniform(-5, 5) for _ in range(n)]
        assert pearson(xs, ys) == pytest.approx(
            statistics.correlation(xs, ys), abs=1e-9)
        assert -1.0 <= pearson(xs, ys) <= 1.0


def test_pearson_errors():
    with pytest.raises(LengthMismatchError):
        pearson([1.0, 2.0, 3.0], [1.0, 2.0])
    with pytest.raises(LengthMismatchError):
        pearson([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(DegenerateSeriesError):
        pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(DegenerateSeriesError):
        pearson([1.0, 2.0, 3.0], [4.0, 4.0, 4.0])
