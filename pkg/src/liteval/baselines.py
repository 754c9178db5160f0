"""Native reference-based metrics: corpus BLEU, exact-match METEOR,
ROUGE-1, ROUGE-L, and sample Pearson correlation.

All metrics consume token lists produced by the chunker module's
tokenizer (case-folded), so results are comparable across metrics. METEOR
is the exact-match variant (no stemming or synonyms) and is labeled
"meteor-exact" in CLI output. Note its fragmentation penalty means
identical segments score 1 - 0.5/n^3, not exactly 1.0; BLEU and ROUGE are
exactly 1.0 on identical input.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Any, Sequence

from .errors import (
    DegenerateSeriesError,
    EmptyCorpusError,
    EmptyReferenceError,
    LengthMismatchError,
)

Tokens = Sequence[str]

BLEU_MAX_ORDER = 4


@dataclass(frozen=True)
class MetricScore:
    metric: str
    value: float
    components: dict[str, Any]


def _ngram_counts(tokens: Tokens, order: int) -> Counter:
    return Counter(tuple(tokens[i:i + order])
                   for i in range(len(tokens) - order + 1))


def bleu(hypotheses: Sequence[Tokens], references: Sequence[Tokens], *,
         max_order: int = BLEU_MAX_ORDER, smoothing: bool = True) -> MetricScore:
    """Corpus-level BLEU: geometric mean of modified n-gram precisions
    times the brevity penalty.

    Orders with no hypothesis n-grams at all are excluded from the mean.
    With smoothing on (default), a zero match count at order >= 2 uses
    add-one smoothing, (matched + 1) / (possible + 1).
    """
    if len(hypotheses) != len(references):
        raise LengthMismatchError(f"{len(hypotheses)} hypotheses vs "
                                  f"{len(references)} references")
    if not hypotheses:
        raise EmptyCorpusError("no segments to score")

    matched = [0] * max_order
    possible = [0] * max_order
    hyp_length = 0
    ref_length = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_length += len(hyp)
        ref_length += len(ref)
        for order in range(1, max_order + 1):
            hyp_counts = _ngram_counts(hyp, order)
            if not hyp_counts:
                continue
            ref_counts = _ngram_counts(ref, order)
            possible[order - 1] += sum(hyp_counts.values())
            matched[order - 1] += sum(min(count, ref_counts[gram])
                                      for gram, count in hyp_counts.items())

    precisions: dict[str, float] = {}
    logs = []
    zero_precision = False
    for order in range(1, max_order + 1):
        if possible[order - 1] == 0:
            continue
        m, p = matched[order - 1], possible[order - 1]
        if m == 0 and smoothing and order >= 2:
            precision = (m + 1) / (p + 1)
        else:
            precision = m / p
        precisions[str(order)] = precision
        if precision == 0.0:
            zero_precision = True
        else:
            logs.append(math.log(precision))

    if not precisions or zero_precision:
        geo_mean = 0.0
    else:
        geo_mean = math.exp(sum(logs) / len(precisions))
    if hyp_length == 0:
        brevity_penalty = 0.0
    elif hyp_length >= ref_length:
        brevity_penalty = 1.0
    else:
        brevity_penalty = math.exp(1.0 - ref_length / hyp_length)
    value = brevity_penalty * geo_mean
    return MetricScore(metric="bleu", value=value, components={
        "precisions": precisions,
        "matched": {str(i + 1): matched[i] for i in range(max_order)},
        "possible": {str(i + 1): possible[i] for i in range(max_order)},
        "brevity_penalty": brevity_penalty,
        "hypothesis_length": hyp_length,
        "reference_length": ref_length,
        "smoothing": smoothing,
    })


def _greedy_fragments(hyp: Tokens, ref: Tokens) -> list[tuple[int, int, int]]:
    """Align by repeatedly taking the longest common contiguous fragment of
    unused tokens (ties: earliest in hyp, then ref). Returns
    (hyp_start, ref_start, length) triples. Maximizes matches; the
    fragment count is METEOR's chunk count."""
    hyp_used = [False] * len(hyp)
    ref_used = [False] * len(ref)
    fragments: list[tuple[int, int, int]] = []
    while True:
        best_len, best_i, best_j = 0, -1, -1
        for i in range(len(hyp)):
            if hyp_used[i]:
                continue
            for j in range(len(ref)):
                if ref_used[j] or hyp[i] != ref[j]:
                    continue
                length = 0
                while (i + length < len(hyp) and j + length < len(ref)
                       and not hyp_used[i + length]
                       and not ref_used[j + length]
                       and hyp[i + length] == ref[j + length]):
                    length += 1
                if length > best_len:
                    best_len, best_i, best_j = length, i, j
        if best_len == 0:
            break
        fragments.append((best_i, best_j, best_len))
        for k in range(best_len):
            hyp_used[best_i + k] = True
            ref_used[best_j + k] = True
    return fragments


def meteor(hypothesis: Tokens, reference: Tokens) -> MetricScore:
    """Exact-match METEOR: P = m/|hyp|, R = m/|ref|,
    F_mean = 10PR/(R+9P), penalty = 0.5*(chunks/m)^3,
    score = F_mean*(1-penalty). Zero matches score 0."""
    if not reference:
        raise EmptyReferenceError("reference has no tokens")
    fragments = _greedy_fragments(hypothesis, reference)
    m = sum(length for _, _, length in fragments)
    chunks = len(fragments)
    if m == 0 or not hypothesis:
        return MetricScore(metric="meteor", value=0.0, components={
            "matches": 0, "chunks": 0, "precision": 0.0, "recall": 0.0,
            "f_mean": 0.0, "penalty": 0.0, "variant": "exact",
        })
    precision = m / len(hypothesis)
    recall = m / len(reference)
    f_mean = 10.0 * precision * recall / (recall + 9.0 * precision)
    penalty = 0.5 * (chunks / m) ** 3
    value = f_mean * (1.0 - penalty)
    return MetricScore(metric="meteor", value=value, components={
        "matches": m, "chunks": chunks, "precision": precision,
        "recall": recall, "f_mean": f_mean, "penalty": penalty,
        "variant": "exact",
    })


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def rouge1(hypothesis: Tokens, reference: Tokens) -> MetricScore:
    """Clipped unigram-overlap precision/recall; value = F1."""
    if not reference:
        raise EmptyReferenceError("reference has no tokens")
    overlap = sum((Counter(hypothesis) & Counter(reference)).values())
    precision = overlap / len(hypothesis) if hypothesis else 0.0
    recall = overlap / len(reference)
    value = _f1(precision, recall)
    return MetricScore(metric="rouge1", value=value, components={
        "overlap": overlap, "precision": precision, "recall": recall,
        "f1": value,
    })


def _lcs_length(a: Tokens, b: Tokens) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        current = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                current[j] = previous[j - 1] + 1
            else:
                current[j] = max(previous[j], current[j - 1])
        previous = current
    return previous[len(b)]


def rouge_l(hypothesis: Tokens, reference: Tokens) -> MetricScore:
    """LCS-based: P = LCS/|hyp|, R = LCS/|ref|, value = F1."""
    if not reference:
        raise EmptyReferenceError("reference has no tokens")
    lcs = _lcs_length(hypothesis, reference)
    precision = lcs / len(hypothesis) if hypothesis else 0.0
    recall = lcs / len(reference)
    value = _f1(precision, recall)
    return MetricScore(metric="rougeL", value=value, components={
        "lcs": lcs, "precision": precision, "recall": recall, "f1": value,
    })


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient; needs length >= 3 and two
    non-constant series."""
    if len(xs) != len(ys):
        raise LengthMismatchError(f"{len(xs)} xs vs {len(ys)} ys")
    if len(xs) < 3:
        raise LengthMismatchError(f"need at least 3 points, got {len(xs)}")
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    dx = [x - mean_x for x in xs]
    dy = [y - mean_y for y in ys]
    ssx = sum(d * d for d in dx)
    ssy = sum(d * d for d in dy)
    if ssx == 0.0:
        raise DegenerateSeriesError("first series is constant")
    if ssy == 0.0:
        raise DegenerateSeriesError("second series is constant")
    r = sum(a * b for a, b in zip(dx, dy)) / math.sqrt(ssx * ssy)
    return max(-1.0, min(1.0, r))
