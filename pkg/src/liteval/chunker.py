"""Deterministic tokenization and token-budgeted document chunking.

Token definition: each maximal run of Unicode letters, digits, or combining
marks (categories L*, N*, M*) is one token; every other non-whitespace
character is one token by itself. So "Hello, world!" has 4 tokens and
"don't" has 3.

Chunking packs whole paragraphs greedily into chunks of at most
``max_tokens`` tokens. A paragraph that alone exceeds the budget is split
at sentence boundaries, and a sentence that still exceeds it is split at
token boundaries into budget-sized pieces. Oversized paragraphs (and
oversized sentences inside them) are isolated: their pieces never share a
chunk with neighbouring units. Isolation is what makes the chunk count
monotonically non-increasing as the budget grows; greedy packing without
it can produce more chunks at a larger budget.

Chunk char_spans tile the document text exactly: ordered, adjacent, no
gaps, no overlaps. The paragraph separator stays attached to the end of
the paragraph before it.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Sequence

from .corpus import LanguageTag, split_sentences

DEFAULT_MAX_TOKENS = 4096
MIN_MAX_TOKENS = 16
PARAGRAPH_SEPARATOR = "\n\n"


def _is_word_char(ch: str) -> bool:
    return unicodedata.category(ch)[0] in ("L", "N", "M")


def token_spans(text: str) -> list[tuple[int, int]]:
    """(start, end) offsets of every token in text, in order."""
    spans: list[tuple[int, int]] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif _is_word_char(ch):
            j = i + 1
            while j < n and _is_word_char(text[j]):
                j += 1
            spans.append((i, j))
            i = j
        else:
            spans.append((i, i + 1))
            i += 1
    return spans


def count_tokens(text: str) -> int:
    return len(token_spans(text))


def tokenize(text: str, fold_case: bool = True) -> list[str]:
    """Token strings, case-folded by default (metrics compare folded)."""
    tokens = [text[a:b] for a, b in token_spans(text)]
    if fold_case:
        tokens = [t.casefold() for t in tokens]
    return tokens


@dataclass(frozen=True)
class TokenBudget:
    max_tokens: int = DEFAULT_MAX_TOKENS

    def __post_init__(self) -> None:
        if self.max_tokens < MIN_MAX_TOKENS:
            raise ValueError(f"max_tokens must be >= {MIN_MAX_TOKENS}, "
                             f"got {self.max_tokens}")


@dataclass(frozen=True)
class Chunk:
    index: int
    text: str
    token_count: int
    char_span: tuple[int, int]
    # inclusive (first, last) paragraph indices covered by this chunk
    paragraph_range: tuple[int, int]


def document_text(paragraphs: Sequence[str]) -> tuple[str, list[tuple[int, int]]]:
    """Join paragraphs with the separator; return the text plus per-paragraph
    char spans that tile it (separator attached to the earlier paragraph)."""
    text = PARAGRAPH_SEPARATOR.join(paragraphs)
    offsets: list[tuple[int, int]] = []
    pos = 0
    for i, para in enumerate(paragraphs):
        end = pos + len(para)
        if i < len(paragraphs) - 1:
            end += len(PARAGRAPH_SEPARATOR)
        offsets.append((pos, end))
        pos = end
    return text, offsets


@dataclass
class _Atom:
    # one indivisible packing unit: a paragraph, sentence, or token slice
    start: int
    end: int
    tokens: int
    paragraph: int


def _check_tiling(text: str, paragraph_offsets: Sequence[tuple[int, int]]) -> None:
    pos = 0
    for i, (start, end) in enumerate(paragraph_offsets):
        if start != pos or end < start:
            raise ValueError(f"paragraph offsets do not tile the text "
                             f"(paragraph {i} spans {start}:{end}, expected "
                             f"start {pos})")
        pos = end
    if pos != len(text):
        raise ValueError(f"paragraph offsets cover {pos} of {len(text)} chars")


def _sentence_pieces(text: str, start: int, end: int,
                     lang: LanguageTag | None) -> list[tuple[int, int]]:
    """Tile [start, end) at sentence boundaries. Inter-sentence whitespace
    sticks to the earlier sentence so the pieces tile exactly."""
    spans = split_sentences(text[start:end], lang)
    if len(spans) <= 1:
        return [(start, end)]
    cuts = [start + s[0] for s in spans[1:]]
    edges = [start] + cuts + [end]
    return list(zip(edges[:-1], edges[1:]))


def _token_pieces(text: str, start: int, end: int,
                  max_tokens: int) -> list[tuple[int, int]]:
    """Tile [start, end) into pieces of at most max_tokens tokens, cutting
    at token starts."""
    spans = token_spans(text[start:end])
    if len(spans) <= max_tokens:
        return [(start, end)]
    cuts = [start + spans[k][0] for k in range(max_tokens, len(spans), max_tokens)]
    edges = [start] + cuts + [end]
    return list(zip(edges[:-1], edges[1:]))


def chunk_document(text: str, paragraph_offsets: Sequence[tuple[int, int]],
                   budget: TokenBudget | None = None,
                   lang: LanguageTag | None = None) -> list[Chunk]:
    """Split a document into budgeted chunks.

    ``paragraph_offsets`` must tile ``text`` exactly (see document_text).
    Output chunks are deterministic for identical input, tile the text,
    and each stays within the budget.
    """
    _check_tiling(text, paragraph_offsets)
    if budget is None:
        budget = TokenBudget()
    max_tokens = budget.max_tokens

    atoms: list[_Atom] = []
    barriers: set[int] = set()  # atom indices that start a fresh chunk
    for pi, (pstart, pend) in enumerate(paragraph_offsets):
        ptokens = count_tokens(text[pstart:pend])
        if ptokens <= max_tokens:
            atoms.append(_Atom(pstart, pend, ptokens, pi))
            continue
        barriers.add(len(atoms))
        for sstart, send in _sentence_pieces(text, pstart, pend, lang):
            stokens = count_tokens(text[sstart:send])
            if stokens <= max_tokens:
                atoms.append(_Atom(sstart, send, stokens, pi))
                continue
            barriers.add(len(atoms))
            for tstart, tend in _token_pieces(text, sstart, send, max_tokens):
                atoms.append(_Atom(tstart, tend,
                                   count_tokens(text[tstart:tend]), pi))
            barriers.add(len(atoms))
        barriers.add(len(atoms))

    chunks: list[Chunk] = []
    group: list[_Atom] = []
    group_tokens = 0

    def flush() -> None:
        nonlocal group, group_tokens
        if group:
            start, end = group[0].start, group[-1].end
            chunk_text = text[start:end]
            chunks.append(Chunk(
                index=len(chunks),
                text=chunk_text,
                token_count=count_tokens(chunk_text),
                char_span=(start, end),
                paragraph_range=(group[0].paragraph, group[-1].paragraph),
            ))
            group, group_tokens = [], 0

    for idx, atom in enumerate(atoms):
        if idx in barriers:
            flush()
        if group and group_tokens + atom.tokens > max_tokens:
            flush()
        group.append(atom)
        group_tokens += atom.tokens
    flush()
    return chunks


def chunk_paragraphs(paragraphs: Sequence[str],
                     budget: TokenBudget | None = None,
                     lang: LanguageTag | None = None) -> list[Chunk]:
    """Convenience wrapper: join paragraphs and chunk the result."""
    text, offsets = document_text(paragraphs)
    return chunk_document(text, offsets, budget, lang)


def pair_chunks(source_chunks: Sequence[Chunk],
                target_chunks: Sequence[Chunk]) -> list[tuple[Chunk, Chunk]]:
    """Pair each source chunk with the target chunk whose paragraph range
    overlaps it the most (ties go to the earlier target chunk)."""
    pairs: list[tuple[Chunk, Chunk]] = []
    for sc in source_chunks:
        best: Chunk | None = None
        best_overlap: int | None = None
        for tc in target_chunks:
            lo = max(sc.paragraph_range[0], tc.paragraph_range[0])
            hi = min(sc.paragraph_range[1], tc.paragraph_range[1])
            overlap = hi - lo  # may be negative when ranges are disjoint
            if best_overlap is None or overlap > best_overlap:
                best, best_overlap = tc, overlap
        if best is not None:
            pairs.append((sc, best))
    return pairs
