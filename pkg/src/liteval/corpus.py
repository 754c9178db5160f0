"""Parallel document ingestion, sentence segmentation, and corpus statistics.

Plain-text documents use blank lines as paragraph separators; a parallel
document is a pair of such files whose paragraphs align by index. Unequal
paragraph counts are legal and produce alignment warnings, not errors.
Sentence boundaries are terminal punctuation (.!?。！？) followed by
whitespace or end of text, guarded against common abbreviations.
"""

from __future__ import annotations

import functools
import json
import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import EmptyDocumentError, InvalidEncodingError

TERMINAL_PUNCTUATION = ".!?。！？"

# (start, end) character offsets into a paragraph, end exclusive.
Span = tuple[int, int]

LANGUAGE_NAMES = {
    "en": "English",
    "fr": "French",
    "ko": "Korean",
    "de": "German",
    "es": "Spanish",
    "it": "Italian",
    "ja": "Japanese",
    "pt": "Portuguese",
    "ru": "Russian",
    "zh": "Chinese",
}

_TAG_RE = re.compile(r"^[a-z]{2,8}(-[a-z0-9]{2,8})?$")


@dataclass(frozen=True)
class LanguageTag:
    """Lowercase BCP-47-style tag, e.g. "en", "ko", "pt-br"."""

    code: str

    def __post_init__(self) -> None:
        if not _TAG_RE.match(self.code):
            raise ValueError(f"invalid language tag: {self.code!r}")

    @property
    def display_name(self) -> str:
        """Human-readable language name; falls back to the tag itself."""
        return LANGUAGE_NAMES.get(self.code.split("-")[0], self.code)

    def __str__(self) -> str:
        return self.code


@dataclass
class ParallelDocument:
    title: str
    source_lang: LanguageTag
    target_lang: LanguageTag
    source_paragraphs: list[str]
    target_paragraphs: list[str]
    # sentence spans per paragraph, offsets into that paragraph
    source_sentences: list[list[Span]]
    target_sentences: list[list[Span]]
    alignment_warnings: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        _validate_sides(self.source_paragraphs, self.target_paragraphs)

    @property
    def aligned_paragraphs(self) -> int:
        return min(len(self.source_paragraphs), len(self.target_paragraphs))


@dataclass(frozen=True)
class CorpusStats:
    source_paragraphs: int
    target_paragraphs: int
    source_sentences: int
    target_sentences: int
    source_avg_sentences: float
    target_avg_sentences: float
    sentence_pairs: int
    note: str | None = None


def split_paragraph_blocks(text: str) -> list[str]:
    """Split raw text into paragraphs on runs of blank lines.

    A line containing only whitespace counts as blank. Trailing whitespace
    is stripped from each line; leading whitespace (indentation) is kept.
    """
    blocks: list[str] = []
    current: list[str] = []
    for line in text.splitlines():
        line = line.rstrip()
        if line:
            current.append(line)
        elif current:
            blocks.append("\n".join(current))
            current = []
    if current:
        blocks.append("\n".join(current))
    return blocks


def _read_paragraph_blocks(path: str | Path) -> list[str]:
    p = Path(path)
    try:
        raw = p.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidEncodingError(f"{p}: not valid UTF-8 ({exc.reason} "
                                   f"at byte {exc.start})") from None
    return split_paragraph_blocks(raw)


def _alignment_warnings(source_count: int, target_count: int) -> list[str]:
    if source_count == target_count:
        return []
    if source_count > target_count:
        side, surplus = "source", range(target_count, source_count)
    else:
        side, surplus = "target", range(source_count, target_count)
    indices = ", ".join(str(i) for i in surplus)
    noun = "paragraph" if len(surplus) == 1 else "paragraphs"
    return [f"{len(surplus)} unaligned {side} {noun} (indices {indices}); "
            f"kept, but index-aligned operations use the first "
            f"{min(source_count, target_count)} pairs"]


def _validate_sides(source_paragraphs: list[str],
                    target_paragraphs: list[str]) -> None:
    for side, paras in (("source", source_paragraphs),
                        ("target", target_paragraphs)):
        if not paras:
            raise EmptyDocumentError(f"{side} side has no paragraphs")
        for i, p in enumerate(paras):
            if not p.strip():
                raise EmptyDocumentError(f"{side} paragraph {i} is blank")


def build_document(source_paragraphs: list[str], target_paragraphs: list[str],
                   source_lang: LanguageTag, target_lang: LanguageTag,
                   title: str) -> ParallelDocument:
    """Assemble a ParallelDocument from paragraph lists already in memory."""
    _validate_sides(source_paragraphs, target_paragraphs)
    return ParallelDocument(
        title=title,
        source_lang=source_lang,
        target_lang=target_lang,
        source_paragraphs=source_paragraphs,
        target_paragraphs=target_paragraphs,
        source_sentences=[split_sentences(p, source_lang) for p in source_paragraphs],
        target_sentences=[split_sentences(p, target_lang) for p in target_paragraphs],
        alignment_warnings=_alignment_warnings(len(source_paragraphs),
                                               len(target_paragraphs)),
    )


def load_parallel_document(source_path: str | Path, target_path: str | Path,
                           source_lang: LanguageTag, target_lang: LanguageTag,
                           title: str | None = None) -> ParallelDocument:
    """Load a source/target pair of plain-text files.

    Raises FileNotFoundError, InvalidEncodingError, or EmptyDocumentError.
    Mismatched paragraph counts only add to alignment_warnings.
    """
    source = _read_paragraph_blocks(source_path)
    target = _read_paragraph_blocks(target_path)
    if not source:
        raise EmptyDocumentError(f"{source_path}: no non-blank paragraphs")
    if not target:
        raise EmptyDocumentError(f"{target_path}: no non-blank paragraphs")
    return build_document(source, target, source_lang, target_lang,
                          title if title is not None else Path(source_path).stem)


def load_parallel_jsonl(path: str | Path, source_lang: LanguageTag,
                        target_lang: LanguageTag,
                        title: str | None = None) -> ParallelDocument:
    """Load a JSONL file with one {"source": ..., "target": ...} object per
    paragraph pair. Blank lines are skipped; both sides are always aligned.
    """
    p = Path(path)
    try:
        raw = p.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidEncodingError(f"{p}: not valid UTF-8 ({exc.reason} "
                                   f"at byte {exc.start})") from None
    source: list[str] = []
    target: list[str] = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{p}:{lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(obj, dict) or not isinstance(obj.get("source"), str) \
                or not isinstance(obj.get("target"), str):
            raise ValueError(f"{p}:{lineno}: expected an object with string "
                             f"'source' and 'target' fields")
        if not obj["source"].strip() or not obj["target"].strip():
            raise ValueError(f"{p}:{lineno}: blank source or target paragraph")
        source.append(obj["source"].strip("\n"))
        target.append(obj["target"].strip("\n"))
    if not source:
        raise EmptyDocumentError(f"{p}: no paragraph pairs")
    return build_document(source, target, source_lang, target_lang,
                          title if title is not None else p.stem)


def _is_word_char(ch: str) -> bool:
    return unicodedata.category(ch)[0] in ("L", "N", "M")


@functools.lru_cache(maxsize=None)
def _bundled_abbreviations(code: str) -> frozenset[str]:
    base = resources.files(__package__) / "data" / "abbreviations" / f"{code}.txt"
    if not base.is_file():
        return frozenset()
    return _parse_abbreviation_lines(base.read_text(encoding="utf-8"))


def _parse_abbreviation_lines(text: str) -> frozenset[str]:
    entries = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            # stored without the final period; tolerate files that keep it
            entries.add(line.rstrip(".").casefold())
    return frozenset(entries)


def load_abbreviations(lang: LanguageTag,
                       directory: str | Path | None = None) -> frozenset[str]:
    """Abbreviation guard list for a language (periods that do not end a
    sentence, e.g. "mr", "e.g"). Unknown languages get an empty set. A
    directory of override files may be supplied; missing override files
    fall back to the bundled lists."""
    code = lang.code.split("-")[0]
    if directory is not None:
        override = Path(directory) / f"{code}.txt"
        if override.is_file():
            return _parse_abbreviation_lines(override.read_text(encoding="utf-8"))
    return _bundled_abbreviations(code)


def _guarded_period(paragraph: str, pos: int, guard: frozenset[str]) -> bool:
    """True when the '.' at pos belongs to an abbreviation or an initial."""
    start = pos
    while start > 0 and not paragraph[start - 1].isspace():
        start -= 1
    word = paragraph[start:pos]
    # drop opening quotes/brackets so '("Mr' still matches "mr"
    while word and not _is_word_char(word[0]) and word[0] != ".":
        word = word[1:]
    if not word:
        return False
    if word.casefold() in guard:
        return True
    # single-letter initials: "J. Smith"
    return len(word) == 1 and word.isalpha()


def split_sentences(paragraph: str, lang: LanguageTag | None = None,
                    abbreviations: frozenset[str] | None = None) -> list[Span]:
    """Sentence spans within one paragraph.

    A boundary is a run of terminal punctuation followed by whitespace or
    end of text; the abbreviation guard applies only when the run is a
    single '.'. Spans are trimmed of surrounding whitespace, ordered, and
    non-overlapping; together they cover every non-whitespace character.
    A span must contain at least one word character, so a trailing close
    quote after a boundary (elle dit. ») joins the sentence before it.
    A paragraph with no internal boundary yields one span.
    """
    if not paragraph.strip():
        raise ValueError("paragraph must contain non-whitespace text")
    if abbreviations is None:
        abbreviations = load_abbreviations(lang) if lang is not None else frozenset()

    n = len(paragraph)
    breaks: list[int] = []
    i = 0
    while i < n:
        if paragraph[i] in TERMINAL_PUNCTUATION:
            j = i
            while j + 1 < n and paragraph[j + 1] in TERMINAL_PUNCTUATION:
                j += 1
            at_end = j + 1 >= n
            before_space = not at_end and paragraph[j + 1].isspace()
            single_period = i == j and paragraph[i] == "."
            guarded = single_period and _guarded_period(paragraph, i, abbreviations)
            if (at_end or before_space) and not guarded:
                breaks.append(j + 1)
            i = j + 1
        else:
            i += 1

    spans: list[Span] = []
    cursor = 0
    for b in breaks + [n]:
        span = _trimmed_span(paragraph, cursor, b)
        if span is not None:
            spans.append(span)
        cursor = b
    return _merge_wordless_spans(paragraph, spans)


def _merge_wordless_spans(paragraph: str, spans: list[Span]) -> list[Span]:
    def has_word(span: Span) -> bool:
        return any(_is_word_char(paragraph[k]) for k in range(span[0], span[1]))

    merged: list[Span] = []
    for span in spans:
        if merged and (not has_word(span) or not has_word(merged[-1])):
            merged[-1] = (merged[-1][0], span[1])
        else:
            merged.append(span)
    return merged


def _trimmed_span(text: str, lo: int, hi: int) -> Span | None:
    while lo < hi and text[lo].isspace():
        lo += 1
    while hi > lo and text[hi - 1].isspace():
        hi -= 1
    return (lo, hi) if hi > lo else None


def compute_stats(doc: ParallelDocument) -> CorpusStats:
    """Paragraph/sentence counts and per-paragraph averages for both sides.

    The sentence pair count is min(source, target) totals; when the totals
    differ, a note says which side has the surplus.
    """
    src_total = sum(len(s) for s in doc.source_sentences)
    tgt_total = sum(len(s) for s in doc.target_sentences)
    note = None
    if src_total != tgt_total:
        side = "source" if src_total > tgt_total else "target"
        note = (f"{side} side has {abs(src_total - tgt_total)} more "
                f"sentences; pair count uses the minimum")
    return CorpusStats(
        source_paragraphs=len(doc.source_paragraphs),
        target_paragraphs=len(doc.target_paragraphs),
        source_sentences=src_total,
        target_sentences=tgt_total,
        source_avg_sentences=src_total / len(doc.source_paragraphs),
        target_avg_sentences=tgt_total / len(doc.target_paragraphs),
        sentence_pairs=min(src_total, tgt_total),
        note=note,
    )
