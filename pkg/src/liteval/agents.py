"""The three evaluation agents: terminology consistency, narrative
perspective consistency, and stylistic consistency.

Each agent produces a score in [0, 1] plus findings. Terminology is
scored globally: occurrences are collected across every chunk and the
consistency of one term is (count of its modal translation variant) /
(total occurrences), after case-folding and whitespace normalization.
Narrative blends the deterministic label-match ratio 50/50 with the mean
of per-chunk LLM scores. Style is the plain mean of per-chunk scores.

A chunk whose verdict cannot be parsed scores 0 for that chunk and is
flagged in the findings; it never aborts the run.
"""

from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

from .backend import (
    DEFAULT_MAX_OUTPUT_TOKENS,
    DEFAULT_TEMPERATURE,
    CompletionRequest,
    extract_first_json_object,
    parse_verdict,
)
from .chunker import (
    Chunk,
    TokenBudget,
    chunk_paragraphs,
    pair_chunks,
    token_spans,
)
from .corpus import LanguageTag, ParallelDocument, TERMINAL_PUNCTUATION
from .errors import EmptyDocumentError, UnparseableVerdict
from .prompts import PromptTemplate, load_template, resolution_prompt

log = logging.getLogger(__name__)

AGENT_KINDS = ("terminology", "narrative", "style")

PERSPECTIVE_VALUES = ("first_person", "second_person", "third_limited",
                      "omniscient", "mixed", "unknown")

DEFAULT_MIN_TERM_OCCURRENCES = 2
DEFAULT_NARRATIVE_BLEND = 0.5


@dataclass(frozen=True)
class PerspectiveLabel:
    value: str

    def __post_init__(self) -> None:
        if self.value not in PERSPECTIVE_VALUES:
            raise ValueError(f"invalid perspective label: {self.value!r}")


UNKNOWN = PerspectiveLabel("unknown")


@dataclass
class TermRecord:
    surface_form: str
    # (chunk_index, (start, end)) offsets into the joined source text
    occurrences: list[tuple[int, tuple[int, int]]]
    # one rendering per occurrence once resolved; "" marks an unresolved one
    translations: list[str] = field(default_factory=list)


@dataclass
class AgentReport:
    agent: str
    score: float
    per_chunk: list[tuple[int, float, str]]
    findings: dict[str, Any]

    def __post_init__(self) -> None:
        if self.agent not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind: {self.agent!r}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"agent score out of range: {self.score}")


def normalize_variant(text: str) -> str:
    """Case-fold and collapse whitespace before variant comparison."""
    return " ".join(text.split()).casefold()


def _chunk_pair_prompt(source_chunk: Chunk, target_chunk: Chunk) -> str:
    return (f"Source text:\n{source_chunk.text.strip()}\n\n"
            f"Translation:\n{target_chunk.text.strip()}")


def _request_verdicts(provider, system_prompt: str,
                      user_prompts: Sequence[str], *,
                      temperature: float,
                      max_output_tokens: int) -> list[Any]:
    """Run one completion per user prompt, concurrently, and parse each
    into an AgentVerdict. Returns verdicts or UnparseableVerdict instances
    positionally; provider errors propagate."""
    def one(user_prompt: str):
        request = CompletionRequest(model_id=provider.model_id,
                                    system_prompt=system_prompt,
                                    user_prompt=user_prompt,
                                    temperature=temperature,
                                    max_output_tokens=max_output_tokens)
        response = provider.complete(request)
        try:
            return parse_verdict(response.text)
        except UnparseableVerdict as exc:
            return exc

    workers = max(1, min(len(user_prompts),
                         getattr(provider, "max_concurrency", 4)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, user_prompts))


# --- terminology -----------------------------------------------------------

_CANDIDATE_MAX_TOKENS = 6


def _is_capitalized(token: str) -> bool:
    return len(token) >= 2 and token[0].isalpha() and token[0].isupper()


def _rule_based_candidates(text: str) -> set[str]:
    """Capitalized multi-word spans, plus repeated capitalized tokens that
    never occur lowercased (proper-noun-like)."""
    spans = token_spans(text)
    words = [text[a:b] for a, b in spans]
    candidates: set[str] = set()

    # runs of adjacent capitalized tokens separated by single spaces
    i = 0
    while i < len(spans):
        if _is_capitalized(words[i]):
            j = i
            while (j + 1 < len(spans) and _is_capitalized(words[j + 1])
                   and text[spans[j][1]:spans[j + 1][0]] == " "):
                j += 1
            if j > i and j - i + 1 <= _CANDIDATE_MAX_TOKENS:
                candidates.add(text[spans[i][0]:spans[j][1]])
            i = j + 1
        else:
            i += 1

    # repeated single tokens: capitalized everywhere, at least once
    # mid-sentence, never seen in lowercase
    counts: dict[str, int] = {}
    lowercase_seen: set[str] = set()
    mid_sentence: set[str] = set()
    for (a, b), word in zip(spans, words):
        folded = word.casefold()
        if word != word.casefold() and _is_capitalized(word):
            counts[word] = counts.get(word, 0) + 1
            prev = text[:a].rstrip()
            if prev and prev[-1] not in TERMINAL_PUNCTUATION + "\"'“‘":
                mid_sentence.add(word)
        elif word == folded:
            lowercase_seen.add(folded)
    for word, count in counts.items():
        if count >= 2 and word in mid_sentence \
                and word.casefold() not in lowercase_seen:
            candidates.add(word)
    return candidates


def _llm_candidates(source_chunks: Sequence[Chunk], provider,
                    system_prompt: str, *, temperature: float,
                    max_output_tokens: int) -> set[str]:
    def one(chunk: Chunk) -> list[str]:
        request = CompletionRequest(model_id=provider.model_id,
                                    system_prompt=system_prompt,
                                    user_prompt=chunk.text.strip(),
                                    temperature=temperature,
                                    max_output_tokens=max_output_tokens)
        response = provider.complete(request)
        obj = extract_first_json_object(response.text)
        terms = obj.get("terms") if isinstance(obj, dict) else None
        if not isinstance(terms, list):
            log.warning("term extraction for chunk %d returned no usable "
                        "'terms' list", chunk.index)
            return []
        return [t for t in terms if isinstance(t, str) and t.strip()]

    workers = max(1, min(len(source_chunks),
                         getattr(provider, "max_concurrency", 4)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(one, source_chunks))
    return {term for terms in results for term in terms}


def _find_occurrences(text: str, surface_form: str,
                      chunks: Sequence[Chunk]) -> list[tuple[int, tuple[int, int]]]:
    pattern = re.compile(r"(?<!\w)" + re.escape(surface_form) + r"(?!\w)",
                         re.IGNORECASE)
    occurrences = []
    for match in pattern.finditer(text):
        span = match.span()
        for chunk in chunks:
            if chunk.char_span[0] <= span[0] < chunk.char_span[1]:
                occurrences.append((chunk.index, span))
                break
    return occurrences


def extract_key_terms(doc: ParallelDocument, provider,
                      min_occurrences: int = DEFAULT_MIN_TERM_OCCURRENCES, *,
                      budget: TokenBudget | None = None,
                      chunk_pairs: Sequence[tuple[Chunk, Chunk]] | None = None,
                      temperature: float = DEFAULT_TEMPERATURE,
                      max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS) -> list[TermRecord]:
    """Find key terms in the source and resolve their target renderings.

    Candidates are the union of rule-based spans and LLM-extracted
    entities; those appearing fewer than min_occurrences times are
    dropped. Renderings are resolved once per (term, chunk) and counted
    once per occurrence in that chunk, so a fully resolved record has one
    translation per occurrence. Resolution failures leave "" entries.
    """
    if min_occurrences < 2:
        raise ValueError("min_occurrences must be >= 2")
    if chunk_pairs is None:
        source_chunks = chunk_paragraphs(doc.source_paragraphs, budget,
                                         doc.source_lang)
        target_chunks = chunk_paragraphs(doc.target_paragraphs, budget,
                                         doc.target_lang)
        chunk_pairs = pair_chunks(source_chunks, target_chunks)
    else:
        source_chunks = [pair[0] for pair in chunk_pairs]
    source_text = "\n\n".join(doc.source_paragraphs)
    target_by_source = {pair[0].index: pair[1] for pair in chunk_pairs}

    template = load_template("terminology")
    extraction_system = template.render(doc.source_lang, doc.target_lang)
    candidates = _rule_based_candidates(source_text) | _llm_candidates(
        source_chunks, provider, extraction_system,
        temperature=temperature, max_output_tokens=max_output_tokens)

    records: list[TermRecord] = []
    for surface_form in sorted(candidates):
        occurrences = _find_occurrences(source_text, surface_form,
                                        source_chunks)
        if len(occurrences) >= min_occurrences:
            records.append(TermRecord(surface_form, occurrences))
    # drop single-token candidates wholly contained in a kept multi-token
    # term ("Prince" inside "Little Prince" is not a separate term)
    kept_longer = [r.surface_form.casefold() for r in records
                   if " " in r.surface_form]
    records = [r for r in records
               if " " in r.surface_form
               or not any(r.surface_form.casefold() in longer
                          for longer in kept_longer)]
    records.sort(key=lambda r: r.occurrences[0][1])

    resolution_system = resolution_prompt().render(doc.source_lang,
                                                   doc.target_lang)
    jobs: list[tuple[TermRecord, int, int]] = []  # record, chunk idx, count
    for record in records:
        per_chunk_counts: dict[int, int] = {}
        for chunk_index, _ in record.occurrences:
            per_chunk_counts[chunk_index] = per_chunk_counts.get(chunk_index, 0) + 1
        for chunk_index in sorted(per_chunk_counts):
            jobs.append((record, chunk_index, per_chunk_counts[chunk_index]))

    def resolve(job: tuple[TermRecord, int, int]) -> str:
        record, chunk_index, _ = job
        source_chunk = next(c for c in source_chunks if c.index == chunk_index)
        target_chunk = target_by_source.get(chunk_index)
        if target_chunk is None:
            log.warning("no target chunk paired with source chunk %d; "
                        "term %r left unresolved", chunk_index,
                        record.surface_form)
            return ""
        user_prompt = (f"Term: {record.surface_form}\n\n"
                       f"Source passage:\n{source_chunk.text.strip()}\n\n"
                       f"Translation passage:\n{target_chunk.text.strip()}")
        request = CompletionRequest(model_id=provider.model_id,
                                    system_prompt=resolution_system,
                                    user_prompt=user_prompt,
                                    temperature=temperature,
                                    max_output_tokens=max_output_tokens)
        response = provider.complete(request)
        obj = extract_first_json_object(response.text)
        rendering = obj.get("translation") if isinstance(obj, dict) else None
        if not isinstance(rendering, str):
            log.warning("unresolvable rendering for term %r in chunk %d",
                        record.surface_form, chunk_index)
            return ""
        return rendering

    if jobs:
        workers = max(1, min(len(jobs), getattr(provider, "max_concurrency", 4)))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            renderings = list(pool.map(resolve, jobs))
        for (record, _, count), rendering in zip(jobs, renderings):
            record.translations.extend([rendering] * count)
    return records


def terminology_score(terms: Sequence[TermRecord]) -> tuple[float, dict[str, Any]]:
    """S_T plus findings. Empty term list scores 1.0 (nothing to keep
    consistent). Unresolved renderings ("") count in the denominator but
    never as the modal variant."""
    if not terms:
        return 1.0, {"terms": [], "inconsistent_terms": [],
                     "notes": ["no key terms found"]}
    term_entries = []
    inconsistent = []
    consistencies = []
    for record in terms:
        total = len(record.occurrences)
        variant_counts: dict[str, int] = {}
        for rendering in record.translations:
            variant = normalize_variant(rendering)
            if variant:
                variant_counts[variant] = variant_counts.get(variant, 0) + 1
        modal = max(variant_counts.values()) if variant_counts else 0
        consistency = modal / total if total else 1.0
        consistencies.append(consistency)
        entry = {
            "surface_form": record.surface_form,
            "occurrences": total,
            "chunks": sorted({ci for ci, _ in record.occurrences}),
            "variants": dict(sorted(variant_counts.items())),
            "consistency": consistency,
        }
        term_entries.append(entry)
        if len(variant_counts) >= 2:
            inconsistent.append(entry)
    score = sum(consistencies) / len(consistencies)
    return score, {"terms": term_entries, "inconsistent_terms": inconsistent,
                   "notes": []}


def terminology_report(terms: Sequence[TermRecord]) -> AgentReport:
    score, findings = terminology_score(terms)
    return AgentReport(agent="terminology", score=score, per_chunk=[],
                       findings=findings)


# --- narrative and style ---------------------------------------------------

def _label_from(extras: Mapping[str, Any], key: str) -> PerspectiveLabel:
    raw = extras.get(key)
    if isinstance(raw, str) and raw in PERSPECTIVE_VALUES:
        return PerspectiveLabel(raw)
    return UNKNOWN


def narrative_report(chunk_pairs: Sequence[tuple[Chunk, Chunk]], provider,
                     template: PromptTemplate | None = None, *,
                     source_lang: LanguageTag | str,
                     target_lang: LanguageTag | str,
                     blend: float = DEFAULT_NARRATIVE_BLEND,
                     temperature: float = DEFAULT_TEMPERATURE,
                     max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS) -> AgentReport:
    """Narrative perspective consistency over all chunk pairs.

    S_N = blend * label_match_ratio + (1 - blend) * mean(LLM scores).
    Unknown labels never match; unparseable chunks score 0, label unknown.
    """
    if not chunk_pairs:
        raise ValueError("chunk_pairs must be non-empty")
    if not 0.0 <= blend <= 1.0:
        raise ValueError(f"blend must be in [0, 1], got {blend}")
    if template is None:
        template = load_template("narrative")
    system = template.render(source_lang, target_lang)
    prompts = [_chunk_pair_prompt(sc, tc) for sc, tc in chunk_pairs]
    verdicts = _request_verdicts(provider, system, prompts,
                                 temperature=temperature,
                                 max_output_tokens=max_output_tokens)

    per_chunk: list[tuple[int, float, str]] = []
    perspectives = []
    deviations = []
    warnings = []
    matches = 0
    score_sum = 0.0
    for (source_chunk, _), verdict in zip(chunk_pairs, verdicts):
        index = source_chunk.index
        if isinstance(verdict, UnparseableVerdict):
            warnings.append(f"chunk {index}: unparseable verdict ({verdict})")
            source_label = target_label = UNKNOWN
            score, feedback, evidence = 0.0, f"verdict unavailable: {verdict}", []
        else:
            source_label = _label_from(verdict.extras, "source_perspective")
            target_label = _label_from(verdict.extras, "target_perspective")
            score, feedback = verdict.score, verdict.feedback
            evidence = [list(pair) for pair in verdict.evidence]
        matched = (source_label == target_label
                   and source_label.value != "unknown")
        if matched:
            matches += 1
        else:
            deviations.append({"chunk": index,
                               "source_perspective": source_label.value,
                               "target_perspective": target_label.value,
                               "evidence": evidence})
        score_sum += score
        per_chunk.append((index, score, feedback))
        perspectives.append({"chunk": index,
                             "source_perspective": source_label.value,
                             "target_perspective": target_label.value,
                             "matched": matched})

    n = len(chunk_pairs)
    match_ratio = matches / n
    llm_mean = score_sum / n
    s_n = blend * match_ratio + (1.0 - blend) * llm_mean
    findings = {"perspectives": perspectives, "deviations": deviations,
                "warnings": warnings, "match_ratio": match_ratio,
                "llm_mean": llm_mean, "blend": blend}
    return AgentReport(agent="narrative", score=s_n, per_chunk=per_chunk,
                       findings=findings)


def style_report(chunk_pairs: Sequence[tuple[Chunk, Chunk]], provider,
                 template: PromptTemplate | None = None, *,
                 source_lang: LanguageTag | str,
                 target_lang: LanguageTag | str,
                 temperature: float = DEFAULT_TEMPERATURE,
                 max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS) -> AgentReport:
    """Stylistic fidelity: S_S = unweighted mean of per-chunk scores, with
    unparseable chunks scored 0 and flagged."""
    if not chunk_pairs:
        raise ValueError("chunk_pairs must be non-empty")
    if template is None:
        template = load_template("style")
    system = template.render(source_lang, target_lang)
    prompts = [_chunk_pair_prompt(sc, tc) for sc, tc in chunk_pairs]
    verdicts = _request_verdicts(provider, system, prompts,
                                 temperature=temperature,
                                 max_output_tokens=max_output_tokens)

    per_chunk: list[tuple[int, float, str]] = []
    examples = []
    warnings = []
    score_sum = 0.0
    for (source_chunk, _), verdict in zip(chunk_pairs, verdicts):
        index = source_chunk.index
        if isinstance(verdict, UnparseableVerdict):
            warnings.append(f"chunk {index}: unparseable verdict ({verdict})")
            score, feedback = 0.0, f"verdict unavailable: {verdict}"
        else:
            score, feedback = verdict.score, verdict.feedback
            if verdict.evidence:
                examples.append({"chunk": index,
                                 "evidence": [list(p) for p in verdict.evidence]})
        score_sum += score
        per_chunk.append((index, score, feedback))

    s_s = score_sum / len(chunk_pairs)
    findings = {"examples": examples, "warnings": warnings}
    return AgentReport(agent="style", score=s_s, per_chunk=per_chunk,
                       findings=findings)


def translate(source_paragraphs: Sequence[str], provider,
              template: PromptTemplate | None = None, *,
              source_lang: LanguageTag | str, target_lang: LanguageTag | str,
              budget: TokenBudget | None = None,
              temperature: float = DEFAULT_TEMPERATURE,
              max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS) -> list[str]:
    """Translate per chunk; output order follows chunk order. The user
    prompt is the chunk text verbatim, so an echo provider returns the
    input unchanged."""
    if not source_paragraphs:
        raise EmptyDocumentError("no source paragraphs to translate")
    if template is None:
        template = load_template("translation")
    system = template.render(source_lang, target_lang)
    chunks = chunk_paragraphs(source_paragraphs, budget,
                              source_lang if isinstance(source_lang, LanguageTag)
                              else None)

    def one(chunk: Chunk) -> str:
        request = CompletionRequest(model_id=provider.model_id,
                                    system_prompt=system,
                                    user_prompt=chunk.text,
                                    temperature=temperature,
                                    max_output_tokens=max_output_tokens)
        return provider.complete(request).text

    workers = max(1, min(len(chunks), getattr(provider, "max_concurrency", 4)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, chunks))
