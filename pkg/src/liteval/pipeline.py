"""End-to-end document evaluation: chunk both sides, run the three agents
concurrently, and assemble the coordinator report."""

from __future__ import annotations

import datetime
from concurrent.futures import ThreadPoolExecutor
from importlib import metadata

from .agents import (
    AgentReport,
    extract_key_terms,
    narrative_report,
    style_report,
    terminology_report,
)
from .chunker import TokenBudget, chunk_paragraphs, pair_chunks
from .config import RunConfig
from .coordinator import (
    DocumentMeta,
    EvaluationReport,
    Provenance,
    assemble_report,
)
from .corpus import ParallelDocument
from .prompts import prompt_checksums

EPOCH_TIMESTAMP = "1970-01-01T00:00:00Z"


def tool_version() -> str:
    try:
        return metadata.version("liteval")
    except metadata.PackageNotFoundError:
        return "unknown"


def _timestamp(deterministic: bool) -> str:
    if deterministic:
        return EPOCH_TIMESTAMP
    now = datetime.datetime.now(datetime.timezone.utc)
    return now.strftime("%Y-%m-%dT%H:%M:%SZ")


def evaluate_document(doc: ParallelDocument, provider, config: RunConfig, *,
                      deterministic_timestamp: bool = False) -> EvaluationReport:
    """Run the full evaluation pipeline on one parallel document.

    The three agents run concurrently over the same immutable chunk
    pairing; each fans its per-chunk calls through the provider, whose
    concurrency cap is the single throttle.
    """
    budget = TokenBudget(config.max_tokens)
    source_chunks = chunk_paragraphs(doc.source_paragraphs, budget,
                                     doc.source_lang)
    target_chunks = chunk_paragraphs(doc.target_paragraphs, budget,
                                     doc.target_lang)
    pairs = pair_chunks(source_chunks, target_chunks)

    def run_terminology() -> AgentReport:
        terms = extract_key_terms(doc, provider, config.min_term_occurrences,
                                  chunk_pairs=pairs,
                                  temperature=config.temperature,
                                  max_output_tokens=config.max_output_tokens)
        return terminology_report(terms)

    def run_narrative() -> AgentReport:
        return narrative_report(pairs, provider,
                                source_lang=doc.source_lang,
                                target_lang=doc.target_lang,
                                blend=config.narrative_blend,
                                temperature=config.temperature,
                                max_output_tokens=config.max_output_tokens)

    def run_style() -> AgentReport:
        return style_report(pairs, provider,
                            source_lang=doc.source_lang,
                            target_lang=doc.target_lang,
                            temperature=config.temperature,
                            max_output_tokens=config.max_output_tokens)

    with ThreadPoolExecutor(max_workers=3) as pool:
        futures = [pool.submit(run_terminology), pool.submit(run_narrative),
                   pool.submit(run_style)]
        reports = [future.result() for future in futures]

    document = DocumentMeta(title=doc.title,
                            source_lang=doc.source_lang.code,
                            target_lang=doc.target_lang.code,
                            chunks=len(source_chunks))
    provenance = Provenance(
        model=getattr(provider, "model_id", "unknown"),
        temperature=config.temperature,
        prompt_checksums=prompt_checksums(),
        timestamp=_timestamp(deterministic_timestamp),
        tool_version=tool_version(),
        config=config.snapshot(),
    )
    return assemble_report(reports, config.weights, document, provenance)
