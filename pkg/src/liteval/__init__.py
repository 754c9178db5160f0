"""liteval: reference-free literary translation quality scoring.

Three LLM agents (terminology consistency, narrative perspective
consistency, stylistic consistency) score a source/translation pair per
chunk; a coordinator combines them into an overall score (OTQS) with a
full findings report. Classic reference-based baselines (BLEU, METEOR,
ROUGE) and Pearson correlation are included for comparison studies.
"""

from .backend import (
    AgentVerdict,
    CompletionRequest,
    CompletionResponse,
    HttpProvider,
    MockProvider,
    ProviderSettings,
    parse_verdict,
)
from .baselines import MetricScore, bleu, meteor, pearson, rouge1, rouge_l
from .chunker import Chunk, TokenBudget, chunk_document, count_tokens, tokenize
from .config import RunConfig
from .coordinator import (
    EvaluationReport,
    WeightVector,
    assemble_report,
    compute_otqs,
)
from .corpus import (
    CorpusStats,
    LanguageTag,
    ParallelDocument,
    compute_stats,
    load_parallel_document,
    split_sentences,
)
from .pipeline import evaluate_document

__all__ = [
    "AgentVerdict",
    "Chunk",
    "CompletionRequest",
    "CompletionResponse",
    "CorpusStats",
    "EvaluationReport",
    "HttpProvider",
    "LanguageTag",
    "MetricScore",
    "MockProvider",
    "ParallelDocument",
    "ProviderSettings",
    "RunConfig",
    "TokenBudget",
    "WeightVector",
    "assemble_report",
    "bleu",
    "chunk_document",
    "compute_otqs",
    "compute_stats",
    "count_tokens",
    "evaluate_document",
    "load_parallel_document",
    "meteor",
    "parse_verdict",
    "pearson",
    "rouge1",
    "rouge_l",
    "split_sentences",
    "tokenize",
]
