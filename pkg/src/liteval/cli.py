"""Command-line entry point.

Commands: evaluate, baseline, correlate, stats, translate. Exit codes are
stable API: 0 success, 2 user/validation error, 3 provider/runtime error.
Errors are printed as one-line JSON diagnostics on stderr. ``--mock`` runs
the full pipeline against a canned-response fixture, offline and
bit-deterministic (the report timestamp is pinned to the epoch).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from . import agents as agents_mod
from . import baselines
from .backend import HttpProvider, MockProvider
from .chunker import MIN_MAX_TOKENS, TokenBudget, tokenize
from .config import RunConfig, load_config_file
from .coordinator import dumps_report, render_markdown
from .corpus import (
    LanguageTag,
    compute_stats,
    load_parallel_document,
    load_parallel_jsonl,
)
from .errors import BackendError, LitevalError, UnparseableVerdict
from .pipeline import evaluate_document, tool_version

EXIT_OK = 0
EXIT_USER_ERROR = 2
EXIT_PROVIDER_ERROR = 3

GRANULARITY_CAVEAT = (
    "Pearson computed over the rows of the scores table as given "
    "(system-level granularity). Correlations reported elsewhere may use a "
    "different granularity (e.g., per segment) and are not directly "
    "comparable.")

_METRIC_FUNCS = {
    "bleu": None,  # corpus-level, handled separately
    "meteor": baselines.meteor,
    "rouge1": baselines.rouge1,
    "rougeL": baselines.rouge_l,
}

# METEOR here is the exact-match variant; label it so in output
_METRIC_LABELS = {"bleu": "bleu", "meteor": "meteor-exact",
                  "rouge1": "rouge1", "rougeL": "rougeL"}


def _diagnostic(kind: str, message: str) -> None:
    print(json.dumps({"error": kind, "message": message}, ensure_ascii=False),
          file=sys.stderr)


def _write_or_print(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _language(tag: str) -> LanguageTag:
    return LanguageTag(tag.lower())


def _load_run_config(args: argparse.Namespace) -> RunConfig:
    if getattr(args, "config", None):
        config = RunConfig.from_file(args.config)
    else:
        config = RunConfig()
    if getattr(args, "max_tokens", None) is not None:
        config.max_tokens = args.max_tokens
    if getattr(args, "temperature", None) is not None:
        config.temperature = args.temperature
    return config


def _make_provider(args: argparse.Namespace, config: RunConfig):
    if getattr(args, "mock", None):
        return MockProvider.from_fixture(args.mock)
    if config.provider is not None:
        return HttpProvider(config.provider)
    raise ValueError("no provider configured: pass --mock <fixture> or a "
                     "--config file with a [provider] section")


def _load_document(args: argparse.Namespace):
    source_lang = _language(args.source_lang)
    target_lang = _language(args.target_lang)
    if getattr(args, "jsonl", False):
        return load_parallel_jsonl(args.source, source_lang, target_lang,
                                   title=args.title)
    if args.target is None:
        raise ValueError("a target file is required unless --jsonl is used")
    return load_parallel_document(args.source, args.target, source_lang,
                                  target_lang, title=args.title)


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _load_run_config(args)
    doc = _load_document(args)
    provider = _make_provider(args, config)
    report = evaluate_document(doc, provider, config,
                               deterministic_timestamp=bool(args.mock))
    json_text = dumps_report(report)
    if args.output:
        Path(args.output).write_text(json_text, encoding="utf-8")
        if args.format == "markdown":
            md_path = Path(args.output).with_suffix(".md")
            md_path.write_text(render_markdown(report), encoding="utf-8")
    else:
        if args.format == "markdown":
            sys.stdout.write(render_markdown(report))
        else:
            sys.stdout.write(json_text)
    for warning in doc.alignment_warnings:
        print(json.dumps({"warning": warning}, ensure_ascii=False),
              file=sys.stderr)
    return EXIT_OK


def _paragraph_diff(hyp_paragraphs: Sequence[str],
                    ref_paragraphs: Sequence[str]) -> str:
    lines = [f"hypothesis has {len(hyp_paragraphs)} paragraphs, "
             f"reference has {len(ref_paragraphs)}"]
    for i in range(max(len(hyp_paragraphs), len(ref_paragraphs))):
        hyp = hyp_paragraphs[i][:40] if i < len(hyp_paragraphs) else "<missing>"
        ref = ref_paragraphs[i][:40] if i < len(ref_paragraphs) else "<missing>"
        if hyp == "<missing>" or ref == "<missing>":
            lines.append(f"paragraph {i}: hyp={hyp!r} ref={ref!r}")
    return "; ".join(lines)


def cmd_baseline(args: argparse.Namespace) -> int:
    from .corpus import _read_paragraph_blocks
    from .errors import EmptyDocumentError, LengthMismatchError

    hyp_paragraphs = _read_paragraph_blocks(args.hypothesis)
    ref_paragraphs = _read_paragraph_blocks(args.reference)
    if not hyp_paragraphs:
        raise EmptyDocumentError(f"{args.hypothesis}: no non-blank paragraphs")
    if not ref_paragraphs:
        raise EmptyDocumentError(f"{args.reference}: no non-blank paragraphs")
    if len(hyp_paragraphs) != len(ref_paragraphs):
        raise LengthMismatchError(
            _paragraph_diff(hyp_paragraphs, ref_paragraphs))

    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    unknown = [m for m in metrics if m not in _METRIC_FUNCS]
    if unknown:
        raise ValueError(f"unknown metrics: {', '.join(unknown)} "
                         f"(choose from {', '.join(_METRIC_FUNCS)})")

    hyp_tokens = [tokenize(p) for p in hyp_paragraphs]
    ref_tokens = [tokenize(p) for p in ref_paragraphs]
    smoothing = args.smoothing

    rows: list[dict[str, Any]] = []
    for metric in metrics:
        label = _METRIC_LABELS[metric]
        for i, (hyp, ref) in enumerate(zip(hyp_tokens, ref_tokens)):
            if metric == "bleu":
                score = baselines.bleu([hyp], [ref], smoothing=smoothing)
            else:
                score = _METRIC_FUNCS[metric](hyp, ref)
            rows.append({"pair": str(i), "metric": label,
                         "value": score.value})
        if metric == "bleu":
            corpus_value = baselines.bleu(hyp_tokens, ref_tokens,
                                          smoothing=smoothing).value
        else:
            per_pair = [r["value"] for r in rows if r["metric"] == label]
            corpus_value = sum(per_pair) / len(per_pair)
        rows.append({"pair": "corpus", "metric": label,
                     "value": corpus_value})

    if args.format == "json":
        _write_or_print(json.dumps({"rows": rows}, indent=2) + "\n",
                        args.output)
    else:
        lines = ["pair,metric,value"]
        lines += [f"{r['pair']},{r['metric']},{r['value']:.6f}" for r in rows]
        _write_or_print("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def cmd_correlate(args: argparse.Namespace) -> int:
    metric_x, metric_y = args.metrics.split(",", 1) if "," in args.metrics \
        else (args.metrics, "")
    metric_x, metric_y = metric_x.strip(), metric_y.strip()
    if not metric_x or not metric_y:
        raise ValueError("--metrics needs two comma-separated metric names")

    by_key: dict[tuple[str, str], dict[str, float]] = {}
    seen_metrics: set[str] = set()
    with open(args.table, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        required = {"system", "work", "metric", "value"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"{args.table}: header must contain "
                             f"{', '.join(sorted(required))}")
        for row in reader:
            key = (row["system"], row["work"])
            seen_metrics.add(row["metric"])
            by_key.setdefault(key, {})[row["metric"]] = float(row["value"])

    for metric in (metric_x, metric_y):
        if metric not in seen_metrics:
            raise ValueError(f"metric column {metric!r} not found in table "
                             f"(has: {', '.join(sorted(seen_metrics))})")

    points = []
    for key in sorted(by_key):
        values = by_key[key]
        if metric_x in values and metric_y in values:
            points.append({"system": key[0], "work": key[1],
                           "x": values[metric_x], "y": values[metric_y]})
    xs = [p["x"] for p in points]
    ys = [p["y"] for p in points]
    r = baselines.pearson(xs, ys)

    result = {"metric_x": metric_x, "metric_y": metric_y, "pearson": r,
              "n": len(points), "points": points,
              "caveat": GRANULARITY_CAVEAT}
    _write_or_print(json.dumps(result, indent=2) + "\n", args.output)
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    doc = _load_document(args)
    stats = compute_stats(doc)
    payload = {
        "title": doc.title,
        "source_paragraphs": stats.source_paragraphs,
        "target_paragraphs": stats.target_paragraphs,
        "source_sentences": stats.source_sentences,
        "target_sentences": stats.target_sentences,
        "source_avg_sentences": stats.source_avg_sentences,
        "target_avg_sentences": stats.target_avg_sentences,
        "sentence_pairs": stats.sentence_pairs,
        "note": stats.note,
        "alignment_warnings": doc.alignment_warnings,
    }
    if args.format == "json":
        _write_or_print(json.dumps(payload, indent=2, ensure_ascii=False) + "\n",
                        args.output)
    else:
        lines = [
            f"work: {doc.title}",
            f"paragraphs: {stats.source_paragraphs} source / "
            f"{stats.target_paragraphs} target",
            f"sentence pairs: {stats.sentence_pairs}",
            f"avg sentences per paragraph: {stats.source_avg_sentences:.1f} "
            f"source / {stats.target_avg_sentences:.1f} target",
        ]
        if stats.note:
            lines.append(f"note: {stats.note}")
        lines += [f"warning: {w}" for w in doc.alignment_warnings]
        _write_or_print("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def cmd_translate(args: argparse.Namespace) -> int:
    config = _load_run_config(args)
    provider = _make_provider(args, config)
    source_lang = _language(args.source_lang)
    target_lang = _language(args.target_lang)
    from .corpus import _read_paragraph_blocks
    from .errors import EmptyDocumentError

    paragraphs = _read_paragraph_blocks(args.source)
    if not paragraphs:
        raise EmptyDocumentError(f"{args.source}: no non-blank paragraphs")
    segments = agents_mod.translate(paragraphs, provider,
                                    source_lang=source_lang,
                                    target_lang=target_lang,
                                    budget=TokenBudget(config.max_tokens),
                                    temperature=config.temperature,
                                    max_output_tokens=config.max_output_tokens)
    header = (f"# Machine-generated translation ({source_lang} -> "
              f"{target_lang}) by liteval {tool_version()}; "
              f"model {provider.model_id}. Review before use.\n\n")
    _write_or_print(header + "".join(segments), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liteval",
        description="Reference-free literary translation quality scoring "
                    "with LLM agents, plus reference-based baselines.")
    parser.add_argument("--version", action="version",
                        version=f"liteval {tool_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_provider_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="TOML or JSON config file")
        p.add_argument("--mock", metavar="FIXTURE",
                       help="run offline against a canned-response fixture")
        p.add_argument("--max-tokens", type=int, default=None,
                       help=f"chunk token budget (min {MIN_MAX_TOKENS})")
        p.add_argument("--temperature", type=float, default=None)

    def add_doc_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("source", help="source-language text file")
        p.add_argument("target", nargs="?", default=None,
                       help="target-language text file (omit with --jsonl)")
        p.add_argument("--source-lang", required=True)
        p.add_argument("--target-lang", required=True)
        p.add_argument("--title", default=None)
        p.add_argument("--jsonl", action="store_true",
                       help="source is a JSONL file of "
                            '{"source", "target"} paragraph pairs')

    p_eval = sub.add_parser("evaluate", help="run the agent pipeline on a "
                                             "parallel document")
    add_doc_args(p_eval)
    add_provider_flags(p_eval)
    p_eval.add_argument("--output", help="write the JSON report here")
    p_eval.add_argument("--format", choices=("json", "markdown"),
                        default="json",
                        help="with --output, markdown is written beside the "
                             "JSON report")
    p_eval.set_defaults(func=cmd_evaluate)

    p_base = sub.add_parser("baseline", help="reference-based metrics over "
                                             "aligned paragraph pairs")
    p_base.add_argument("hypothesis", help="hypothesis (translation) file")
    p_base.add_argument("reference", help="reference translation file")
    p_base.add_argument("--metrics", default="bleu,meteor,rouge1,rougeL")
    p_base.add_argument("--no-smoothing", dest="smoothing",
                        action="store_false",
                        help="disable add-one BLEU smoothing")
    p_base.add_argument("--output")
    p_base.add_argument("--format", choices=("csv", "json"), default="csv")
    p_base.set_defaults(func=cmd_baseline)

    p_corr = sub.add_parser("correlate", help="Pearson correlation between "
                                              "two metric columns of a "
                                              "scores table")
    p_corr.add_argument("table", help="CSV with header system,work,metric,value")
    p_corr.add_argument("--metrics", required=True,
                        help="two comma-separated metric names, e.g. "
                             "otqs,bleu")
    p_corr.add_argument("--output")
    p_corr.set_defaults(func=cmd_correlate)

    p_stats = sub.add_parser("stats", help="corpus statistics for a "
                                           "parallel document")
    add_doc_args(p_stats)
    p_stats.add_argument("--output")
    p_stats.add_argument("--format", choices=("text", "json"), default="text")
    p_stats.set_defaults(func=cmd_stats)

    p_tr = sub.add_parser("translate", help="translate a document chunk by "
                                            "chunk (convenience)")
    p_tr.add_argument("source", help="source-language text file")
    p_tr.add_argument("--source-lang", required=True)
    p_tr.add_argument("--target-lang", required=True)
    add_provider_flags(p_tr)
    p_tr.add_argument("--output")
    p_tr.set_defaults(func=cmd_translate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BackendError, UnparseableVerdict) as exc:
        _diagnostic(type(exc).__name__, str(exc))
        return EXIT_PROVIDER_ERROR
    except FileNotFoundError as exc:
        _diagnostic("FileNotFound", str(exc))
        return EXIT_USER_ERROR
    except (LitevalError, ValueError, KeyError, OSError) as exc:
        _diagnostic(type(exc).__name__, str(exc))
        return EXIT_USER_ERROR


if __name__ == "__main__":
    sys.exit(main())
