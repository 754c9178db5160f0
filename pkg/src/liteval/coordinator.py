"""Score combination and report assembly.

OTQS = w_T * S_T + w_N * S_N + w_S * S_S with non-negative weights that
sum to 1 (default 0.3 / 0.3 / 0.4). The assembled report serializes to a
stable, versioned JSON schema and round-trips losslessly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .agents import AGENT_KINDS, AgentReport
from .errors import (
    DuplicateAgentReportError,
    InvalidWeightsError,
    MissingAgentReportError,
    ScoreOutOfRangeError,
)

SCHEMA_VERSION = 1
WEIGHT_SUM_TOLERANCE = 1e-9

DEFAULT_TERMINOLOGY_WEIGHT = 0.3
DEFAULT_NARRATIVE_WEIGHT = 0.3
DEFAULT_STYLE_WEIGHT = 0.4


@dataclass(frozen=True)
class WeightVector:
    terminology: float = DEFAULT_TERMINOLOGY_WEIGHT
    narrative: float = DEFAULT_NARRATIVE_WEIGHT
    style: float = DEFAULT_STYLE_WEIGHT

    def __post_init__(self) -> None:
        for name, value in self.as_dict().items():
            if value < 0:
                raise InvalidWeightsError(f"{name} weight is negative: {value}")
        total = self.terminology + self.narrative + self.style
        if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise InvalidWeightsError(f"weights must sum to 1 "
                                      f"(got {total!r})")

    def as_dict(self) -> dict[str, float]:
        return {"terminology": self.terminology, "narrative": self.narrative,
                "style": self.style}


def compute_otqs(terminology: float, narrative: float, style: float,
                 weights: WeightVector | Sequence[float] | None = None) -> float:
    """Weighted average of the three agent scores."""
    if weights is None:
        weights = WeightVector()
    elif not isinstance(weights, WeightVector):
        weights = WeightVector(*weights)
    for name, score in (("terminology", terminology),
                        ("narrative", narrative), ("style", style)):
        if not 0.0 <= score <= 1.0:
            raise ScoreOutOfRangeError(f"{name} score out of [0, 1]: {score}")
    return (weights.terminology * terminology
            + weights.narrative * narrative
            + weights.style * style)


@dataclass(frozen=True)
class DocumentMeta:
    title: str
    source_lang: str
    target_lang: str
    chunks: int


@dataclass(frozen=True)
class Provenance:
    model: str
    temperature: float
    prompt_checksums: Mapping[str, str]
    timestamp: str
    tool_version: str
    config: Mapping[str, Any] | None = None


@dataclass
class EvaluationReport:
    otqs: float
    weights: WeightVector
    agent_reports: list[AgentReport]
    document: DocumentMeta
    provenance: Provenance


def assemble_report(reports: Sequence[AgentReport], weights: WeightVector,
                    document: DocumentMeta,
                    provenance: Provenance) -> EvaluationReport:
    """Combine exactly one report per agent into an EvaluationReport."""
    by_kind: dict[str, AgentReport] = {}
    for report in reports:
        if report.agent in by_kind:
            raise DuplicateAgentReportError(
                f"two reports for agent {report.agent!r}")
        by_kind[report.agent] = report
    missing = [kind for kind in AGENT_KINDS if kind not in by_kind]
    if missing:
        raise MissingAgentReportError(f"missing agent reports: "
                                      f"{', '.join(missing)}")
    ordered = [by_kind[kind] for kind in AGENT_KINDS]
    otqs = compute_otqs(by_kind["terminology"].score,
                        by_kind["narrative"].score,
                        by_kind["style"].score, weights)
    return EvaluationReport(otqs=otqs, weights=weights,
                            agent_reports=ordered, document=document,
                            provenance=provenance)


def report_to_dict(report: EvaluationReport) -> dict[str, Any]:
    provenance: dict[str, Any] = {
        "model": report.provenance.model,
        "temperature": report.provenance.temperature,
        "prompt_checksums": dict(report.provenance.prompt_checksums),
        "timestamp": report.provenance.timestamp,
        "tool_version": report.provenance.tool_version,
    }
    if report.provenance.config is not None:
        provenance["config"] = dict(report.provenance.config)
    return {
        "schema_version": SCHEMA_VERSION,
        "otqs": report.otqs,
        "weights": report.weights.as_dict(),
        "agents": [
            {
                "agent": a.agent,
                "score": a.score,
                "per_chunk": [{"chunk": c, "score": s, "feedback": f}
                              for c, s, f in a.per_chunk],
                "findings": a.findings,
            }
            for a in report.agent_reports
        ],
        "document": {
            "title": report.document.title,
            "source_lang": report.document.source_lang,
            "target_lang": report.document.target_lang,
            "chunks": report.document.chunks,
        },
        "provenance": provenance,
    }


def report_from_dict(data: Mapping[str, Any]) -> EvaluationReport:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema_version: {version!r}")
    weights = WeightVector(**data["weights"])
    agents = [
        AgentReport(
            agent=a["agent"],
            score=a["score"],
            per_chunk=[(c["chunk"], c["score"], c["feedback"])
                       for c in a["per_chunk"]],
            findings=a["findings"],
        )
        for a in data["agents"]
    ]
    doc = data["document"]
    prov = data["provenance"]
    return EvaluationReport(
        otqs=data["otqs"],
        weights=weights,
        agent_reports=agents,
        document=DocumentMeta(title=doc["title"],
                              source_lang=doc["source_lang"],
                              target_lang=doc["target_lang"],
                              chunks=doc["chunks"]),
        provenance=Provenance(model=prov["model"],
                              temperature=prov["temperature"],
                              prompt_checksums=prov["prompt_checksums"],
                              timestamp=prov["timestamp"],
                              tool_version=prov["tool_version"],
                              config=prov.get("config")),
    )


def dumps_report(report: EvaluationReport) -> str:
    return json.dumps(report_to_dict(report), indent=2,
                      ensure_ascii=False, sort_keys=False) + "\n"


def loads_report(text: str) -> EvaluationReport:
    return report_from_dict(json.loads(text))


def render_markdown(report: EvaluationReport) -> str:
    """Human-readable summary of a report."""
    doc = report.document
    lines = [
        f"# Translation quality report: {doc.title}",
        "",
        f"*{doc.source_lang} -> {doc.target_lang}, {doc.chunks} chunk(s), "
        f"model `{report.provenance.model}`, {report.provenance.timestamp}*",
        "",
        f"## OTQS: {report.otqs:.4f}",
        "",
        "| Agent | Weight | Score |",
        "| --- | --- | --- |",
    ]
    weights = report.weights.as_dict()
    for agent in report.agent_reports:
        lines.append(f"| {agent.agent} | {weights[agent.agent]:.2f} "
                     f"| {agent.score:.4f} |")
    for agent in report.agent_reports:
        lines.extend(["", f"## {agent.agent.capitalize()} agent", ""])
        if agent.per_chunk:
            lines.append("| Chunk | Score | Feedback |")
            lines.append("| --- | --- | --- |")
            for chunk, score, feedback in agent.per_chunk:
                clean = feedback.replace("|", "\\|").replace("\n", " ")
                lines.append(f"| {chunk} | {score:.4f} | {clean} |")
        notable = _notable_findings(agent)
        if notable:
            lines.append("")
            lines.extend(notable)
    return "\n".join(lines) + "\n"


def _notable_findings(agent: AgentReport) -> list[str]:
    lines: list[str] = []
    findings = agent.findings
    if agent.agent == "terminology":
        for entry in findings.get("inconsistent_terms", []):
            variants = ", ".join(f"{v} ({n}x)"
                                 for v, n in entry["variants"].items())
            lines.append(f"- inconsistent term **{entry['surface_form']}**: "
                         f"{variants}")
        for note in findings.get("notes", []):
            lines.append(f"- {note}")
    elif agent.agent == "narrative":
        for deviation in findings.get("deviations", []):
            lines.append(f"- chunk {deviation['chunk']}: source "
                         f"{deviation['source_perspective']}, target "
                         f"{deviation['target_perspective']}")
    for warning in findings.get("warnings", []):
        lines.append(f"- warning: {warning}")
    return lines
