import random

import pytest

from liteval.agents import AgentReport
from liteval.coordinator import (
    DocumentMeta,
    Provenance,
    WeightVector,
    assemble_report,
    compute_otqs,
    dumps_report,
    loads_report,
    render_markdown,
    report_from_dict,
    report_to_dict,
)
from liteval.errors import (
    DuplicateAgentReportError,
    InvalidWeightsError,
    MissingAgentReportError,
    ScoreOutOfRangeError,
)


def test_default_weights():
    weights = WeightVector()
    assert weights.terminology == pytest.approx(0.3)
    assert weights.narrative == pytest.approx(0.3)
    assert weights.style == pytest.approx(0.4)
    assert weights.as_dict() == {"terminology": 0.3, "narrative": 0.3,
                                 "style": 0.4}


def test_weight_validation():
    WeightVector(0.2, 0.2, 0.6)
    WeightVector(1.0, 0.0, 0.0)
    with pytest.raises(InvalidWeightsError):
        WeightVector(0.5, 0.5, 0.5)
    with pytest.raises(InvalidWeightsError):
        WeightVector(-0.1, 0.6, 0.5)
    with pytest.raises(InvalidWeightsError):
        WeightVector(0.3, 0.3, 0.4 + 1e-6)
    # a hair inside the tolerance is accepted
    WeightVector(0.3, 0.3, 0.4 + 1e-10)


def test_compute_otqs_examples():
    assert compute_otqs(1.0, 1.0, 1.0) == pytest.approx(1.0)
    assert compute_otqs(0.0, 0.0, 0.0) == pytest.approx(0.0)
    assert compute_otqs(0.8, 0.9, 0.7) == pytest.approx(
        0.3 * 0.8 + 0.3 * 0.9 + 0.4 * 0.7)
    assert compute_otqs(0.5, 0.25, 0.75, WeightVector(0.1, 0.2, 0.7)) == \
        pytest.approx(0.1 * 0.5 + 0.2 * 0.25 + 0.7 * 0.75)
    # sequences work too
    assert compute_otqs(0.5, 0.25, 0.75, (0.1, 0.2, 0.7)) == \
        pytest.approx(0.1 * 0.5 + 0.2 * 0.25 + 0.7 * 0.75)


def test_compute_otqs_rejects_bad_scores():
    with pytest.raises(ScoreOutOfRangeError):
        compute_otqs(1.1, 0.5, 0.5)
    with pytest.raises(ScoreOutOfRangeError):
        compute_otqs(0.5, -0.2, 0.5)


def test_compute_otqs_equal_scores_pass_through():
    rng = random.Random(53)
    for _ in range(100):
        raw = [rng.random() + 1e-9 for _ in range(3)]
        total = sum(raw)
        weights = WeightVector(*(r / total for r in raw))
        s = rng.random()
        assert compute_otqs(s, s, s, weights) == pytest.approx(s, abs=1e-9)


def test_compute_otqs_monotone_in_each_score():
    rng = random.Random(59)
    for _ in range(50):
        base = [rng.random() * 0.5 for _ in range(3)]
        bumped = base[:]
        i = rng.randrange(3)
        bumped[i] = base[i] + 0.3
        assert compute_otqs(*bumped) > compute_otqs(*base)


def _reports():
    return [
        AgentReport("terminology", 0.9, [], {"terms": [],
                                             "inconsistent_terms": [],
                                             "notes": []}),
        AgentReport("narrative", 0.8, [(0, 0.8, "steady")],
                    {"perspectives": [], "deviations": [], "warnings": [],
                     "match_ratio": 1.0, "llm_mean": 0.6, "blend": 0.5}),
        AgentReport("style", 0.7, [(0, 0.7, "faithful")],
                    {"examples": [], "warnings": []}),
    ]


def _provenance(config=None):
    return Provenance(model="mock", temperature=0.1,
                      prompt_checksums={"translation.txt": "ab" * 32},
                      timestamp="1970-01-01T00:00:00Z",
                      tool_version="0.1.0", config=config)


def _document():
    return DocumentMeta(title="conte", source_lang="fr", target_lang="en",
                        chunks=3)


def test_assemble_report():
    report = assemble_report(_reports(), WeightVector(), _document(),
                             _provenance())
    assert report.otqs == pytest.approx(0.3 * 0.9 + 0.3 * 0.8 + 0.4 * 0.7)
    assert [a.agent for a in report.agent_reports] == [
        "terminology", "narrative", "style"]


def test_assemble_report_order_independent():
    reports = _reports()
    shuffled = [reports[2], reports[0], reports[1]]
    report = assemble_report(shuffled, WeightVector(), _document(),
                             _provenance())
    assert [a.agent for a in report.agent_reports] == [
        "terminology", "narrative", "style"]


def test_assemble_report_missing_agent():
    with pytest.raises(MissingAgentReportError):
        assemble_report(_reports()[:2], WeightVector(), _document(),
                        _provenance())


def test_assemble_report_duplicate_agent():
    reports = _reports() + [_reports()[0]]
    with pytest.raises(DuplicateAgentReportError):
        assemble_report(reports, WeightVector(), _document(), _provenance())


def test_report_dict_schema():
    report = assemble_report(_reports(), WeightVector(), _document(),
                             _provenance(config={"max_tokens": 4096}))
    data = report_to_dict(report)
    assert data["schema_version"] == 1
    assert set(data) == {"schema_version", "otqs", "weights", "agents",
                         "document", "provenance"}
    assert data["weights"] == {"terminology": 0.3, "narrative": 0.3,
                               "style": 0.4}
    assert [a["agent"] for a in data["agents"]] == [
        "terminology", "narrative", "style"]
    narrative = data["agents"][1]
    assert narrative["per_chunk"] == [{"chunk": 0, "score": 0.8,
                                       "feedback": "steady"}]
    assert data["document"] == {"title": "conte", "source_lang": "fr",
                                "target_lang": "en", "chunks": 3}
    assert data["provenance"]["config"] == {"max_tokens": 4096}
    assert data["provenance"]["timestamp"] == "1970-01-01T00:00:00Z"


def test_report_round_trip():
    report = assemble_report(_reports(), WeightVector(), _document(),
                             _provenance(config={"a": 1}))
    text = dumps_report(report)
    loaded = loads_report(text)
    assert loaded == report
    assert dumps_report(loaded) == text


def test_report_from_dict_rejects_unknown_schema():
    report = assemble_report(_reports(), WeightVector(), _document(),
                             _provenance())
    data = report_to_dict(report)
    data["schema_version"] = 99
    with pytest.raises(ValueError):
        report_from_dict(data)


def test_render_markdown_mentions_scores():
    report = assemble_report(_reports(), WeightVector(), _document(),
                             _provenance())
    text = render_markdown(report)
    assert "conte" in text
    assert f"{report.otqs:.4f}" in text
    assert "terminology" in text
    assert "narrative" in text
    assert "style" in text
