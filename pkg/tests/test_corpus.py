import json
import random

import pytest

from liteval.corpus import (
    LanguageTag,
    ParallelDocument,
    build_document,
    compute_stats,
    load_abbreviations,
    load_parallel_document,
    load_parallel_jsonl,
    split_paragraph_blocks,
    split_sentences,
)
from liteval.errors import EmptyDocumentError, InvalidEncodingError


def test_language_tag_validation():
    assert LanguageTag("en").code == "en"
    assert str(LanguageTag("pt-br")) == "pt-br"
    for bad in ("EN", "e", "en_US", "", "en-"):
        with pytest.raises(ValueError):
            LanguageTag(bad)


def test_language_tag_display_name():
    assert LanguageTag("fr").display_name == "French"
    assert LanguageTag("ko").display_name == "Korean"
    assert LanguageTag("pt-br").display_name == "Portuguese"
    assert LanguageTag("zu").display_name == "zu"


def test_split_paragraph_blocks():
    text = "First line.\nSecond line.\n\n\n  Indented start.\nTail.  \n\n"
    blocks = split_paragraph_blocks(text)
    assert blocks == ["First line.\nSecond line.", "  Indented start.\nTail."]
    assert split_paragraph_blocks("") == []
    assert split_paragraph_blocks(" \n\t\n") == []
    assert split_paragraph_blocks("a\r\n\r\nb") == ["a", "b"]


def _sentences(paragraph, lang=None, **kwargs):
    spans = split_sentences(paragraph, lang, **kwargs)
    return [paragraph[a:b] for a, b in spans]


def test_split_sentences_basic():
    assert _sentences("Hello world.") == ["Hello world."]
    assert _sentences("One. Two! Three?") == ["One.", "Two!", "Three?"]
    assert _sentences("no terminal punctuation") == ["no terminal punctuation"]


def test_split_sentences_punctuation_runs():
    assert _sentences("What?! Really.") == ["What?!", "Really."]
    assert _sentences("Wait... done.") == ["Wait...", "done."]


def test_split_sentences_korean_terminals():
    assert _sentences("안녕하세요。 반갑습니다。") == ["안녕하세요。", "반갑습니다。"]
    assert _sentences("어린 왕자가 물었다. 여우는 대답하지 않았다.",
                      LanguageTag("ko")) == [
        "어린 왕자가 물었다.", "여우는 대답하지 않았다."]


def test_split_sentences_abbreviation_guard():
    en = LanguageTag("en")
    assert _sentences("Mr. Smith left.", en) == ["Mr. Smith left."]
    assert _sentences("Fruit, e.g. apples, is cheap.", en) == [
        "Fruit, e.g. apples, is cheap."]
    # guard applies to single periods only, and only for listed words
    assert _sentences("Smith left. Mr. Jones stayed.", en) == [
        "Smith left.", "Mr. Jones stayed."]


def test_split_sentences_initials():
    assert _sentences("J. K. Rowling wrote. It sold.") == [
        "J. K. Rowling wrote.", "It sold."]


def test_split_sentences_custom_guard():
    text = "Prof. Lee spoke."
    assert _sentences(text) == ["Prof.", "Lee spoke."]
    assert _sentences(text, abbreviations=frozenset({"prof"})) == [text]


def test_split_sentences_wordless_tail_merges():
    assert _sentences("Il parla. »") == ["Il parla. »"]
    # a close quote followed by more words starts the next span instead
    assert _sentences("« Bonjour. » Elle sourit.") == [
        "« Bonjour.", "» Elle sourit."]


def test_split_sentences_rejects_blank():
    with pytest.raises(ValueError):
        split_sentences("   ")


def test_split_sentences_spans_cover_non_whitespace():
    rng = random.Random(17)
    words = ["lune", "mer", "M.", "star", "밤", "e.g.", "fin", "»", "«"]
    tails = [".", "!", "?", "...", "?!", ""]
    for _ in range(200):
        parts = []
        for _ in range(rng.randint(1, 6)):
            parts.append(" ".join(rng.choice(words)
                                  for _ in range(rng.randint(1, 5))))
            parts.append(rng.choice(tails) + " ")
        paragraph = "".join(parts).strip()
        if not paragraph:
            continue
        spans = split_sentences(paragraph, LanguageTag("en"))
        assert spans == sorted(spans)
        covered = set()
        for a, b in spans:
            assert 0 <= a < b <= len(paragraph)
            assert not paragraph[a].isspace()
            assert not paragraph[b - 1].isspace()
            overlap = covered.intersection(range(a, b))
            assert not overlap
            covered.update(range(a, b))
        for i, ch in enumerate(paragraph):
            if not ch.isspace():
                assert i in covered, (paragraph, spans, i)


def test_load_abbreviations_bundled():
    en = load_abbreviations(LanguageTag("en"))
    assert "mr" in en and "e.g" in en
    fr = load_abbreviations(LanguageTag("fr"))
    assert "mme" in fr
    assert load_abbreviations(LanguageTag("zu")) == frozenset()


def test_load_abbreviations_override(tmp_path):
    (tmp_path / "de.txt").write_text("# comment\nz.B.\nusw\n", encoding="utf-8")
    de = load_abbreviations(LanguageTag("de"), tmp_path)
    assert de == frozenset({"z.b", "usw"})
    # missing override file falls back to the bundled list
    en = load_abbreviations(LanguageTag("en"), tmp_path)
    assert "mr" in en


def test_parallel_document_validation():
    en, fr = LanguageTag("en"), LanguageTag("fr")
    with pytest.raises(EmptyDocumentError):
        build_document([], ["x"], fr, en, "t")
    with pytest.raises(EmptyDocumentError):
        build_document(["x"], ["  "], fr, en, "t")


def test_build_document_alignment_warnings():
    en, fr = LanguageTag("en"), LanguageTag("fr")
    doc = build_document(["Un.", "Deux.", "Trois."], ["One.", "Two."],
                         fr, en, "t")
    assert doc.aligned_paragraphs == 2
    assert len(doc.alignment_warnings) == 1
    assert "source" in doc.alignment_warnings[0]
    assert "2" in doc.alignment_warnings[0]

    even = build_document(["Un."], ["One."], fr, en, "t")
    assert even.alignment_warnings == []


def test_load_parallel_document(tmp_path):
    src = tmp_path / "conte.fr.txt"
    tgt = tmp_path / "conte.en.txt"
    src.write_text("Premier. Second.\n\nTroisième.\n", encoding="utf-8")
    tgt.write_text("First. Second.\n\nThird.\n", encoding="utf-8")
    doc = load_parallel_document(src, tgt, LanguageTag("fr"), LanguageTag("en"))
    assert doc.title == "conte.fr"
    assert doc.source_paragraphs == ["Premier. Second.", "Troisième."]
    assert [len(s) for s in doc.source_sentences] == [2, 1]
    assert doc.alignment_warnings == []

    titled = load_parallel_document(src, tgt, LanguageTag("fr"),
                                    LanguageTag("en"), title="Conte")
    assert titled.title == "Conte"


def test_load_parallel_document_errors(tmp_path):
    good = tmp_path / "good.txt"
    good.write_text("Text.", encoding="utf-8")
    with pytest.raises(FileNotFoundError):
        load_parallel_document(tmp_path / "missing.txt", good,
                               LanguageTag("fr"), LanguageTag("en"))

    bad = tmp_path / "latin1.txt"
    bad.write_bytes("Café noir.".encode("latin-1"))
    with pytest.raises(InvalidEncodingError):
        load_parallel_document(bad, good, LanguageTag("fr"), LanguageTag("en"))

    empty = tmp_path / "empty.txt"
    empty.write_text("\n\n  \n", encoding="utf-8")
    with pytest.raises(EmptyDocumentError):
        load_parallel_document(empty, good, LanguageTag("fr"), LanguageTag("en"))


def test_load_parallel_jsonl(tmp_path):
    path = tmp_path / "pairs.jsonl"
    rows = [{"source": "Un chat.", "target": "A cat."},
            {"source": "Deux chiens.", "target": "Two dogs."}]
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n\n",
                    encoding="utf-8")
    doc = load_parallel_jsonl(path, LanguageTag("fr"), LanguageTag("en"))
    assert doc.source_paragraphs == ["Un chat.", "Deux chiens."]
    assert doc.target_paragraphs == ["A cat.", "Two dogs."]
    assert doc.title == "pairs"
    assert doc.alignment_warnings == []


def test_load_parallel_jsonl_errors(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text("not json\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_parallel_jsonl(path, LanguageTag("fr"), LanguageTag("en"))

    path.write_text('{"source": "x"}\n', encoding="utf-8")
    with pytest.raises(ValueError):
        load_parallel_jsonl(path, LanguageTag("fr"), LanguageTag("en"))

    path.write_text('{"source": "x", "target": "  "}\n', encoding="utf-8")
    with pytest.raises(ValueError):
        load_parallel_jsonl(path, LanguageTag("fr"), LanguageTag("en"))

    path.write_text("\n", encoding="utf-8")
    with pytest.raises(EmptyDocumentError):
        load_parallel_jsonl(path, LanguageTag("fr"), LanguageTag("en"))


def test_compute_stats_balanced():
    doc = build_document(["Un. Deux.", "Trois."], ["One. Two.", "Three."],
                         LanguageTag("fr"), LanguageTag("en"), "t")
    stats = compute_stats(doc)
    assert stats.source_paragraphs == 2
    assert stats.target_paragraphs == 2
    assert stats.source_sentences == 3
    assert stats.target_sentences == 3
    assert stats.source_avg_sentences == pytest.approx(1.5)
    assert stats.sentence_pairs == 3
    assert stats.note is None


def test_compute_stats_notes_surplus():
    doc = build_document(["Un. Deux. Trois."], ["One. Two."],
                         LanguageTag("fr"), LanguageTag("en"), "t")
    stats = compute_stats(doc)
    assert stats.source_sentences == 3
    assert stats.target_sentences == 2
    assert stats.sentence_pairs == 2
    assert stats.note is not None
    assert "source" in stats.note


def test_document_round_trip_through_jsonl(tmp_path):
    rng = random.Random(29)
    words = ["lune", "mer", "roi", "nuit", "renard", "étoile"]
    rows = []
    for _ in range(12):
        mk = lambda: " ".join(rng.choice(words)
                              for _ in range(rng.randint(1, 8))) + "."
        rows.append({"source": mk(), "target": mk()})
    path = tmp_path / "r.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in rows), encoding="utf-8")
    doc = load_parallel_jsonl(path, LanguageTag("fr"), LanguageTag("en"))
    assert doc.source_paragraphs == [r["source"] for r in rows]
    assert doc.target_paragraphs == [r["target"] for r in rows]
    assert isinstance(doc, ParallelDocument)
