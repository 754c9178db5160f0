"""Versioned prompt templates.

Template bodies live as text files under ``prompts/`` and carry
``[source language]`` / ``[target language]`` placeholders. Each agent
template pairs with a fixed JSON format suffix demanding machine-readable
output; the narrative suffix additionally asks for perspective labels.
Reports record a sha256 checksum of every prompt file so a run can be
reproduced against the exact prompt text it used.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources

PLACEHOLDER_SOURCE = "[source language]"
PLACEHOLDER_TARGET = "[target language]"

TEMPLATE_IDS = ("translation", "terminology", "narrative", "style")

# template id -> format suffix file ("" = free-form output, no suffix)
_SUFFIX_FILES = {
    "translation": "",
    "terminology": "term_extraction.txt",
    "narrative": "format_suffix_narrative.txt",
    "style": "format_suffix.txt",
}


class _HasLanguageName:
    # structural stand-in for corpus.LanguageTag to avoid a hard import cycle
    display_name: str


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    body: str
    format_suffix: str

    def render(self, source_lang, target_lang) -> str:
        """Fill placeholders with language display names and append the
        format suffix. Accepts LanguageTag-like objects or plain strings."""
        text = self.body
        if self.format_suffix:
            text = text + "\n\n" + self.format_suffix
        return (text
                .replace(PLACEHOLDER_SOURCE, _language_name(source_lang))
                .replace(PLACEHOLDER_TARGET, _language_name(target_lang)))


def _language_name(lang) -> str:
    return lang if isinstance(lang, str) else lang.display_name


def _prompt_dir():
    return resources.files(__package__) / "prompts"


def prompt_file_text(name: str) -> str:
    """Raw text of a bundled prompt file, trailing newline stripped."""
    return (_prompt_dir() / name).read_text(encoding="utf-8").rstrip("\n")


def load_template(template_id: str) -> PromptTemplate:
    if template_id not in TEMPLATE_IDS:
        raise ValueError(f"unknown template id: {template_id!r} "
                         f"(expected one of {TEMPLATE_IDS})")
    suffix_file = _SUFFIX_FILES[template_id]
    return PromptTemplate(
        id=template_id,
        body=prompt_file_text(f"{template_id}.txt"),
        format_suffix=prompt_file_text(suffix_file) if suffix_file else "",
    )


def resolution_prompt() -> PromptTemplate:
    """Helper template used to locate one term's rendering in a target
    chunk; returns {"translation": ...}."""
    return PromptTemplate(id="term_resolution",
                          body=prompt_file_text("term_resolution.txt"),
                          format_suffix="")


def prompt_checksums() -> dict[str, str]:
    """sha256 of every bundled prompt file, keyed by file name."""
    checksums = {}
    for entry in sorted(_prompt_dir().iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".txt"):
            digest = hashlib.sha256(entry.read_bytes()).hexdigest()
            checksums[entry.name] = digest
    return checksums
