"""Prompt construction for article featurization and scope classification.

The canonical 32-question template ships as packaged data so wording changes
never require a code edit. Rendering is deterministic: same template, same
article, byte-identical prompt.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from eventminer.corpus import Article
from eventminer.errors import ConfigError
from eventminer.parsing import LABELS


@dataclass(frozen=True)
class PromptTemplate:
    context_preamble: str
    questions: tuple[tuple[str, str], ...]
    formatting_instructions: str
    summary_request: str

    def __post_init__(self):
        labels = [label for label, _ in self.questions]
        if labels != LABELS:
            raise ConfigError(
                "template must contain exactly the 32 questions A..AF in order")


def load_prompt_template(path: str | Path | None = None) -> PromptTemplate:
    """Load the packaged template, or one from an explicit path."""
    if path is None:
        text = (resources.files("eventminer") / "data/prompt_template.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    try:
        data = json.loads(text)
        return PromptTemplate(
            context_preamble=data["context_preamble"],
            questions=tuple((label, q) for label, q in data["questions"]),
            formatting_instructions=data["formatting_instructions"],
            summary_request=data["summary_request"],
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad prompt template: {exc}") from exc


def build_prompt(article: Article, template: PromptTemplate) -> str:
    """Assemble the full prompt with the article text appended at the end.

    Article text passes through unmodified; semicolons and the like are the
    parser's concern.
    """
    blocks = [template.context_preamble]
    blocks.extend(f"{label}: {text}" for label, text in template.questions)
    blocks.append(template.formatting_instructions)
    blocks.append(template.summary_request)
    blocks.append(article.text)
    return "\n\n".join(blocks)


SCOPE_OPTIONS = (
    "one specific event",
    "one focal event and other events mentioned",
    "multiple distinct events equally",
)


def build_scope_prompt(summary: str) -> str:
    """Second-pass prompt asking whether a summary covers one event or many."""
    return (
        "The following is a summary of a news article. Does the summary "
        f"describe {SCOPE_OPTIONS[0]}, {SCOPE_OPTIONS[1]}, or "
        f"{SCOPE_OPTIONS[2]}? Answer with exactly one of these three "
        "phrases.\n\nSummary:\n" + summary
    )
