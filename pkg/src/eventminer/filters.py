"""Article-level inclusion filters: single-incident answer and event scope.

A second, cheaper prompt classifies each summary as covering one event, one
focal event plus mentions, or several distinct events. Only the last is
excluded; anything unparseable counts as multiple_distinct because a
mis-scoped article pollutes downstream features more than a dropped one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from eventminer.errors import ConsistencyError
from eventminer.parsing import ExtractionRecord, TriState
from eventminer.prompt import build_scope_prompt
from eventminer.textnorm import fold
from eventminer.transport import ChatTransport, TransportPolicy, with_retries


class EventScope(enum.Enum):
    SINGLE_EVENT = "single_event"
    FOCAL_PLUS_MENTIONS = "focal_plus_mentions"
    MULTIPLE_DISTINCT = "multiple_distinct"


def classify_event_scope(summary: str, transport: ChatTransport,
                         policy: TransportPolicy,
                         key: str | None = None, sleep=None) -> EventScope:
    """Ask the transport which scope a summary falls under."""
    if not summary.strip():
        raise ValueError("scope classification requires a non-empty summary")
    prompt = build_scope_prompt(summary)
    kwargs = {} if sleep is None else {"sleep": sleep}
    raw = with_retries(
        lambda: transport.complete(policy.model_id, policy.temperature,
                                   prompt, key=key),
        policy, **kwargs)
    return interpret_scope_answer(raw)


def interpret_scope_answer(raw: str) -> EventScope:
    folded = fold(raw)
    if "focal" in folded:
        return EventScope.FOCAL_PLUS_MENTIONS
    if "multiple" in folded or "distinct" in folded:
        return EventScope.MULTIPLE_DISTINCT
    if "one specific event" in folded or "single" in folded or "specific" in folded:
        return EventScope.SINGLE_EVENT
    return EventScope.MULTIPLE_DISTINCT


@dataclass
class FilterReport:
    input_count: int = 0
    retained_count: int = 0
    dropped: dict[str, int] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"input_count": self.input_count,
                "retained_count": self.retained_count,
                "dropped": dict(self.dropped)}


def apply_inclusion_filters(records: list[ExtractionRecord],
                            scopes: dict[str, EventScope],
                            ) -> tuple[list[ExtractionRecord], FilterReport]:
    """Keep records that answer A=yes and do not cover multiple events.

    Each record is judged on its own; adding or removing others never flips
    a decision.
    """
    report = FilterReport(input_count=len(records))
    retained: list[ExtractionRecord] = []
    for record in records:
        if record.article_id not in scopes:
            raise ConsistencyError(
                f"no scope classification for {record.article_id!r}")
        if record.is_single_incident is not TriState.YES:
            report.dropped["not_single_incident"] = \
                report.dropped.get("not_single_incident", 0) + 1
            continue
        if scopes[record.article_id] is EventScope.MULTIPLE_DISTINCT:
            report.dropped["multi_event"] = \
                report.dropped.get("multi_event", 0) + 1
            continue
        retained.append(record)
    report.retained_count = len(retained)
    return retained, report
