"""Article featurization: prompt out, raw response back, record parsed.

Bounded parallel extraction keyed by article_id, so completion order never
changes the output. Raw responses reach the sink before parsing is attempted;
a response we paid for is never lost to a parser bug.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from eventminer.corpus import Article
from eventminer.errors import ParseFailure, TransportExhausted
from eventminer.parsing import ExtractionRecord, parse_response
from eventminer.prompt import PromptTemplate, build_prompt
from eventminer.transport import (ChatTransport, RateLimiter, TransportPolicy,
                                  with_retries)

RawSink = Callable[[str, str], None]


def extract_article(article: Article, transport: ChatTransport,
                    policy: TransportPolicy, template: PromptTemplate,
                    raw_sink: RawSink | None = None,
                    sleep=None,
                    diagnostics: dict[str, str] | None = None,
                    ) -> tuple[str, ExtractionRecord]:
    """Featurize one article. Returns (raw_response, record).

    Raises TransportExhausted when retries run out and ParseFailure when the
    response has no recoverable labels; in the latter case the raw response
    has already been handed to `raw_sink`.
    """
    prompt = build_prompt(article, template)
    kwargs = {} if sleep is None else {"sleep": sleep}
    raw = with_retries(
        lambda: transport.complete(policy.model_id, policy.temperature,
                                   prompt, key=article.article_id),
        policy, **kwargs)
    if raw_sink is not None:
        raw_sink(article.article_id, raw)
    record = parse_response(raw, article_id=article.article_id,
                            diagnostics=diagnostics)
    return raw, record


@dataclass
class ExtractionOutcome:
    records: list[ExtractionRecord] = field(default_factory=list)
    raw_responses: dict[str, str] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)  # id -> reason
    diagnostics: dict[str, dict[str, str]] = field(default_factory=dict)

    def counts(self) -> dict[str, int]:
        reasons: dict[str, int] = {}
        for reason in self.failures.values():
            reasons[reason] = reasons.get(reason, 0) + 1
        return {"extracted": len(self.records), **reasons}


def run_extraction(articles: list[Article], transport: ChatTransport,
                   policy: TransportPolicy, template: PromptTemplate,
                   max_in_flight: int = 1,
                   raw_sink: RawSink | None = None) -> ExtractionOutcome:
    """Extract a batch with bounded parallelism and a shared rate limiter."""
    outcome = ExtractionOutcome()
    limiter = (RateLimiter(policy.rate_limit)
               if policy.rate_limit is not None else None)
    by_id: dict[str, ExtractionRecord] = {}

    def work(article: Article):
        diag: dict[str, str] = {}

        def sink(article_id: str, raw: str):
            outcome.raw_responses[article_id] = raw
            if raw_sink is not None:
                raw_sink(article_id, raw)

        if limiter is not None:
            limiter.acquire()
        raw, record = extract_article(article, transport, policy, template,
                                      raw_sink=sink, diagnostics=diag)
        return record, diag

    workers = max(1, max_in_flight)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {a.article_id: pool.submit(work, a) for a in articles}
        for article in articles:
            future = futures[article.article_id]
            try:
                record, diag = future.result()
                by_id[article.article_id] = record
                if diag:
                    outcome.diagnostics[article.article_id] = diag
            except TransportExhausted:
                outcome.failures[article.article_id] = "transport_exhausted"
            except ParseFailure:
                outcome.failures[article.article_id] = "parse_failure"

    # Input order, not completion order, decides the output sequence.
    outcome.records = [by_id[a.article_id] for a in articles
                       if a.article_id in by_id]
    return outcome
