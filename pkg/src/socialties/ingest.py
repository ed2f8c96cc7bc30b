"""Parsers turning interaction logs into edge instances.

Two line formats are supported, both UTF-8 with literal tabs:

* coauthorship: ``year<TAB>author1|author2|...<TAB>title`` — one paper per
  line; a paper with m authors expands to C(m,2) instances in the year's
  snapshot, all carrying the tokenized title.
* Q&A events: ``epoch<TAB>src<TAB>dst<TAB>kind<TAB>text`` — one directed
  event per line, bucketed into minute snapshots (epoch // 60); direction is
  discarded, self-events are dropped and counted.

Snapshot indices are dense ranks of the observed periods by default; the
Q&A parser can keep the full raw minute range instead, which changes
persistence denominators and is therefore never implicit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations

from . import stemming
from .temporal_graph import EdgeInstance, Interner

log = logging.getLogger(__name__)

# fixed english stop list (common-word list adapted to alphanumeric
# tokenization: apostrophe contractions appear as their split fragments)
STOP_WORDS = frozenset("""
i me my myself we our ours ourselves you your yours yourself yourselves he
him his himself she her hers herself it its itself they them their theirs
themselves what which who whom this that these those am is are was were be
been being have has had having do does did doing a an the and but if or
because as until while of at by for with about against between into through
during before after above below to from up down in out on off over under
again further then once here there when where why how all any both each few
more most other some such no nor not only own same so than too very s t can
will just don should now d ll m o re ve y ain aren couldn didn doesn hadn
hasn haven isn ma mightn mustn needn shan shouldn wasn weren won wouldn
""".split())

STOP_LIST_VERSION = "english-1"


@dataclass(frozen=True)
class TokenizerConfig:
    stop_words: frozenset[str] = STOP_WORDS
    stop_source: str = STOP_LIST_VERSION
    stemming: bool = True
    lowercase: bool = True
    min_token_length: int = 2

    def describe(self) -> dict:
        """Echo for run metadata (the stop list itself is identified by name)."""
        return {
            "stop_source": self.stop_source,
            "stop_words": len(self.stop_words),
            "stemming": self.stemming,
            "lowercase": self.lowercase,
            "min_token_length": self.min_token_length,
        }


def _split_words(text: str) -> list[str]:
    words = []
    cur = []
    for ch in text:
        if ch.isalnum():
            cur.append(ch)
        elif cur:
            words.append("".join(cur))
            cur = []
    if cur:
        words.append("".join(cur))
    return words


def tokenize(text: str, config: TokenizerConfig = TokenizerConfig()) -> frozenset[str]:
    """lowercase, split on non-alphanumerics, filter, stem, filter again.

    The post-stem filter pass repeats the stop-word/length test because
    stemming can produce a stop word ("willing" -> "will"); without it the
    output would not be stable under re-tokenization.
    """
    if config.lowercase:
        text = text.lower()
    words = _split_words(text)
    kept = [
        w for w in words
        if len(w) >= config.min_token_length and w not in config.stop_words
    ]
    if config.stemming:
        kept = [stemming.stem(w) for w in kept]
        kept = [
            w for w in kept
            if len(w) >= config.min_token_length and w not in config.stop_words
        ]
    return frozenset(kept)


@dataclass(frozen=True)
class Calendar:
    """Maps snapshot indices back to original time periods."""

    unit: str  # "year" | "minute"
    labels: tuple[int, ...] = ()  # compacted mode: index -> period
    start: int | None = None  # raw mode: index -> start + index
    length: int = 0

    @property
    def t(self) -> int:
        return self.length if self.start is not None else len(self.labels)

    def label(self, s: int) -> int:
        if self.start is not None:
            if not 0 <= s < self.length:
                raise IndexError(f"snapshot {s} outside calendar of length {self.length}")
            return self.start + s
        return self.labels[s]

    def describe(self) -> dict:
        if self.start is not None:
            return {"unit": self.unit, "mode": "raw", "start": self.start, "t": self.length}
        return {"unit": self.unit, "mode": "compacted", "labels": list(self.labels)}


class ParseError(ValueError):
    def __init__(self, lineno: int, line: str, reason: str):
        self.lineno = lineno
        self.reason = reason
        shown = line if len(line) <= 80 else line[:77] + "..."
        super().__init__(f"line {lineno}: {reason}: {shown!r}")


@dataclass
class IngestResult:
    instances: list[EdgeInstance]
    t: int
    calendar: Calendar
    actors: Interner
    attributes: Interner
    counters: dict[str, int]
    tokenizer: TokenizerConfig = field(default_factory=TokenizerConfig)

    def network(self):
        from .temporal_graph import build

        return build(self.instances, self.t)


def _dense_rank(periods: set[int]) -> dict[int, int]:
    return {p: i for i, p in enumerate(sorted(periods))}


def parse_coauthorship(
    lines,
    config: TokenizerConfig = TokenizerConfig(),
    *,
    strict: bool = False,
) -> IngestResult:
    """Parse ``year<TAB>authors<TAB>title`` lines into clique instances.

    Malformed lines (field count, non-numeric year, empty participant) are
    skipped and counted, or abort immediately under ``strict``.  Single-author
    papers expand to nothing and are counted.  Duplicate names within one
    author list are collapsed before expansion.
    """
    records = []  # (year, author names, token strings)
    counters = {
        "lines": 0,
        "records": 0,
        "malformed": 0,
        "single_participant": 0,
        "duplicate_participants": 0,
        "instances": 0,
    }
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        counters["lines"] += 1

        def bad(reason: str):
            if strict:
                raise ParseError(lineno, line, reason)
            counters["malformed"] += 1
            log.warning("skipping line %d: %s", lineno, reason)

        fields = line.split("\t")
        if len(fields) != 3:
            bad(f"expected 3 tab-separated fields, got {len(fields)}")
            continue
        year_text, author_field, title = fields
        try:
            year = int(year_text)
        except ValueError:
            bad(f"non-numeric year {year_text!r}")
            continue
        authors = author_field.split("|")
        if any(a == "" for a in authors):
            bad("empty participant name")
            continue
        unique = list(dict.fromkeys(authors))
        if len(unique) < len(authors):
            counters["duplicate_participants"] += 1
        counters["records"] += 1
        if len(unique) < 2:
            counters["single_participant"] += 1
            continue
        records.append((year, unique, sorted(tokenize(title, config))))

    actors = Interner()
    attributes = Interner()
    snap_of = _dense_rank({year for year, _, _ in records})
    instances = []
    for year, authors, tokens in records:
        attr_ids = frozenset(attributes.intern(tok) for tok in tokens)
        ids = [actors.intern(a) for a in authors]
        for a, b in combinations(ids, 2):
            instances.append(EdgeInstance(a, b, snap_of[year], attr_ids))
    counters["instances"] = len(instances)
    calendar = Calendar(unit="year", labels=tuple(sorted(snap_of)))
    return IngestResult(
        instances=instances,
        t=len(snap_of),
        calendar=calendar,
        actors=actors,
        attributes=attributes,
        counters=counters,
        tokenizer=config,
    )


def parse_qa(
    lines,
    config: TokenizerConfig = TokenizerConfig(),
    *,
    strict: bool = False,
    compact_snapshots: bool = True,
) -> IngestResult:
    """Parse ``epoch<TAB>src<TAB>dst<TAB>kind<TAB>text`` event lines.

    Events are undirected interactions in minute buckets.  With
    ``compact_snapshots`` (default) only observed minutes become snapshots,
    densely reindexed in time order; otherwise every minute in the observed
    range is a snapshot, which preserves raw persistence denominators.
    """
    events = []  # (minute, src, dst, tokens)
    counters = {
        "lines": 0,
        "records": 0,
        "malformed": 0,
        "self_events": 0,
        "instances": 0,
    }
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line:
            continue
        counters["lines"] += 1

        def bad(reason: str):
            if strict:
                raise ParseError(lineno, line, reason)
            counters["malformed"] += 1
            log.warning("skipping line %d: %s", lineno, reason)

        fields = line.split("\t")
        if len(fields) != 5:
            bad(f"expected 5 tab-separated fields, got {len(fields)}")
            continue
        epoch_text, src, dst, _kind, text = fields
        try:
            epoch = int(epoch_text)
        except ValueError:
            bad(f"non-numeric epoch {epoch_text!r}")
            continue
        if src == "" or dst == "":
            bad("empty participant name")
            continue
        counters["records"] += 1
        if src == dst:
            counters["self_events"] += 1
            continue
        events.append((epoch // 60, src, dst, sorted(tokenize(text, config))))

    minutes = {minute for minute, _, _, _ in events}
    actors = Interner()
    attributes = Interner()
    if compact_snapshots:
        snap_of = _dense_rank(minutes)
        calendar = Calendar(unit="minute", labels=tuple(sorted(minutes)))
        t = len(minutes)
    else:
        start = min(minutes) if minutes else 0
        t = (max(minutes) - start + 1) if minutes else 0
        snap_of = {m: m - start for m in minutes}
        calendar = Calendar(unit="minute", start=start, length=t)
    instances = []
    for minute, src, dst, tokens in events:
        attr_ids = frozenset(attributes.intern(tok) for tok in tokens)
        instances.append(
            EdgeInstance(actors.intern(src), actors.intern(dst), snap_of[minute], attr_ids)
        )
    counters["instances"] = len(instances)
    return IngestResult(
        instances=instances,
        t=t,
        calendar=calendar,
        actors=actors,
        attributes=attributes,
        counters=counters,
        tokenizer=config,
    )


def filter_by_activity(
    result: IngestResult,
    *,
    min_active_snapshots: int = 1,
    min_instances: int = 1,
) -> IngestResult:
    """Drop actors below the activity thresholds, with all their instances.

    Single pass: thresholds are evaluated against the unfiltered activity,
    so removing one actor never reclassifies another.  Counters gain
    ``filtered_actors`` and ``filtered_instances``.
    """
    snaps: dict[int, set[int]] = {}
    insts: dict[int, int] = {}
    for e in result.instances:
        for node in e.endpoints():
            snaps.setdefault(node, set()).add(e.snapshot)
            insts[node] = insts.get(node, 0) + 1
    keep = {
        u for u in insts
        if len(snaps[u]) >= min_active_snapshots and insts[u] >= min_instances
    }
    kept_instances = [
        e for e in result.instances if e.u in keep and e.v in keep
    ]
    counters = dict(result.counters)
    counters["filtered_actors"] = len(insts) - len(keep)
    counters["filtered_instances"] = len(result.instances) - len(kept_instances)
    counters["instances"] = len(kept_instances)
    if counters["filtered_instances"]:
        log.info(
            "activity filter removed %d actors / %d instances",
            counters["filtered_actors"],
            counters["filtered_instances"],
        )
    return IngestResult(
        instances=kept_instances,
        t=result.t,
        calendar=result.calendar,
        actors=result.actors,
        attributes=result.attributes,
        counters=counters,
        tokenizer=result.tokenizer,
    )
