"""Temporal pattern mining over activity intervals.

Intervals are flattened to endpoint sequences: every interval contributes a
start symbol ``label+`` and an end symbol ``label-``, and symbols sharing a
timestamp share a slot. Keeping slots as sets is what lets "meet" and
"equal" stay distinguishable from "before" and "overlap" once the intervals
are gone.

Mining grows patterns one endpoint symbol at a time over projected
databases, either into a new slot (sequence extension) or into the last slot
(slot extension). An end symbol is only appended while the prefix holds an
unmatched start of the same label, so every emitted pattern describes
intervals rather than dangling endpoints.
"""

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Iterable, Mapping, Optional, Sequence, Union

from .constants import DEFAULT_DB_WINDOW_DAYS, PATTERNS_SCHEMA_VERSION
from .exceptions import DataError
from .properties import resolve_minsup
from .shal_types import ActivityOccurrence
from .utils import atomic_write_text, get_logger, read_text

logger = get_logger("tpminer")

Instant = Union[datetime, float, int]
SymbolSets = Sequence[frozenset]


@dataclass(frozen=True, order=True)
class EndpointSymbol:
    """The start (``label+``) or end (``label-``) of an activity interval.

    Ordering is (label, start before end), the canonical order inside a slot.
    """

    label: str
    is_end: bool = False

    def __post_init__(self):
        if not self.label:
            raise ValueError("endpoint symbol label must be non-empty")

    @classmethod
    def start(cls, label: str) -> "EndpointSymbol":
        return cls(label, False)

    @classmethod
    def end(cls, label: str) -> "EndpointSymbol":
        return cls(label, True)

    @property
    def polarity(self) -> str:
        return "-" if self.is_end else "+"

    def __str__(self) -> str:
        return f"{self.label}{self.polarity}"

    @classmethod
    def parse(cls, text: str) -> "EndpointSymbol":
        if len(text) < 2 or text[-1] not in "+-":
            raise DataError(f"endpoint symbol {text!r} must end in '+' or '-'")
        return cls(text[:-1], text[-1] == "-")


@dataclass(frozen=True)
class EndpointSlot:
    time: Instant
    symbols: frozenset


def _balanced(slots: Iterable[Iterable[EndpointSymbol]], require_closed: bool = True) -> bool:
    """Every end has a matching start in an earlier or the same slot; optionally all closed"""
    open_counts: dict[str, int] = defaultdict(int)
    for slot in slots:
        starts = {symbol.label for symbol in slot if not symbol.is_end}
        ends = {symbol.label for symbol in slot if symbol.is_end}
        for label in ends:
            if open_counts[label] + (label in starts) < 1:
                return False
        for label in starts:
            open_counts[label] += 1
        for label in ends:
            open_counts[label] -= 1
    return not require_closed or all(count == 0 for count in open_counts.values())


@dataclass(frozen=True)
class EndpointSequence:
    """Endpoint slots of one database entry, strictly increasing in time"""

    sid: str
    slots: tuple[EndpointSlot, ...]

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))
        for before, after in zip(self.slots, self.slots[1:]):
            if not before.time < after.time:
                raise ValueError(f"sequence {self.sid!r}: slot times must strictly increase")
        if not _balanced(slot.symbols for slot in self.slots):
            raise ValueError(f"sequence {self.sid!r}: start and end symbols are unbalanced")

    @property
    def symbol_sets(self) -> tuple[frozenset, ...]:
        return tuple(slot.symbols for slot in self.slots)

    def __len__(self) -> int:
        return len(self.slots)


@dataclass(frozen=True)
class TemporalPattern:
    """A frequent slot-subsequence of endpoint symbols and its support"""

    slots: tuple[tuple[EndpointSymbol, ...], ...]
    support: int = 0
    well_formed: bool = field(init=False)

    def __post_init__(self):
        canonical = tuple(tuple(sorted(set(slot))) for slot in self.slots)
        if any(not slot for slot in canonical):
            raise ValueError("temporal pattern slots must be non-empty")
        if self.support < 0:
            raise ValueError("support must be >= 0")
        object.__setattr__(self, "slots", canonical)
        object.__setattr__(self, "well_formed", _balanced(canonical))

    @classmethod
    def of(cls, *slots: Iterable[str], support: int = 0) -> "TemporalPattern":
        """Build a pattern from symbol strings, e.g. ``of(["a+"], ["a-"])``"""
        return cls(
            tuple(tuple(EndpointSymbol.parse(text) for text in slot) for slot in slots),
            support,
        )

    @property
    def size(self) -> int:
        """Number of symbols"""
        return sum(len(slot) for slot in self.slots)

    @property
    def last_symbol(self) -> Optional[EndpointSymbol]:
        return self.slots[-1][-1] if self.slots else None

    @property
    def key(self) -> tuple[tuple[str, ...], ...]:
        """Canonical serialization, used for ordering"""
        return tuple(tuple(str(symbol) for symbol in slot) for slot in self.slots)

    def prefix(self) -> "TemporalPattern":
        """The pattern without its final symbol (and its slot, if emptied)"""
        if not self.slots:
            raise ValueError("the empty pattern has no prefix")
        *head, last = self.slots
        if len(last) > 1:
            head.append(last[:-1])
        return TemporalPattern(tuple(head))

    def with_support(self, support: int) -> "TemporalPattern":
        return TemporalPattern(self.slots, support)

    def __str__(self) -> str:
        body = ",".join("{" + ",".join(slot) + "}" for slot in self.key)
        return f"<{body}>"

    def to_json(self) -> dict:
        return {"slots": [list(slot) for slot in self.key], "support": self.support, "well_formed": self.well_formed}

    @classmethod
    def from_json(cls, document: dict) -> "TemporalPattern":
        pattern = cls.of(*document["slots"], support=int(document["support"]))
        if "well_formed" in document and bool(document["well_formed"]) != pattern.well_formed:
            raise DataError(f"pattern {pattern} has an inconsistent well_formed flag")
        return pattern


@dataclass(frozen=True)
class ProjectedEntry:
    """One sequence of a projection.

    ``anchors`` are the slot indices where the prefix's final slot can be
    matched (``-1`` for the empty prefix). The leftmost anchor fixes where
    the suffix starts; the others keep slot extensions exact.
    """

    index: int
    sid: str
    anchors: tuple[int, ...]


@dataclass(frozen=True)
class ProjectedDatabase:
    """The suffixes of a database with respect to a prefix pattern"""

    prefix: TemporalPattern
    entries: tuple[ProjectedEntry, ...]
    source: tuple[EndpointSequence, ...] = field(repr=False)

    @classmethod
    def initial(cls, db: Sequence[EndpointSequence]) -> "ProjectedDatabase":
        source = tuple(db)
        entries = tuple(ProjectedEntry(i, seq.sid, (-1,)) for i, seq in enumerate(source))
        return cls(TemporalPattern((), len({seq.sid for seq in source})), entries, source)

    @property
    def support(self) -> int:
        return len({entry.sid for entry in self.entries})

    @property
    def suffixes(self) -> list[tuple[str, tuple[frozenset, ...]]]:
        """(sid, remaining slots), the first slot partial when the prefix ends mid-slot"""
        last = self.prefix.last_symbol
        result = []
        for entry in self.entries:
            slots = self.source[entry.index].symbol_sets
            first = entry.anchors[0]
            remaining = list(slots[first + 1 :])
            if first >= 0 and last is not None:
                partial = frozenset(symbol for symbol in slots[first] if symbol > last)
                if partial:
                    remaining.insert(0, partial)
            result.append((entry.sid, tuple(remaining)))
        return result


def _open_counts(pattern: TemporalPattern) -> dict[str, int]:
    counts: dict[str, int] = defaultdict(int)
    for slot in pattern.slots:
        for symbol in slot:
            counts[symbol.label] += -1 if symbol.is_end else 1
    return counts


def _extend(projection: ProjectedDatabase, symbol: EndpointSymbol, same_slot: bool) -> ProjectedDatabase:
    entries = []
    for entry in projection.entries:
        slots = projection.source[entry.index].slots
        if same_slot:
            anchors = tuple(j for j in entry.anchors if symbol in slots[j].symbols)
        else:
            anchors = tuple(
                k for k in range(entry.anchors[0] + 1, len(slots)) if symbol in slots[k].symbols
            )
        if anchors:
            entries.append(ProjectedEntry(entry.index, entry.sid, anchors))

    prefix_slots = list(projection.prefix.slots)
    if same_slot:
        prefix_slots[-1] = prefix_slots[-1] + (symbol,)
    else:
        prefix_slots.append((symbol,))
    support = len({entry.sid for entry in entries})
    return ProjectedDatabase(TemporalPattern(tuple(prefix_slots), support), tuple(entries), projection.source)


def project(
    db_or_projection: Union[Sequence[EndpointSequence], ProjectedDatabase],
    extension: EndpointSymbol,
    same_slot: bool = False,
) -> ProjectedDatabase:
    """
    Project a database (or a projection) by appending one symbol to the prefix.

    Args:
        db_or_projection: A list of sequences (empty prefix) or a projection
        extension: The symbol appended to the prefix
        same_slot: Append into the prefix's last slot instead of a new slot

    Returns:
        The projection of the extended prefix; sequences without a match drop out

    Raises:
        ValueError: If the extension is not admissible for the prefix
    """
    projection = (
        db_or_projection
        if isinstance(db_or_projection, ProjectedDatabase)
        else ProjectedDatabase.initial(db_or_projection)
    )
    last = projection.prefix.last_symbol
    if same_slot and (last is None or not extension > last):
        raise ValueError(f"{extension} cannot extend the last slot of {projection.prefix}")
    if extension.is_end and _open_counts(projection.prefix)[extension.label] < 1:
        raise ValueError(f"{extension} has no open start in {projection.prefix}")
    return _extend(projection, extension, same_slot)


def to_endpoint_sequence(
    intervals: Iterable[tuple[str, Instant, Instant]], sid: str
) -> EndpointSequence:
    """
    Flatten labeled intervals into an endpoint sequence.

    Args:
        intervals: (label, start, end) triples
        sid: Identifier of the resulting sequence

    Raises:
        ValueError: If an interval has start >= end, or two intervals of the
            same label start (or end) at the same instant
    """
    by_time: dict = defaultdict(set)
    for label, start, end in intervals:
        if not start < end:
            raise ValueError(f"interval {label!r} must have start < end, got [{start}, {end}]")
        for moment, symbol in ((start, EndpointSymbol.start(label)), (end, EndpointSymbol.end(label))):
            if symbol in by_time[moment]:
                raise ValueError(f"two {symbol} endpoints at {moment} cannot share a slot")
            by_time[moment].add(symbol)
    slots = tuple(EndpointSlot(moment, frozenset(by_time[moment])) for moment in sorted(by_time))
    return EndpointSequence(sid, slots)


def to_intervals(seq: EndpointSequence) -> list[tuple[str, Instant, Instant]]:
    """Recover (label, start, end) triples, pairing each end with the oldest open start"""
    pending: dict[str, list] = defaultdict(list)
    intervals = []
    for slot in seq.slots:
        for symbol in sorted(slot.symbols, key=lambda s: not s.is_end):
            if symbol.is_end:
                if not pending[symbol.label]:
                    raise ValueError(f"sequence {seq.sid!r}: {symbol} at {slot.time} has no earlier start")
                intervals.append((symbol.label, pending[symbol.label].pop(0), slot.time))
            else:
                pending[symbol.label].append(slot.time)
    return sorted(intervals, key=lambda item: (item[1], item[2], item[0]))


def drop_endpoint_collisions(
    intervals: Iterable[tuple[str, Instant, Instant, str]], component: str = "Mine"
) -> list[tuple[str, Instant, Instant]]:
    """
    Keep (label, start, end) of each (label, start, end, sid), skipping any
    interval that would share a start or end instant with an earlier kept
    interval of the same label.
    """
    taken: set = set()
    kept = []
    for label, start, end, sid in intervals:
        endpoints = {(label, start, False), (label, end, True)}
        if endpoints & taken:
            logger.warning(
                "%s: skipping occurrence %s, a %s endpoint already sits at that instant", component, sid, label
            )
            continue
        taken |= endpoints
        kept.append((label, start, end))
    return kept


def build_sequence_db(
    occurrences: Sequence[ActivityOccurrence],
    window_days: int = DEFAULT_DB_WINDOW_DAYS,
    labels: Optional[Mapping[str, str]] = None,
) -> list[EndpointSequence]:
    """
    Group labeled occurrences into one endpoint sequence per window of days.

    Occurrences are assigned to the window of their start date. Occurrences
    without a label take ``labels[sid]`` when given, otherwise they are
    skipped, as are zero-length ones and ones whose start or end collides
    with an earlier occurrence of the same label.
    """
    if window_days < 1:
        raise ValueError("window_days must be >= 1")
    usable = []
    for occurrence in occurrences:
        label = occurrence.label if occurrence.label is not None else (labels or {}).get(occurrence.sid)
        if label is None:
            continue
        if not occurrence.start < occurrence.end:
            logger.warning("Mine: skipping zero-length occurrence %s", occurrence.sid)
            continue
        usable.append((label, occurrence))
    usable.sort(key=lambda item: (item[1].start, item[1].sid))
    if not usable:
        return []

    first_day = min(occurrence.start.date() for _, occurrence in usable)
    windows: dict[int, list] = defaultdict(list)
    for label, occurrence in usable:
        window = (occurrence.start.date() - first_day).days // window_days
        windows[window].append((label, occurrence.start, occurrence.end, occurrence.sid))

    db = []
    for window in sorted(windows):
        window_start = first_day + timedelta(days=window * window_days)
        intervals = drop_endpoint_collisions(windows[window])
        db.append(to_endpoint_sequence(intervals, window_start.isoformat()))
    logger.info("Mine: %d occurrences folded into %d sequences", len(usable), len(db))
    return db


def contains(seq: Union[EndpointSequence, SymbolSets], pattern: TemporalPattern) -> bool:
    """True iff each pattern slot fits, in order, inside a distinct later sequence slot"""
    slots = seq.symbol_sets if isinstance(seq, EndpointSequence) else seq
    position = 0
    for wanted in pattern.slots:
        while position < len(slots) and not slots[position].issuperset(wanted):
            position += 1
        if position == len(slots):
            return False
        position += 1
    return True


def support(pattern: TemporalPattern, db: Sequence[EndpointSequence]) -> int:
    """Number of distinct sequence ids whose sequence contains the pattern"""
    return len({seq.sid for seq in db if contains(seq, pattern)})


def mine(
    db: Sequence[EndpointSequence],
    minsup: float,
    include_partial: bool = False,
) -> list[TemporalPattern]:
    """
    Mine every frequent well-formed temporal pattern with its exact support.

    Args:
        db: Endpoint sequences
        minsup: Absolute count (>= 1) or fraction of len(db) (< 1)
        include_partial: Also emit frequent prefixes that leave intervals open

    Returns:
        Patterns in canonical order
    """
    threshold = resolve_minsup(minsup, len(db))
    results: list[TemporalPattern] = []

    def grow(projection: ProjectedDatabase, open_counts: dict[str, int]) -> None:
        last = projection.prefix.last_symbol
        candidates: dict[tuple[EndpointSymbol, bool], set] = defaultdict(set)
        for entry in projection.entries:
            slots = projection.source[entry.index].slots
            for slot in slots[entry.anchors[0] + 1 :]:
                for symbol in slot.symbols:
                    candidates[(symbol, False)].add(entry.sid)
            if last is not None:
                for j in entry.anchors:
                    for symbol in slots[j].symbols:
                        if symbol > last:
                            candidates[(symbol, True)].add(entry.sid)

        for (symbol, same_slot), sids in sorted(candidates.items(), key=lambda item: (item[0][1], item[0][0])):
            if len(sids) < threshold:
                continue
            if symbol.is_end and open_counts.get(symbol.label, 0) < 1:
                continue
            child = _extend(projection, symbol, same_slot)
            if child.prefix.well_formed or include_partial:
                results.append(child.prefix)
            child_open = dict(open_counts)
            child_open[symbol.label] = child_open.get(symbol.label, 0) + (-1 if symbol.is_end else 1)
            grow(child, child_open)

    grow(ProjectedDatabase.initial(db), {})
    results.sort(key=lambda pattern: pattern.key)
    logger.info("Mine: %d patterns at minsup %d over %d sequences", len(results), threshold, len(db))
    return results


@dataclass(frozen=True)
class PredictionRule:
    """<Prefix(p) -> p>: seeing the prefix predicts the full pattern's last symbol"""

    prefix: TemporalPattern
    full: TemporalPattern
    predicted_symbol: EndpointSymbol
    predictability: float
    support: int

    def __post_init__(self):
        if self.full.prefix().slots != self.prefix.slots:
            raise ValueError(f"{self.prefix} is not the prefix of {self.full}")
        if self.full.last_symbol != self.predicted_symbol:
            raise ValueError(f"{self.predicted_symbol} is not the last symbol of {self.full}")
        if not 0 < self.predictability <= 1:
            raise ValueError(f"predictability {self.predictability} is outside (0, 1]")
        if self.prefix.support > 0 and not math.isclose(
            self.predictability, self.support / self.prefix.support, rel_tol=1e-9
        ):
            raise ValueError(
                f"predictability {self.predictability} does not match support {self.support}"
                f" over prefix support {self.prefix.support}"
            )

    def to_json(self) -> dict:
        return {
            "prefix": self.prefix.to_json(),
            "full": self.full.to_json(),
            "predicted_symbol": str(self.predicted_symbol),
            "predictability": self.predictability,
            "support": self.support,
        }

    @classmethod
    def from_json(cls, document: dict) -> "PredictionRule":
        return cls(
            prefix=TemporalPattern.from_json(document["prefix"]),
            full=TemporalPattern.from_json(document["full"]),
            predicted_symbol=EndpointSymbol.parse(document["predicted_symbol"]),
            predictability=float(document["predictability"]),
            support=int(document["support"]),
        )


def predictability(full: TemporalPattern, db: Sequence[EndpointSequence]) -> float:
    """
    Confidence that the prefix of a pattern extends to the whole pattern.

    Computed as sup(full) / sup(Prefix(full)), so values lie in (0, 1].

    Raises:
        ValueError: If the prefix does not occur in db
    """
    prefix_support = support(full.prefix(), db)
    if prefix_support == 0:
        raise ValueError(f"prefix of {full} has zero support")
    return support(full, db) / prefix_support


def generate_rules(
    patterns: Sequence[TemporalPattern],
    db: Optional[Sequence[EndpointSequence]] = None,
    min_pre: float = 0.5,
) -> list[PredictionRule]:
    """
    Turn mined patterns into prediction rules.

    Args:
        patterns: Patterns mined from db, supports included
        db: The mined database, used for prefix supports; when None the
            supports are looked up among ``patterns`` themselves
        min_pre: Minimum predictability a rule must reach

    Returns:
        Rules sorted by (predictability desc, support desc, canonical pattern)

    Raises:
        DataError: If db is None and a prefix is missing from patterns
    """
    known = {pattern.slots: pattern.support for pattern in patterns}
    cache: dict = {}
    rules = []
    for pattern in patterns:
        if pattern.size < 2:
            continue
        prefix = pattern.prefix()
        if prefix.slots not in cache:
            if db is not None:
                cache[prefix.slots] = support(prefix, db)
            elif prefix.slots in known:
                cache[prefix.slots] = known[prefix.slots]
            else:
                raise DataError(f"support of prefix {prefix} is unknown; mine with partial patterns or pass the database")
        prefix_support = cache[prefix.slots]
        if prefix_support == 0:
            continue
        value = pattern.support / prefix_support
        if value <= 0 or value < min_pre:
            continue
        rules.append(
            PredictionRule(
                prefix=prefix.with_support(prefix_support),
                full=pattern,
                predicted_symbol=pattern.last_symbol,
                predictability=value,
                support=pattern.support,
            )
        )
    rules.sort(key=lambda rule: (-rule.predictability, -rule.support, rule.full.key))
    logger.info("Rules: %d rules at min_pre %.3f", len(rules), min_pre)
    return rules


def write_patterns(path: str, patterns: Sequence[TemporalPattern], sequences: int, minsup: int) -> None:
    """Save mined patterns as JSON"""
    document = {
        "schema_version": PATTERNS_SCHEMA_VERSION,
        "sequences": sequences,
        "minsup": minsup,
        "patterns": [pattern.to_json() for pattern in patterns],
    }
    atomic_write_text(path, json.dumps(document, indent=2) + "\n")


def read_patterns(path: str) -> list[TemporalPattern]:
    """Load patterns written by write_patterns"""
    try:
        document = json.loads(read_text(path))
        if document.get("schema_version") != PATTERNS_SCHEMA_VERSION:
            raise DataError(f"{path}: unsupported schema_version {document.get('schema_version')!r}")
        return [TemporalPattern.from_json(item) for item in document["patterns"]]
    except (json.JSONDecodeError, KeyError, TypeError, AttributeError) as e:
        raise DataError(f"{path}: malformed pattern file ({e})") from e
