"""Event log and occurrence corpus I/O, stream segmentation and synthetic corpora"""

import csv
import io
import json
from collections import Counter
from datetime import datetime, timedelta
from importlib import resources
from typing import Optional, Sequence, Union

import numpy as np

from .constants import EVENT_LOG_COLUMNS, SECONDS_PER_DAY
from .exceptions import DataError, OccurrenceError, ParseError
from .properties import ActivityTemplate, SyntheticSpec
from .shal_types import ActivityOccurrence, Event, EventSequence, EventTypeKey
from .utils import format_timestamp, get_logger, parse_timestamp, read_text

logger = get_logger("ingest")

_MAX_DURATION_DRAWS = 1000


def parse_event_log(source: str) -> EventSequence:
    """
    Parse a ``timestamp,sensor_id,event_type,location`` CSV event log.

    Args:
        source: CSV text with a header row

    Returns:
        The events ordered by timestamp

    Raises:
        ParseError: On a missing column, an empty field or a bad timestamp,
            naming the offending line
    """
    reader = csv.DictReader(io.StringIO(source))
    header = reader.fieldnames
    if header is None:
        raise ParseError(1, "missing header row")
    missing = [column for column in EVENT_LOG_COLUMNS if column not in header]
    if missing:
        raise ParseError(1, f"missing column(s) {', '.join(missing)}")

    events = []
    for row in reader:
        line = reader.line_num
        values = {}
        for column in EVENT_LOG_COLUMNS:
            value = row.get(column)
            if value is None or not value.strip():
                raise ParseError(line, f"empty field {column!r}")
            values[column] = value.strip()
        try:
            timestamp = parse_timestamp(values["timestamp"])
        except ValueError as e:
            raise ParseError(line, f"bad timestamp {values['timestamp']!r} ({e})") from e
        events.append(
            Event(
                service_id=values["sensor_id"],
                event_type=values["event_type"],
                timestamp=timestamp,
                location=values["location"],
            )
        )
    logger.debug("Ingest: parsed %d events", len(events))
    return EventSequence(tuple(events))


def render_event_log(seq: EventSequence) -> str:
    """Render events in the format parse_event_log reads"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(EVENT_LOG_COLUMNS)
    for event in seq:
        writer.writerow([format_timestamp(event.timestamp), event.service_id, event.event_type, event.location])
    return buffer.getvalue()


def _occurrence_from_record(record: dict, line: int, default_sid: str) -> ActivityOccurrence:
    if not isinstance(record, dict):
        raise ParseError(line, "expected a JSON object")
    try:
        sid = str(record.get("sid") or default_sid)
        location = record["location"]
        start = parse_timestamp(record["start"])
        end = parse_timestamp(record["end"])
        events = []
        for item in record.get("events", []):
            events.append(
                Event(
                    service_id=str(item["service_id"]),
                    event_type=str(item["event_type"]),
                    timestamp=parse_timestamp(item["t"]),
                    location=item.get("location") or location,
                )
            )
    except KeyError as e:
        raise ParseError(line, f"missing key {e.args[0]!r}") from e
    except (TypeError, AttributeError) as e:
        raise ParseError(line, f"malformed record ({e})") from e
    except ValueError as e:
        if isinstance(e, DataError):
            raise
        raise ParseError(line, str(e)) from e
    return ActivityOccurrence(
        sid=sid,
        label=record.get("label"),
        location=location,
        start=start,
        end=end,
        events=EventSequence(tuple(events)),
    )


def parse_occurrences(source: str) -> list[ActivityOccurrence]:
    """
    Parse a JSON-lines occurrence corpus.

    Records without a ``sid`` get ``occ-00001``, ``occ-00002``, ... by
    record position. Blank lines are skipped.

    Raises:
        ParseError: On malformed JSON or a missing key
        OccurrenceError: On an event outside its window or a duplicate sid
    """
    occurrences = []
    seen: set[str] = set()
    position = 0
    for line, text in enumerate(source.splitlines(), start=1):
        if not text.strip():
            continue
        position += 1
        try:
            record = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(line, f"invalid JSON ({e.msg})") from e
        occurrence = _occurrence_from_record(record, line, f"occ-{position:05d}")
        if occurrence.sid in seen:
            raise OccurrenceError(occurrence.sid, f"duplicate sid at line {line}")
        seen.add(occurrence.sid)
        occurrences.append(occurrence)
    logger.debug("Ingest: parsed %d occurrences", len(occurrences))
    return occurrences


def render_occurrences(occurrences: Sequence[ActivityOccurrence]) -> str:
    """Render occurrences as JSON lines, one record per occurrence"""
    lines = []
    for occurrence in occurrences:
        record = {
            "sid": occurrence.sid,
            "label": occurrence.label,
            "location": occurrence.location,
            "start": format_timestamp(occurrence.start),
            "end": format_timestamp(occurrence.end),
            "events": [
                {
                    "service_id": event.service_id,
                    "event_type": event.event_type,
                    "t": format_timestamp(event.timestamp),
                    "location": event.location,
                }
                for event in occurrence.events
            ],
        }
        lines.append(json.dumps(record) + "\n")
    return "".join(lines)


def segment(stream: EventSequence, gap: Union[timedelta, float]) -> list[EventSequence]:
    """
    Split a stream wherever two adjacent events are more than gap apart.

    Args:
        stream: Ordered events
        gap: Largest silence kept inside one segment (timedelta or seconds)

    Returns:
        Non-empty segments whose concatenation is the stream

    Raises:
        ValueError: If gap is not positive
    """
    if not isinstance(gap, timedelta):
        gap = timedelta(seconds=gap)
    if gap <= timedelta(0):
        raise ValueError(f"gap must be positive, got {gap}")
    if len(stream) == 0:
        return []

    segments = []
    begin = 0
    for i in range(1, len(stream)):
        if stream[i].timestamp - stream[i - 1].timestamp > gap:
            segments.append(stream[begin:i])
            begin = i
    segments.append(stream[begin:])
    logger.info("Segment: %d events split into %d segments", len(stream), len(segments))
    return segments


def segments_to_occurrences(
    segments: Sequence[EventSequence], prefix: str = "seg"
) -> list[ActivityOccurrence]:
    """Wrap segments as unlabeled occurrences located where most of their events fired"""
    occurrences = []
    for i, seq in enumerate(segments, start=1):
        if len(seq) == 0:
            continue
        counts = Counter(event.location for event in seq)
        location = min(counts, key=lambda name: (-counts[name], name))
        occurrences.append(
            ActivityOccurrence(
                sid=f"{prefix}-{i:05d}",
                label=None,
                location=location,
                start=seq[0].timestamp,
                end=seq[-1].timestamp,
                events=seq,
            )
        )
    return occurrences


def load_synthetic_spec(path: Optional[str] = None) -> SyntheticSpec:
    """Load a synthetic corpus recipe, defaulting to the bundled one.

    Raises:
        DataError: If the file is not JSON
        pydantic.ValidationError: If a template is out of range
    """
    if path is None:
        text = resources.files("shal").joinpath("data/synthetic_spec.json").read_text(encoding="utf-8")
    else:
        text = read_text(path)
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise DataError(f"synthetic spec {path or 'bundled'}: {e}") from e
    return SyntheticSpec.model_validate(document)


def _perform(template: ActivityTemplate, rng: np.random.Generator) -> list[EventTypeKey]:
    """The event types of one performance, noise applied"""
    steps = [EventTypeKey.parse(text) for text in template.core]

    if template.drop_probability > 0:
        kept = [step for step in steps if rng.random() >= template.drop_probability]
        steps = kept or [steps[int(rng.integers(len(steps)))]]

    for text in template.optional:
        if rng.random() < template.optional_rate:
            steps.insert(int(rng.integers(len(steps) + 1)), EventTypeKey.parse(text))

    if template.swap_probability > 0:
        for i in range(len(steps) - 1):
            if rng.random() < template.swap_probability:
                steps[i], steps[i + 1] = steps[i + 1], steps[i]
    return steps


def _draw_window(template: ActivityTemplate, day: datetime, rng: np.random.Generator) -> tuple[datetime, datetime]:
    offset = rng.normal(template.start_mean, template.start_stddev)
    offset = int(round(min(max(offset, 0.0), SECONDS_PER_DAY - 1)))
    for _ in range(_MAX_DURATION_DRAWS):
        duration = int(round(rng.normal(template.duration_mean, template.duration_stddev)))
        if duration > 0:
            break
    else:
        duration = max(1, int(round(template.duration_mean)))
    start = day + timedelta(seconds=offset)
    return start, start + timedelta(seconds=duration)


def generate_synthetic(spec: SyntheticSpec) -> tuple[list[ActivityOccurrence], EventSequence]:
    """
    Generate a labeled corpus and its merged event stream from a recipe.

    Every template is performed once per day. Start offsets are normal draws
    clamped to the day, durations are redrawn until positive, and event times
    are sorted uniform whole-second draws inside the window. Sids are
    ``occ-00001``... in order of start time.

    Args:
        spec: Templates, day count, seed and first day

    Returns:
        Tuple of (occurrences, stream of all their events)
    """
    rng = np.random.default_rng(spec.seed)
    first_day = datetime.combine(spec.start_date, datetime.min.time())
    drafts = []
    for d in range(spec.days):
        day = first_day + timedelta(days=d)
        for order, template in enumerate(spec.activities):
            start, end = _draw_window(template, day, rng)
            steps = _perform(template, rng)
            span = int((end - start).total_seconds())
            offsets = np.sort(rng.integers(0, span + 1, size=len(steps)))
            events = tuple(
                Event(step.service_id, step.event_type, start + timedelta(seconds=int(offset)), template.location)
                for step, offset in zip(steps, offsets)
            )
            drafts.append((start, order, template, end, events))

    drafts.sort(key=lambda draft: (draft[0], draft[1]))
    occurrences = [
        ActivityOccurrence(
            sid=f"occ-{i:05d}",
            label=template.label,
            location=template.location,
            start=start,
            end=end,
            events=EventSequence(events),
        )
        for i, (start, _, template, end, events) in enumerate(drafts, start=1)
    ]
    stream = EventSequence(tuple(event for occurrence in occurrences for event in occurrence.events))
    logger.info(
        "Synth: %d occurrences, %d events over %d days (seed %d)",
        len(occurrences), len(stream), spec.days, spec.seed,
    )
    return occurrences, stream
