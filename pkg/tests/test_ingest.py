from datetime import datetime, timedelta

import numpy as np
import pytest

from shal.exceptions import OccurrenceError, ParseError
from shal.ingest import (
    generate_synthetic,
    parse_event_log,
    parse_occurrences,
    render_event_log,
    render_occurrences,
    segment,
    segments_to_occurrences,
)
from shal.shal_types import Event, EventSequence, EventTypeKey
from shal.utils import read_text

from conftest import at

HEADER = "timestamp,sensor_id,event_type,location\n"


def test_parse_event_log_row():
    seq = parse_event_log(HEADER + "2003-05-03T04:30:23,75,ON,Kitchen\n")
    assert len(seq) == 1
    event = seq[0]
    assert (event.service_id, event.event_type, event.location) == ("75", "ON", "Kitchen")
    assert event.timestamp == datetime(2003, 5, 3, 4, 30, 23)


def test_event_log_with_byte_order_mark(tmp_path):
    path = tmp_path / "events.csv"
    path.write_bytes((HEADER + "2003-05-03T04:30:23,75,ON,Kitchen\n").encode("utf-8-sig"))
    seq = parse_event_log(read_text(str(path)))
    assert len(seq) == 1
    assert seq[0].service_id == "75"


def test_header_only_log_is_empty():
    assert len(parse_event_log(HEADER)) == 0


def test_bad_timestamp_names_line():
    with pytest.raises(ParseError) as info:
        parse_event_log(HEADER + "2003-05-03T04:30:23,75,ON,Kitchen\n25:00:00,75,OFF,Kitchen\n")
    assert info.value.line == 3


def test_missing_column_and_empty_field():
    with pytest.raises(ParseError, match="location"):
        parse_event_log("timestamp,sensor_id,event_type\n2003-05-03T04:30:23,75,ON\n")
    with pytest.raises(ParseError, match="line 2"):
        parse_event_log(HEADER + "2003-05-03T04:30:23,,ON,Kitchen\n")


def test_sub_second_timestamps_are_truncated():
    seq = parse_event_log(HEADER + "2003-05-03T04:30:23.750,75,ON,Kitchen\n")
    assert seq[0].timestamp == datetime(2003, 5, 3, 4, 30, 23)


def test_event_log_render_round_trip():
    rng = np.random.default_rng(5)
    events = tuple(
        Event(str(rng.integers(1, 9)), str(rng.choice(["ON", "OFF"])), at(int(rng.integers(0, 5000))), "Hall")
        for _ in range(50)
    )
    seq = EventSequence(events)
    assert parse_event_log(render_event_log(seq)) == seq


def test_parse_medication_record(medication_record):
    (occurrence,) = parse_occurrences(medication_record + "\n")
    assert occurrence.label == "Taking medication"
    assert occurrence.location == "Kitchen"
    assert len(occurrence.events) == 6
    assert occurrence.sid == "occ-00001"
    assert occurrence.events[0].location == "Kitchen"


def test_empty_corpus():
    assert parse_occurrences("") == []
    assert parse_occurrences("\n\n") == []


def test_event_before_start_is_rejected():
    record = (
        '{"sid": "bad", "label": null, "location": "Kitchen", "start": "2003-05-03T04:23:06", '
        '"end": "2003-05-03T04:41:32", "events": [{"service_id": "75", "event_type": "ON", '
        '"t": "2003-05-03T04:20:00"}]}'
    )
    with pytest.raises(OccurrenceError) as info:
        parse_occurrences(record)
    assert info.value.sid == "bad"


def test_duplicate_sid_is_rejected(medication_record):
    record = medication_record.replace('{"label"', '{"sid": "x", "label"')
    with pytest.raises(OccurrenceError, match="duplicate"):
        parse_occurrences(record + "\n" + record + "\n")


def test_malformed_json_names_line(medication_record):
    with pytest.raises(ParseError) as info:
        parse_occurrences(medication_record + "\n{not json\n")
    assert info.value.line == 2


def test_occurrences_render_round_trip(small_corpus):
    assert parse_occurrences(render_occurrences(small_corpus)) == small_corpus


def test_segment_single_split():
    seq = EventSequence(tuple(Event("1", "ON", at(t), "Hall") for t in (0, 5, 400, 405)))
    parts = segment(seq, 300)
    assert [len(part) for part in parts] == [2, 2]


def test_segment_identity_and_empty():
    seq = EventSequence(tuple(Event("1", "ON", at(t), "Hall") for t in (0, 100, 200)))
    assert segment(seq, timedelta(seconds=300)) == [seq]
    assert segment(EventSequence(), 300) == []
    with pytest.raises(ValueError):
        segment(seq, 0)


def test_segment_is_a_partition():
    rng = np.random.default_rng(1000)
    for _ in range(1000):
        size = int(rng.integers(0, 30))
        times = np.sort(rng.integers(0, 5000, size=size))
        seq = EventSequence(tuple(Event(str(i), "ON", at(int(t)), "Hall") for i, t in enumerate(times)))
        gap = float(rng.integers(1, 600))
        parts = segment(seq, gap)
        assert all(len(part) > 0 for part in parts)
        assert tuple(event for part in parts for event in part) == seq.events
        for before, after in zip(parts, parts[1:]):
            assert (after[0].timestamp - before[-1].timestamp).total_seconds() > gap


def test_segments_to_occurrences_picks_majority_location():
    seq = EventSequence(
        (
            Event("1", "ON", at(0), "Kitchen"),
            Event("2", "ON", at(10), "Hall"),
            Event("3", "ON", at(20), "Hall"),
        )
    )
    (occurrence,) = segments_to_occurrences([seq])
    assert occurrence.sid == "seg-00001"
    assert occurrence.location == "Hall"
    assert occurrence.label is None
    assert (occurrence.start, occurrence.end) == (at(0), at(20))


def test_generate_synthetic_is_deterministic(small_spec):
    first = generate_synthetic(small_spec)
    second = generate_synthetic(small_spec)
    assert render_occurrences(first[0]) == render_occurrences(second[0])
    assert render_event_log(first[1]) == render_event_log(second[1])


def test_generate_synthetic_counts_and_stream(small_spec):
    occurrences, stream = generate_synthetic(small_spec)
    assert len(occurrences) == small_spec.days * len(small_spec.activities)
    assert len(stream) == sum(len(occurrence.events) for occurrence in occurrences)
    assert all(a.timestamp <= b.timestamp for a, b in zip(stream, stream.events[1:]))
    assert {occurrence.label for occurrence in occurrences} == {t.label for t in small_spec.activities}


def test_noise_free_performance_follows_core(small_spec):
    document = small_spec.model_dump()
    for template in document["activities"]:
        template.update(optional=[], drop_probability=0.0, swap_probability=0.0)
    spec = small_spec.model_validate(document)
    occurrences, _ = generate_synthetic(spec)
    core = {t.label: [EventTypeKey.parse(key) for key in t.core] for t in spec.activities}
    for occurrence in occurrences:
        assert occurrence.observations == core[occurrence.label]


def test_different_seeds_differ(small_spec):
    other = small_spec.model_validate({**small_spec.model_dump(), "seed": 8})
    assert render_occurrences(generate_synthetic(small_spec)[0]) != render_occurrences(generate_synthetic(other)[0])
