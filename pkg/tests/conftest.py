from datetime import datetime, timedelta

import pytest

from shal.ingest import generate_synthetic, load_synthetic_spec
from shal.shal_types import ActivityOccurrence, Event, EventSequence

DAY = datetime(2003, 5, 3)

MEDICATION_RECORD = (
    '{"label": "Taking medication", "location": "Kitchen", '
    '"start": "2003-05-03T04:23:06", "end": "2003-05-03T04:41:32", "events": ['
    '{"service_id": "75", "event_type": "ON", "t": "2003-05-03T04:23:06"}, '
    '{"service_id": "137", "event_type": "OPEN", "t": "2003-05-03T04:24:10"}, '
    '{"service_id": "137", "event_type": "CLOSE", "t": "2003-05-03T04:25:41"}, '
    '{"service_id": "143", "event_type": "OPEN", "t": "2003-05-03T04:30:23"}, '
    '{"service_id": "143", "event_type": "CLOSE", "t": "2003-05-03T04:31:02"}, '
    '{"service_id": "75", "event_type": "OFF", "t": "2003-05-03T04:41:32"}]}'
)


def at(seconds: float) -> datetime:
    return DAY + timedelta(seconds=seconds)


def make_occurrence(
    sid: str,
    keys: list[str],
    start: float = 0.0,
    end: float = 60.0,
    location: str = "Kitchen",
    label=None,
) -> ActivityOccurrence:
    """An occurrence whose events are spread evenly over [start, end]"""
    events = []
    for i, key in enumerate(keys):
        service_id, _, event_type = key.rpartition(":")
        offset = start if len(keys) == 1 else start + (end - start) * i / (len(keys) - 1)
        events.append(Event(service_id, event_type, at(offset), location))
    return ActivityOccurrence(sid, label, location, at(start), at(end), EventSequence(tuple(events)))


@pytest.fixture
def medication_record() -> str:
    return MEDICATION_RECORD


@pytest.fixture(scope="session")
def bundled_spec():
    return load_synthetic_spec()


@pytest.fixture(scope="session")
def small_spec(bundled_spec):
    """The bundled recipe over ten days"""
    return bundled_spec.model_validate({**bundled_spec.model_dump(), "days": 10})


@pytest.fixture(scope="session")
def small_corpus(small_spec):
    occurrences, _ = generate_synthetic(small_spec)
    return occurrences


@pytest.fixture(scope="session")
def bundled_corpus(bundled_spec):
    return generate_synthetic(bundled_spec)
