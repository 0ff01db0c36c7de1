"""Type definitions for the Smart Home Activity Learner"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import time
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Iterator, Optional, Sequence, overload

from .constants import MANIFEST_SUFFIX
from .exceptions import DataError, OccurrenceError, UsageError
from .utils import atomic_write_text, get_logger

logger = get_logger("types")


@dataclass(frozen=True, order=True)
class EventTypeKey:
    """An event type: which service fired and how (``75:ON``)"""

    service_id: str
    event_type: str

    def __str__(self) -> str:
        return f"{self.service_id}:{self.event_type}"

    @classmethod
    def parse(cls, text: str) -> "EventTypeKey":
        """Parse ``service_id:event_type``, splitting at the last colon"""
        service_id, sep, event_type = text.rpartition(":")
        if not sep or not service_id or not event_type:
            raise DataError(f"event type key {text!r} is not 'service_id:event_type'")
        return cls(service_id, event_type)


@dataclass(frozen=True)
class Event:
    """One timestamped firing of a sensor-backed service"""

    service_id: str
    event_type: str
    timestamp: datetime
    location: str

    def __post_init__(self):
        for name in ("service_id", "event_type", "location"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value:
                raise DataError(f"event field {name!r} must be a non-empty string")
        if not isinstance(self.timestamp, datetime):
            raise DataError("event timestamp must be a datetime")

    @property
    def key(self) -> EventTypeKey:
        return EventTypeKey(self.service_id, self.event_type)


@dataclass(frozen=True)
class EventSequence:
    """Events ordered by timestamp.

    Unsorted input is sorted stably at construction, so events sharing a
    timestamp keep their input order.
    """

    events: tuple[Event, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted(self.events, key=lambda event: event.timestamp))
        object.__setattr__(self, "events", ordered)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    @overload
    def __getitem__(self, index: int) -> Event: ...
    @overload
    def __getitem__(self, index: slice) -> "EventSequence": ...

    def __getitem__(self, index):
        if isinstance(index, slice):
            return EventSequence(self.events[index])
        return self.events[index]

    @property
    def keys(self) -> list[EventTypeKey]:
        return [event.key for event in self.events]


def as_event_sequence(events: "EventSequence | Iterable[Event]") -> EventSequence:
    """Wrap a plain iterable of events; pass sequences through untouched"""
    if isinstance(events, EventSequence):
        return events
    return EventSequence(tuple(events))


@dataclass(frozen=True)
class ActivityOccurrence:
    """One performance of an activity: a time window, a place and its events"""

    sid: str
    label: Optional[str]
    location: str
    start: datetime
    end: datetime
    events: EventSequence = field(default_factory=EventSequence)

    def __post_init__(self):
        object.__setattr__(self, "events", as_event_sequence(self.events))
        if not self.sid:
            raise DataError("occurrence sid must be non-empty")
        if self.start > self.end:
            raise OccurrenceError(self.sid, f"start {self.start} is after end {self.end}")
        if len(self.events):
            if self.events[0].timestamp < self.start:
                raise OccurrenceError(
                    self.sid,
                    f"event at {self.events[0].timestamp} precedes start {self.start}",
                )
            if self.events[-1].timestamp > self.end:
                raise OccurrenceError(
                    self.sid,
                    f"event at {self.events[-1].timestamp} follows end {self.end}",
                )

    @property
    def duration_seconds(self) -> float:
        return (self.end - self.start).total_seconds()

    @property
    def event_types(self) -> frozenset[EventTypeKey]:
        return frozenset(event.key for event in self.events)

    @property
    def observations(self) -> list[EventTypeKey]:
        """The ordered event-type symbols an HMM scores"""
        return self.events.keys


@dataclass(frozen=True)
class Cluster:
    """A group of occurrences believed to be the same activity"""

    cluster_id: int
    members: tuple[str, ...]
    label_hint: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise DataError(f"cluster {self.cluster_id} has no members")

    def purity(self, labels: dict[str, Optional[str]]) -> Optional[float]:
        """Share of members carrying the majority label, or None without labels"""
        known = [labels.get(sid) for sid in self.members if labels.get(sid) is not None]
        if not known:
            return None
        _, count = Counter(known).most_common(1)[0]
        return count / len(self.members)


def index_occurrences(corpus: Sequence[ActivityOccurrence]) -> dict[str, ActivityOccurrence]:
    """Map sids to occurrences; duplicate sids are an error"""
    index: dict[str, ActivityOccurrence] = {}
    for occurrence in corpus:
        if occurrence.sid in index:
            raise OccurrenceError(occurrence.sid, "duplicate sid")
        index[occurrence.sid] = occurrence
    return index


class ShalCommand:
    """Base class for subcommands.

    Subclasses set ``name``/``label``/``description``, declare their flags in
    ``add_arguments`` and do the work in ``execute_shal``. Every path added
    with ``register_output`` gets a sibling run manifest.
    """

    name = ""
    label = ""
    description = ""

    def __init__(self):
        self.inputs: list[str] = []
        self.outputs: list[str] = []
        self.seed: Optional[int] = None
        self._logger = get_logger(f"cli.{self.name}")

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        """Override to declare subcommand flags"""

    def config_overrides(self, args: argparse.Namespace) -> dict:
        """Override to map subcommand flags onto MiningConfig fields"""
        return {}

    def execute(self, args: argparse.Namespace) -> int:
        """Resolve configuration, run the command and write run manifests"""
        from .properties import load_config

        if args.config:
            self.register_input(args.config, "config")
        config = load_config(args.config, self.config_overrides(args))
        started = time.perf_counter()
        self.execute_shal(args, config)
        duration = time.perf_counter() - started
        for output in self.outputs:
            self._write_manifest(args, config, output, duration)
        return 0

    def execute_shal(self, args: argparse.Namespace, config) -> None:
        """Override this method in subclasses instead of execute()"""
        raise NotImplementedError("Subclasses must implement execute_shal()")

    def register_output(self, path: Optional[str], flag: str = "output") -> str:
        if not path:
            raise UsageError(f"{self.name}: --{flag} is required")
        self.outputs.append(path)
        return path

    def register_input(self, path: Optional[str], flag: str = "input") -> str:
        """Record an input file, failing early when it is absent"""
        if not path:
            raise UsageError(f"{self.name}: --{flag} is required")
        if not os.path.isfile(path):
            raise UsageError(f"{self.name}: input file {path} does not exist")
        self.inputs.append(path)
        return path

    def emit_table(self, args: argparse.Namespace, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
        """Write a CSV table to --output when given, otherwise to stdout"""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)
        if args.output:
            atomic_write_text(self.register_output(args.output), buffer.getvalue())
        else:
            sys.stdout.write(buffer.getvalue())

    def report(self, level: str, message: str) -> None:
        """Report a user-facing outcome on the diagnostic stream"""
        self._logger.log(_REPORT_LEVELS[level], "%s: %s", self.label or self.name, message)

    def _write_manifest(self, args, config, output: str, duration: float) -> None:
        from . import __version__
        from .properties import RunManifest

        manifest = RunManifest(
            subcommand=self.name,
            config=config,
            inputs=list(self.inputs),
            outputs=[output],
            seed=self.seed if self.seed is not None else getattr(args, "seed", None),
            tool_version=__version__,
            duration_seconds=duration,
        )
        atomic_write_text(output + MANIFEST_SUFFIX, manifest.model_dump_json(indent=2) + "\n")


_REPORT_LEVELS = {"DEBUG": 10, "INFO": 20, "WARNING": 30, "ERROR": 40}
