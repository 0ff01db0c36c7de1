"""Corpus generation and stream segmentation subcommands"""

import argparse

from pydantic import ValidationError

from ..exceptions import DataError
from ..ingest import (
    generate_synthetic,
    load_synthetic_spec,
    parse_event_log,
    render_event_log,
    render_occurrences,
    segment,
    segments_to_occurrences,
)
from ..properties import MiningConfig
from ..shal_types import ShalCommand
from ..utils import atomic_write_text, read_text


class SynthCommand(ShalCommand):
    name = "synth"
    label = "Synthesize Corpus"
    description = "Generate a labeled occurrence corpus (and its event stream) from a synthetic spec"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--spec", help="synthetic spec JSON (default: the bundled spec)")
        parser.add_argument("--events", help="also write the merged event stream as CSV")

    def execute_shal(self, args: argparse.Namespace, config: MiningConfig) -> None:
        output = self.register_output(args.output)
        if args.spec:
            self.register_input(args.spec, "spec")
        try:
            spec = load_synthetic_spec(args.spec)
            if args.seed is not None:
                spec = spec.model_validate({**spec.model_dump(), "seed": args.seed})
        except ValidationError as e:
            raise DataError(f"invalid synthetic spec: {e}") from e
        self.seed = spec.seed

        occurrences, stream = generate_synthetic(spec)
        atomic_write_text(output, render_occurrences(occurrences))
        if args.events:
            atomic_write_text(self.register_output(args.events, "events"), render_event_log(stream))
        self.report("INFO", f"{len(occurrences)} occurrences, {len(stream)} events")


class SegmentCommand(ShalCommand):
    name = "segment"
    label = "Segment Stream"
    description = "Split an event log at silent gaps into unlabeled occurrences"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--gap", type=float, help="seconds of silence that end a segment")

    def config_overrides(self, args: argparse.Namespace) -> dict:
        return {"segment_gap": args.gap}

    def execute_shal(self, args: argparse.Namespace, config: MiningConfig) -> None:
        stream = parse_event_log(read_text(self.register_input(args.input)))
        output = self.register_output(args.output)
        occurrences = segments_to_occurrences(segment(stream, config.segment_gap))
        atomic_write_text(output, render_occurrences(occurrences))
        self.report("INFO", f"{len(occurrences)} segments")
