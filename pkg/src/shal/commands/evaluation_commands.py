"""Clustering evaluation and parameter sweep subcommands"""

import argparse
import sys

from ..bundle import read_clusters
from ..constants import DEFAULT_SEED
from ..evaluation import SWEEP_PARAMETERS, LabeledAssignment, bcubed, holdout_recognition, parse_grid, sweep_report
from ..exceptions import UsageError
from ..ingest import parse_occurrences
from ..properties import MiningConfig
from ..shal_types import ShalCommand
from ..utils import atomic_write_text, read_text


def _grid(text: str, flag: str) -> list[float]:
    try:
        return parse_grid(text)
    except ValueError as e:
        raise UsageError(f"--{flag}: {e}") from e


class EvalCommand(ShalCommand):
    name = "eval"
    label = "Evaluate Clusters"
    description = "Score a clustering against ground-truth labels with BCubed"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--clusters", help="clusters JSON written by cluster")
        parser.add_argument("--truth", help="labeled occurrence corpus")
        parser.add_argument("--holdout", type=float, help="also report hold-out recognition accuracy")

    def execute_shal(self, args: argparse.Namespace, config: MiningConfig) -> None:
        clusters = read_clusters(self.register_input(args.clusters, "clusters"))
        truth = parse_occurrences(read_text(self.register_input(args.truth, "truth")))
        precision, recall, f1 = bcubed(LabeledAssignment.from_clusters(clusters, truth))
        rows = [
            ("precision", precision),
            ("recall", recall),
            ("f1", f1),
            ("clusters", len(clusters)),
        ]
        if args.holdout is not None:
            if not 0.0 < args.holdout < 1.0:
                raise UsageError(f"{self.name}: --holdout must be in (0, 1)")
            seed = args.seed if args.seed is not None else DEFAULT_SEED
            self.seed = seed
            rows.append(("holdout_accuracy", holdout_recognition(truth, config, args.holdout, seed)))
        self.emit_table(args, ("metric", "value"), rows)
        self.report("INFO", f"F1 {f1:.4f}")


class SweepCommand(ShalCommand):
    name = "sweep"
    label = "Parameter Sweep"
    description = "Re-run a pipeline stage across a grid of one parameter"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--param", choices=SWEEP_PARAMETERS, help="parameter to vary")
        parser.add_argument("--grid", help="start:stop:step or a comma-separated list")
        parser.add_argument("--volumes", help="corpus fractions for a minsup sweep")

    def execute_shal(self, args: argparse.Namespace, config: MiningConfig) -> None:
        if args.param is None or args.grid is None:
            raise UsageError(f"{self.name}: --param and --grid are required")
        if args.volumes and args.param != "minsup":
            raise UsageError(f"{self.name}: --volumes only applies to --param minsup")
        grid = _grid(args.grid, "grid")
        volumes = _grid(args.volumes, "volumes") if args.volumes else None
        corpus = parse_occurrences(read_text(self.register_input(args.input)))

        table = sweep_report(corpus, args.param, grid, config, volumes)
        if args.output:
            atomic_write_text(self.register_output(args.output), table.to_csv())
        else:
            sys.stdout.write(table.to_csv())
