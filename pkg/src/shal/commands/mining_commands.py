"""Temporal pattern mining, rule generation and prediction subcommands"""

import argparse

from ..bundle import read_clusters, read_model_bundle, write_model_bundle
from ..ingest import parse_occurrences
from ..prediction import history_from_occurrences, predict_next
from ..properties import MiningConfig, resolve_minsup
from ..shal_types import ShalCommand
from ..tpminer import build_sequence_db, generate_rules, mine, read_patterns, write_patterns
from ..utils import read_text


class MineCommand(ShalCommand):
    name = "mine"
    label = "Mine Patterns"
    description = "Mine frequent temporal patterns from labeled activity intervals"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--minsup", type=float, help="support: fraction of sequences (< 1) or count")
        parser.add_argument(
            "--well-formed-only",
            action="store_true",
            default=None,
            help="drop prefixes that leave intervals open (rules then cannot predict starts)",
        )
        parser.add_argument("--clusters", help="label unlabeled occurrences by their cluster")
        parser.add_argument("--window-days", type=int, help="calendar days per sequence")

    def config_overrides(self, args: argparse.Namespace) -> dict:
        return {
            "minsup": args.minsup,
            "db_window_days": args.window_days,
            "include_partial": False if args.well_formed_only else None,
        }

    def execute_shal(self, args: argparse.Namespace, config: MiningConfig) -> None:
        corpus = parse_occurrences(read_text(self.register_input(args.input)))
        labels = None
        if args.clusters:
            clusters = read_clusters(self.register_input(args.clusters, "clusters"))
            labels = {sid: f"cluster-{c.cluster_id}" for c in clusters for sid in c.members}
        output = self.register_output(args.output)

        db = build_sequence_db(corpus, config.db_window_days, labels)
        patterns = mine(db, config.minsup, include_partial=config.include_partial)
        write_patterns(output, patterns, len(db), resolve_minsup(config.minsup, len(db)))
        self.report("INFO", f"{len(patterns)} patterns over {len(db)} sequences")


class RulesCommand(ShalCommand):
    name = "rules"
    label = "Generate Rules"
    description = "Turn mined patterns into prediction rules and save them as a rules-only bundle"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--patterns", help="pattern file written by mine")
        parser.add_argument("--min-pre", type=float, help="minimum predictability in [0, 1]")

    def config_overrides(self, args: argparse.Namespace) -> dict:
        return {"min_pre": args.min_pre}

    def execute_shal(self, args: argparse.Namespace, config: MiningConfig) -> None:
        patterns = read_patterns(self.register_input(args.patterns, "patterns"))
        db = None
        if args.input:
            corpus = parse_occurrences(read_text(self.register_input(args.input)))
            db = build_sequence_db(corpus, config.db_window_days)
        output = self.register_output(args.output)

        rules = generate_rules(patterns, db, config.min_pre)
        write_model_bundle([], [], rules, output)
        self.report("INFO", f"{len(rules)} rules from {len(patterns)} patterns")


class PredictCommand(ShalCommand):
    name = "predict"
    label = "Predict Activity"
    description = "Rank the activities expected to start next given a labeled history"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--model", help="model (or rules) bundle")
        parser.add_argument("--history", help="labeled occurrences, JSON lines")
        parser.add_argument("--window", type=int, help="number of recent endpoint slots matched")

    def config_overrides(self, args: argparse.Namespace) -> dict:
        return {"window": args.window}

    def execute_shal(self, args: argparse.Namespace, config: MiningConfig) -> None:
        _, _, rules = read_model_bundle(self.register_input(args.model, "model"))
        history = history_from_occurrences(
            parse_occurrences(read_text(self.register_input(args.history, "history")))
        )
        predictions = predict_next(history, rules, config.window)
        rows = [
            (rank, p.activity_label, p.score, p.support) for rank, p in enumerate(predictions, start=1)
        ]
        self.emit_table(args, ("rank", "label", "score", "support"), rows)
