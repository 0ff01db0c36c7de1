"""Activity discovery, model training and recognition subcommands"""

import argparse

from ..activity_hmm import next_action_distribution, recognize, train_models
from ..bundle import read_clusters, read_model_bundle, write_clusters, write_model_bundle
from ..clustering import agglomerate, label_clusters
from ..exceptions import DataError, UsageError
from ..ingest import parse_event_log, parse_occurrences
from ..properties import MiningConfig
from ..shal_types import ShalCommand
from ..utils import read_text


class ClusterCommand(ShalCommand):
    name = "cluster"
    label = "Cluster Occurrences"
    description = "Group activity occurrences into discovered activities by average linkage"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--rho", type=float, help="distance threshold in [0, 1]")
        parser.add_argument("--time-basis", choices=("absolute", "clock"), help="time axis for time similarity")

    def config_overrides(self, args: argparse.Namespace) -> dict:
        return {"rho": args.rho, "time_basis": args.time_basis}

    def execute_shal(self, args: argparse.Namespace, config: MiningConfig) -> None:
        corpus = parse_occurrences(read_text(self.register_input(args.input)))
        output = self.register_output(args.output)
        if not corpus:
            raise DataError("cannot cluster an empty corpus")
        clusters, purities = label_clusters(agglomerate(corpus, config.rho, config.time_basis), corpus)
        write_clusters(output, clusters, config.rho, purities)
        self.report("INFO", f"{len(clusters)} clusters from {len(corpus)} occurrences")


class TrainCommand(ShalCommand):
    name = "train"
    label = "Train Models"
    description = "Build one activity HMM per cluster and save a model bundle"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--corpus", help="occurrence corpus the clusters were built from")
        parser.add_argument("--smoothing", type=float, help="Laplace constant for counts")
        parser.add_argument("--emission-floor", type=float, help="emission probability of foreign symbols")
        parser.add_argument("--rules", help="rules bundle to carry into the model bundle")

    def config_overrides(self, args: argparse.Namespace) -> dict:
        return {"smoothing": args.smoothing, "emission_floor": args.emission_floor}

    def execute_shal(self, args: argparse.Namespace, config: MiningConfig) -> None:
        clusters = read_clusters(self.register_input(args.input))
        corpus = parse_occurrences(read_text(self.register_input(args.corpus, "corpus")))
        rules = []
        if args.rules:
            _, _, rules = read_model_bundle(self.register_input(args.rules, "rules"))
        output = self.register_output(args.output)

        clusters, _ = label_clusters(clusters, corpus)
        models = train_models(clusters, corpus, config.smoothing, config.emission_floor)
        write_model_bundle(clusters, models, rules, output)
        self.report("INFO", f"{len(models)} models, {len(rules)} rules")


class RecognizeCommand(ShalCommand):
    name = "recognize"
    label = "Recognize Activity"
    description = "Rank the trained activity models by the likelihood of an event segment"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--model", help="model bundle")

    def execute_shal(self, args: argparse.Namespace, config: MiningConfig) -> None:
        _, models, _ = read_model_bundle(self.register_input(args.model, "model"))
        stream = parse_event_log(read_text(self.register_input(args.input)))
        if len(stream) == 0:
            raise DataError("the segment has no events to recognize")
        best, ranking = recognize(stream.keys, models)
        self.emit_table(args, ("cluster_id", "log_prob"), ranking)
        self.report("INFO", f"best cluster {best}")


class NextActionCommand(ShalCommand):
    name = "next-action"
    label = "Next Action"
    description = "Distribution of the next event type within an ongoing activity"

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--model", help="model bundle")
        parser.add_argument("--cluster", type=int, help="cluster id of the ongoing activity")

    def execute_shal(self, args: argparse.Namespace, config: MiningConfig) -> None:
        if args.cluster is None:
            raise UsageError(f"{self.name}: --cluster is required")
        _, models, _ = read_model_bundle(self.register_input(args.model, "model"))
        model = next((m for m in models if m.cluster_id == args.cluster), None)
        if model is None:
            raise UsageError(f"{self.name}: no model for cluster {args.cluster}")
        stream = parse_event_log(read_text(self.register_input(args.input)))
        if len(stream) == 0:
            raise DataError("the segment has no events")
        ranked = next_action_distribution(model, stream.keys)
        rows = [(rank, key.service_id, key.event_type, p) for rank, (key, p) in enumerate(ranked, start=1)]
        self.emit_table(args, ("rank", "service_id", "event_type", "probability"), rows)
