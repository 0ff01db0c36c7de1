"""Extrinsic clustering quality (BCubed), parameter sweeps and hold-out recognition"""

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .activity_hmm import recognize, train_models
from .clustering import agglomerate, label_clusters
from .constants import DEFAULT_SEED
from .exceptions import DataError
from .properties import MiningConfig, resolve_minsup
from .shal_types import ActivityOccurrence, Cluster
from .tpminer import build_sequence_db, generate_rules, mine
from .utils import get_logger, median_runtime_ms

logger = get_logger("evaluation")

SWEEP_PARAMETERS = ("rho", "minsup", "min_pre", "volume")


@dataclass(frozen=True)
class LabeledAssignment:
    """Ground-truth category and assigned cluster of every evaluated object"""

    sids: tuple[str, ...]
    categories: tuple[str, ...]
    clusters: tuple[int, ...]

    def __post_init__(self):
        if not len(self.sids) == len(self.categories) == len(self.clusters):
            raise ValueError("sids, categories and clusters must have the same length")
        if len(set(self.sids)) != len(self.sids):
            raise ValueError("assignment sids must be unique")

    @classmethod
    def from_clusters(
        cls, clusters: Sequence[Cluster], occurrences: Sequence[ActivityOccurrence]
    ) -> "LabeledAssignment":
        """
        Pair each clustered occurrence with its label.

        Raises:
            DataError: If a clustered sid is unknown or unlabeled
        """
        labels = {occurrence.sid: occurrence.label for occurrence in occurrences}
        sids, categories, ids = [], [], []
        for cluster in clusters:
            for sid in cluster.members:
                if sid not in labels:
                    raise DataError(f"clustered occurrence {sid!r} is not in the truth corpus")
                if labels[sid] is None:
                    raise DataError(f"occurrence {sid!r} has no ground-truth label")
                sids.append(sid)
                categories.append(labels[sid])
                ids.append(cluster.cluster_id)
        return cls(tuple(sids), tuple(categories), tuple(ids))

    def __len__(self) -> int:
        return len(self.sids)

    def _position(self, sid: str) -> int:
        try:
            return self.sids.index(sid)
        except ValueError:
            raise DataError(f"unknown sid {sid!r}") from None


def correctness(assignment: LabeledAssignment, o: str, o_prime: str) -> int:
    """1 iff the two objects share a category exactly when they share a cluster"""
    i, j = assignment._position(o), assignment._position(o_prime)
    same_category = assignment.categories[i] == assignment.categories[j]
    same_cluster = assignment.clusters[i] == assignment.clusters[j]
    return int(same_category == same_cluster)


def bcubed(assignment: LabeledAssignment) -> tuple[float, float, float]:
    """
    BCubed precision, recall and F1, every object counted as its own pair.

    Returns:
        Tuple of (precision, recall, f1); f1 is 0 when precision + recall is 0

    Raises:
        ValueError: If the assignment is empty
    """
    if len(assignment) == 0:
        raise ValueError("bcubed needs at least one object")
    categories = np.unique(np.array(assignment.categories, dtype=object), return_inverse=True)[1]
    clusters = np.unique(np.array(assignment.clusters), return_inverse=True)[1]
    same_category = categories[:, None] == categories[None, :]
    same_cluster = clusters[:, None] == clusters[None, :]
    both = (same_category & same_cluster).sum(axis=1)

    precision = float(np.mean(both / same_cluster.sum(axis=1)))
    recall = float(np.mean(both / same_category.sum(axis=1)))
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1


@dataclass(frozen=True)
class SweepTable:
    """Rows of a parameter sweep, one per grid point"""

    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [row[k] for row in self.rows]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_format_cell(value) for value in row])
        return buffer.getvalue()


def _format_cell(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def parse_grid(text: str) -> list[float]:
    """
    Parse ``start:stop:step`` (stop included) or a comma-separated list.

    Raises:
        ValueError: If the grid is empty, unsorted or has a non-positive step
    """
    text = text.strip()
    if not text:
        raise ValueError("grid must not be empty")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"range grid {text!r} must be start:stop:step")
        start, stop, step = (float(part) for part in parts)
        if step <= 0:
            raise ValueError(f"grid step must be positive, got {step}")
        if stop < start:
            raise ValueError(f"grid {text!r} is empty")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        values = [round(start + k * step, 12) for k in range(count)]
    else:
        values = [float(part) for part in text.split(",") if part.strip()]
    if not values:
        raise ValueError("grid must not be empty")
    if any(b < a for a, b in zip(values, values[1:])):
        raise ValueError(f"grid {text!r} must be sorted ascending")
    return values


def _earliest(occurrences: Sequence[ActivityOccurrence], fraction: float) -> list[ActivityOccurrence]:
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"volume must be in (0, 1], got {fraction}")
    ordered = sorted(occurrences, key=lambda occurrence: (occurrence.start, occurrence.sid))
    return ordered[: max(1, math.ceil(fraction * len(ordered) - 1e-9))]


def sweep_report(
    corpus: Sequence[ActivityOccurrence],
    parameter: str,
    grid: Iterable[float],
    config: Optional[MiningConfig] = None,
    volumes: Optional[Sequence[float]] = None,
) -> SweepTable:
    """
    Re-run one pipeline stage across a grid of values of one parameter.

    Args:
        corpus: Labeled occurrences
        parameter: "rho" (columns rho,f1), "minsup" (minsup,patterns,ms, or
            volume,minsup,patterns,ms when volumes are given), "min_pre"
            (min_pre,rules) or "volume" (volume,occurrences,clusters,ms)
        grid: Non-empty ascending values of the parameter
        config: Values for every other parameter
        volumes: Corpus fractions for the minsup sweep

    Returns:
        The sweep table; only the ms columns vary between identical runs

    Raises:
        ValueError: On an unknown parameter or an empty or unsorted grid
    """
    config = config or MiningConfig()
    grid = list(grid)
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}")
    if not grid:
        raise ValueError("grid must not be empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be sorted ascending")

    rows: list[tuple] = []
    if parameter == "rho":
        columns = ("rho", "f1")
        for rho in grid:
            clusters = agglomerate(corpus, rho, config.time_basis)
            _, _, f1 = bcubed(LabeledAssignment.from_clusters(clusters, corpus))
            rows.append((rho, f1))
    elif parameter == "volume":
        columns = ("volume", "occurrences", "clusters", "ms")
        for volume in grid:
            subset = _earliest(corpus, volume)
            clusters, ms = median_runtime_ms(lambda: agglomerate(subset, config.rho, config.time_basis))
            rows.append((volume, len(subset), len(clusters), ms))
    elif parameter == "minsup":
        columns = ("minsup", "patterns", "ms") if volumes is None else ("volume", "minsup", "patterns", "ms")
        for volume in volumes or [1.0]:
            db = build_sequence_db(_earliest(corpus, volume), config.db_window_days)
            for minsup in grid:
                resolve_minsup(minsup, len(db))
                patterns, ms = median_runtime_ms(lambda: mine(db, minsup))
                row = (minsup, len(patterns), ms)
                rows.append(row if volumes is None else (volume, *row))
    else:
        columns = ("min_pre", "rules")
        db = build_sequence_db(corpus, config.db_window_days)
        patterns = mine(db, config.minsup, include_partial=config.include_partial)
        for min_pre in grid:
            rows.append((min_pre, len(generate_rules(patterns, db, min_pre))))

    logger.info("Sweep: %s over %d grid points", parameter, len(grid))
    return SweepTable(columns, tuple(rows))


def holdout_recognition(
    occurrences: Sequence[ActivityOccurrence],
    config: Optional[MiningConfig] = None,
    test_fraction: float = 0.2,
    seed: int = DEFAULT_SEED,
) -> float:
    """
    Label accuracy of recognizing held-out occurrences.

    The labeled occurrences are shuffled with ``seed``; the first
    ``test_fraction`` is held out, the rest is clustered and one HMM is
    trained per cluster. A held-out occurrence counts as correct when the
    winning cluster's majority label equals its own.

    Raises:
        ValueError: If test_fraction is outside (0, 1) or a side is empty
    """
    config = config or MiningConfig()
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    usable = sorted(
        (o for o in occurrences if o.label is not None and len(o.events) > 0),
        key=lambda occurrence: occurrence.sid,
    )
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(usable))
    n_test = math.ceil(test_fraction * len(usable))
    test = [usable[i] for i in sorted(order[:n_test])]
    train = [usable[i] for i in sorted(order[n_test:])]
    if not test or not train:
        raise ValueError("hold-out split needs occurrences on both sides")

    clusters, _ = label_clusters(agglomerate(train, config.rho, config.time_basis), train)
    hints = {cluster.cluster_id: cluster.label_hint for cluster in clusters}
    models = train_models(clusters, train, config.smoothing, config.emission_floor)

    correct = 0
    for occurrence in test:
        best, _ = recognize(occurrence.observations, models)
        correct += int(hints[best] == occurrence.label)
    accuracy = correct / len(test)
    logger.info("Eval: hold-out accuracy %.4f on %d occurrences", accuracy, len(test))
    return accuracy
