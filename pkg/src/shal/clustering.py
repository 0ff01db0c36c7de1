"""Activity discovery by threshold-bounded average-linkage agglomeration.

Two occurrences are compared on where they happened, when they happened and
which event types they used; each part scores in [0, 1] and the sum is
rescaled to a distance d = 1 - sim / 3 so that the threshold rho lives in
[0, 1].
"""

from collections import Counter
from dataclasses import dataclass
from datetime import datetime
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .constants import DEFAULT_RHO, DEFAULT_TIME_BASIS
from .properties import TimeBasis
from .shal_types import ActivityOccurrence, Cluster
from .utils import get_logger

logger = get_logger("clustering")


def location_similarity(a: ActivityOccurrence, b: ActivityOccurrence) -> float:
    return 1.0 if a.location == b.location else 0.0


def _seconds_of_day(moment: datetime) -> float:
    return float(moment.hour * 3600 + moment.minute * 60 + moment.second)


def _window(occurrence: ActivityOccurrence, time_basis: TimeBasis, origin: datetime) -> tuple[float, float]:
    """(start, end) in seconds on the requested time axis"""
    if time_basis == "clock":
        start = _seconds_of_day(occurrence.start)
    elif time_basis == "absolute":
        start = (occurrence.start - origin).total_seconds()
    else:
        raise ValueError(f"unknown time basis {time_basis!r}")
    return start, start + occurrence.duration_seconds


def _time_similarity_arrays(starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
    """Pairwise (d_i + d_j) / (2 * span); zero when either interval has no length"""
    durations = ends - starts
    span = np.maximum(ends[:, None], ends[None, :]) - np.minimum(starts[:, None], starts[None, :])
    total = durations[:, None] + durations[None, :]
    degenerate = (durations[:, None] <= 0) | (durations[None, :] <= 0) | (span <= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        result = np.where(degenerate, 0.0, total / (2.0 * np.where(span > 0, span, 1.0)))
    return np.clip(result, 0.0, 1.0)


def time_similarity(
    a: ActivityOccurrence, b: ActivityOccurrence, time_basis: TimeBasis = DEFAULT_TIME_BASIS
) -> float:
    """
    Share of the joint window covered by the two activities.

    The sum of both indicator functions is integrated over
    [min start, max end] and divided by twice that span, which reduces to
    (duration_a + duration_b) / (2 * span). Identical windows score 1.

    Args:
        a, b: The occurrences to compare
        time_basis: "absolute" compares instants; "clock" compares time of day

    Returns:
        Similarity in [0, 1]; 0 if either occurrence has zero duration
    """
    origin = min(a.start, b.start)
    starts, ends = zip(_window(a, time_basis, origin), _window(b, time_basis, origin))
    return float(_time_similarity_arrays(np.array(starts), np.array(ends))[0, 1])


def structure_similarity(a: ActivityOccurrence, b: ActivityOccurrence) -> float:
    """Jaccard similarity of the event-type sets; two empty sets score 1"""
    left, right = a.event_types, b.event_types
    union = left | right
    if not union:
        return 1.0
    return len(left & right) / len(union)


def similarity(
    a: ActivityOccurrence, b: ActivityOccurrence, time_basis: TimeBasis = DEFAULT_TIME_BASIS
) -> float:
    """Location + time + structure similarity, in [0, 3]"""
    return location_similarity(a, b) + time_similarity(a, b, time_basis) + structure_similarity(a, b)


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric pairwise distances in [0, 1] with a zero diagonal, indexed by sid"""

    sids: tuple[str, ...]
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sids", tuple(self.sids))
        entries = np.array(self.entries, dtype=float)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        n = len(self.sids)
        if entries.shape != (n, n):
            raise ValueError(f"distance matrix shape {entries.shape} does not match {n} sids")
        if len(set(self.sids)) != n:
            raise ValueError("distance matrix sids must be unique")
        if not np.array_equal(entries, entries.T):
            raise ValueError("distance matrix must be symmetric")
        if np.any(np.diag(entries) != 0):
            raise ValueError("distance matrix diagonal must be zero")
        if np.any((entries < 0) | (entries > 1)):
            raise ValueError("distances must lie in [0, 1]")

    @property
    def n(self) -> int:
        return len(self.sids)

    @cached_property
    def index(self) -> dict[str, int]:
        return {sid: i for i, sid in enumerate(self.sids)}

    def __getitem__(self, pair: tuple[str, str]) -> float:
        return float(self.entries[self.index[pair[0]], self.index[pair[1]]])


def distance_matrix(
    data: Sequence[ActivityOccurrence], time_basis: TimeBasis = DEFAULT_TIME_BASIS
) -> DistanceMatrix:
    """
    Pairwise d = 1 - sim / 3 over a corpus.

    Rows follow the input order.

    Raises:
        ValueError: If data is empty
    """
    if not data:
        raise ValueError("distance matrix needs at least one occurrence")
    origin = min(occurrence.start for occurrence in data)
    windows = np.array([_window(occurrence, time_basis, origin) for occurrence in data])
    time_part = _time_similarity_arrays(windows[:, 0], windows[:, 1])

    locations = np.array([occurrence.location for occurrence in data], dtype=object)
    location_part = (locations[:, None] == locations[None, :]).astype(float)

    vocabulary = sorted({key for occurrence in data for key in occurrence.event_types})
    column = {key: k for k, key in enumerate(vocabulary)}
    incidence = np.zeros((len(data), len(vocabulary)))
    for i, occurrence in enumerate(data):
        for key in occurrence.event_types:
            incidence[i, column[key]] = 1.0
    intersection = incidence @ incidence.T
    sizes = incidence.sum(axis=1)
    union = sizes[:, None] + sizes[None, :] - intersection
    with np.errstate(divide="ignore", invalid="ignore"):
        structure_part = np.where(union > 0, intersection / np.where(union > 0, union, 1.0), 1.0)

    entries = 1.0 - (location_part + time_part + structure_part) / 3.0
    entries = np.clip((entries + entries.T) / 2.0, 0.0, 1.0)
    np.fill_diagonal(entries, 0.0)
    return DistanceMatrix(tuple(occurrence.sid for occurrence in data), entries)


def average_linkage(ci: Cluster, cj: Cluster, matrix: DistanceMatrix) -> float:
    """
    Mean distance over all cross pairs, T_ij / (N_i * N_j).

    Raises:
        ValueError: If the clusters share a member or a member is not in the matrix
    """
    if set(ci.members) & set(cj.members):
        raise ValueError(f"clusters {ci.cluster_id} and {cj.cluster_id} are not disjoint")
    try:
        rows = [matrix.index[sid] for sid in ci.members]
        cols = [matrix.index[sid] for sid in cj.members]
    except KeyError as e:
        raise ValueError(f"occurrence {e.args[0]!r} is not in the distance matrix") from e
    return float(matrix.entries[np.ix_(rows, cols)].mean())


@dataclass(frozen=True)
class MergeStep:
    """One merge of the agglomeration: clusters ``left`` and ``right`` became ``left``"""

    left: int
    right: int
    distance: float
    size: int


def _merge(matrix: DistanceMatrix, rho: Optional[float]) -> tuple[list[list[int]], list[MergeStep]]:
    """
    Merge the closest pair until no pair is closer than rho (None: until one cluster).

    Working cluster ids are row indices; a merged cluster keeps the smaller
    id. Among equally close pairs the smallest (min id, max id) goes first.
    """
    n = matrix.n
    totals = matrix.entries.astype(float).copy()
    sizes = np.ones(n)
    active = np.ones(n, dtype=bool)
    members: list[list[int]] = [[i] for i in range(n)]
    steps: list[MergeStep] = []
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)

    while active.sum() > 1:
        linkage = totals / np.outer(sizes, sizes)
        candidate = upper & active[:, None] & active[None, :]
        linkage = np.where(candidate, linkage, np.inf)
        best = linkage.min()
        if rho is not None and not best < rho:
            break
        i, j = (int(k) for k in np.argwhere(linkage == best)[0])
        totals[i, :] += totals[j, :]
        totals[:, i] += totals[:, j]
        sizes[i] += sizes[j]
        active[j] = False
        members[i].extend(members[j])
        members[j] = []
        steps.append(MergeStep(i, j, float(best), int(sizes[i])))
        logger.debug("Cluster: merged %d+%d at %.4f (size %d)", i, j, best, sizes[i])

    groups = [sorted(members[i]) for i in range(n) if active[i]]
    return groups, steps


def linkage_trace(matrix: DistanceMatrix, rho: Optional[float] = None) -> list[MergeStep]:
    """The ordered merges agglomeration performs on a matrix; ids are matrix rows"""
    _, steps = _merge(matrix, rho)
    return steps


def agglomerate(
    data: Sequence[ActivityOccurrence],
    rho: float = DEFAULT_RHO,
    time_basis: TimeBasis = DEFAULT_TIME_BASIS,
) -> list[Cluster]:
    """
    Cluster occurrences by average linkage, merging while the closest pair is below rho.

    Occurrences are ordered by sid before clustering and the resulting
    clusters are numbered 0..k-1 by their smallest sid, so the output does not
    depend on input order.

    Args:
        data: Occurrences with unique sids
        rho: Distance threshold in [0, 1]
        time_basis: Time axis for the time similarity

    Returns:
        A hard partition of data as clusters sorted by cluster_id

    Raises:
        ValueError: If data is empty or rho is outside [0, 1]
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must be in [0, 1], got {rho}")
    ordered = sorted(data, key=lambda occurrence: occurrence.sid)
    matrix = distance_matrix(ordered, time_basis)
    groups, steps = _merge(matrix, rho)
    groups.sort(key=lambda group: group[0])
    clusters = [
        Cluster(cluster_id=k, members=tuple(matrix.sids[i] for i in group))
        for k, group in enumerate(groups)
    ]
    logger.info(
        "Cluster: %d occurrences into %d clusters at rho %.3f (%d merges)",
        len(ordered), len(clusters), rho, len(steps),
    )
    return clusters


def label_clusters(
    clusters: Sequence[Cluster], occurrences: Sequence[ActivityOccurrence]
) -> tuple[list[Cluster], dict[int, Optional[float]]]:
    """
    Attach the majority ground-truth label to each cluster.

    Returns:
        Tuple of (clusters with label_hint set, purity per cluster id); both
        stay None for clusters without labeled members. Ties go to the
        alphabetically first label.
    """
    labels = {occurrence.sid: occurrence.label for occurrence in occurrences}
    labeled = []
    purities: dict[int, Optional[float]] = {}
    for cluster in clusters:
        counts = Counter(labels[sid] for sid in cluster.members if labels.get(sid) is not None)
        hint = min(counts, key=lambda label: (-counts[label], label)) if counts else None
        labeled.append(Cluster(cluster.cluster_id, cluster.members, hint))
        purities[cluster.cluster_id] = cluster.purity(labels)
    return labeled, purities