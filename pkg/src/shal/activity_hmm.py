"""Per-activity hidden Markov models: construction, Forward scoring and recognition"""

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .constants import DEFAULT_EMISSION_FLOOR, DEFAULT_SMOOTHING, ROW_SUM_TOLERANCE
from .exceptions import ModelError, NormalizationError
from .shal_types import ActivityOccurrence, Cluster, EventTypeKey, index_occurrences
from .utils import get_logger

logger = get_logger("activity_hmm")


def validate_stochastic(matrix: np.ndarray, where: str) -> None:
    """Check every row of a 1-D or 2-D array is a probability distribution.

    Raises:
        NormalizationError: Naming the first row whose entries do not sum to 1
        ModelError: If any entry is negative or not finite
    """
    rows = np.atleast_2d(matrix)
    if not np.all(np.isfinite(rows)):
        raise ModelError(f"{where} contains NaN or infinite values")
    if np.any(rows < 0):
        raise ModelError(f"{where} contains negative probabilities")
    sums = rows.sum(axis=1)
    for row, total in enumerate(sums):
        if abs(total - 1.0) > ROW_SUM_TOLERANCE:
            raise NormalizationError(where, row, float(total))


@dataclass(frozen=True, eq=False)
class ActivityHMM:
    """One activity pattern: lambda = (A, B, o) over event-type states.

    ``transition`` is N x N, ``emission`` is N x V and ``initial`` has length N.
    Observations outside ``vocabulary`` are emitted with ``emission_floor``
    by every state.
    """

    cluster_id: int
    states: tuple[EventTypeKey, ...]
    vocabulary: tuple[EventTypeKey, ...]
    transition: np.ndarray
    emission: np.ndarray
    initial: np.ndarray
    emission_floor: float = DEFAULT_EMISSION_FLOOR

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "vocabulary", tuple(self.vocabulary))
        for name in ("transition", "emission", "initial"):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

        n, v = len(self.states), len(self.vocabulary)
        if n == 0:
            raise ModelError(f"cluster {self.cluster_id}: model has no states")
        if self.transition.shape != (n, n):
            raise ModelError(f"cluster {self.cluster_id}: transition shape {self.transition.shape} != {(n, n)}")
        if self.emission.shape != (n, v):
            raise ModelError(f"cluster {self.cluster_id}: emission shape {self.emission.shape} != {(n, v)}")
        if self.initial.shape != (n,):
            raise ModelError(f"cluster {self.cluster_id}: initial shape {self.initial.shape} != {(n,)}")
        if not 0.0 < self.emission_floor < 1.0:
            raise ModelError(f"cluster {self.cluster_id}: emission_floor must be in (0, 1)")
        validate_stochastic(self.transition, f"cluster {self.cluster_id} transition")
        validate_stochastic(self.emission, f"cluster {self.cluster_id} emission")
        validate_stochastic(self.initial, f"cluster {self.cluster_id} initial")

    def __eq__(self, other) -> bool:
        if not isinstance(other, ActivityHMM):
            return NotImplemented
        return (
            self.cluster_id == other.cluster_id
            and self.states == other.states
            and self.vocabulary == other.vocabulary
            and self.emission_floor == other.emission_floor
            and np.array_equal(self.transition, other.transition)
            and np.array_equal(self.emission, other.emission)
            and np.array_equal(self.initial, other.initial)
        )

    __hash__ = object.__hash__

    @cached_property
    def vocabulary_index(self) -> dict[EventTypeKey, int]:
        return {key: i for i, key in enumerate(self.vocabulary)}

    @cached_property
    def _log_parameters(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        with np.errstate(divide="ignore"):
            return np.log(self.initial), np.log(self.transition), np.log(self.emission)

    def log_emission_column(self, symbol: EventTypeKey) -> np.ndarray:
        """log b_i(symbol) for every state i"""
        k = self.vocabulary_index.get(symbol)
        if k is None:
            return np.full(len(self.states), np.log(self.emission_floor))
        return self._log_parameters[2][:, k]


def build_hmm(
    cluster: Cluster,
    corpus: Sequence[ActivityOccurrence],
    smoothing: float = DEFAULT_SMOOTHING,
    emission_floor: float = DEFAULT_EMISSION_FLOOR,
) -> ActivityHMM:
    """
    Build the activity pattern of one cluster from its members' event sequences.

    States are the sorted distinct event types of the members. Initial and
    transition probabilities are Laplace-smoothed count ratios; a row that
    has no outgoing pairs and no smoothing falls back to uniform. Emission is
    a smoothed identity: each state emits its own event type with
    1 - emission_floor * (V - 1) and every other type with emission_floor.

    Args:
        cluster: The cluster whose members define the activity
        corpus: Occurrences containing at least every member
        smoothing: Laplace constant (>= 0)
        emission_floor: Off-diagonal emission probability, in (0, 1)

    Returns:
        The ActivityHMM for this cluster

    Raises:
        ModelError: Empty cluster, unknown member, zero-event member or an
            emission_floor too large for the vocabulary
    """
    if smoothing < 0:
        raise ModelError(f"smoothing must be >= 0, got {smoothing}")
    if not cluster.members:
        raise ModelError(f"cluster {cluster.cluster_id} is empty")

    index = index_occurrences(corpus)
    sequences: list[list[EventTypeKey]] = []
    for sid in cluster.members:
        occurrence = index.get(sid)
        if occurrence is None:
            raise ModelError(f"cluster {cluster.cluster_id}: member {sid!r} not in corpus")
        if len(occurrence.events) == 0:
            raise ModelError(f"cluster {cluster.cluster_id}: occurrence {sid!r} has no events")
        sequences.append(occurrence.observations)

    states = tuple(sorted({key for sequence in sequences for key in sequence}))
    n = len(states)
    if n > 1 and emission_floor * (n - 1) >= 1.0:
        raise ModelError(
            f"cluster {cluster.cluster_id}: emission_floor {emission_floor} leaves no mass "
            f"for the diagonal with {n} symbols"
        )
    position = {key: i for i, key in enumerate(states)}

    initial_counts = np.zeros(n)
    transition_counts = np.zeros((n, n))
    for sequence in sequences:
        indices = np.array([position[key] for key in sequence])
        initial_counts[indices[0]] += 1
        np.add.at(transition_counts, (indices[:-1], indices[1:]), 1)

    initial = (initial_counts + smoothing) / (len(sequences) + smoothing * n)

    row_totals = transition_counts.sum(axis=1, keepdims=True) + smoothing * n
    transition = np.full((n, n), 1.0 / n)
    observed = row_totals[:, 0] > 0
    transition[observed] = (transition_counts[observed] + smoothing) / row_totals[observed]

    emission = np.full((n, n), emission_floor)
    np.fill_diagonal(emission, 1.0 - emission_floor * (n - 1))

    logger.debug(
        "Train: cluster %d, %d members, %d states", cluster.cluster_id, len(sequences), n
    )
    return ActivityHMM(
        cluster_id=cluster.cluster_id,
        states=states,
        vocabulary=states,
        transition=transition,
        emission=emission,
        initial=initial,
        emission_floor=emission_floor,
    )


def train_models(
    clusters: Sequence[Cluster],
    corpus: Sequence[ActivityOccurrence],
    smoothing: float = DEFAULT_SMOOTHING,
    emission_floor: float = DEFAULT_EMISSION_FLOOR,
) -> list[ActivityHMM]:
    """Build one model per cluster, ordered by cluster id"""
    ordered = sorted(clusters, key=lambda cluster: cluster.cluster_id)
    return [build_hmm(cluster, corpus, smoothing, emission_floor) for cluster in ordered]


def _log_forward_matrix(model: ActivityHMM, obs: Sequence[EventTypeKey]) -> np.ndarray:
    """T x N matrix of log alpha[t][i] = log P(o_1..o_t, q_t = s_i)"""
    if len(obs) == 0:
        raise ModelError("cannot score an empty observation sequence")
    log_initial, log_transition, _ = model._log_parameters
    log_alpha = np.empty((len(obs), len(model.states)))
    log_alpha[0] = log_initial + model.log_emission_column(obs[0])
    for t in range(1, len(obs)):
        log_alpha[t] = logsumexp(log_alpha[t - 1][:, None] + log_transition, axis=0)
        log_alpha[t] += model.log_emission_column(obs[t])
    return log_alpha


def forward(model: ActivityHMM, obs: Sequence[EventTypeKey]) -> float:
    """
    Log-likelihood log P(obs | model) by the Forward recursion in log space.

    Raises:
        ModelError: If obs is empty
    """
    log_alpha = _log_forward_matrix(model, obs)
    # P(O|lambda) <= 1; clip the last-ulp overshoot logsumexp can produce
    return min(float(logsumexp(log_alpha[-1])), 0.0)


def recognize(
    obs: Sequence[EventTypeKey], models: Sequence[ActivityHMM]
) -> tuple[int, list[tuple[int, float]]]:
    """
    Pick the model most likely to have produced obs.

    Returns:
        Tuple of (best_cluster_id, ranking) where ranking lists every
        (cluster_id, log_probability) by descending log-probability, ties
        broken by the smaller cluster id

    Raises:
        ModelError: If there are no models or obs is empty
    """
    if not models:
        raise ModelError("recognition needs at least one model")
    scores = [(model.cluster_id, forward(model, obs)) for model in models]
    ranking = sorted(scores, key=lambda item: (-item[1], item[0]))
    logger.debug("Recognize: best cluster %d (%.4f)", ranking[0][0], ranking[0][1])
    return ranking[0][0], ranking


def next_action_distribution(
    model: ActivityHMM, obs: Sequence[EventTypeKey]
) -> list[tuple[EventTypeKey, float]]:
    """
    Distribution of the next observed event type within an ongoing activity.

    The filtered state posterior after obs is pushed through one transition
    and the emission matrix.

    Returns:
        (event type, probability) over the model vocabulary, most likely first

    Raises:
        ModelError: If obs is empty or has zero probability under the model
    """
    last = _log_forward_matrix(model, obs)[-1]
    total = logsumexp(last)
    if not np.isfinite(total):
        raise ModelError(f"cluster {model.cluster_id}: observations have zero probability")
    posterior = np.exp(last - total)
    next_symbol = posterior @ model.transition @ model.emission
    ranked = sorted(
        zip(model.vocabulary, next_symbol.tolist()), key=lambda item: (-item[1], item[0])
    )
    return ranked
