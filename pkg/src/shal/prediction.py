"""Rule-based next-activity prediction from the recent endpoint history"""

from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence, Union

from .constants import DEFAULT_PREDICT_WINDOW
from .shal_types import ActivityOccurrence
from .tpminer import EndpointSequence, PredictionRule, SymbolSets, contains, drop_endpoint_collisions, to_endpoint_sequence
from .utils import get_logger

logger = get_logger("prediction")


@dataclass(frozen=True)
class Prediction:
    """An activity expected to start next, backed by the rule that fired"""

    activity_label: str
    rule: PredictionRule
    score: float

    def __post_init__(self):
        if self.score != self.rule.predictability:
            raise ValueError("prediction score must equal its rule's predictability")

    @property
    def support(self) -> int:
        return self.rule.support


def _open_labels(slots: Sequence[frozenset]) -> set[str]:
    counts: dict[str, int] = defaultdict(int)
    for slot in slots:
        for symbol in slot:
            counts[symbol.label] += -1 if symbol.is_end else 1
    return {label for label, count in counts.items() if count > 0}


def predict_next(
    history: Union[EndpointSequence, SymbolSets],
    rules: Sequence[PredictionRule],
    window: int = DEFAULT_PREDICT_WINDOW,
) -> list[Prediction]:
    """
    Rank the activities the rules expect to start next.

    A rule fires when its prefix is contained in the last ``window`` slots of
    the history, it predicts a start symbol, and that activity is not already
    running inside the window. Each label keeps its best-scoring rule.

    Args:
        history: Endpoint sequence of what has happened so far, or its raw
            slots when the last activities are still running
        rules: Prediction rules; rules predicting an end are ignored
        window: Number of most recent slots to match against

    Returns:
        Predictions sorted by (score desc, support desc, label asc); empty
        when nothing fires

    Raises:
        ValueError: If window < 1
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    slots = history.symbol_sets if isinstance(history, EndpointSequence) else tuple(history)
    recent = slots[-window:]
    running = _open_labels(recent)

    best: dict[str, PredictionRule] = {}
    for rule in rules:
        symbol = rule.predicted_symbol
        if symbol.is_end or symbol.label in running:
            continue
        if not contains(recent, rule.prefix):
            continue
        current = best.get(symbol.label)
        if current is None or (-rule.predictability, -rule.support, rule.full.key) < (
            -current.predictability,
            -current.support,
            current.full.key,
        ):
            best[symbol.label] = rule

    predictions = [Prediction(label, rule, rule.predictability) for label, rule in best.items()]
    predictions.sort(key=lambda p: (-p.score, -p.support, p.activity_label))
    logger.debug("Predict: %d of %d rules fired on %d slots", len(predictions), len(rules), len(recent))
    return predictions


def history_from_occurrences(
    occurrences: Sequence[ActivityOccurrence], sid: str = "history"
) -> EndpointSequence:
    """Endpoint history of the labeled, non-empty intervals among occurrences"""
    usable = sorted(
        (
            (occurrence.label, occurrence.start, occurrence.end, occurrence.sid)
            for occurrence in occurrences
            if occurrence.label is not None and occurrence.start < occurrence.end
        ),
        key=lambda item: (item[1], item[3]),
    )
    return to_endpoint_sequence(drop_endpoint_collisions(usable, "Predict"), sid)
