"""Subcommands of the Smart Home Activity Learner"""

from .ingest_commands import SynthCommand, SegmentCommand
from .model_commands import ClusterCommand, TrainCommand, RecognizeCommand, NextActionCommand
from .mining_commands import MineCommand, RulesCommand, PredictCommand
from .evaluation_commands import EvalCommand, SweepCommand

__all__ = [
    "SynthCommand",
    "SegmentCommand",
    "ClusterCommand",
    "TrainCommand",
    "RecognizeCommand",
    "NextActionCommand",
    "MineCommand",
    "RulesCommand",
    "PredictCommand",
    "EvalCommand",
    "SweepCommand",
]
