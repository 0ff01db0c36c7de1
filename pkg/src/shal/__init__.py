"""Smart Home Activity Learner - learn activity models from smart-home sensor event logs"""

__version__ = "1.0.0"

from . import commands

classes = (
    commands.SynthCommand,
    commands.SegmentCommand,
    commands.ClusterCommand,
    commands.TrainCommand,
    commands.MineCommand,
    commands.RulesCommand,
    commands.RecognizeCommand,
    commands.NextActionCommand,
    commands.PredictCommand,
    commands.EvalCommand,
    commands.SweepCommand,
)


def register(subparsers, parents=()) -> None:
    """Add one subparser per command class"""
    for cls in classes:
        parser = subparsers.add_parser(
            cls.name, help=cls.description, description=cls.description, parents=list(parents)
        )
        cls.add_arguments(parser)
        parser.set_defaults(command_class=cls)
