"""Error types raised by the Smart Home Activity Learner"""


class ShalError(Exception):
    """Base class for all errors raised by this package"""


class UsageError(ShalError):
    """Command line arguments that cannot be acted on"""


class DataError(ShalError, ValueError):
    """Input data that violates a documented format or invariant"""


class ParseError(DataError):
    """A row of an input file could not be parsed"""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class OccurrenceError(DataError):
    """An activity occurrence breaks its window or identity invariants"""

    def __init__(self, sid: str, message: str):
        self.sid = sid
        super().__init__(f"occurrence {sid!r}: {message}")


class BundleError(DataError):
    """A model bundle could not be written or read"""


class BundleSchemaError(BundleError):
    """A model bundle document is malformed or has the wrong schema version"""


class NormalizationError(BundleError):
    """A probability row does not sum to one"""

    def __init__(self, where: str, row: int, total: float):
        self.where = where
        self.row = row
        self.total = total
        super().__init__(f"{where} row {row} sums to {total!r}, expected 1")


class ModelError(DataError):
    """An activity model cannot be built or evaluated from the given inputs"""
