class CrpfbError(Exception):
    """Base class for library errors."""


class EmptyPrior(CrpfbError, ValueError):
    """A hypothesised chirp range has no overlap with the configured bounds."""


class PartitionError(CrpfbError, ValueError):
    """The observation interval cannot be split into whole blocks/subintervals."""


class Degenerate(CrpfbError, ValueError):
    """Samples have no spread, so a distribution cannot be fitted."""


class NotConverged(CrpfbError, RuntimeError):
    """An iterative fit hit its iteration cap."""
