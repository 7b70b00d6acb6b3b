"""Track-before-detect with cost-reference particle filter banks."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    CrpfbError,
    Degenerate,
    EmptyPrior,
    NotConverged,
    PartitionError,
)
