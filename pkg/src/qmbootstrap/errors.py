"""Exception taxonomy shared across the engine.

Every error the engine can raise deliberately is one of these classes, so the
CLI can map each to a stable exit code. Anything else escaping is a bug.
"""


class EngineError(Exception):
    """Base class for all deliberate engine errors."""


class NonSmoothPotential(EngineError):
    """Potential outside the smooth closed families (|x|^nu wells, piecewise pieces)."""


class NonConfining(EngineError):
    """Potential with no bound spectrum to scan for."""


class BadParameter(EngineError):
    """Structurally valid request with an out-of-range or inconsistent parameter."""


class UnknownInitialData(EngineError):
    """Family whose minimal initial-data set is not known; scanning is disabled."""


class MissingInitial(EngineError):
    """Initial data omits a value the recursion needs before it can start."""


class Overflow(EngineError):
    """A moment exceeded the magnitude ceiling; the trial point diverges."""


class UnsupportedFamily(EngineError):
    """Requested generator or matrix is not implemented for this family."""


class IncompleteTable(EngineError):
    """Matrix assembly needs a moment the table does not contain."""


class NumericalFailure(EngineError):
    """Linear algebra failed or produced non-finite output; never silently infeasible."""


class DomainTooSmall(EngineError):
    """Oracle wavefunction has not decayed at the domain boundary."""


class NonIntegrableMoment(EngineError):
    """Requested moment diverges for the state's decay rate."""


class ConfigParse(EngineError):
    """Run configuration file is malformed or inconsistent."""


class Io(EngineError):
    """Filesystem problem while reading config or writing results."""
