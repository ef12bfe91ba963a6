"""Exceptions raised by the competition simulator.

Every error the engine can raise derives from :class:`CompetitionError` so
management commands can map the whole family to one exit code.
"""


class CompetitionError(Exception):
    """Base class for simulator errors."""

    # constructor arguments, rebuilt when an error crosses a worker process
    fields = ()

    def __reduce__(self):
        if self.fields:
            return self.__class__, tuple(getattr(self, name) for name in self.fields)
        return super().__reduce__()


class DegreeSequenceError(CompetitionError):
    """A degree sequence or degree law is unusable."""


class OddTotalDegree(DegreeSequenceError):
    fields = ('total',)

    def __init__(self, total):
        self.total = total
        super().__init__(f"Total degree {total} is odd; half-edges cannot be paired")


class NonPositiveDegree(DegreeSequenceError):
    fields = ('index', 'value')

    def __init__(self, index, value):
        self.index = index
        self.value = value
        if value is None:
            message = "Degree sequence is empty"
        else:
            message = f"Degree at position {index} is {value}; degrees must be >= 1"
        super().__init__(message)


class InvalidPmf(DegreeSequenceError):
    pass


class OddSetSize(CompetitionError):
    fields = ('size',)

    def __init__(self, size):
        self.size = size
        super().__init__(f"Cannot perfectly match {size} half-edges")


class MaxAttemptsExceeded(CompetitionError):
    """Rejection sampling gave up before producing a simple graph."""

    fields = ('attempts',)

    def __init__(self, attempts):
        self.attempts = attempts
        super().__init__(
            f"No simple graph after {attempts} attempts; "
            f"the acceptance probability may be close to 0"
        )


class IdenticalSeeds(CompetitionError):
    pass


class VertexOutOfRange(CompetitionError):
    fields = ('vertex', 'n')

    def __init__(self, vertex, n):
        self.vertex = vertex
        self.n = n
        super().__init__(f"Vertex {vertex} outside [0, {n})")


class NoActiveHalfEdges(CompetitionError):
    pass


class ExhaustedFreePool(CompetitionError):
    pass


class InvariantViolation(CompetitionError):
    pass


class StepNotRecorded(CompetitionError):
    fields = ('k',)

    def __init__(self, k):
        self.k = k
        super().__init__(f"Step {k} is not in the recorded trajectory")


class InsufficientGrowth(CompetitionError):
    pass


class RangeNotCovered(CompetitionError):
    pass


class InsufficientSizes(CompetitionError):
    pass


class InstanceTooLarge(CompetitionError):
    pass


class ReplicaError(CompetitionError):
    """Wraps an engine error with the replica it happened in."""

    fields = ('index', 'error')

    def __init__(self, index, error):
        self.index = index
        self.error = error
        super().__init__(f"Replica {index} failed: {error}")
