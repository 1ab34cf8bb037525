"""Exception types shared across the package."""


class NumericalFailure(RuntimeError):
    """A solve produced a non-finite state.

    Carries the simulation time and, when known, the replica seed so that
    ensemble drivers can report the failing case.
    """

    def __init__(self, message, time=None, seed=None):
        super().__init__(message)
        self.time = time
        self.seed = seed
