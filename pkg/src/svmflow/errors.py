"""Failure signals shared by the time integrators."""

SINGULAR_CONSTRAINT = "singular_constraint"
ROOT_DIVERGED = "root_diverged"
PICARD_DIVERGED = "picard_diverged"


class StepFailure(RuntimeError):
    """A time step could not be completed.

    ``reason`` is one of SINGULAR_CONSTRAINT (the scalar energy constraint
    has a vanishing derivative away from its root), ROOT_DIVERGED (the
    constraint root escaped the trust region or Newton failed, i.e. the
    step size is too large), or PICARD_DIVERGED (the fixed-point sweep of
    the fully implicit scheme did not contract).
    """

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason
