"""Exception types shared across the package.

Every failure mode that callers are expected to branch on gets its own
class; anything else is a plain ValueError from the offending function.
"""


class OrthoflowError(Exception):
    """Base class for package-specific failures."""


class PerturbationBreaksConvergence(OrthoflowError):
    """A coefficient perturbation left the weight non-normalizable.

    Raised by potential.perturb when the perturbed potential no longer has
    even degree with a positive leading coefficient.
    """

    def __init__(self, k, delta, reason):
        self.k = k
        self.delta = delta
        self.reason = reason
        super().__init__(f"perturbing u_{k} by {delta} breaks convergence: {reason}")


class PrecisionUnreachable(OrthoflowError):
    """An internal error estimate could not be pushed below the target.

    Carries the best achieved estimate and the target so callers can report
    how far off the computation stopped.
    """

    def __init__(self, target, achieved, context=""):
        self.target = target
        self.achieved = achieved
        self.context = context
        msg = f"error estimate {achieved} above target {target}"
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg)


class HankelSingular(OrthoflowError):
    """A leading principal Hankel minor is not positive at working precision.

    `n` is the order at which the Cholesky pivot failed; this usually means
    the moments were not computed accurately enough for the requested N.
    """

    def __init__(self, n, pivot=None):
        self.n = n
        self.pivot = pivot
        detail = f" (pivot {pivot})" if pivot is not None else ""
        super().__init__(f"Hankel pivot not positive at order n={n}{detail}")


class BreakdownAtStep(OrthoflowError):
    """The Stieltjes orthogonalization lost positivity at step n."""

    def __init__(self, n, value=None):
        self.n = n
        self.value = value
        super().__init__(f"discrete orthogonalization broke down at step n={n}")


class OutsideTrustWindow(OrthoflowError):
    """An entry was requested beyond the certified window of a truncated operator.

    Not a sign of a wrong answer per se: the entry exists but truncation
    effects may have polluted it, so downstream identities cannot rely on it.
    """

    def __init__(self, n, m, trust):
        self.n = n
        self.m = m
        self.trust = trust
        super().__init__(f"entry ({n},{m}) outside trust window {trust}")
