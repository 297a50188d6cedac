"""Exception hierarchy shared by all kamforge modules."""

from __future__ import annotations


class KamError(Exception):
    """Base class for all kamforge errors."""


class InvalidParams(KamError, ValueError):
    """A precondition on user-supplied parameters is violated."""


class DivergentSum(KamError):
    """A lattice series was requested outside its convergence region."""


class SmallDivisor(KamError):
    """A homological divisor fell below the Diophantine guard."""

    def __init__(self, k, value: float, guard: float):
        self.k = tuple(int(x) for x in k)
        self.value = float(value)
        self.guard = float(guard)
        super().__init__(
            f"divisor |omega.k|={value:.3e} below guard {guard:.3e} at k={self.k}"
        )


class NonzeroAverage(KamError):
    """The homological right-hand side has a nonzero angle average."""


class NoConvergence(KamError):
    """An iterative solve exhausted its iteration budget."""

    def __init__(self, iterations: int, last_residual: float):
        self.iterations = int(iterations)
        self.last_residual = float(last_residual)
        super().__init__(
            f"no convergence after {iterations} iterations "
            f"(last residual {last_residual:.3e})"
        )


class SingularHessian(KamError):
    """The action Hessian is singular where invertibility is required."""


class ContractionFailed(KamError):
    """The angle-map fixed point did not contract."""


class RecenterFailed(KamError):
    """Newton re-centering of the frequency map failed."""


class HypothesisViolated(KamError):
    """A per-step schedule invariant failed."""

    def __init__(self, step: int, which: str):
        self.step = int(step)
        self.which = str(which)
        super().__init__(f"schedule hypothesis '{which}' violated at step {step}")


class NoAdmissibleMu(KamError):
    """The smallness predicate fails even as the trial size tends to zero."""


class NoAdmissibleR(KamError):
    """No covering-radius candidate satisfies the volume constraint."""


class FocalExceeded(KamError):
    """Tube half-width exceeds the focal radius of the sphere."""


class UnsupportedDomain(KamError):
    """A measure bound was requested on a domain shape it does not cover."""


class IntegratorFailure(KamError):
    """The adaptive flow integrator could not meet its tolerance."""


class CapExceeded(KamError):
    """A spectral grid would exceed the hard cap without resolving the data."""
