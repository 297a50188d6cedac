"""Shared parameter record consumed by every threshold and schedule evaluator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidParams


@dataclass(frozen=True)
class KamParameters:
    """Analytic data of one nearly integrable Hamiltonian instance.

    M is the perturbation norm, Kbound the Hessian norm, Tbound the norm of
    the inverse Hessian at the reference action.  Scheme-specific inputs
    (s_hat, nu, E_hat, h policy, ...) travel in `extra`.
    """

    d: int
    tau: float
    alpha: float
    r: float
    s: float
    sigma: float
    omega: tuple[float, ...]
    M: float
    Kbound: float
    Tbound: float
    eps0: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise InvalidParams(f"d must be an integer >= 2, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        if self.tau < self.d - 1:
            raise InvalidParams(f"tau must be >= d-1 = {self.d - 1}, got {self.tau}")
        if not self.alpha > 0:
            raise InvalidParams(f"alpha must be > 0, got {self.alpha}")
        if not self.r > 0:
            raise InvalidParams(f"r must be > 0, got {self.r}")
        if not 0 < self.s <= 1:
            raise InvalidParams(f"s must lie in (0, 1], got {self.s}")
        if not 0 < self.sigma < self.s / 2:
            raise InvalidParams(
                f"sigma must lie in (0, s/2) = (0, {self.s / 2}), got {self.sigma}"
            )
        omega = tuple(float(w) for w in self.omega)
        object.__setattr__(self, "omega", omega)
        if len(omega) != self.d:
            raise InvalidParams(f"omega must have length d={self.d}, got {len(omega)}")
        if self.M < 0:
            raise InvalidParams(f"M must be >= 0, got {self.M}")
        if not self.Kbound > 0 or not self.Tbound > 0:
            raise InvalidParams("Kbound and Tbound must be > 0")
        if self.eta < 1 - 1e-12:
            raise InvalidParams(
                f"Tbound*Kbound = {self.eta} violates the operator-norm lower bound 1"
            )

    @property
    def eta(self) -> float:
        return self.Tbound * self.Kbound

    @property
    def omega_sup(self) -> float:
        return max(abs(w) for w in self.omega)

    @property
    def omega_l1(self) -> float:
        return sum(abs(w) for w in self.omega)

    @property
    def omega_l2(self) -> float:
        return math.sqrt(sum(w * w for w in self.omega))

    @property
    def nu(self) -> float:
        return self.tau + 1

    def require_extra(self, key: str, scheme: str) -> float:
        if key not in self.extra:
            raise InvalidParams(f"scheme {scheme} requires extra[{key!r}]")
        return self.extra[key]

    def to_json(self) -> dict:
        return {
            "d": self.d, "tau": self.tau, "alpha": self.alpha, "r": self.r,
            "s": self.s, "sigma": self.sigma, "omega": list(self.omega),
            "M": self.M, "Kbound": self.Kbound, "Tbound": self.Tbound,
            "eps0": self.eps0,
            "extra": {k: v for k, v in sorted(self.extra.items())},
        }
