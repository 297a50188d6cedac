"""Explicit constant tables for the quantitative KAM normal-form schemes.

Each scheme's chain of constants is evaluated exactly as defined, in
log-domain arithmetic (see logvalue), so that intermediate products such as
squared maxima of large terms never overflow a double.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from scipy.special import zeta as _zeta

from .errors import DivergentSum, InvalidParams
from .logvalue import ONE, ZERO, LogValue, lv_max, lv_min

SCHEMES = (
    "Kolmogorov",
    "Arnold",
    "Poschel",
    "SalamonZehnder",
    "SharpArnold",
    "ExtensionSharp",
    "LebLocGen",
)

_SERIES_STOP = math.log(1e-18)


def l1_moment(p: float, d: int) -> LogValue:
    """Integral of |y|_1**p * exp(-|y|_1) over R^d.

    Closed form 2^d Gamma(p+d)/Gamma(d); the quadrature and Monte-Carlo
    cross-checks live in the test suite.
    """
    if p < 0 or d < 1:
        raise InvalidParams(f"l1_moment needs p >= 0 and d >= 1, got p={p}, d={d}")
    ln = d * math.log(2.0) + math.lgamma(p + d) - math.lgamma(d)
    return LogValue.from_ln(ln)


def lattice_shell_count(m: int, d: int) -> int:
    """Number of integer vectors k in Z^d with |k|_1 = m."""
    if m == 0:
        return 1
    total = 0
    for j in range(1, min(d, m) + 1):
        total += 2**j * math.comb(d, j) * math.comb(m - 1, j - 1)
    return total


@dataclass(frozen=True)
class LatticeZeta:
    """Value of sum over k != 0 of |k|_1^(-nu), with a certified tail."""

    value: LogValue
    tail_bound: float
    shells_summed: int

    @property
    def value_float(self) -> float:
        return self.value.to_real()


def _shell_count_poly(d: int) -> list[list[float]]:
    """Coefficients of C(m-1, j-1) as a polynomial in m, for j = 1..d."""
    polys = []
    for j in range(1, d + 1):
        # prod_{i=1}^{j-1} (m - i) / (j-1)!
        coeffs = [1.0]
        for i in range(1, j):
            new = [0.0] * (len(coeffs) + 1)
            for p, c in enumerate(coeffs):
                new[p + 1] += c
                new[p] += -i * c
            coeffs = new
        fact = math.factorial(j - 1)
        polys.append([c / fact for c in coeffs])
    return polys


def lattice_zeta(nu: float, d: int, shells: int = 2000) -> LatticeZeta:
    """Sum over nonzero k in Z^d of |k|_1^(-nu).

    Exact shell counts are summed for m <= shells; the remainder is the
    same shell polynomial contracted against Hurwitz zeta values, so the
    result is exact to machine precision.  A certified integral tail bound
    on the remainder is returned alongside.
    """
    if nu <= d:
        raise DivergentSum(
            f"sum over |k|_1^(-nu) diverges for nu={nu} <= d={d} "
            f"(shell counts grow like m^(d-1))"
        )
    head = 0.0
    for m in range(1, shells + 1):
        head += lattice_shell_count(m, d) * float(m) ** (-nu)
    remainder = 0.0
    for j, poly in enumerate(_shell_count_poly(d), start=1):
        w = 2**j * math.comb(d, j)
        for p, c in enumerate(poly):
            if c != 0.0:
                remainder += w * c * float(_zeta(nu - p, shells + 1))
    M1 = shells + 1
    tail_bound = 2 ** (2 * d - 1) * (
        M1 ** (d - 1 - nu) + M1 ** (d - nu) / (nu - d)
    )
    return LatticeZeta(
        value=LogValue.from_real(head + remainder),
        tail_bound=tail_bound,
        shells_summed=shells,
    )


@dataclass(frozen=True)
class ConstantTable:
    """Named explicit constants of one KAM scheme at fixed (d, tau)."""

    scheme: str
    d: int
    tau: float
    nu_extra: float | None
    entries: dict[str, LogValue] = field(default_factory=dict)

    def __getitem__(self, name: str) -> LogValue:
        return self.entries[name]

    def value(self, name: str) -> float:
        return self.entries[name].to_real()

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme,
            "d": self.d,
            "tau": self.tau,
            "nu_extra": self.nu_extra,
            "entries": {k: v.to_json() for k, v in self.entries.items()},
        }


def _series(term_ln, ratio_floor: float = 0.75):
    """Sum a positive series given term j -> ln(term_j).

    Stops once a term drops below 1e-18 of the partial sum, then certifies
    the remainder with a geometric bound from the last observed ratio.
    """
    total = ZERO
    prev_ln = None
    j = 0
    while True:
        ln = term_ln(j)
        total = total + LogValue.from_ln(ln)
        if j > 0 and ln < total.log_magnitude + _SERIES_STOP:
            ratio = math.exp(ln - prev_ln) if prev_ln is not None else 0.5
            if ratio >= 1.0:
                ratio = ratio_floor
            tail_ln = ln + math.log(ratio / (1.0 - ratio))
            if tail_ln >= total.log_magnitude + _SERIES_STOP:
                # certificate not yet tight enough, keep summing
                prev_ln = ln
                j += 1
                if j > 10000:
                    raise RuntimeError("series did not settle")
                continue
            return total
        prev_ln = ln
        j += 1
        if j > 10000:
            raise RuntimeError("series did not settle")


def _pow2(e: float) -> LogValue:
    return LogValue.from_pow2(e)


def _kolmogorov_entries(d: int, tau: float) -> dict[str, LogValue]:
    ln2 = math.log(2.0)
    C0 = _pow2(d + 1 - 2 * tau) * LogValue.gamma(2 * tau + 1).sqrt()
    C1 = LogValue.from_real(2.0) * LogValue.from_ln(tau * math.log(3.0)) * C0
    C2 = 2 * d * C1 + _pow2(-(tau + 1))
    C3 = d * C2 + _pow2(-(tau + 2))
    C4 = C2 + 0.25 * C1
    C5 = LogValue.from_ln(tau * math.log(3.0)) * d * C0 * (2 * d * C4 + _pow2(-(tau + 3)))
    C6 = _pow2(-(tau + 2)) * C4 + C5
    C7 = 1.5 * d * C5 + 81 * _pow2(-(tau + 3)) * d**3 * C4 + 9 * _pow2(-(2 * tau + 5)) * d**2
    C8 = 18 * C7
    C9 = 9 * d**2 * C6 * C6 + 3 * _pow2(-(2 * tau + 5)) * d * C6
    nu_bar = 4 * tau + 10
    nu = 4 * tau + 12
    C_bar = lv_max(_pow2(-(2 * tau + 5)) * C8, C9)
    bracket = 3 * d * C_bar + _pow2(-(2 * tau + 6)) * C7
    C_tilde = d * bracket
    C_sharp = LogValue.from_real(9 * d / 5) * LogValue.from_ln((4 * tau + 23) * ln2) * bracket
    c = ONE / C_sharp
    C_hat = LogValue.from_real(6 * d / 5) * bracket
    C_big = C_hat / (3 * C_bar)
    return {
        "C0": C0, "C1": C1, "C2": C2, "C3": C3, "C4": C4, "C5": C5,
        "C6": C6, "C7": C7, "C8": C8, "C9": C9,
        "nu_bar": LogValue.from_real(nu_bar), "nu": LogValue.from_real(nu),
        "C_bar": C_bar, "C_tilde": C_tilde, "C_sharp": C_sharp, "c": c,
        "C_hat": C_hat, "C": C_big,
    }


def _arnold_entries(d: int, tau: float) -> dict[str, LogValue]:
    nu = tau + 1
    ln3h = math.log(1.5)
    C0 = (LogValue.from_real(4) * LogValue.from_real(2).sqrt()
          * LogValue.from_ln((2 * nu + d) * ln3h)
          * (l1_moment(nu, d) + d * l1_moment(2 * nu, d)))
    C1 = LogValue.from_real(2) * LogValue.from_ln((nu + d) * ln3h) * l1_moment(nu, d)
    C2 = LogValue.from_real(d**4) * LogValue.from_ln(8 * (d - 1) * math.log(3.0))
    C3 = d**2 * C1 * C1 + 6 * d * C1 + ONE
    C4 = lv_max(C0, C3)
    C5 = _pow2(2 * (nu + d) + 11) * (9.0 / 25.0) * d**2
    C7 = lv_max(C2, C4)
    C6 = lv_max(LogValue.from_real(32 * d), LogValue.from_ln(-nu * math.log(10.0)) * C7)
    C8 = 3 * LogValue.from_ln(nu * math.log(5.0)) * C6
    C9 = (LogValue.from_real(3.0 / 8.0) * LogValue.from_ln((2 * nu + 1) * math.log(5.0))
          * LogValue.from_real(2).sqrt() * C6)
    C10 = lv_max(ONE, LogValue.from_real(3 * d * 2 ** (5 - d) / 5) ** 0.25)
    C11 = C5 * C5 * C9 * C10 / 3
    return {
        "C0": C0, "C1": C1, "C2": C2, "C3": C3, "C4": C4, "C5": C5,
        "C6": C6, "C7": C7, "C8": C8, "C9": C9, "C10": C10, "C11": C11,
        "nu": LogValue.from_real(nu),
    }


def _poschel_entries(d: int, tau: float, nu: float) -> dict[str, LogValue]:
    nu_bar = tau + 1
    if not nu > nu_bar:
        raise InvalidParams(
            f"Poschel scheme needs nu_extra > tau+1 = {nu_bar}, got {nu}"
        )
    ln2 = math.log(2.0)
    beta = 1 - (nu - nu_bar) / (nu * nu_bar)
    c_bar = min(1.0, (nu - nu_bar) / (nu * nu_bar) * math.e)
    C0 = _pow2(d + 1 - 2 * tau) * LogValue.gamma(2 * tau + 1).sqrt()
    C1 = LogValue.from_real(4 * math.e / 3)
    C2 = LogValue.from_real(sum(
        math.factorial(d - 1) / (math.factorial(d - 1 - j) * float(d - 1) ** (j + 1))
        for j in range(d)
    ))
    C3 = 4 * (d + 1) * C0
    C4 = 16 * (d + 1) * C0
    C5 = 16 * (6 * C1 + ONE) * C3
    s6 = _series(lambda j: (-2 * nu_bar * (1.5**j - j - 1) - j) * ln2)
    C6 = 2 * d * C5 * s6
    s7 = _series(lambda j: (-nu_bar * (2 * 1.5**j - j - 2)) * ln2)
    pref = LogValue.from_real(36 * d * (d + 1)) * (6 * C1 + ONE)
    C7 = pref * LogValue.exp((pref / C6 * s7).to_real())
    s8 = _series(lambda j: (-nu_bar * (2 * 1.5**j - j - 2) - j) * ln2)
    C8 = C7 * s8
    C9 = lv_max(ONE, (6 * C1 + ONE) / (2 * C0))
    C10 = (LogValue.from_real(9) * _pow2(2 * nu_bar)
           * lv_max(48 * d * (d + 1)**2 * C0, _pow2(2 * d) * (d + 1) * C2) ** 2)
    C11 = LogValue.exp(0.5 * ((2 * nu_bar / c_bar) ** (1 / beta) + 0.05))
    C12 = (LogValue.from_real(2 / c_bar) ** nu
           * (2 * LogValue.exp(1 / 40) * C6) ** (nu / nu_bar))
    C13 = LogValue.exp(0.5 * (((C0 / (6 * C1 + ONE)) ** (1 / nu_bar)).to_real() + 0.05))
    C_big = LogValue.exp(1 / 40) * C6
    C_star = lv_max(C6 * C9, C8)
    c = LogValue.from_ln(-nu * math.log(20.0)) * lv_min(
        ONE / (_pow2(2 * nu_bar) * C10),
        LogValue.from_ln(nu * math.log(20.0)) * LogValue.exp(1 / 40) / C11,
        LogValue.exp(1 / 40) / C12,
        LogValue.from_ln(nu * math.log(20.0)) / C13,
    )
    return {
        "C0": C0, "C1": C1, "C2": C2, "C3": C3, "C4": C4, "C5": C5,
        "C6": C6, "C7": C7, "C8": C8, "C9": C9, "C10": C10,
        "C11": C11, "C12": C12, "C13": C13,
        "C": C_big, "C_star": C_star, "c": c,
        "nu_bar": LogValue.from_real(nu_bar), "nu": LogValue.from_real(nu),
        "beta": LogValue.from_real(beta), "c_bar": LogValue.from_real(c_bar),
    }


def _salamon_zehnder_entries(d: int, tau: float) -> dict[str, LogValue]:
    # The A-parameters are instance data (norms of a specific Hamiltonian),
    # so the table only carries the polynomial bracket and the fixed
    # denominator prefactor of the smallness condition.
    prefactor = _pow2(8 * tau + 13) * LogValue.gamma(tau + 1) ** 4
    return {
        "Xi_lower": LogValue.from_real(1.25),
        "Xi_upper": LogValue.from_real(109.0),
        "prefactor_2pow_gamma4": prefactor,
    }


def _sharp_arnold_entries(d: int, tau: float) -> dict[str, LogValue]:
    nu = tau + 1
    ln3h = math.log(1.5)
    sqrt2 = LogValue.from_real(2).sqrt()
    C0 = (LogValue.from_real(4) * sqrt2 * LogValue.from_ln((2 * nu + d) * ln3h)
          * (l1_moment(nu, d) + d * l1_moment(2 * nu, d)))
    C1 = LogValue.from_real(2) * LogValue.from_ln((nu + d) * ln3h) * l1_moment(nu, d)
    C2 = _pow2(3 * d) * d
    C3 = (d**2 * C1 * C1 + 6 * d * C1 + C2) * sqrt2
    C4 = lv_max(C0, C3)
    C6 = lv_max(_pow2(2 * nu), LogValue.from_real(3 * 2**5 * d / 5))
    C7 = 3 * d * _pow2(6 * nu + 2 * d + 3) * sqrt2 * lv_max(LogValue.from_real(640 * d**2), C4)
    C8 = (_pow2(-d) * C6) ** 0.125
    C9 = C6 * C7 * C8 / (_pow2(2 * nu + 7) * d)
    C10 = 3 * _pow2(d) * C8
    return {
        "C0": C0, "C1": C1, "C2": C2, "C3": C3, "C4": C4,
        "C6": C6, "C7": C7, "C8": C8, "C9": C9, "C10": C10,
        "nu": LogValue.from_real(nu),
    }


def _extension_sharp_entries(d: int, tau: float) -> dict[str, LogValue]:
    nu = tau + 1
    ln3h = math.log(1.5)
    sqrt2 = LogValue.from_real(2).sqrt()
    C0 = (LogValue.from_real(4) * sqrt2 * LogValue.from_ln((2 * nu + d) * ln3h)
          * (l1_moment(nu, d) + d * l1_moment(2 * nu, d)))
    C1 = LogValue.from_real(2) * LogValue.from_ln((nu + d) * ln3h) * l1_moment(nu, d)
    C2 = _pow2(3 * d) * d
    C3 = (d**2 * C1 * C1 + 6 * d * C1 + C2) * sqrt2
    C4 = lv_max(C0, C3)
    C5 = 3 * d**2 * _pow2(6 * nu + 2 * d + 11) * lv_max(
        _pow2(7) * d * sqrt2, _pow2(-3 * nu) * C4
    )
    C6 = _pow2(nu + 0.75 * d + 53 / 8) * LogValue.from_real(float(d)) ** 1.25
    C7 = 2 * math.e * d * LogValue.from_ln((d - 1) * ln3h)
    C8 = C5 / (3 * _pow2(d))
    C9 = _pow2(3 * (nu + 1)) * d * sqrt2 * C6
    return {
        "C0": C0, "C1": C1, "C2": C2, "C3": C3, "C4": C4, "C5": C5,
        "C6": C6, "C7": C7, "C8": C8, "C9": C9,
        "nu": LogValue.from_real(nu),
    }


def _leb_loc_gen_entries(d: int, tau: float) -> dict[str, LogValue]:
    nu = tau + 1
    if nu <= d:
        raise DivergentSum(
            f"LebLocGen constant needs tau > d-1 (lattice sum at nu=tau+1={nu}, d={d})"
        )
    ext = _extension_sharp_entries(d, tau)
    z = lattice_zeta(nu, d)
    C = (LogValue.from_real(1 / 32)
         + LogValue.from_real(d * math.sqrt(d)) / ext["C9"]
         + z.value)
    C_hat = 64 * d * C
    return {
        "C": C,
        "C_hat": C_hat,
        "C9": ext["C9"],
        "zeta_nu": z.value,
        "nu": LogValue.from_real(nu),
    }


def constant_table(
    scheme: str, d: int, tau: float, nu_extra: float | None = None
) -> ConstantTable:
    """Evaluate one scheme's full table of explicit constants."""
    if scheme not in SCHEMES:
        raise InvalidParams(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if d < 2:
        raise InvalidParams(f"dimension d must be >= 2, got {d}")
    if tau < d - 1:
        raise InvalidParams(f"tau must be >= d-1 = {d - 1}, got {tau}")
    if scheme == "Kolmogorov":
        entries = _kolmogorov_entries(d, tau)
    elif scheme == "Arnold":
        entries = _arnold_entries(d, tau)
    elif scheme == "Poschel":
        if nu_extra is None:
            raise InvalidParams("Poschel scheme requires nu_extra (> tau+1)")
        entries = _poschel_entries(d, tau, float(nu_extra))
    elif scheme == "SalamonZehnder":
        entries = _salamon_zehnder_entries(d, tau)
    elif scheme == "SharpArnold":
        entries = _sharp_arnold_entries(d, tau)
    elif scheme == "ExtensionSharp":
        entries = _extension_sharp_entries(d, tau)
    else:
        entries = _leb_loc_gen_entries(d, tau)
    return ConstantTable(
        scheme=scheme, d=d, tau=float(tau),
        nu_extra=None if nu_extra is None else float(nu_extra),
        entries=entries,
    )
