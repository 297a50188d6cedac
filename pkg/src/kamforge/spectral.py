"""Fourier-in-angle / Taylor-in-action jets and the small-divisor solver.

A real-analytic function on D_r(y_c) x T^d is stored as a map from integer
harmonics k to truncated Taylor jets in (y - y_c).  Jets live in complex
arrays of shape (N+1,)*d; only total degree <= N is active.  All jet
arithmetic is truncated at that degree and vectorized over arbitrary
leading axes, which the iteration uses to carry whole angle grids of jets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParams, NonzeroAverage, SmallDivisor

# ---------------------------------------------------------------------------
# jet kernel


@lru_cache(maxsize=None)
class _JetTables:
    """Index tables for truncated jet arithmetic at fixed (d, degree)."""

    def __init__(self, d: int, degree: int):
        self.d = d
        self.degree = degree
        self.shape = (degree + 1,) * d
        actives = []
        for flat in range((degree + 1) ** d):
            l = np.unravel_index(flat, self.shape)
            if sum(l) <= degree:
                actives.append(flat)
        self.active = np.array(actives, dtype=np.intp)
        self.active_multi = [tuple(int(i) for i in np.unravel_index(a, self.shape))
                             for a in self.active]
        # multiplication pairs grouped by output monomial
        pairs = []
        for ia, la in enumerate(self.active_multi):
            for ib, lb in enumerate(self.active_multi):
                lo = tuple(x + y for x, y in zip(la, lb))
                if sum(lo) <= degree:
                    o = int(np.ravel_multi_index(lo, self.shape))
                    pairs.append((o, self.active[ia], self.active[ib]))
        pairs.sort()
        self.pair_o = np.array([p[0] for p in pairs], dtype=np.intp)
        self.pair_a = np.array([p[1] for p in pairs], dtype=np.intp)
        self.pair_b = np.array([p[2] for p in pairs], dtype=np.intp)
        outs, starts = np.unique(self.pair_o, return_index=True)
        self.group_out = outs
        self.group_starts = starts
        # per-axis shift matrices are built on demand (delta-dependent)
        self.l1 = np.array([sum(l) for l in self.active_multi])


def jet_zero(d: int, degree: int, lead=()) -> np.ndarray:
    return np.zeros(tuple(lead) + (degree + 1,) * d, dtype=complex)


def jet_const(d: int, degree: int, value, lead=()) -> np.ndarray:
    out = jet_zero(d, degree, lead)
    out[(...,) + (0,) * d] = value
    return out


def jet_mul(a: np.ndarray, b: np.ndarray, d: int, degree: int) -> np.ndarray:
    # box axis first keeps the pair gathers contiguous over the lead axes
    t = _JetTables(d, degree)
    lead = np.broadcast_shapes(a.shape[: a.ndim - d], b.shape[: b.ndim - d])
    af = np.ascontiguousarray(
        np.moveaxis(a.reshape(a.shape[: a.ndim - d] + (-1,)), -1, 0))
    bf = np.ascontiguousarray(
        np.moveaxis(b.reshape(b.shape[: b.ndim - d] + (-1,)), -1, 0))
    prod = af[t.pair_a] * bf[t.pair_b]
    summed = np.add.reduceat(prod, t.group_starts, axis=0)
    out = np.zeros((af.shape[0],) + lead, dtype=complex)
    out[t.group_out] = summed
    return np.moveaxis(out, 0, -1).reshape(lead + t.shape)


def jet_scalar_part(a: np.ndarray, d: int) -> np.ndarray:
    return a[(...,) + (0,) * d]


def jet_nilpotent(a: np.ndarray, d: int) -> np.ndarray:
    out = a.copy()
    out[(...,) + (0,) * d] = 0.0
    return out


def jet_exp(a: np.ndarray, d: int, degree: int) -> np.ndarray:
    """exp(jet); exact because the non-constant part is nilpotent."""
    c = np.exp(jet_scalar_part(a, d))
    nil = jet_nilpotent(a, d)
    out = jet_const(d, degree, 1.0, lead=a.shape[: a.ndim - d])
    term = out
    for m in range(1, degree + 1):
        term = jet_mul(term, nil, d, degree) / m
        out = out + term
    return out * c[(...,) + (None,) * d]


def jet_recip(a: np.ndarray, d: int, degree: int) -> np.ndarray:
    """1/jet via the finite Neumann series of the nilpotent part."""
    c = jet_scalar_part(a, d)
    if np.any(c == 0):
        raise ZeroDivisionError("jet reciprocal with vanishing constant part")
    nil = jet_nilpotent(a, d) / c[(...,) + (None,) * d]
    out = jet_const(d, degree, 1.0, lead=a.shape[: a.ndim - d])
    term = out
    for _ in range(degree):
        term = -jet_mul(term, nil, d, degree)
        out = out + term
    return out / c[(...,) + (None,) * d]


def jet_dy(a: np.ndarray, axis: int, d: int) -> np.ndarray:
    """Derivative with respect to the action component `axis`."""
    n = a.shape[-d:][axis]
    out = np.zeros_like(a)
    sl_src = [slice(None)] * a.ndim
    sl_dst = [slice(None)] * a.ndim
    ax = a.ndim - d + axis
    sl_src[ax] = slice(1, None)
    sl_dst[ax] = slice(0, n - 1)
    weights = np.arange(1, n, dtype=float)
    shape = [1] * a.ndim
    shape[ax] = n - 1
    out[tuple(sl_dst)] = a[tuple(sl_src)] * weights.reshape(shape)
    return out


def jet_shift(a: np.ndarray, delta, d: int, degree: int) -> np.ndarray:
    """Re-center the jet at center + delta (exact polynomial Taylor shift)."""
    out = a
    n = degree + 1
    for axis in range(d):
        dx = complex(delta[axis])
        S = np.zeros((n, n), dtype=complex)
        for m in range(n):
            for l in range(m, n):
                S[m, l] = math.comb(l, m) * dx ** (l - m)
        out = np.moveaxis(np.tensordot(out, S, axes=([out.ndim - d + axis], [1])),
                          -1, out.ndim - d + axis)
    return out


def jet_eval(a: np.ndarray, delta, d: int) -> np.ndarray:
    """Evaluate the jet polynomial at action offset delta."""
    out = a
    for axis in range(d - 1, -1, -1):
        n = out.shape[-1]
        powers = np.array([complex(delta[axis]) ** m for m in range(n)])
        out = out @ powers
    return out


def jet_compose_shift(a: np.ndarray, h: list[np.ndarray], d: int, degree: int,
                      min_order: int = 0, weight_base: float = 1.0) -> np.ndarray:
    """Taylor terms of a(delta + h) carrying >= min_order powers of h.

    h is a list of d jet fields (the action offsets), a the jet being
    shifted.  Each term with |m| powers of h is weighted by
    weight_base^(|m| - min_order); passing the effective perturbation size
    as weight_base yields the Taylor-remainder pieces of a KAM step scaled
    to order one, with no cancellation anywhere.
    """
    t = _JetTables(d, degree)
    lead = np.broadcast_shapes(*(x.shape[: x.ndim - d] for x in h)) \
        if h else a.shape[: a.ndim - d]
    hpow: dict[tuple, np.ndarray] = {(0,) * d: jet_const(d, degree, 1.0, lead=lead)}
    for l in sorted(t.active_multi, key=sum):
        if sum(l) == 0:
            continue
        axis = next(i for i, v in enumerate(l) if v > 0)
        prev = tuple(v - (1 if i == axis else 0) for i, v in enumerate(l))
        hpow[l] = jet_mul(hpow[prev], h[axis], d, degree)
    out = jet_zero(d, degree, lead=lead)
    af = a.reshape(a.shape[: a.ndim - d] + (-1,))
    for l in t.active_multi:
        flat = int(np.ravel_multi_index(l, t.shape))
        c_l = af[..., flat]
        if not np.any(c_l):
            continue
        # (delta + h)^l = sum_{m <= l} prod C(l_i, m_i) delta^(l-m) h^m
        for m in t.active_multi:
            if sum(m) < min_order:
                continue
            if any(mi > li for mi, li in zip(m, l)):
                continue
            coef = weight_base ** (sum(m) - min_order)
            for mi, li in zip(m, l):
                coef *= math.comb(li, mi)
            shift = tuple(li - mi for li, mi in zip(l, m))
            term = coef * c_l[(...,) + (None,) * d] * hpow[m]
            # multiply by the monomial delta^shift: an index shift
            src = tuple(slice(0, degree + 1 - s) for s in shift)
            dst = tuple(slice(s, degree + 1) for s in shift)
            out[(...,) + dst] += term[(...,) + src]
    # re-apply the total-degree mask lost by the box shifts
    mask = np.zeros(t.shape, dtype=bool)
    for l in t.active_multi:
        mask[l] = True
    return out * mask


# ---------------------------------------------------------------------------
# FourierJet


@dataclass(frozen=True)
class DiophantineGuard:
    alpha: float
    tau: float


class FourierJet:
    """Real-analytic function as harmonics k -> action jets around a center."""

    def __init__(self, d: int, center, action_radius: float, jet_degree: int,
                 kappa: int, coeffs: dict[tuple, np.ndarray]):
        self.d = int(d)
        self.center = np.asarray(center, dtype=float)
        self.action_radius = float(action_radius)
        self.jet_degree = int(jet_degree)
        self.kappa = int(kappa)
        self.coeffs = {tuple(int(x) for x in k): np.asarray(v, dtype=complex)
                       for k, v in coeffs.items()}

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, d: int, center=None, action_radius: float = 1.0,
             jet_degree: int = 0, kappa: int = 0) -> "FourierJet":
        center = np.zeros(d) if center is None else center
        return cls(d, center, action_radius, jet_degree, kappa, {})

    @classmethod
    def from_harmonics(cls, d: int, harmonics: dict, center=None,
                       action_radius: float = 1.0, jet_degree: int = 0) -> "FourierJet":
        """Build from a map k -> complex value (constant jets) or k -> jet."""
        center = np.zeros(d) if center is None else center
        coeffs = {}
        kappa = 0
        for k, v in harmonics.items():
            k = tuple(int(x) for x in k)
            kappa = max(kappa, sum(abs(x) for x in k))
            v = np.asarray(v, dtype=complex)
            if v.ndim == 0:
                jet = jet_const(d, jet_degree, complex(v))
            else:
                jet = v
            coeffs[k] = jet
        return cls(d, center, action_radius, jet_degree, kappa, coeffs)

    @classmethod
    def from_angle_function(cls, fn, d: int, kappa: int, center=None,
                            action_radius: float = 1.0, jet_degree: int = 0,
                            grid_factor: int = 2, prune: float = 1e-15,
                            ) -> "FourierJet":
        """Sample an x-only function on a trapezoidal grid and take its DFT.

        The grid has (2*grid_factor*kappa + 1) points per dimension, exact
        for trigonometric polynomials of degree <= grid_factor*kappa.
        """
        n = 2 * grid_factor * max(kappa, 1) + 1
        axes = [2 * np.pi * np.arange(n) / n] * d
        mesh = np.meshgrid(*axes, indexing="ij")
        vals = fn(*mesh)
        hat = np.fft.fftn(vals) / n**d
        freqs = np.fft.fftfreq(n, 1.0 / n).astype(int)
        coeffs = {}
        scale = np.max(np.abs(hat)) or 1.0
        for flat, c in np.ndenumerate(hat):
            k = tuple(int(freqs[i]) for i in flat)
            if sum(abs(x) for x in k) > kappa:
                continue
            if abs(c) <= prune * scale:
                continue
            coeffs[k] = jet_const(d, jet_degree, c)
        center = np.zeros(d) if center is None else center
        return cls(d, center, action_radius, jet_degree, kappa, coeffs)

    # -- basics --------------------------------------------------------------

    def coeff(self, k) -> np.ndarray:
        k = tuple(int(x) for x in k)
        jet = self.coeffs.get(k)
        if jet is None:
            return jet_zero(self.d, self.jet_degree)
        return jet

    def harmonics(self):
        return sorted(self.coeffs.keys())

    def max_harmonic_order(self) -> int:
        if not self.coeffs:
            return 0
        return max(sum(abs(x) for x in k) for k in self.coeffs)

    def copy_with(self, coeffs=None, center=None, kappa=None) -> "FourierJet":
        return FourierJet(
            self.d,
            self.center if center is None else center,
            self.action_radius,
            self.jet_degree,
            self.kappa if kappa is None else kappa,
            self.coeffs if coeffs is None else coeffs,
        )

    def __add__(self, other: "FourierJet") -> "FourierJet":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return self.copy_with(coeffs=out,
                              kappa=max(self.kappa, other.kappa))

    def scale(self, factor: complex) -> "FourierJet":
        return self.copy_with(coeffs={k: v * factor for k, v in self.coeffs.items()})

    def dx(self, axis: int) -> "FourierJet":
        return self.copy_with(coeffs={
            k: v * (1j * k[axis]) for k, v in self.coeffs.items()
        })

    def dy(self, axis: int) -> "FourierJet":
        return self.copy_with(coeffs={
            k: jet_dy(v, axis, self.d) for k, v in self.coeffs.items()
        })

    def shift_center(self, delta) -> "FourierJet":
        delta = np.asarray(delta, dtype=float)
        return self.copy_with(
            coeffs={k: jet_shift(v, delta, self.d, self.jet_degree)
                    for k, v in self.coeffs.items()},
            center=self.center + delta,
        )

    def prune(self, rel: float = 1e-18) -> "FourierJet":
        scale = max((np.max(np.abs(v)) for v in self.coeffs.values()), default=0.0)
        if scale == 0.0:
            return self.copy_with(coeffs={})
        keep = {k: v for k, v in self.coeffs.items()
                if np.max(np.abs(v)) > rel * scale}
        return self.copy_with(coeffs=keep)

    def evaluate(self, delta, x) -> complex:
        """Value at action offset delta and angle x (scalars per call)."""
        x = np.asarray(x, dtype=float)
        total = 0.0 + 0.0j
        for k, jet in self.coeffs.items():
            total += jet_eval(jet, delta, self.d) * np.exp(1j * np.dot(k, x))
        return total

    def evaluate_angles(self, delta, X) -> np.ndarray:
        """Values at one action offset and many angles; X has shape (n, d)."""
        X = np.asarray(X, dtype=float)
        if not self.coeffs:
            return np.zeros(X.shape[0], dtype=complex)
        ks = np.array(list(self.coeffs.keys()), dtype=float)
        cs = np.array([jet_eval(v, delta, self.d) for v in self.coeffs.values()])
        phases = np.exp(1j * (X @ ks.T))
        return phases @ cs

    def majorant(self, r: float, s: float) -> float:
        """Weighted coefficient norm sum |f_{l,k}| e^(s|k|_1) r^(|l|_1)."""
        t = _JetTables(self.d, self.jet_degree)
        rpow = np.array([float(r) ** int(n) for n in t.l1])
        total = 0.0
        for k, jet in self.coeffs.items():
            flat = np.abs(jet.reshape(-1)[t.active])
            total += float(flat @ rpow) * math.exp(s * sum(abs(x) for x in k))
        return total

    def to_json_lines(self) -> str:
        t = _JetTables(self.d, self.jet_degree)
        lines = []
        for k in self.harmonics():
            jet = self.coeffs[k].reshape(-1)[t.active]
            lines.append(json.dumps({
                "k": list(k),
                "jet": [[float(c.real), float(c.imag)] for c in jet],
            }, separators=(",", ":")))
        return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# public operations


@dataclass(frozen=True)
class WeightedNormReport:
    fourier_majorant: float
    sup_estimate: float
    s: float
    r: float


def weighted_norm(f: FourierJet, r: float, s: float) -> WeightedNormReport:
    """Majorant norm plus a grid sup-norm lower bound."""
    if r > f.action_radius * (1 + 1e-12):
        raise InvalidParams("r exceeds the jet's action radius")
    if s <= 0:
        raise InvalidParams("s must be > 0")
    maj = f.majorant(r, s)
    n = min(4 * max(f.max_harmonic_order(), 1) + 1, 129)
    axes = [2 * np.pi * np.arange(n) / n] * f.d
    X = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=-1)
    sup = float(np.max(np.abs(f.evaluate_angles(np.zeros(f.d), X))))
    edge = r * (1 - 1e-9)
    for signs in np.ndindex(*(2,) * f.d):
        delta = edge * (2 * np.array(signs) - 1)
        sup = max(sup, float(np.max(np.abs(f.evaluate_angles(delta, X)))))
    return WeightedNormReport(fourier_majorant=maj, sup_estimate=sup, s=s, r=r)


def fourier_tail_constant(d: int) -> float:
    """Shell-count constant in the analytic truncation bound."""
    return sum(
        math.factorial(d - 1) / (math.factorial(d - 1 - j) * float(d - 1) ** (j + 1))
        for j in range(d)
    )


@dataclass(frozen=True)
class TruncationTail:
    exact: float
    analytic: float

    @property
    def bound(self) -> float:
        return min(self.exact, self.analytic)


def truncate_with_bound(
    f: FourierJet, kappa_new: int, sigma: float, s: float
) -> tuple[FourierJet, TruncationTail]:
    """Drop harmonics above kappa_new; report exact and analytic tail bounds.

    The exact tail is the discarded majorant mass at the reduced strip
    s - sigma; the analytic bound is the shell-count estimate
    4^d C2 kappa^d e^(-kappa sigma) times the majorant at strip s.
    """
    if kappa_new < 1:
        raise InvalidParams("kappa_new must be >= 1")
    if not 0 < sigma < s:
        raise InvalidParams("sigma must lie in (0, s)")
    kept, dropped = {}, {}
    for k, v in f.coeffs.items():
        (kept if sum(abs(x) for x in k) <= kappa_new else dropped)[k] = v
    g = f.copy_with(coeffs=kept, kappa=kappa_new)
    tail_f = f.copy_with(coeffs=dropped)
    exact = tail_f.majorant(f.action_radius, s - sigma)
    analytic = (4**f.d * fourier_tail_constant(f.d) * kappa_new**f.d
                * math.exp(-kappa_new * sigma) * f.majorant(f.action_radius, s))
    return g, TruncationTail(exact=exact, analytic=analytic)


def average_x(f: FourierJet) -> FourierJet:
    """Angle average: the k = 0 jet alone."""
    zero = (0,) * f.d
    coeffs = {zero: f.coeffs[zero]} if zero in f.coeffs else {}
    return f.copy_with(coeffs=coeffs, kappa=0)


def solve_homological(
    f: FourierJet, freq_field, kappa: int, guard: DiophantineGuard | tuple,
) -> FourierJet:
    """Solve D_omega g = f - <f> up to harmonic order kappa.

    freq_field is the gradient of the unperturbed Hamiltonian about the
    jet center: either a plain frequency vector (constant field) or a
    sequence of d jets.  Each harmonic divides by the jet of
    i * (freq . n), inverted as a finite Neumann series.
    """
    if isinstance(guard, tuple):
        guard = DiophantineGuard(*guard)
    d, deg = f.d, f.jet_degree
    zero = (0,) * d
    avg = f.coeffs.get(zero)
    if avg is not None:
        scale = max((np.max(np.abs(v)) for v in f.coeffs.values()), default=0.0)
        if scale and np.max(np.abs(avg)) > 1e-13 * scale:
            raise NonzeroAverage("right-hand side has a nonzero angle average")
    field = list(freq_field)
    jets = []
    for comp in field:
        comp = np.asarray(comp, dtype=complex)
        jets.append(jet_const(d, deg, complex(comp)) if comp.ndim == 0 else comp)
    out = {}
    for k, v in f.coeffs.items():
        m = sum(abs(x) for x in k)
        if m == 0 or m > kappa:
            continue
        div = jet_zero(d, deg)
        for j, kj in enumerate(k):
            if kj:
                div = div + kj * jets[j]
        center_div = abs(complex(jet_scalar_part(div, d)))
        floor = guard.alpha / (2.0 * m**guard.tau)
        if center_div < floor:
            raise SmallDivisor(k, center_div, floor)
        out[k] = jet_mul(v, jet_recip(1j * div, d, deg), d, deg)
    return f.copy_with(coeffs=out, kappa=kappa)
