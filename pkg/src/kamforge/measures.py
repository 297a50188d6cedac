"""Measure estimates: resonance zones, coverings, tubes, Kolmogorov sets.

The resonance-zone bound, its Monte-Carlo counterpart, cube covering
numbers, sphere tube volumes via the Steiner polynomial, and the three
Kolmogorov-set complement bounds specialized to ball domains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import constant_table, lattice_zeta
from .errors import (
    DivergentSum,
    FocalExceeded,
    InvalidParams,
    NoAdmissibleR,
    UnsupportedDomain,
)

_Z99 = 2.5758293035489004  # two-sided 99% normal quantile


@dataclass(frozen=True)
class DiophantineSpec:
    alpha: float
    tau: float
    d: int
    k_cut: int

    def __post_init__(self):
        if self.alpha < 0 or self.d < 2 or self.k_cut < 1:
            raise InvalidParams("need alpha >= 0, d >= 2, k_cut >= 1")


@dataclass(frozen=True)
class MeasureReport:
    analytic_bound: float
    empirical: float
    ci_halfwidth: float
    n_samples: int
    seed: int
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "analytic_bound": self.analytic_bound,
            "empirical": self.empirical,
            "ci_halfwidth": self.ci_halfwidth,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "params": {k: v for k, v in sorted(self.params.items())},
        }


def resonance_bound(R: float, spec: DiophantineSpec) -> float:
    """Analytic bound 2^d sqrt(d) * (lattice sum at tau+1) * R^(d-1) * alpha."""
    if spec.tau <= spec.d - 1:
        raise DivergentSum("resonance bound needs tau > d - 1")
    z = lattice_zeta(spec.tau + 1, spec.d)
    return (2**spec.d * math.sqrt(spec.d) * z.value_float
            * R ** (spec.d - 1) * spec.alpha)


def _resonant_mask_2d(samples: np.ndarray, alpha: float, tau: float,
                      k_cut: int) -> np.ndarray:
    """Exact membership test via the nearest-lattice-line sweep.

    For a sample w and any k with both entries nonzero, only the integer
    nearest the ratio line can bring |w.k| below alpha (which is < |w|/2
    off that line); nearby samples with |w| < 2 alpha fall back to the
    direct shell test.
    """
    n = samples.shape[0]
    absw = np.abs(samples)
    piv = np.argmax(absw, axis=1)
    wp = samples[np.arange(n), piv]
    wo = samples[np.arange(n), 1 - piv]
    # unit harmonics flag |w_i| < alpha directly
    out = (np.abs(wo) < alpha) | (np.abs(wp) < alpha)
    small = np.abs(wp) < 2 * alpha
    body = ~small
    idx = np.where(body)[0]
    if idx.size:
        wp_b, wo_b = wp[idx], wo[idx]
        hit = np.zeros(idx.size, dtype=bool)
        for a in range(1, k_cut + 1):
            ideal = -a * wo_b / wp_b
            b = np.rint(ideal)
            m = a + np.abs(b)
            ok = (m <= k_cut) & (m >= 1)
            val = np.abs(a * wo_b + b * wp_b)
            hit |= ok & (val < alpha / np.maximum(m, 1.0) ** tau)
        out[idx] |= hit
    small_idx = np.where(small & ~out)[0]
    if small_idx.size:
        out[small_idx] |= _resonant_mask_generic(
            samples[small_idx], alpha, tau, k_cut)
    return out


def _lattice_shell(d: int, k_cut: int) -> np.ndarray:
    """Half-lattice representatives with 0 < |k|_1 <= k_cut."""
    import itertools

    pts = []
    rng = range(-k_cut, k_cut + 1)
    for k in itertools.product(*([rng] * d)):
        m = sum(abs(x) for x in k)
        if not 0 < m <= k_cut:
            continue
        if next(x for x in k if x != 0) < 0:
            continue
        pts.append(k)
    return np.array(pts, dtype=float)


def _resonant_mask_generic(samples: np.ndarray, alpha: float, tau: float,
                           k_cut: int) -> np.ndarray:
    ks = _lattice_shell(samples.shape[1], k_cut)
    m = np.abs(ks).sum(axis=1)
    thresh = alpha / m**tau
    out = np.zeros(samples.shape[0], dtype=bool)
    chunk = max(1, int(2e7 // max(samples.shape[0], 1)))
    for i in range(0, ks.shape[0], chunk):
        dots = np.abs(samples @ ks[i:i + chunk].T)
        out |= (dots < thresh[None, i:i + chunk]).any(axis=1)
    return out


def resonance_mc(R: float, spec: DiophantineSpec, n: int, seed: int,
                 ) -> MeasureReport:
    """Monte-Carlo measure of the resonant part of the sup-norm ball B_R.

    Uniform samples from [-R, R]^d via a counter-based generator keyed by
    the seed; a sample is resonant iff some 0 < |k|_1 <= k_cut violates the
    Diophantine inequality.  Truncation at k_cut makes the estimate a lower
    bound on the resonant set; shells beyond the cut have width below
    alpha / k_cut^tau.
    """
    if n < 10**4:
        raise InvalidParams("need n >= 1e4 samples")
    rng = np.random.Generator(np.random.Philox(key=seed))
    samples = rng.uniform(-R, R, size=(n, spec.d))
    if spec.d == 2:
        mask = _resonant_mask_2d(samples, spec.alpha, spec.tau, spec.k_cut)
    else:
        mask = _resonant_mask_generic(samples, spec.alpha, spec.tau, spec.k_cut)
    vol = (2 * R) ** spec.d
    p_hat = float(np.mean(mask))
    ci = _Z99 * vol * math.sqrt(max(p_hat * (1 - p_hat), 1e-300) / n)
    try:
        bound = resonance_bound(R, spec)
    except DivergentSum:
        bound = float("inf")
    return MeasureReport(
        analytic_bound=bound,
        empirical=vol * p_hat,
        ci_halfwidth=ci,
        n_samples=n,
        seed=seed,
        params={"R": R, "alpha": spec.alpha, "tau": spec.tau, "d": spec.d,
                "k_cut": spec.k_cut,
                "missed_shell_width": spec.alpha / spec.k_cut**spec.tau},
    )


# ---------------------------------------------------------------------------
# covering numbers


@dataclass(frozen=True)
class Covering:
    n_cubes: int
    R_used: float
    centers: tuple


def _boxes_measure(boxes) -> float:
    # union of axis-aligned boxes; overlaps are the caller's concern
    total = 0.0
    for lo, hi in boxes:
        total += float(np.prod(np.asarray(hi) - np.asarray(lo)))
    return total


def _cover_one_box(lo, hi, R: float):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    counts = np.maximum(np.ceil((hi - lo) / (2 * R) - 1e-12), 1).astype(int)
    axes = []
    for i in range(lo.size):
        c = lo[i] + R + 2 * R * np.arange(counts[i])
        c = np.minimum(c, hi[i] - R) if hi[i] - lo[i] >= 2 * R else \
            np.full(counts[i], 0.5 * (lo[i] + hi[i]))
        axes.append(c)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def covering_number(domain, R_candidates, R0_cap: float) -> Covering:
    """Minimal admissible lattice cover of a box union by centered cubes.

    For each candidate R <= R0_cap, cubes of side 2R centered inside the
    domain tile each box; a candidate is admissible when n R^d <= meas.
    The returned count is a certified upper bound on the covering number
    (exact for single boxes whose sides R divides).
    """
    boxes = [(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
             for lo, hi in domain]
    if not boxes:
        raise InvalidParams("domain must contain at least one box")
    d = boxes[0][0].size
    meas = _boxes_measure(boxes)
    best = None
    for R in sorted(float(r) for r in R_candidates):
        if R <= 0 or R > R0_cap:
            continue
        centers = []
        seen = set()
        for lo, hi in boxes:
            for c in _cover_one_box(lo, hi, R):
                key = tuple(np.round(c / (R * 1e-9)).astype(np.int64))
                if key not in seen:
                    seen.add(key)
                    centers.append(tuple(float(x) for x in c))
        n = len(centers)
        if n * R**d <= meas * (1 + 1e-12):
            if best is None or n < best.n_cubes:
                best = Covering(n_cubes=n, R_used=R, centers=tuple(centers))
    if best is None:
        raise NoAdmissibleR(
            "no candidate radius satisfies the volume constraint n R^d <= meas"
        )
    return best


def covering_cap(domain, R: float) -> int:
    """Covering-lemma cap ([diam/R] + 1)^d in the sup metric."""
    los = np.min([lo for lo, _ in domain], axis=0)
    his = np.max([hi for _, hi in domain], axis=0)
    diam = float(np.max(his - los))
    d = los.size
    return (int(diam / R) + 1) ** d


# ---------------------------------------------------------------------------
# sphere tubes via the Steiner polynomial


@dataclass(frozen=True)
class SphereTube:
    outer: float
    inner: float
    steiner_coeffs: tuple  # polynomial coefficients a_1..a_d of the expansion
    curvature_integrals: tuple  # k_0, k_1, ..., up to normalization


def ball_volume(R: float, d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * R**d


def _steiner_denominator(m: int) -> float:
    """1*3*...*m for odd m; 1*3*...*(m-1)*m for even m."""
    odd_top = m if m % 2 == 1 else m - 1
    out = 1.0
    for i in range(1, odd_top + 1, 2):
        out *= i
    if m % 2 == 0:
        out *= m
    return out


def tube_sphere_steiner(R: float, delta: float, d: int) -> SphereTube:
    """Half-tube volumes about the sphere |y|_2 = R and their polynomial.

    outer/inner are the exact ball-shell differences; steiner_coeffs are
    the polynomial coefficients a_m of the delta-expansion of the outer
    tube, and curvature_integrals the integrated mean curvatures they
    encode (k_{m-1} = +/- a_m times the odd-product denominator).
    """
    if not 0 < delta < R:
        raise FocalExceeded(f"delta must lie in (0, R), got delta={delta} R={R}")
    omega_d = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    outer = omega_d * ((R + delta) ** d - R**d)
    inner = omega_d * (R**d - (R - delta) ** d)
    coeffs = tuple(omega_d * math.comb(d, m) * R ** (d - m)
                   for m in range(1, d + 1))
    curvature = tuple(
        (1.0 if m % 2 == 1 else -1.0) * a * _steiner_denominator(m)
        for m, a in enumerate(coeffs, start=1)
    )
    return SphereTube(outer=outer, inner=inner, steiner_coeffs=coeffs,
                      curvature_integrals=curvature)


def tube_from_coeffs(coeffs, delta: float, sign: int) -> float:
    """Reconstruct a half-tube volume from the polynomial coefficients."""
    total = 0.0
    for m, a in enumerate(coeffs, start=1):
        total += a * delta**m * (1.0 if m % 2 == 1 else float(sign))
    return total


# ---------------------------------------------------------------------------
# Kolmogorov-set complement bounds


def kolmogorov_set_bound(variant: str, params: dict) -> tuple[float, dict]:
    """Numeric complement bound with a factor-by-factor breakdown.

    Variant I needs a Euclidean ball domain; variants II and III take the
    localized-constant forms with the concrete universal constants.
    """
    p = dict(params)
    d = int(p.pop("d"))
    tau = float(p.pop("tau"))
    alpha = float(p.pop("alpha"))
    sigma0 = float(p.pop("sigma0"))
    breakdown: dict = {"d": d, "tau": tau, "alpha": alpha, "sigma0": sigma0}

    if variant == "I":
        domain = p.pop("domain", "ball")
        if domain != "ball":
            raise UnsupportedDomain("variant I is specialized to ball domains")
        R = float(p.pop("R"))
        T0 = float(p.pop("T0", 1.0))
        tail = p.pop("tail_term", "bound")
        n_mc = int(p.pop("samples", 10**5))
        seed = int(p.pop("seed", 0))
        k_cut = int(p.pop("k_cut", 200))
        if p:
            raise InvalidParams(f"unknown variant I parameters: {sorted(p)}")
        delta = alpha * T0 / (32 * d * sigma0)
        if delta >= R:
            raise InvalidParams("delta = alpha T0/(32 d sigma0) must be < R")
        surface = d * ball_volume(1.0, d) * R ** (d - 1)
        lead = (3 * math.pi) ** d * T0 / (32 * d * sigma0)
        term_surface = 2 * surface * alpha
        # curvature correction: k_{2j}/(1*3*...*(2j+1)) equals the outer-tube
        # polynomial coefficient a_{2j+1} of the sphere (delta-independent)
        tube = tube_sphere_steiner(R, R / 2, d)
        csum = sum(tube.steiner_coeffs[2 * j] * delta ** (2 * j - 1)
                   for j in range(1, (d - 1) // 2 + 1))
        curvature_const = T0 / (16 * d * sigma0) * csum
        term_curv = curvature_const * alpha**2
        spec = DiophantineSpec(alpha=alpha, tau=tau, d=d, k_cut=k_cut)
        if tail == "mc":
            mc = resonance_mc(max(R - delta, 1e-9), spec, n_mc, seed)
            term_tail = mc.empirical + mc.ci_halfwidth
            breakdown["tail_mode"] = "mc"
            breakdown["tail_ci"] = mc.ci_halfwidth
        else:
            term_tail = resonance_bound(max(R - delta, 1e-9), spec)
            breakdown["tail_mode"] = "bound"
        total = lead * (term_surface + term_curv + term_tail)
        breakdown.update(lead_factor=lead, surface_term=term_surface,
                         curvature_term=term_curv, tail_term=term_tail,
                         delta=delta, R=R)
        return total, breakdown

    if variant in ("II", "III"):
        table = constant_table("LebLocGen", d, tau)
        C = table["C"].to_real()
        T = float(p.pop("T", 1.0))
        theta = float(p.pop("theta", 1.0))
        if variant == "II":
            r0 = float(p.pop("r0"))
            eta = float(p.pop("eta", 1.0))
            diam = float(p.pop("diam"))
            if p:
                raise InvalidParams(f"unknown variant II parameters: {sorted(p)}")
            C_hat = 64 * d * C
            ell = r0 / (2**6 * d * eta**2)
            p1 = theta * eta**2 * T / (sigma0 * r0)
            total = C_hat * (6 * math.pi) ** d * p1 * (diam + ell) ** d * alpha
            breakdown.update(C=C, C_hat=C_hat, p1=p1, ell=ell, diam=diam)
            return total, breakdown
        n_D = int(p.pop("n_D"))
        meas = float(p.pop("meas"))
        if p:
            raise InvalidParams(f"unknown variant III parameters: {sorted(p)}")
        total = (C * (12 * math.pi) ** d * n_D ** (1 / d)
                 * theta * T / sigma0 * meas ** ((d - 1) / d) * alpha)
        breakdown.update(C=C, n_D=n_D, meas=meas)
        return total, breakdown

    raise InvalidParams(f"unknown variant {variant!r}; expected I, II or III")
