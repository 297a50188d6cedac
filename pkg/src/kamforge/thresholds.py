"""Smallness thresholds, Diophantine constants, and iteration schedules.

Each theorem's admissible perturbation size is evaluated from its explicit
constants; implicitly defined thresholds (the Arnold-type suprema over a
log-corrected predicate) are located by bisection in the log of the trial
size, where the predicate is provably monotone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import ConstantTable, constant_table
from .errors import HypothesisViolated, InvalidParams, NoAdmissibleMu
from .logvalue import ONE, ZERO, LogValue
from .params import KamParameters

_BISECT_REL = 1e-12
_BISECT_MAX = 200


@dataclass(frozen=True)
class ThresholdResult:
    scheme: str
    epsilon_star: LogValue
    binding_constraint: str
    inputs: KamParameters
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        diag = {}
        for k, v in sorted(self.diagnostics.items()):
            diag[k] = v.to_json() if isinstance(v, LogValue) else v
        return {
            "scheme": self.scheme,
            "epsilon_star_log10": None if self.epsilon_star.sign == 0
            else self.epsilon_star.log10,
            "epsilon_star": self.epsilon_star.value_if_representable(),
            "binding": self.binding_constraint,
            "diagnostics": diag,
            "inputs": self.inputs.to_json(),
        }


# ---------------------------------------------------------------------------
# log-corrected predicate suprema


def _sup_mu(pred_ln, nu: float, mu_cap: float) -> float:
    """Largest t = ln(mu) <= ln(mu_cap) with pred_ln(t) < 0.

    pred_ln must be increasing for t < -2*nu; beyond that the interval
    [-2*nu, ln(mu_cap)] is scanned on a fine grid before local bisection.
    Returns ln(mu*).
    """
    t_cap = math.log(mu_cap)
    if pred_ln(t_cap) < 0:
        return t_cap
    t_lo_probe = -745.0  # ln of the smallest positive double
    if pred_ln(t_lo_probe) >= 0:
        raise NoAdmissibleMu(
            "smallness predicate fails even as the trial size tends to zero"
        )
    t_mono = min(-2.0 * nu, t_cap)
    if pred_ln(t_mono) >= 0:
        lo, hi = t_lo_probe, t_mono
    else:
        # crossing lies in the scanned region above the monotone cap
        grid = np.linspace(t_mono, t_cap, 512)
        vals = np.array([pred_ln(t) for t in grid])
        idx = int(np.argmax(vals >= 0))
        lo, hi = grid[idx - 1], grid[idx]
    for _ in range(_BISECT_MAX):
        mid = 0.5 * (lo + hi)
        if pred_ln(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _BISECT_REL:
            break
    return lo


# ---------------------------------------------------------------------------
# scheme thresholds


def _kolmogorov(params: KamParameters, table: ConstantTable) -> ThresholdResult:
    e_hat = params.require_extra("E_hat", "Kolmogorov")
    if e_hat <= 0:
        raise InvalidParams("E_hat must be > 0")
    c = table["c"]
    if params.M == 0:
        formula = LogValue.from_ln(float("inf"))
    else:
        formula = (c * LogValue.from_real(e_hat) ** -9
                   * LogValue.from_real(params.sigma) ** (4 * params.tau + 13)
                   * LogValue.from_real(params.r) ** 10
                   * LogValue.from_real(params.alpha) ** 4
                   * LogValue.from_real(params.omega_sup) ** 6
                   / params.M)
    if params.eps0 is not None and LogValue.from_real(params.eps0) < formula:
        eps_star, binding = LogValue.from_real(params.eps0), "eps0"
    else:
        eps_star, binding = formula, "smallness_formula"
    return ThresholdResult(
        "Kolmogorov", eps_star, binding, params,
        {"c_log10": c.log10, "E_hat": e_hat,
         "formula_log10": formula.log10 if formula.sign else None},
    )


def _arnold_family(
    scheme: str, params: KamParameters, table: ConstantTable
) -> ThresholdResult:
    nu = params.nu
    d, sig, alpha, r = params.d, params.sigma, params.alpha, params.r
    eta0 = params.eta
    diagnostics: dict = {}

    if scheme == "Arnold":
        p1 = (table["C8"] * eta0
              * LogValue.from_real(sig) ** -(3 * nu + 2 * d + 1)
              * max(1.0, alpha / (r * params.Kbound)))
        p2 = (table["C11"] * LogValue.from_real(eta0) ** (17 / 4)
              * LogValue.from_real(sig) ** -(4 * nu + 2 * d))
        eps_sharp = min(
            math.exp(-1.0),
            math.exp(-(sig / 5) * (12 * math.sqrt(2) / 5 * alpha * params.Tbound / r)
                     ** (1 / nu)),
        )
        lp1, lp2 = p1.log_magnitude, p2.log_magnitude

        def pred_ln(t: float) -> float:
            ln_l = math.log(-t)
            return lp1 + max(0.0, lp2 + t + 2 * nu * ln_l) + t + nu * ln_l

        diagnostics.update(p1_log10=p1.log10, p2_log10=p2.log10,
                           eps_sharp=eps_sharp)
        mu_cap = eps_sharp
        cap_name = "eps_sharp"
    elif scheme == "SharpArnold":
        factor = (table["C7"] * table["C8"]
                  * LogValue.from_real(eta0) ** (17 / 8)
                  * LogValue.from_real(sig) ** -(4 * nu + 2 * d + 1))
        lf = factor.log_magnitude

        def pred_ln(t: float) -> float:
            return lf + t + 2 * nu * math.log(-t)

        diagnostics.update(factor_log10=factor.log10,
                           alpha_le_r_over_T=bool(alpha <= r / params.Tbound))
        mu_cap = math.exp(-1.0)
        cap_name = "e_inv"
    else:  # ExtensionSharp
        literal = bool(params.extra.get("literal_sigma_exponent", True))
        expo = (4 * nu + 2 * d + 13 / 4) * (1.0 if literal else -1.0)
        factor = (2 * table["C5"] * table["C6"]
                  * LogValue.from_real(sig) ** expo
                  * LogValue.from_real(eta0) ** (13 / 4))
        lf = factor.log_magnitude

        def pred_ln(t: float) -> float:
            return lf + t + 2 * nu * math.log(-t)

        diagnostics.update(factor_log10=factor.log10,
                           literal_sigma_exponent=literal,
                           alpha_le_r_sigma_over_T=bool(alpha <= r * sig / params.Tbound))
        mu_cap = math.exp(-1.0)
        cap_name = "e_inv"

    t_star = _sup_mu(pred_ln, nu, mu_cap)
    mu_star = math.exp(t_star)
    binding = cap_name if t_star >= math.log(mu_cap) - 2 * _BISECT_REL else "predicate"
    eps_star = (LogValue.from_real(mu_star)
                * LogValue.from_real(alpha) ** 2
                / (params.Kbound * params.M)) if params.M > 0 else \
        LogValue.from_ln(float("inf"))
    diagnostics["mu_star"] = mu_star
    diagnostics["predicate_ln_at_mu_star"] = pred_ln(t_star)
    return ThresholdResult(scheme, eps_star, binding, params, diagnostics)


def _poschel(params: KamParameters, table: ConstantTable) -> ThresholdResult:
    nu = params.require_extra("nu", "Poschel")
    c = table["c"]
    s_pow = LogValue.from_real(params.s) ** nu
    lead = 2 * c * params.alpha * s_pow
    sub = LogValue.from_real(params.d) * LogValue.from_real(params.r) ** 2
    numerator = lead - sub
    if numerator.sign <= 0:
        eps_star, binding = ZERO, "radius_dominates"
    else:
        eps_star, binding = numerator / (2 * params.M), "smallness_formula"
    eps_ratio = (c * s_pow).to_real()
    kappa0 = None
    if 0 < eps_ratio < 1:
        kappa0 = truncation_order_kappa0(eps_ratio, params.s).kappa0
    diagnostics = {
        "c_log10": c.log10,
        "C_log10": table["C"].log10,
        "nu": float(nu),
        "kappa0_at_threshold": kappa0,
        "h_over_alpha_log10": (table["C"] * c * s_pow).log10,
    }
    return ThresholdResult("Poschel", eps_star, binding, params, diagnostics)


def _salamon_zehnder(params: KamParameters) -> ThresholdResult:
    s_hat = params.require_extra("s_hat", "SalamonZehnder")
    if not 0 < s_hat < params.s:
        raise InvalidParams(f"s_hat must lie in (0, s), got {s_hat}")
    d, tau, s, alpha = params.d, params.tau, params.s, params.alpha
    om1 = params.omega_l1
    e30 = params.extra.get("E30", 3 * math.exp(s) + 4 * (d - 1) * math.exp(2 * s))
    g_hat = params.extra.get(
        "G_hat", min(math.exp(s) + (d - 1) * math.exp(2 * s), 2 * math.exp(2 * s))
    )
    a1 = a2 = om1
    a3 = 0.0
    a4 = e30
    a5 = a6 = max(e30, om1 * om1)
    a7 = alpha ** -2 * a6
    a8 = (s - s_hat) ** (2 * tau) * max(1.0, om1 / params.r)
    a9 = max(a7, a8)
    denom = (LogValue.from_real(109.0)
             * LogValue.from_ln((8 * tau + 13) * math.log(2.0))
             * LogValue.gamma(tau + 1) ** 4
             * a9 * g_hat)
    eps_star = (LogValue.from_real(alpha) ** 2
                * LogValue.from_real(s - s_hat) ** (2 * (2 * tau + 1))
                / denom)
    diagnostics = {"A1": a1, "A2": a2, "A3": a3, "A4": a4, "A5": a5, "A6": a6,
                   "A7": a7, "A8": a8, "A9": a9, "E30": e30, "G_hat": g_hat,
                   "Xi_upper": 109.0}
    return ThresholdResult("SalamonZehnder", eps_star, "smallness_formula",
                           params, diagnostics)


def epsilon_star(scheme: str, params: KamParameters) -> ThresholdResult:
    """Evaluate the smallness threshold of one KAM theorem."""
    if scheme == "Kolmogorov":
        return _kolmogorov(params, constant_table("Kolmogorov", params.d, params.tau))
    if scheme in ("Arnold", "SharpArnold", "ExtensionSharp"):
        return _arnold_family(scheme, params,
                              constant_table(scheme, params.d, params.tau))
    if scheme == "Poschel":
        nu = params.require_extra("nu", "Poschel")
        return _poschel(params, constant_table("Poschel", params.d, params.tau, nu))
    if scheme == "SalamonZehnder":
        return _salamon_zehnder(params)
    raise InvalidParams(f"unknown threshold scheme {scheme!r}")


# ---------------------------------------------------------------------------
# Diophantine constant of a concrete frequency


@dataclass(frozen=True)
class DiophantineConstant:
    alpha_hat: float
    argmin_k: tuple[int, ...]
    kmax: int


def diophantine_constant(omega, tau: float, kmax: int) -> DiophantineConstant:
    """Brute-force min of |omega.k| |k|_1^tau over 0 < |k|_1 <= kmax.

    d = 2 uses an exact nearest-integer sweep (any k off the three nearest
    lattice lines has |omega.k| >= 1.5 max|omega_i|, which the |k|_1 = 1
    candidate already beats); higher d enumerates shells directly.
    """
    w = tuple(float(x) for x in omega)
    if kmax < 1:
        raise InvalidParams("kmax must be >= 1")
    if all(x == 0 for x in w):
        raise InvalidParams("omega must be nonzero")
    d = len(w)
    best_val, best_k = float("inf"), None

    def consider(kvec, dot):
        nonlocal best_val, best_k
        k = tuple(int(x) for x in kvec)
        m = sum(abs(x) for x in k)
        if not 0 < m <= kmax:
            return
        if next(x for x in k if x != 0) < 0:
            k = tuple(-x for x in k)  # report the +/- pair representative
        v = abs(dot) * m**tau
        if best_k is None or (v, m, k) < (best_val, sum(abs(x) for x in best_k), best_k):
            best_val, best_k = v, k

    if d == 2:
        piv = 0 if abs(w[0]) >= abs(w[1]) else 1
        oth = 1 - piv
        unit = [0, 0]
        unit[piv] = 1
        consider(tuple(unit), w[piv])
        wa = np.arange(1, kmax + 1, dtype=float)
        ideal = -wa * w[oth] / w[piv]
        for shift in (-1.0, 0.0, 1.0):
            b = np.round(ideal) + shift
            m = wa + np.abs(b)
            ok = (m <= kmax) & (m >= 1)
            if not ok.any():
                continue
            dots = wa[ok] * w[oth] + b[ok] * w[piv]
            vals = np.abs(dots) * m[ok] ** tau
            order = np.argsort(vals, kind="stable")
            i = order[0]
            kvec = [0, 0]
            kvec[oth] = int(wa[ok][i])
            kvec[piv] = int(b[ok][i])
            consider(tuple(kvec), dots[i])
    else:
        # exhaustive shell enumeration; intended for moderate kmax
        rng = range(-kmax, kmax + 1)
        import itertools

        for head in itertools.product(*([rng] * (d - 1))):
            budget = kmax - sum(abs(h) for h in head)
            if budget < 0:
                continue
            partial = sum(h * wi for h, wi in zip(head, w[:-1]))
            for last in range(-budget, budget + 1):
                k = head + (last,)
                if all(x == 0 for x in k):
                    continue
                if next(x for x in k if x != 0) < 0:
                    continue  # sign symmetry
                consider(k, partial + last * w[-1])
    return DiophantineConstant(float(best_val), best_k, kmax)


# ---------------------------------------------------------------------------
# Fourier truncation order


@dataclass(frozen=True)
class TruncationOrder:
    kappa0: int
    sandwich: tuple[float, float, float] | None

    def __int__(self) -> int:
        return self.kappa0


def truncation_order_kappa0(
    eps_ratio: float, s: float, d: int | None = None, tau: float | None = None
) -> TruncationOrder:
    """Initial truncation order floor((-40 ln(eps) + 1)/s).

    When (d, tau) are supplied, also returns the verification triple
    (kappa0^nubar sigma^nubar e^(-kappa0 sigma), eps_ratio, 1/(2 C6 kappa0^nubar))
    whose sandwich the caller may assert, with sigma = s/20.
    """
    if not 0 < eps_ratio < 1:
        raise InvalidParams(f"eps_ratio must lie in (0, 1), got {eps_ratio}")
    if not 0 < s <= 1:
        raise InvalidParams(f"s must lie in (0, 1], got {s}")
    kappa0 = math.floor((-40.0 * math.log(eps_ratio) + 1.0) / s)
    sandwich = None
    if d is not None and tau is not None:
        nubar = tau + 1
        sigma = s / 20.0
        nu_probe = nubar + 1.0  # any nu > nubar gives the same C6
        c6 = constant_table("Poschel", d, tau, nu_probe)["C6"]
        lhs = math.exp(nubar * (math.log(kappa0) + math.log(sigma)) - kappa0 * sigma)
        rhs = (ONE / (2 * c6 * LogValue.from_real(float(kappa0)) ** nubar)).to_real()
        sandwich = (lhs, float(eps_ratio), rhs)
    return TruncationOrder(kappa0, sandwich)


# ---------------------------------------------------------------------------
# per-step schedules


@dataclass(frozen=True)
class ScheduleRow:
    j: int
    s: float
    sigma: float
    r: float
    kappa: float
    h_or_lambda: LogValue
    size_bound: LogValue  # E_j (Poschel) or bound on eps^(2^j) M_j (Arnold)
    Kb: float | None
    Tb: float | None
    theta: LogValue
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Schedule:
    scheme: str
    rows: list[ScheduleRow]
    notes: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        header = ("j,s,sigma,r,kappa,h_or_lambda_log10,size_bound_log10,"
                  "K,T,theta_log10")
        lines = [header]
        for row in self.rows:
            lines.append(",".join([
                str(row.j), repr(row.s), repr(row.sigma), repr(row.r),
                repr(row.kappa),
                repr(row.h_or_lambda.log10) if row.h_or_lambda.sign else "-inf",
                repr(row.size_bound.log10) if row.size_bound.sign else "-inf",
                "" if row.Kb is None else repr(row.Kb),
                "" if row.Tb is None else repr(row.Tb),
                repr(row.theta.log10) if row.theta.sign else "-inf",
            ]))
        return "\n".join(lines) + "\n"


def _arnold_schedule(params: KamParameters, jmax: int) -> Schedule:
    table = constant_table("Arnold", params.d, params.tau)
    d, nu = params.d, params.nu
    alpha, r0, sig0 = params.alpha, params.r, params.sigma
    K0, T0, M0 = params.Kbound, params.Tbound, params.M
    eta0 = params.eta
    eps = abs(params.require_extra("eps", "Arnold schedule"))
    if eps == 0:
        raise InvalidParams("Arnold schedule needs extra['eps'] != 0")
    mu0 = K0 * eps * M0 / alpha**2
    eps_sharp = min(
        math.exp(-1.0),
        math.exp(-(sig0 / 5) * (12 * math.sqrt(2) / 5 * alpha * T0 / r0) ** (1 / nu)),
    )
    if mu0 > eps_sharp:
        raise HypothesisViolated(0, "mu0 <= eps_sharp")
    lam0 = math.log(1.0 / mu0)
    d_star = table["C5"] * eta0**2
    e_star = (table["C9"] * K0 / alpha**2
              * LogValue.from_real(sig0) ** -(4 * nu + 2 * d + 1)
              * LogValue.from_real(lam0) ** (2 * nu))
    f_star = (table["C8"] * max(1.0, alpha / (r0 * K0)) * eta0
              * LogValue.from_real(sig0) ** -(3 * nu + 2 * d + 1)
              * mu0 * LogValue.from_real(lam0) ** nu)
    inner = table["C10"] / 3 * sig0 * eta0**0.25 * e_star * d_star**2 * eps * M0
    smallness = f_star * (inner if inner > ONE else ONE)
    if not smallness < ONE:
        raise HypothesisViolated(0, "f* max{1, (C10/3) sigma0 eta0^(1/4) e* d*^2 eps M0} < 1")
    theta1 = LogValue.from_real(sig0 / 3) * f_star * e_star * d_star**2 * eps * M0
    rows = []
    s_j, r_j = params.s, r0
    Kb, Tb = K0, T0
    sqrt2 = math.sqrt(2.0)
    kap_prev = None
    for j in range(jmax + 1):
        sig_j = sig0 / 2**j
        lam_j = 2**j * lam0
        kap_j = 5.0 * lam_j / sig_j
        if j == 0:
            theta_j = d_star * f_star
            bound_j = LogValue.from_real(eps * M0)
        else:
            theta_j = theta1 ** (2 ** (j - 1))
            bound_j = theta_j / (e_star * d_star ** (j + 1))
            r_j = min(
                alpha / (4 * d * sqrt2 * K0 * kap_prev**nu),
                (5 / (96 * d)) * (r_prev / eta0),
            )
            Kb = Kb_prev * (1 + sig0 / 2 ** (j - 1) / 3)
            Tb = Tb_prev * (1 + sig0 / 2 ** (j - 1) / 3)
            if not (Kb < K0 * sqrt2 and Tb < T0 * sqrt2):
                raise HypothesisViolated(j, "K_j < K0 sqrt2 and T_j < T0 sqrt2")
            if abs(sig_j - sig0 / 2**j) > 0:
                raise HypothesisViolated(j, "sigma_j = sigma0 / 2^j")
        rows.append(ScheduleRow(
            j=j, s=s_j, sigma=sig_j, r=r_j, kappa=kap_j,
            h_or_lambda=LogValue.from_real(lam_j),
            size_bound=bound_j, Kb=Kb, Tb=Tb, theta=theta_j,
            extras={"mu0": mu0} if j == 0 else {},
        ))
        s_j = s_j - sig_j
        kap_prev, r_prev, Kb_prev, Tb_prev = kap_j, r_j, Kb, Tb
    return Schedule("Arnold", rows, notes={
        "mu0": mu0, "lambda0": lam0,
        "d_star_log10": d_star.log10, "e_star_log10": e_star.log10,
        "f_star_log10": f_star.log10, "eps_sharp": eps_sharp,
    })


def _poschel_schedule(params: KamParameters, jmax: int) -> Schedule:
    nu = params.require_extra("nu", "Poschel schedule")
    table = constant_table("Poschel", params.d, params.tau, nu)
    d, tau = params.d, params.tau
    nubar = tau + 1
    alpha, r0, s0 = params.alpha, params.r, params.s
    if not 0 < r0 <= 1:
        raise InvalidParams("Poschel schedule needs 0 < r <= 1")
    sig0 = s0 / 20.0
    if "E0" in params.extra:
        E0 = LogValue.from_real(params.extra["E0"])
    else:
        E0 = LogValue.from_real(params.M) / (alpha * r0 * LogValue.from_real(sig0) ** nubar)
    E_adm = (LogValue.from_ln(nu * math.log(20.0)) * table["c"]
             * LogValue.from_real(sig0) ** (nu - nubar))
    if not E0 <= E_adm:
        raise HypothesisViolated(0, "E0 <= 20^nu c sigma0^(nu - nubar)")
    eps_bar = E0 * LogValue.from_real(sig0) ** nubar  # = eps0/(alpha r0)
    kap0 = math.floor((-40.0 * eps_bar.log_magnitude + 1.0) / s0)
    if "h0" in params.extra:
        h0 = LogValue.from_real(params.extra["h0"])
    else:
        h0 = alpha * table["C"] * eps_bar
    h_hi = alpha / (2 * LogValue.from_real(float(kap0)) ** nubar)
    if not (alpha * table["C"] * eps_bar <= h0 and h0 <= h_hi):
        raise HypothesisViolated(0, "alpha C eps <= h0 <= alpha/(2 kappa0^nubar)")
    c10 = table["C10"]
    c4, c6 = table["C4"], table["C6"]
    rows = []
    E_j = E0
    h_j = h0
    r_j = LogValue.from_real(r0)  # decays super-exponentially: keep in log domain
    s_j, sig_j, kap_j = s0, sig0, float(kap0)
    for j in range(jmax + 1):
        eta_j = E_j.sqrt()
        eps_j = alpha * E_j * r_j * LogValue.from_real(sig_j) ** nubar
        # kamass invariants (i)-(v)
        if not eps_j <= (ONE / c4) * alpha * eta_j * r_j * LogValue.from_real(sig_j) ** nubar:
            raise HypothesisViolated(j, "(i)")
        if not eps_j <= h_j * r_j / c6:
            raise HypothesisViolated(j, "(ii)")
        if not h_j <= alpha / (2 * LogValue.from_real(kap_j) ** nubar):
            raise HypothesisViolated(j, "(iii)")
        if not kap_j * sig_j > d - 1:
            raise HypothesisViolated(j, "(v) kappa_j sigma_j > d-1")
        if not (ZERO < eta_j < LogValue.from_real(1 / 8)):
            raise HypothesisViolated(j, "(v) 0 < eta_j < 1/8")
        if not 0 < sig_j < s_j / 10:
            raise HypothesisViolated(j, "(v) 0 < sigma_j < s_j/10")
        E_next = c10.sqrt() * E_j ** 1.5
        eps_next = alpha * E_next * (eta_j * r_j) * LogValue.from_real(sig_j / 2) ** nubar
        decay = LogValue.from_ln(
            d * math.log(kap_j) - kap_j * sig_j)  # kappa^d e^(-kappa sigma)
        iv_rhs = (c10.sqrt() / (3 * LogValue.from_ln(nubar * math.log(2.0))))\
            * (eps_j * E_j + (eta_j**2 + decay) * eps_j)
        if not eps_next >= iv_rhs:
            raise HypothesisViolated(j, "(iv)")
        rows.append(ScheduleRow(
            j=j, s=s_j, sigma=sig_j, r=r_j.to_real(), kappa=kap_j,
            h_or_lambda=h_j, size_bound=E_j, Kb=None, Tb=None,
            theta=eps_j,
            extras={"eta_log10": eta_j.log10, "r_log10": r_j.log10},
        ))
        s_j = s_j - 5 * sig_j
        sig_j = sig_j / 2
        r_j = r_j * eta_j
        kap_j = 4 * kap_j
        h_j = h_j / LogValue.from_ln(2 * nubar * math.log(2.0))
        E_j = E_next
    return Schedule("Poschel", rows, notes={
        "kappa0": kap0, "E0_log10": E0.log10, "h0_log10": h0.log10, "nu": nu,
    })


def schedule(scheme: str, params: KamParameters, jmax: int) -> Schedule:
    """Per-step radii, strips, truncations and size bounds of one iteration."""
    if jmax < 0:
        raise InvalidParams("jmax must be >= 0")
    if scheme == "Arnold":
        return _arnold_schedule(params, jmax)
    if scheme == "Poschel":
        return _poschel_schedule(params, jmax)
    raise InvalidParams(f"schedule supports Arnold and Poschel, not {scheme!r}")
