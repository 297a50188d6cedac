"""Pendulum-chain benchmark Hamiltonian and the threshold comparison table.

H(y, x; eps) = |y|^2/2 + eps (cos x_1 + sum_j cos(x_{j+1} - x_j)), the
model on which all four theorem thresholds are evaluated and compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arnold import KJet
from .constants import constant_table
from .errors import InvalidParams
from .logvalue import LogValue
from .params import KamParameters
from .spectral import FourierJet, jet_const
from . import thresholds

GOLDEN_OMEGA = ((math.sqrt(5.0) - 1.0) / 2.0, 1.0)

PAPER_TABLE = {
    "Kolmogorov": 9.18337e-30,
    "Arnold": 2.02258e-49,
    "Moser": 6.12208e-37,
    "SalamonZehnder": 7.38385e-27,
}
PAPER_MOSER_R = 1.73502e-15
PAPER_MOSER_H = (2.53148e-10, 4.46141e20)  # intercept, slope in |eps|


class MechanicalModel:
    """Closed-form pieces of the pendulum chain in d degrees of freedom."""

    def __init__(self, d: int, s: float = 1.0):
        if d < 2:
            raise InvalidParams("the chain needs d >= 2")
        if not 0 < s <= 1:
            raise InvalidParams("s must lie in (0, 1]")
        self.d = int(d)
        self.s = float(s)

    # -- integrable part ------------------------------------------------------

    def K(self, y):
        y = np.asarray(y, dtype=float)
        return 0.5 * np.sum(y * y, axis=-1)

    def K_grad(self, y):
        return np.asarray(y, dtype=float)

    def K_jet(self, center, degree: int = 4) -> KJet:
        return KJet.quadratic_half_norm(center, self.d, degree)

    # -- perturbation ----------------------------------------------------------

    def P0(self, x):
        x = np.asarray(x, dtype=float)
        val = np.cos(x[..., 0])
        for j in range(self.d - 1):
            val = val + np.cos(x[..., j + 1] - x[..., j])
        return val

    def P0_grad(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        out[..., 0] = -np.sin(x[..., 0])
        for j in range(self.d - 1):
            s = np.sin(x[..., j + 1] - x[..., j])
            out[..., j + 1] -= s
            out[..., j] += s
        return out

    def P0_harmonics(self) -> dict:
        d = self.d
        coeffs = {}
        e1 = tuple(1 if i == 0 else 0 for i in range(d))
        coeffs[e1] = 0.5
        coeffs[tuple(-x for x in e1)] = 0.5
        for j in range(d - 1):
            k = [0] * d
            k[j + 1], k[j] = 1, -1
            coeffs[tuple(k)] = 0.5
            coeffs[tuple(-x for x in k)] = 0.5
        return coeffs

    def P0_jet(self, center, jet_degree: int = 4, action_radius: float = 1.0,
               ) -> FourierJet:
        harm = {k: jet_const(self.d, jet_degree, c)
                for k, c in self.P0_harmonics().items()}
        return FourierJet(self.d, center, action_radius, jet_degree, 2, harm)

    # -- flow interface for the invariance check ------------------------------

    def system(self, eps: float):
        model = self

        class _System:
            def dH_dy(self, y, x):
                return model.K_grad(y)

            def dH_dx(self, y, x):
                return eps * model.P0_grad(x)

        return _System()


@dataclass(frozen=True)
class MechNorms:
    M: float
    G_hat: float
    E30: float
    sup_check: float  # grid lower bound on M; always <= M


def mech_norms(d: int, s: float, grid: int = 256) -> MechNorms:
    """Exact norms of the chain perturbation on the complex strip of width s."""
    model = MechanicalModel(d, s)
    M = math.cosh(s) + (d - 1) * math.cosh(2 * s)
    G_hat = min(math.exp(s) + (d - 1) * math.exp(2 * s), 2 * math.exp(2 * s))
    E30 = 3 * math.exp(s) + 4 * (d - 1) * math.exp(2 * s)
    # sup of |P0| over the strip boundary, sampled: alternating imaginary parts
    theta = 2 * np.pi * np.arange(grid) / grid
    b = s * (1 - 1e-12)
    signs = np.array([(-1.0) ** j for j in range(d)])
    best = 0.0
    for t1 in theta:
        x = np.full(d, t1) + 1j * b * signs
        val = np.cos(x[0])
        for j in range(d - 1):
            val += np.cos(x[j + 1] - x[j])
        best = max(best, abs(val))
    return MechNorms(M=M, G_hat=G_hat, E30=E30, sup_check=float(best))


def _kolmogorov_row(d, tau, alpha, r, sigma, s, omega, M):
    om_sup = max(abs(w) for w in omega)
    om2 = sum(w * w for w in omega)
    e_hat = max(om2 / 2, r * om_sup, d * r * r / 2, om_sup**2)
    p = KamParameters(d=d, tau=tau, alpha=alpha, r=r, s=s, sigma=sigma,
                      omega=omega, M=M, Kbound=1.0, Tbound=1.0,
                      extra={"E_hat": e_hat})
    return thresholds.epsilon_star("Kolmogorov", p)


def _arnold_row(d, tau, alpha, r, sigma, s, omega, M):
    p = KamParameters(d=d, tau=tau, alpha=alpha, r=r, s=s, sigma=sigma,
                      omega=omega, M=M, Kbound=1.0, Tbound=1.0)
    return thresholds.epsilon_star("Arnold", p)


def _moser_row(d, tau, alpha, r, sigma, s, omega, M, nu):
    p = KamParameters(d=d, tau=tau, alpha=alpha, r=r, s=s, sigma=sigma,
                      omega=omega, M=M, Kbound=1.0, Tbound=1.0,
                      extra={"nu": nu})
    return thresholds.epsilon_star("Poschel", p)


def _sz_row(d, tau, alpha, r, s, omega, M, s_hat):
    p = KamParameters(d=d, tau=tau, alpha=alpha, r=r, s=s,
                      sigma=(s - s_hat) / 2 * (1 - 1e-12),
                      omega=omega, M=M, Kbound=1.0, Tbound=1.0,
                      extra={"s_hat": s_hat})
    return thresholds.epsilon_star("SalamonZehnder", p)


@dataclass(frozen=True)
class TableRow:
    name: str
    computed: LogValue
    paper: float
    ratio: float | None
    binding: str
    alpha_used: float
    best_alpha: float | None  # alpha solving computed(alpha) = paper exactly
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TableReport:
    rows: list[TableRow]
    alpha_policy: str
    alpha_oracle: float
    scan: dict | None
    notes: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "alpha_policy": self.alpha_policy,
            "alpha_oracle": self.alpha_oracle,
            "rows": [{
                "name": r.name,
                "computed_log10": None if r.computed.sign == 0 else r.computed.log10,
                "computed": r.computed.value_if_representable(),
                "paper": r.paper,
                "ratio": r.ratio,
                "binding": r.binding,
                "alpha_used": r.alpha_used,
                "best_alpha": r.best_alpha,
                "details": {k: v for k, v in sorted(r.details.items())},
            } for r in self.rows],
            "scan": self.scan,
            "notes": {k: v for k, v in sorted(self.notes.items())},
        }

    def to_text(self) -> str:
        lines = [
            f"{'row':<16}{'computed':>14}{'paper':>14}{'ratio':>12}"
            f"{'best alpha':>12}  binding",
        ]
        for r in self.rows:
            comp = r.computed.value_if_representable()
            comp_s = f"{comp:.5e}" if comp is not None else f"1e{r.computed.log10:+.1f}"
            ratio_s = f"{r.ratio:.3e}" if r.ratio is not None else "-"
            best_s = f"{r.best_alpha:.4e}" if r.best_alpha is not None else "-"
            lines.append(f"{r.name:<16}{comp_s:>14}{r.paper:>14.5e}"
                         f"{ratio_s:>12}{best_s:>12}  {r.binding}")
        if self.scan is not None:
            lines.append(
                f"alpha scan over [{self.scan['lo']}, {self.scan['hi']}]: "
                f"best single alpha {self.scan['best_alpha']:.4f} with max "
                f"relative error {self.scan['max_rel_err']:.3e} "
                f"({'WITHIN' if self.scan['simultaneous'] else 'NOT within'} 1e-3)"
            )
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        lines = ["row,computed,computed_log10,paper,ratio,best_alpha,binding"]
        for r in self.rows:
            comp = r.computed.value_if_representable()
            lines.append(",".join([
                r.name,
                "" if comp is None else repr(comp),
                repr(r.computed.log10) if r.computed.sign else "-inf",
                repr(r.paper),
                "" if r.ratio is None else repr(r.ratio),
                "" if r.best_alpha is None else repr(r.best_alpha),
                r.binding,
            ]))
        return "\n".join(lines) + "\n"


def _table_values(alpha: float, d: int, tau: float, omega, M: float,
                  moser_r: float, moser_nu: float, s: float, s_hat: float):
    sigma = 1.0 / 20.0
    rows = {}
    rows["Kolmogorov"] = _kolmogorov_row(d, tau, alpha, 1.0, sigma, s, omega, M)
    rows["Arnold"] = _arnold_row(d, tau, alpha, 1.0, sigma, s, omega, M)
    rows["Moser"] = _moser_row(d, tau, alpha, moser_r, sigma, s, omega, M, moser_nu)
    rows["SalamonZehnder"] = _sz_row(d, tau, alpha, 1.0, s, omega, M, s_hat)
    return rows


def _alpha_power(name: str) -> float:
    # homogeneity degree of each row's threshold in alpha (binding branch)
    return {"Kolmogorov": 4.0, "Arnold": 2.0, "Moser": 1.0,
            "SalamonZehnder": 4.0}[name]


def reproduce_table(alpha_policy: str = "oracle", overrides: dict | None = None,
                    ) -> TableReport:
    """Evaluate all four thresholds on the d = 2 chain and compare.

    alpha_policy is 'oracle' (brute-force Diophantine constant of the golden
    frequency), 'scan' (calibration sweep over [0.3, 1.0]), or a float.
    Discrepancies are reported, never masked.
    """
    overrides = dict(overrides or {})
    d = int(overrides.pop("d", 2))
    tau = float(overrides.pop("tau", 1.0))
    s = float(overrides.pop("s", 1.0))
    s_hat = float(overrides.pop("s_hat", 0.1))
    moser_r = float(overrides.pop("moser_r", PAPER_MOSER_R))
    moser_nu = float(overrides.pop("moser_nu", 3.0))
    omega = overrides.pop("omega", GOLDEN_OMEGA)
    kmax = int(overrides.pop("kmax", 10**5))
    if overrides:
        raise InvalidParams(f"unknown table overrides: {sorted(overrides)}")

    M = mech_norms(d, s).M
    oracle = thresholds.diophantine_constant(omega, tau, kmax).alpha_hat

    scan = None
    if alpha_policy == "oracle":
        alpha = oracle
    elif alpha_policy == "scan":
        alpha = oracle
        scan = _alpha_scan(d, tau, omega, M, moser_r, moser_nu, s, s_hat)
    else:
        alpha = float(alpha_policy)

    results = _table_values(alpha, d, tau, omega, M, moser_r, moser_nu, s, s_hat)
    rows = []
    for name, res in results.items():
        paper = PAPER_TABLE[name]
        comp = res.epsilon_star
        ratio = None
        best_alpha = None
        if comp.sign > 0:
            ratio = math.exp(comp.log_magnitude - math.log(paper))
            # invert the power law computed(alpha) = A alpha^p for this row
            p = _alpha_power(name)
            best_alpha = alpha * ratio ** (-1.0 / p)
        details = {}
        if name == "Moser":
            # back-solve the printed affine h-coefficients for cross-checking
            table = constant_table("Poschel", d, tau, moser_nu)
            C = table["C"]
            c = table["c"]
            details["C_times_c_alpha_half"] = (C * c * alpha / 2).to_real()
            details["C_times_M_over_r"] = (C * M / moser_r).to_real()
            details["printed_intercept"] = PAPER_MOSER_H[0]
            details["printed_slope"] = PAPER_MOSER_H[1]
            details["implied_C_from_intercept"] = (
                2 * PAPER_MOSER_H[0] / (d * moser_r))
            details["implied_C_from_slope"] = PAPER_MOSER_H[1] * moser_r / M
        rows.append(TableRow(
            name=name, computed=comp, paper=paper, ratio=ratio,
            binding=res.binding_constraint, alpha_used=alpha,
            best_alpha=best_alpha, details=details,
        ))
    return TableReport(
        rows=rows, alpha_policy=str(alpha_policy), alpha_oracle=oracle,
        scan=scan,
        notes={"M": M, "d": d, "tau": tau, "moser_r": moser_r,
               "moser_nu": moser_nu, "s": s, "s_hat": s_hat},
    )


def _alpha_scan(d, tau, omega, M, moser_r, moser_nu, s, s_hat,
                lo: float = 0.3, hi: float = 1.0, step: float = 1e-4) -> dict:
    """Scan a shared alpha for simultaneous agreement of all four rows.

    Row thresholds are exact power laws in alpha on this range, so the scan
    evaluates each row once and rescales; the per-row best alpha is reported
    whenever no single alpha reproduces all entries to 1e-3.
    """
    base = _table_values(1.0, d, tau, omega, M, moser_r, moser_nu, s, s_hat)
    names = list(base.keys())
    logA = {}
    for name in names:
        v = base[name].epsilon_star
        logA[name] = v.log_magnitude if v.sign > 0 else float("-inf")
    n = int(round((hi - lo) / step)) + 1
    alphas = lo + step * np.arange(n)
    worst = np.zeros(n)
    for name in names:
        p = _alpha_power(name)
        pred_ln = logA[name] + p * np.log(alphas)
        rel = np.abs(np.exp(pred_ln - math.log(PAPER_TABLE[name])) - 1.0)
        worst = np.maximum(worst, rel)
    i = int(np.argmin(worst))
    per_row = {}
    for name in names:
        p = _alpha_power(name)
        per_row[name] = float(math.exp(
            (math.log(PAPER_TABLE[name]) - logA[name]) / p))
    return {
        "lo": lo, "hi": hi, "step": step,
        "best_alpha": float(alphas[i]),
        "max_rel_err": float(worst[i]),
        "simultaneous": bool(worst[i] <= 1e-3),
        "per_row_best_alpha": per_row,
    }
