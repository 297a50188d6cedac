"""Numerical Arnold iteration on a nearly integrable Hamiltonian.

One step builds the truncated generating function, re-centers the torus,
composes the transform on an angle grid in exact jet arithmetic, and
extracts the next perturbation from the Taylor-remainder split, which is
free of the catastrophic cancellation a direct division by eps^(2^(j+1))
would incur once the effective perturbation falls below double roundoff.
The defining identity H_j o phi = K_{j+1} + eps^(2^(j+1)) P_{j+1} is still
checked directly on the grid and reported as the step defect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CapExceeded,
    ContractionFailed,
    HypothesisViolated,
    IntegratorFailure,
    InvalidParams,
    NoConvergence,
    RecenterFailed,
    SingularHessian,
)
from .params import KamParameters
from .spectral import (
    FourierJet,
    jet_compose_shift,
    jet_const,
    jet_dy,
    jet_eval,
    jet_mul,
    jet_scalar_part,
    jet_shift,
    jet_zero,
    solve_homological,
)
from . import thresholds

_GRID_CAP = 129
_ANGLE_FP_TOL = 1e-13
_ANGLE_FP_MAX = 50


# ---------------------------------------------------------------------------
# scalar action jets (the integrable part K)


class KJet:
    """Scalar polynomial jet K(center + delta) of fixed degree."""

    def __init__(self, center, coeffs: np.ndarray, d: int, degree: int):
        self.center = np.asarray(center, dtype=float)
        self.coeffs = np.asarray(coeffs, dtype=complex)
        self.d = d
        self.degree = degree

    @classmethod
    def quadratic_half_norm(cls, center, d: int, degree: int = 4) -> "KJet":
        """K(y) = |y|_2^2 / 2 expanded around `center`."""
        center = np.asarray(center, dtype=float)
        coeffs = jet_zero(d, degree)
        coeffs[(0,) * d] = 0.5 * float(center @ center)
        for i in range(d):
            idx = [0] * d
            idx[i] = 1
            coeffs[tuple(idx)] = center[i]
            idx[i] = 2
            coeffs[tuple(idx)] = 0.5
        return cls(center, coeffs, d, degree)

    def value(self, delta) -> complex:
        return jet_eval(self.coeffs, delta, self.d)

    def grad_jets(self) -> list[np.ndarray]:
        return [jet_dy(self.coeffs, i, self.d) for i in range(self.d)]

    def grad(self, delta) -> np.ndarray:
        return np.array([jet_eval(g, delta, self.d) for g in self.grad_jets()])

    def hess(self, delta) -> np.ndarray:
        out = np.empty((self.d, self.d), dtype=complex)
        for i in range(self.d):
            gi = jet_dy(self.coeffs, i, self.d)
            for j in range(self.d):
                out[i, j] = jet_eval(jet_dy(gi, j, self.d), delta, self.d)
        return out

    def add_jet(self, other: np.ndarray, scale: complex = 1.0) -> "KJet":
        return KJet(self.center, self.coeffs + scale * other, self.d, self.degree)

    def shift(self, delta) -> "KJet":
        return KJet(self.center + np.asarray(delta, dtype=float),
                    jet_shift(self.coeffs, delta, self.d, self.degree),
                    self.d, self.degree)


def newton_recenter(K: KJet, omega, y_guess, radius: float,
                    tol: float = 1e-12, max_iter: int = 50) -> np.ndarray:
    """Solve grad K(y') = omega by Newton iteration near y_guess."""
    omega = np.asarray(omega, dtype=float)
    y = np.asarray(y_guess, dtype=float).copy()
    scale = max(1.0, float(np.max(np.abs(omega))))
    last = float("inf")
    for _ in range(max_iter):
        delta = y - K.center
        res = K.grad(delta).real - omega
        last = float(np.max(np.abs(res)))
        if last <= tol * scale:
            return y
        H = K.hess(delta).real
        if abs(np.linalg.det(H)) < 1e-14 * max(1.0, np.max(np.abs(H)) ** K.d):
            raise SingularHessian("Hessian nearly singular during re-centering")
        step = np.linalg.solve(H, res)
        y = y - step
        if np.max(np.abs(y - np.asarray(y_guess, dtype=float))) > radius:
            raise NoConvergence(max_iter, last)
    raise NoConvergence(max_iter, last)


# ---------------------------------------------------------------------------
# iteration state and transforms


@dataclass(frozen=True)
class IterationState:
    j: int
    y: np.ndarray
    s: float
    sigma: float
    r: float
    kappa: int
    lam: float
    K: KJet
    P: FourierJet
    M: float
    Kb: float
    Tb: float
    theta: float
    diagnostics: dict = field(default_factory=dict)


class StepTransform:
    """One near-identity symplectic step in mixed-variable form."""

    def __init__(self, g: FourierJet, eps_eff: float, center_new, center_old):
        self.g = g  # generating function jets, centered at the new action
        self.eps_eff = float(eps_eff)
        self.center_new = np.asarray(center_new, dtype=float)
        self.center_old = np.asarray(center_old, dtype=float)
        self._gx = [g.dx(i) for i in range(g.d)]
        self._gy = [g.dy(i) for i in range(g.d)]

    def _eval_vec(self, jets, delta, X):
        return np.stack([f.evaluate_angles(delta, X) for f in jets], axis=-1)

    def angle_inverse(self, y_prime, X_prime) -> np.ndarray:
        """Solve x + eps g_y(y', x) = x' for x (batch over rows of X_prime)."""
        delta = np.asarray(y_prime, dtype=float) - self.center_new
        X = np.asarray(X_prime, dtype=float).copy()
        if self.eps_eff == 0.0 or not self.g.coeffs:
            return X
        for _ in range(_ANGLE_FP_MAX):
            shift = self.eps_eff * self._eval_vec(self._gy, delta, X).real
            X_new = np.asarray(X_prime) - shift
            err = float(np.max(np.abs(X_new - X)))
            X = X_new
            if err <= _ANGLE_FP_TOL:
                return X
        raise ContractionFailed(
            f"angle-map fixed point stalled at residual {err:.3e}"
        )

    def forward(self, y_prime, X_prime):
        """Map new coordinates (y', x') to old coordinates (y, x)."""
        y_prime = np.asarray(y_prime, dtype=float)
        X = self.angle_inverse(y_prime, X_prime)
        delta = y_prime - self.center_new
        if self.eps_eff == 0.0 or not self.g.coeffs:
            return np.broadcast_to(y_prime, X.shape).copy(), X
        gx = self._eval_vec(self._gx, delta, X).real
        Y = y_prime[None, :] + self.eps_eff * gx
        return Y, X

    def jacobian(self, y_prime, x_prime) -> np.ndarray:
        """d(y, x)/d(y', x') at one point, from exact jet derivatives."""
        d = self.g.d
        E = self.eps_eff
        x = self.angle_inverse(y_prime, np.atleast_2d(x_prime))[0]
        delta = np.asarray(y_prime, dtype=float) - self.center_new
        X1 = x[None, :]

        def dval(base_list, dx_axis=None, dy_axis=None):
            out = np.empty((d,), dtype=float)
            for i, f in enumerate(base_list):
                h = f
                if dx_axis is not None:
                    h = h.dx(dx_axis)
                if dy_axis is not None:
                    h = h.dy(dy_axis)
                out[i] = h.evaluate_angles(delta, X1).real[0]
            return out

        M = np.stack([dval(self._gy, dx_axis=j) for j in range(d)], axis=-1)
        Gyy = np.stack([dval(self._gy, dy_axis=j) for j in range(d)], axis=-1)
        Gxx = np.stack([dval(self._gx, dx_axis=j) for j in range(d)], axis=-1)
        N = M.T
        inv = np.linalg.inv(np.eye(d) + E * M)
        dx_dxp = inv
        dx_dyp = -inv @ (E * Gyy)
        dy_dyp = np.eye(d) + E * N + E * Gxx @ dx_dyp
        dy_dxp = E * Gxx @ dx_dxp
        return np.block([[dy_dyp, dy_dxp], [dx_dyp, dx_dxp]])


def symplectic_defect(transform: StepTransform, n_points: int = 16,
                      seed: int = 0) -> float:
    """sup over random points of ||J^T Omega J - Omega||."""
    d = transform.g.d
    omega_mat = np.block([[np.zeros((d, d)), -np.eye(d)],
                          [np.eye(d), np.zeros((d, d))]])
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_points):
        y = transform.center_new + 0.0  # jets are exact at the center
        x = rng.uniform(0, 2 * np.pi, size=d)
        J = transform.jacobian(y, x)
        defect = np.max(np.abs(J.T @ omega_mat @ J - omega_mat))
        worst = max(worst, float(defect))
    return worst


@dataclass
class TorusEmbedding:
    omega: np.ndarray
    y_star: np.ndarray
    s_star: float
    steps: list  # outermost transform first

    def evaluate(self, X):
        """Embed angles X (n, d) into phase space: returns (Y, Xout)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n = X.shape[0]
        Y = np.broadcast_to(self.y_star, X.shape).copy()
        Xc = X.copy()
        for tr in reversed(self.steps):
            # innermost step first: evaluate at its own torus center
            Ys = np.empty_like(Y)
            Xs = np.empty_like(Xc)
            for i in range(n):
                yi, xi = tr.forward(Y[i], Xc[i:i + 1])
                Ys[i], Xs[i] = yi[0], xi[0]
            Y, Xc = Ys, Xs
        return Y, Xc


@dataclass(frozen=True)
class DecayRow:
    j: int
    M: float
    bound_log10: float | None
    p: float | None
    kappa: int
    r: float
    floored: bool


@dataclass
class DecayLog:
    rows: list[DecayRow]
    regime: str
    notes: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["j,M,bound_log10,p,kappa,r,floored"]
        for row in self.rows:
            lines.append(",".join([
                str(row.j), repr(row.M),
                "" if row.bound_log10 is None else repr(row.bound_log10),
                "" if row.p is None else repr(row.p),
                str(row.kappa), repr(row.r), str(int(row.floored)),
            ]))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# grid helpers


def _angle_grid(n: int, d: int):
    axes = [2 * np.pi * np.arange(n) / n] * d
    mesh = np.meshgrid(*axes, indexing="ij")
    X = np.stack([m.ravel() for m in mesh], axis=-1)
    return X


def _pack(fj: FourierJet):
    ks = np.array(list(fj.coeffs.keys()), dtype=float).reshape(-1, fj.d)
    jets = np.stack([v for v in fj.coeffs.values()], axis=0) if fj.coeffs else \
        np.zeros((0,) + (fj.jet_degree + 1,) * fj.d, dtype=complex)
    return ks, jets


def _collapse_on_grid(fj: FourierJet, X) -> np.ndarray:
    """Sum of harmonics with jet coefficients on the angle grid."""
    box = (fj.jet_degree + 1,) * fj.d
    if not fj.coeffs:
        return np.zeros((X.shape[0],) + box, dtype=complex)
    ks, jets = _pack(fj)
    phases = np.exp(1j * (X @ ks.T))  # (n, H)
    flat = jets.reshape(jets.shape[0], -1)  # (H, B)
    return (phases @ flat).reshape(X.shape[0], *box)


def _significant_order(fj: FourierJet, rel: float) -> int:
    """Largest |k|_1 whose coefficient exceeds rel * (largest coefficient)."""
    if not fj.coeffs:
        return 0
    mags = {k: float(np.max(np.abs(v))) for k, v in fj.coeffs.items()}
    scale = max(mags.values())
    orders = [sum(abs(x) for x in k) for k, m in mags.items()
              if m > rel * scale]
    return max(orders, default=0)


def _shift_powers(u: list[np.ndarray], d: int, deg: int, lead: int) -> dict:
    """Jet powers of the angle shift, shared by all composed fields."""
    from .spectral import _JetTables

    t = _JetTables(d, deg)
    upow: dict[tuple, np.ndarray] = {
        (0,) * d: jet_const(d, deg, 1.0, lead=(lead,))}
    for l in sorted(t.active_multi, key=sum):
        if sum(l) == 0:
            continue
        axis = next(i for i, v in enumerate(l) if v > 0)
        prev = tuple(v - (1 if i == axis else 0) for i, v in enumerate(l))
        upow[l] = jet_mul(upow[prev], u[axis], d, deg)
    return upow


def _compose_shifted_many(fields: list[np.ndarray], u: list[np.ndarray],
                          grid_n: int, d: int, deg: int) -> list[np.ndarray]:
    """Jets of field(delta, x + u(delta, x)) on the grid, for several fields.

    Spectral Taylor expansion in the angle shift: the nilpotent jet slots
    of u are handled exactly (the series terminates at the jet degree), and
    the scalar shift is tiny, O(eps^(2^j)), so the truncated scalar Taylor
    terms are far below roundoff of the O(1) field.
    """
    from .spectral import _JetTables

    if all(not np.any(ui) for ui in u):
        return [f.copy() for f in fields]
    t = _JetTables(d, deg)
    box = (deg + 1,) * d
    lead = fields[0].shape[0]
    freqs = np.fft.fftfreq(grid_n, 1.0 / grid_n)  # integer harmonics
    kax = []
    for i in range(d):
        shape = [1] * (d + d)
        shape[i] = grid_n
        kax.append(freqs.reshape(shape))
    upow = _shift_powers(u, d, deg, lead)
    hats = [np.fft.fftn(f.reshape((grid_n,) * d + box), axes=tuple(range(d)))
            for f in fields]
    outs = [np.zeros((lead,) + box, dtype=complex) for _ in fields]
    for m in t.active_multi:
        if sum(m) > 0 and not np.any(upow[m]):
            continue
        W = np.ones((1,) * (d + d), dtype=complex)
        fact = 1.0
        for i, mi in enumerate(m):
            if mi:
                W = W * (1j * kax[i]) ** mi
                fact *= math.factorial(mi)
        for hat, out in zip(hats, outs):
            deriv = np.fft.ifftn(hat * W, axes=tuple(range(d)))
            deriv = deriv.reshape((lead,) + box)
            out += jet_mul(deriv, upow[m], d, deg) / fact
    return outs


def _compose_shifted(field: np.ndarray, u: list[np.ndarray], grid_n: int,
                     d: int, deg: int) -> np.ndarray:
    return _compose_shifted_many([field], u, grid_n, d, deg)[0]


def _field_to_fourier(field: np.ndarray, grid_n: int, d: int, deg: int,
                      center, action_radius: float, kappa_keep: int,
                      prune: float = 1e-16, trust_radius: float = 1.0,
                      ) -> tuple[FourierJet, float]:
    """FFT a grid of jets back to harmonics; returns (jet, discarded mass).

    Jet slots are weighted by trust_radius^|l| when judging the discarded
    spectral mass: high action-derivative slots legitimately carry large
    entries but only act within the iteration's shrinking trust radius.
    """
    from .spectral import _JetTables

    box = (deg + 1,) * d
    t = _JetTables(d, deg)
    shaped = field.reshape((grid_n,) * d + box)
    hat = np.fft.fftn(shaped, axes=tuple(range(d))) / grid_n**d
    freqs = np.fft.fftfreq(grid_n, 1.0 / grid_n).astype(int)
    flat_abs = np.abs(hat).reshape((grid_n,) * d + (-1,))
    mags = flat_abs.max(axis=-1)
    rw = np.zeros(flat_abs.shape[-1])
    rw[t.active] = np.minimum(1.0, trust_radius) ** t.l1
    weighted = (flat_abs * rw).max(axis=-1)
    scale = float(mags.max()) or 1.0
    wscale = float(weighted.max()) or 1.0
    l1 = np.zeros((grid_n,) * d)
    for i in range(d):
        shape = [1] * d
        shape[i] = grid_n
        l1 = l1 + np.abs(freqs).reshape(shape)
    keep = (mags > prune * scale) & (l1 <= kappa_keep)
    over = (weighted > 0) & (l1 > kappa_keep)
    discarded = float(weighted[over].max()) if over.any() else 0.0
    coeffs = {}
    for idx in np.argwhere(keep):
        k = tuple(int(freqs[i]) for i in idx)
        coeffs[k] = hat[tuple(idx)]
    fj = FourierJet(d, center, action_radius, deg, kappa_keep, coeffs)
    return fj, discarded / wscale


# ---------------------------------------------------------------------------
# one Arnold step


def arnold_step(state: IterationState, eps: float, *,
                classic_kappa: bool = False,
                guard_alpha: float | None = None,
                guard_tau: float | None = None,
                ) -> tuple[IterationState, StepTransform | None]:
    """Perform one KAM step of the iteration H_j -> H_{j+1}.

    eps is the original perturbation size; the step acts at effective size
    eps^(2^j).  Returns the advanced state and the step transform (None
    for the eps = 0 bookkeeping step).
    """
    d = state.P.d
    deg = state.P.jet_degree
    sig, s = state.sigma, state.s
    alpha = guard_alpha if guard_alpha is not None else state.diagnostics.get("alpha")
    tau = guard_tau if guard_tau is not None else state.diagnostics.get("tau")
    if alpha is None or tau is None:
        raise InvalidParams("arnold_step needs the Diophantine guard (alpha, tau)")

    E = eps ** (2 ** state.j) if eps != 0 else 0.0
    factor = 5.0 if classic_kappa else 4.0
    kappa_j = max(int(math.ceil(factor * state.lam / sig)), 1)

    if E == 0.0:
        new = IterationState(
            j=state.j + 1, y=state.y, s=s - sig, sigma=sig / 2, r=state.r,
            kappa=kappa_j, lam=2 * state.lam, K=state.K, P=state.P,
            M=state.M, Kb=state.Kb, Tb=state.Tb, theta=0.0,
            diagnostics={**state.diagnostics, "eps_eff": 0.0},
        )
        return new, None

    zero = (0,) * d
    avg_jet = state.P.coeffs.get(zero, jet_zero(d, deg))
    K_prime = state.K.add_jet(avg_jet, scale=E)

    # generating function from the old frequency map
    grad_old = state.K.grad_jets()
    kappa_eff = min(kappa_j, state.P.max_harmonic_order())
    P_no_avg = state.P.copy_with(
        coeffs={k: v for k, v in state.P.coeffs.items() if k != zero})
    # the generating function solves the truncated equation with the
    # opposite sign: K_y . g_x + T_kappa P - <P> = 0
    g = solve_homological(P_no_avg, grad_old, max(kappa_eff, 1),
                          (alpha, tau)).scale(-1.0)

    # re-center so the new frequency map hits omega exactly
    omega = np.array([complex(jet_scalar_part(gj, d)).real for gj in grad_old])
    try:
        y_new = newton_recenter(K_prime, omega, state.y, radius=max(state.r, 1.0))
    except (NoConvergence, SingularHessian) as exc:
        raise RecenterFailed(str(exc)) from exc
    delta_c = y_new - state.y

    K_old_s = state.K.shift(delta_c)
    K_new = K_prime.shift(delta_c)
    g_s = g.shift_center(delta_c)
    P_s = state.P.shift_center(delta_c)

    # angle grid sized by the significant spectrum (products double it), capped
    kappa_sig = _significant_order(P_s, 1e-12)
    kappa_sig = max(kappa_sig, _significant_order(g_s, 1e-12), 2)
    grid_half = min(2 * kappa_sig + 8, (_GRID_CAP - 1) // 2)
    if kappa_sig > grid_half:
        raise CapExceeded(
            f"significant spectrum |k| <= {kappa_sig} exceeds the grid cap"
        )
    grid_n = 2 * grid_half + 1
    X = _angle_grid(grid_n, d)
    n = X.shape[0]

    gx_fields = [_collapse_on_grid(g_s.dx(i), X) for i in range(d)]

    # Taylor-remainder pieces (weights in powers of E keep every term O(1))
    piece_K = jet_compose_shift(K_old_s.coeffs, gx_fields, d, deg,
                                min_order=2, weight_base=E)
    P_field = _collapse_on_grid(P_s, X)
    piece_P = jet_compose_shift(P_field, gx_fields, d, deg,
                                min_order=1, weight_base=E)
    tail = {k: v for k, v in P_s.coeffs.items()
            if sum(abs(x) for x in k) > kappa_j}
    if tail:
        tail_field = _collapse_on_grid(P_s.copy_with(coeffs=tail), X) / E
    else:
        tail_field = 0.0
    P_plus_field = piece_K + piece_P + tail_field

    # angle-map inverse as a jet fixed point: u = -E g_y(delta, x' + u)
    u = [jet_zero(d, deg, lead=(n,)) for _ in range(d)]
    gy_fields = [_collapse_on_grid(g_s.dy(i), X) for i in range(d)]
    converged = False
    for _ in range(_ANGLE_FP_MAX):
        composed = _compose_shifted_many(gy_fields, u, grid_n, d, deg)
        u_new = [-E * c for c in composed]
        err = max(float(np.max(np.abs(u_new[i] - u[i]))) for i in range(d))
        u = u_new
        if err <= _ANGLE_FP_TOL:
            converged = True
            break
    if not converged:
        raise ContractionFailed(
            f"jet angle inverse stalled at residual {err:.3e}"
        )

    # compose the remainder with the inverted angle map, back to harmonics
    next_field = _compose_shifted(P_plus_field, u, grid_n, d, deg)
    r_trust = min(
        1.0,
        alpha / (4 * d * math.sqrt(2) * state.Kb * max(kappa_j, 1) ** (tau + 1)),
    )
    P_next, discarded = _field_to_fourier(next_field, grid_n, d, deg, y_new,
                                          state.P.action_radius,
                                          kappa_keep=grid_half,
                                          trust_radius=r_trust)
    if discarded > 1e-6:
        raise CapExceeded(
            f"spectral content beyond the grid cap: relative mass {discarded:.3e}"
        )
    P_next = P_next.prune(1e-16)

    transform = StepTransform(g_s, E, center_new=y_new, center_old=state.y)

    # norms and bookkeeping
    M_next = float(np.max(np.abs(jet_scalar_part(next_field, d))))
    hess = K_new.hess(np.zeros(d)).real
    Kb_next = float(np.max(np.sum(np.abs(hess), axis=1)))
    try:
        Tb_next = float(np.max(np.sum(np.abs(np.linalg.inv(hess)), axis=1)))
    except np.linalg.LinAlgError as exc:
        raise SingularHessian(str(exc)) from exc

    # direct defect of the defining identity on the real grid
    u0 = np.stack([jet_scalar_part(u[i], d).real for i in range(d)], axis=-1)
    X_old = X + u0
    gx_pts = np.stack([g_s.dx(i).evaluate_angles(np.zeros(d), X_old).real
                       for i in range(d)], axis=-1)
    y_pts = y_new[None, :] + E * gx_pts
    dy_pts = y_pts - state.y[None, :]
    lhs = np.array([state.K.value(dy) for dy in dy_pts]).real
    lhs = lhs + E * np.array([state.P.evaluate(dy_pts[i], X_old[i])
                              for i in range(n)]).real
    rhs = (np.full(n, K_new.value(np.zeros(d)).real)
           + E * E * jet_scalar_part(next_field, d).real)
    defect = float(np.max(np.abs(lhs - rhs)))

    r_next = min(
        alpha / (4 * d * math.sqrt(2) * state.Kb * max(kappa_j, 1) ** (tau + 1)),
        (5 / (96 * d)) * state.r / max(state.Tb * state.Kb, 1.0),
    )
    L_surrogate = state.M * max(
        40 * d * state.Tb**2 * state.Kb / state.r**2 * sig ** -(tau + 1 + d),
        4.0 / (state.Kb * state.r**2),
    )
    diagnostics = {
        **state.diagnostics,
        "eps_eff": E,
        "defect": defect,
        "discarded_mass": discarded,
        "grid_n": grid_n,
        "kappa_schedule": kappa_j,
        "kappa_effective": kappa_eff,
        "recenter_shift": float(np.max(np.abs(delta_c))),
        "rigorous_step_ok": bool(E * L_surrogate <= sig / 3),
    }
    new_state = IterationState(
        j=state.j + 1, y=y_new, s=s - sig, sigma=sig / 2, r=r_next,
        kappa=kappa_j, lam=2 * state.lam, K=K_new, P=P_next,
        M=M_next, Kb=Kb_next, Tb=Tb_next,
        theta=E * E * M_next,
        diagnostics=diagnostics,
    )
    return new_state, transform


# ---------------------------------------------------------------------------
# the full iteration


def run_arnold(hamiltonian: tuple[KJet, FourierJet], params: KamParameters,
               jmax: int, *, force: bool = False, floor: float = 1e-14,
               run_past_floor: bool = False, classic_kappa: bool = False,
               ) -> tuple[TorusEmbedding, DecayLog]:
    """Iterate the Arnold step and log the super-exponential decay.

    The effective perturbation sizes M_j = eps^(2^j) sup|P_j| are logged
    with the analytic schedule majorant when the rigorous smallness holds;
    otherwise the log records the forced regime.
    """
    K0, P0 = hamiltonian
    eps = params.require_extra("eps", "run_arnold")
    alpha, tau = params.alpha, params.tau
    d = P0.d

    threshold = thresholds.epsilon_star("Arnold", params)
    eps_star = threshold.epsilon_star.to_real()
    rigorous = abs(eps) <= eps_star
    if not rigorous and not force:
        raise InvalidParams(
            f"|eps|={abs(eps):.3e} exceeds the Arnold threshold {eps_star:.3e}; "
            f"pass force=True to run anyway"
        )
    regime = "rigorous" if rigorous else "forced"

    bounds: list | None = None
    if eps != 0:
        try:
            sched = thresholds.schedule("Arnold", params, jmax)
            bounds = [row.size_bound for row in sched.rows]
        except (HypothesisViolated, InvalidParams):
            bounds = None

    mu0 = params.Kbound * abs(eps) * params.M / alpha**2 if eps != 0 else 0.0
    lam0 = max(math.log(1.0 / mu0), 1.0) if mu0 > 0 else 1.0

    X_check = _angle_grid(65, d)
    M0 = float(np.max(np.abs(P0.evaluate_angles(np.zeros(d), X_check)))) * abs(eps)

    state = IterationState(
        j=0, y=K0.center.copy(), s=params.s, sigma=params.sigma, r=params.r,
        kappa=0, lam=lam0, K=K0, P=P0,
        M=float(np.max(np.abs(P0.evaluate_angles(np.zeros(d), X_check)))),
        Kb=params.Kbound, Tb=params.Tbound, theta=mu0,
        diagnostics={"alpha": alpha, "tau": tau},
    )

    def bound_log10(j):
        if bounds is None or j >= len(bounds) or bounds[j].sign == 0:
            return None
        return bounds[j].log10

    rows = [DecayRow(j=0, M=M0, bound_log10=bound_log10(0), p=None,
                     kappa=0, r=params.r, floored=M0 < floor)]
    transforms = []
    for _ in range(jmax):
        if rows[-1].floored and not run_past_floor:
            break
        state, tr = arnold_step(state, eps, classic_kappa=classic_kappa)
        if tr is not None:
            transforms.append(tr)
        eff = abs(eps) ** (2 ** state.j)
        M_eff = eff * state.M
        rows.append(DecayRow(
            j=state.j, M=M_eff, bound_log10=bound_log10(state.j), p=None,
            kappa=state.kappa, r=state.r, floored=M_eff < floor,
        ))
    # decay exponents between measurable consecutive pairs
    out_rows = []
    for i, row in enumerate(rows):
        p = None
        if i + 1 < len(rows):
            a, b = rows[i].M, rows[i + 1].M
            if 0 < a < 1 and 0 < b:
                p = math.log(b) / math.log(a)
        out_rows.append(DecayRow(row.j, row.M, row.bound_log10, p,
                                 row.kappa, row.r, row.floored))
    embedding = TorusEmbedding(
        omega=np.array([complex(jet_scalar_part(gj, d)).real
                        for gj in K0.grad_jets()]),
        y_star=state.y.copy(),
        s_star=params.s - 2 * params.sigma,
        steps=transforms,
    )
    log = DecayLog(rows=out_rows, regime=regime, notes={
        "eps": eps, "mu0": mu0, "eps_star_arnold": eps_star,
        "floor": floor, "jmax": jmax,
    })
    return embedding, log


# ---------------------------------------------------------------------------
# flow-based invariance verification


@dataclass(frozen=True)
class DefectReport:
    sup_defect: float
    mean_defect: float
    per_time: dict
    n_seeds: int
    rk4_tol: float


def _rk4_step(f, z, h):
    k1 = f(z)
    k2 = f(z + 0.5 * h * k1)
    k3 = f(z + 0.5 * h * k2)
    k4 = f(z + h * k3)
    return z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_flow(rhs, z0: np.ndarray, t_final: float, tol: float,
                   checkpoints) -> dict:
    """Adaptive RK4 (step doubling) for all seeds simultaneously."""
    z = np.asarray(z0, dtype=float).copy()
    t = 0.0
    h = min(0.01, t_final / 10)
    out = {}
    targets = sorted(checkpoints)
    ti = 0
    guard = 0
    while ti < len(targets):
        guard += 1
        if guard > 2_000_000:
            raise IntegratorFailure("step budget exhausted")
        t_next = targets[ti]
        clamped = t_next - t <= h
        hstep = t_next - t if clamped else h
        one = _rk4_step(rhs, z, hstep)
        half = _rk4_step(rhs, z, hstep / 2)
        two = _rk4_step(rhs, half, hstep / 2)
        err = float(np.max(np.abs(one - two))) / 15.0
        if err > tol and hstep > 1e-12:
            h = max(hstep * 0.5, 1e-12)
            continue
        z = two + (two - one) / 15.0  # local extrapolation
        t = t_next if clamped else t + hstep
        if err > 0:
            h = min(hstep * min(2.0, 0.9 * (tol / err) ** 0.2), t_final)
        else:
            h = min(hstep * 2.0, t_final)
        if clamped:
            out[t_next] = z.copy()
            ti += 1
    return out


def verify_invariance(embedding: TorusEmbedding, system, t_final: float,
                      n_angles: int, rk4_tol: float,
                      angles: np.ndarray | None = None) -> DefectReport:
    """Compare the Hamiltonian flow of embedded points with the rigid rotation.

    system provides dH_dy(y, x) and dH_dx(y, x), both vectorized over rows.
    Seeds are an n_angles x n_angles grid unless explicit angles are given.
    """
    d = len(embedding.omega)
    if angles is None:
        axes = [2 * np.pi * np.arange(n_angles) / n_angles] * d
        mesh = np.meshgrid(*axes, indexing="ij")
        angles = np.stack([m.ravel() for m in mesh], axis=-1)
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    n = angles.shape[0]
    Y0, X0 = embedding.evaluate(angles)
    z0 = np.concatenate([Y0, X0], axis=1)

    def rhs(z):
        y, x = z[:, :d], z[:, d:]
        return np.concatenate([-system.dH_dx(y, x), system.dH_dy(y, x)], axis=1)

    times = [t_final / 4, t_final / 2, t_final]
    states = integrate_flow(rhs, z0, t_final, rk4_tol, times)
    per_time = {}
    all_defects = []
    for t in times:
        z = states[t]
        Yt, Xt = embedding.evaluate(angles + embedding.omega[None, :] * t)
        dy = np.abs(z[:, :d] - Yt)
        dx = np.abs((z[:, d:] - Xt + np.pi) % (2 * np.pi) - np.pi)
        defect = np.max(np.concatenate([dy, dx], axis=1), axis=1)
        per_time[t] = float(np.max(defect))
        all_defects.append(defect)
    flat = np.concatenate(all_defects)
    return DefectReport(
        sup_defect=float(np.max(flat)),
        mean_defect=float(np.mean(flat)),
        per_time=per_time,
        n_seeds=n,
        rk4_tol=rk4_tol,
    )
