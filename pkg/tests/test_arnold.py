from __future__ import annotations

import math

import numpy as np
import pytest

from kamforge.arnold import (
    IterationState,
    KJet,
    arnold_step,
    newton_recenter,
    run_arnold,
    symplectic_defect,
    verify_invariance,
)
from kamforge.errors import InvalidParams, NoConvergence
from kamforge.mechanical import GOLDEN_OMEGA, MechanicalModel, mech_norms
from kamforge.params import KamParameters

OMEGA = np.array(GOLDEN_OMEGA)


def _initial_state(model, eps_extra=None, alpha=0.6, lam=9.0):
    K0 = model.K_jet(OMEGA)
    P0 = model.P0_jet(OMEGA)
    return IterationState(
        j=0, y=OMEGA.copy(), s=1.0, sigma=1 / 20, r=1.0, kappa=0, lam=lam,
        K=K0, P=P0, M=2.0, Kb=1.0, Tb=1.0, theta=0.0,
        diagnostics={"alpha": alpha, "tau": 1.0},
    )


# ---------------------------------------------------------------------------
# newton_recenter


def test_recenter_quadratic_hamiltonian():
    K = KJet.quadratic_half_norm(np.zeros(2), 2)
    target = np.array([0.3, -1.2])
    y = newton_recenter(K, target, np.zeros(2), radius=5.0)
    assert np.allclose(y, target, atol=1e-12)


def test_recenter_affine_shift():
    K = KJet.quadratic_half_norm(np.zeros(2), 2)
    c = np.array([0.1, 0.2])
    idx_x, idx_y = (1, 0), (0, 1)
    K.coeffs[idx_x] += c[0]
    K.coeffs[idx_y] += c[1]
    target = np.array([0.5, 0.5])
    y = newton_recenter(K, target, np.zeros(2), radius=5.0)
    assert np.allclose(y, target - c, atol=1e-12)


def test_recenter_cubic_matches_bisection():
    # K = y1^2/2 + 0.1 y1^3 plus a pure quadratic second coordinate
    K = KJet.quadratic_half_norm(np.zeros(2), 2)
    K.coeffs[(3, 0)] = 0.1
    y = newton_recenter(K, np.array([0.5, 0.0]), np.zeros(2), radius=5.0)
    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mid + 0.3 * mid**2 < 0.5:
            lo = mid
        else:
            hi = mid
    assert y[0] == pytest.approx(lo, abs=1e-10)
    assert y[1] == pytest.approx(0.0, abs=1e-12)


def test_recenter_escape_raises():
    K = KJet.quadratic_half_norm(np.zeros(2), 2)
    with pytest.raises(NoConvergence):
        newton_recenter(K, np.array([10.0, 0.0]), np.zeros(2), radius=1.0)


# ---------------------------------------------------------------------------
# single step


def test_step_eps_zero_is_bookkeeping():
    model = MechanicalModel(2)
    state = _initial_state(model)
    new, tr = arnold_step(state, 0.0)
    assert tr is None
    assert new.j == 1
    assert new.sigma == state.sigma / 2
    assert np.array_equal(new.y, state.y)
    assert new.P is state.P


def test_step_defect_small():
    model = MechanicalModel(2)
    state = _initial_state(model)
    new, tr = arnold_step(state, 1e-5)
    norm_h = 1.0 + abs(new.K.value(np.zeros(2)).real)
    assert new.diagnostics["defect"] <= 1e-11 * norm_h
    assert tr is not None
    # frequency preservation at the new center
    grad = new.K.grad(np.zeros(2)).real
    assert np.max(np.abs(grad - OMEGA)) < 1e-10


def test_step_cohomological_cancellation():
    # the order-eps bracket K_y . g_x + T_kappa P - <P> vanishes on a grid
    model = MechanicalModel(2)
    state = _initial_state(model)
    _, tr = arnold_step(state, 1e-5)
    g = tr.g
    rng = np.random.default_rng(1)
    X = rng.uniform(0, 2 * np.pi, size=(400, 2))
    delta = np.zeros(2)
    gx = np.stack([g.dx(i).evaluate_angles(delta, X) for i in range(2)], axis=-1)
    ky = tr.center_new  # gradient of |y|^2/2 at the new center
    bracket = (gx @ ky).real + model.P0(X)  # <P0> = 0
    assert np.max(np.abs(bracket)) < 1e-11


def test_step_quadratic_error_ratio_stable_in_eps():
    model = MechanicalModel(2)
    ratios = []
    for eps in (1e-4, 1e-5, 1e-6):
        state = _initial_state(model)
        new, _ = arnold_step(state, eps)
        m0 = eps * state.M
        m1 = eps**2 * new.M
        ratios.append(m1 / m0**2)
    assert all(math.isfinite(r) and r > 0 for r in ratios)
    spread = max(ratios) / min(ratios) - 1
    assert spread < 0.10


def test_step_requires_guard():
    model = MechanicalModel(2)
    state = _initial_state(model)
    bad = IterationState(**{**state.__dict__, "diagnostics": {}})
    with pytest.raises(InvalidParams):
        arnold_step(bad, 1e-5)


# ---------------------------------------------------------------------------
# full runs


def test_run_requires_force_above_threshold(chain_params):
    model = MechanicalModel(2)
    params = KamParameters(**{**chain_params.to_json(),
                              "extra": {"eps": 1e-5}})
    with pytest.raises(InvalidParams):
        run_arnold((model.K_jet(OMEGA), model.P0_jet(OMEGA)), params, 2)


def test_run_eps_zero_trivial_embedding(chain_params):
    model = MechanicalModel(2)
    params = KamParameters(**{**chain_params.to_json(), "extra": {"eps": 0.0}})
    emb, log = run_arnold((model.K_jet(OMEGA), model.P0_jet(OMEGA)), params,
                          jmax=3, run_past_floor=True)
    assert all(row.M == 0.0 for row in log.rows)
    assert log.regime == "rigorous"
    X = np.array([[0.3, 5.1], [2.2, 0.7]])
    Y, Xo = emb.evaluate(X)
    assert np.allclose(Y, OMEGA)
    assert np.allclose(Xo, X)


def test_run_decay_log(arnold_experiment):
    log = arnold_experiment["log"]
    assert log.regime == "forced"
    assert len(log.rows) == 4  # three completed steps
    Ms = [row.M for row in log.rows]
    assert all(b < a for a, b in zip(Ms, Ms[1:]))
    pre_floor = [row.p for row in log.rows[:-1] if not row.floored
                 and row.p is not None]
    assert pre_floor, "at least one measurable decay pair"
    for p in pre_floor:
        assert 1.7 <= p <= 2.3


def test_run_bound_majorant_in_rigorous_regime(chain_params):
    model = MechanicalModel(2)
    eps = 1e-52
    params = KamParameters(**{**chain_params.to_json(), "extra": {"eps": eps}})
    emb, log = run_arnold((model.K_jet(OMEGA), model.P0_jet(OMEGA)), params,
                          jmax=2, run_past_floor=True)
    assert log.regime == "rigorous"
    for row in log.rows:
        if row.bound_log10 is not None and row.M > 0:
            assert math.log10(row.M) <= row.bound_log10 + 1e-9


def test_embedding_periodicity(arnold_experiment):
    emb = arnold_experiment["embedding"]
    rng = np.random.default_rng(4)
    X = rng.uniform(0, 2 * np.pi, size=(6, 2))
    Y1, X1 = emb.evaluate(X)
    for i in range(2):
        shift = np.zeros(2)
        shift[i] = 2 * np.pi
        Y2, X2 = emb.evaluate(X + shift)
        assert np.max(np.abs(Y2 - Y1)) < 1e-12
        wrapped = (X2 - X1 - shift + np.pi) % (2 * np.pi) - np.pi
        assert np.max(np.abs(wrapped)) < 1e-12


def test_symplecticity_of_steps(arnold_experiment):
    for i, tr in enumerate(arnold_experiment["embedding"].steps):
        assert symplectic_defect(tr, n_points=16, seed=i) <= 1e-9


def test_invariance_defect(arnold_experiment):
    model = arnold_experiment["model"]
    eps = arnold_experiment["eps"]
    emb = arnold_experiment["embedding"]
    rep = verify_invariance(emb, model.system(eps), 1.0, 4, 1e-11)
    assert rep.sup_defect <= 1e-7
    assert rep.mean_defect <= rep.sup_defect
    assert set(rep.per_time) == {0.25, 0.5, 1.0}


def test_invariance_growth_at_most_linear(chain_params):
    # one step at a larger eps leaves a residual perturbation well above
    # integrator noise, so the defect growth in t is measurable
    model = MechanicalModel(2)
    eps = 1e-3
    params = KamParameters(**{**chain_params.to_json(), "extra": {"eps": eps}})
    emb, _ = run_arnold((model.K_jet(OMEGA), model.P0_jet(OMEGA)), params,
                        jmax=1, force=True, run_past_floor=True)
    sups = []
    for tf in (1.0, 2.0, 4.0):
        rep = verify_invariance(emb, model.system(eps), tf, 3, 1e-11)
        sups.append(max(rep.sup_defect, 1e-16))
    slope = np.polyfit(np.log([1.0, 2.0, 4.0]), np.log(sups), 1)[0]
    assert slope <= 1.2


def test_invariance_linear_flow_exact():
    # eps = 0: the flow is exactly linear, defect at integrator tolerance
    model = MechanicalModel(2)
    from kamforge.arnold import TorusEmbedding

    emb = TorusEmbedding(omega=OMEGA, y_star=OMEGA.copy(), s_star=0.9,
                         steps=[])
    rep = verify_invariance(emb, model.system(0.0), 1.0, 4, 1e-11)
    assert rep.sup_defect < 1e-9


def test_compose_shifted_against_direct_evaluation():
    # regression: FFT differentiation must use integer harmonics
    from kamforge.arnold import _angle_grid, _compose_shifted
    from kamforge.spectral import jet_scalar_part, jet_zero

    grid_n, d, deg = 25, 2, 4
    X = _angle_grid(grid_n, d)
    n = X.shape[0]
    field = np.zeros((n,) + (deg + 1,) * d, dtype=complex)
    field[(slice(None),) + (0,) * d] = np.cos(X[:, 0]) + 0.5 * np.cos(
        X[:, 0] - X[:, 1])
    u = [jet_zero(d, deg, lead=(n,)) for _ in range(d)]
    u[0][(slice(None), 0, 0)] = 0.01 * np.sin(X[:, 1])
    u[1][(slice(None), 0, 0)] = -0.005 * np.cos(X[:, 0])
    u[0][(slice(None), 1, 0)] = 0.2  # action-derivative slot
    out = _compose_shifted(field, u, grid_n, d, deg)
    x1 = X[:, 0] + 0.01 * np.sin(X[:, 1])
    x2 = X[:, 1] - 0.005 * np.cos(X[:, 0])
    expected = np.cos(x1) + 0.5 * np.cos(x1 - x2)
    assert np.max(np.abs(jet_scalar_part(out, d).real - expected)) < 1e-11
    slot = out[:, 1, 0].real
    expected_slot = (-np.sin(x1) - 0.5 * np.sin(x1 - x2)) * 0.2
    # the slot sees one fewer Taylor order in the scalar shift
    assert np.max(np.abs(slot - expected_slot)) < 1e-9


def test_step_d3_runs_at_reduced_degree():
    # three degrees of freedom, jet degree 2: one full step with its checks
    om3 = np.array([1.0, 2 ** (1 / 3), 4 ** (1 / 3)])
    model = MechanicalModel(3)
    from kamforge.thresholds import diophantine_constant

    alpha = diophantine_constant(tuple(om3), 2.0, 30).alpha_hat
    state = IterationState(
        j=0, y=om3.copy(), s=1.0, sigma=1 / 20, r=1.0, kappa=0, lam=8.0,
        K=model.K_jet(om3, degree=2), P=model.P0_jet(om3, jet_degree=2),
        M=3.0, Kb=1.0, Tb=1.0, theta=0.0,
        diagnostics={"alpha": alpha, "tau": 2.0},
    )
    new, tr = arnold_step(state, 1e-5)
    assert tr is not None
    assert new.diagnostics["defect"] <= 1e-10
    assert np.max(np.abs(new.K.grad(np.zeros(3)).real - om3)) < 1e-10
    assert symplectic_defect(tr, n_points=4, seed=0) <= 1e-9
