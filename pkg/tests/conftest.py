from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kamforge.mechanical import GOLDEN_OMEGA, MechanicalModel, mech_norms
from kamforge.params import KamParameters
from kamforge.thresholds import diophantine_constant


@pytest.fixture(scope="session")
def golden_alpha():
    return diophantine_constant(GOLDEN_OMEGA, 1.0, 10**5).alpha_hat


@pytest.fixture(scope="session")
def chain_params(golden_alpha):
    M = mech_norms(2, 1.0).M
    return KamParameters(
        d=2, tau=1.0, alpha=golden_alpha, r=1.0, s=1.0, sigma=1.0 / 20.0,
        omega=GOLDEN_OMEGA, M=M, Kbound=1.0, Tbound=1.0,
    )


@pytest.fixture(scope="session")
def arnold_experiment(golden_alpha):
    """The shared quadratic-convergence run: d=2 chain, eps=1e-5, 3 steps."""
    from dataclasses import replace

    from kamforge.arnold import run_arnold

    eps = 1e-5
    model = MechanicalModel(2)
    omega = np.array(GOLDEN_OMEGA)
    M = mech_norms(2, 1.0).M
    params = KamParameters(
        d=2, tau=1.0, alpha=golden_alpha, r=1.0, s=1.0, sigma=1.0 / 20.0,
        omega=GOLDEN_OMEGA, M=M, Kbound=1.0, Tbound=1.0, extra={"eps": eps},
    )
    emb, log = run_arnold((model.K_jet(omega), model.P0_jet(omega)),
                          params, jmax=3, force=True, run_past_floor=True)
    return {"model": model, "eps": eps, "embedding": emb, "log": log,
            "params": params}
