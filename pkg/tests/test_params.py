from __future__ import annotations

import pytest

from kamforge.errors import InvalidParams
from kamforge.params import KamParameters


def _mk(**kw):
    base = dict(d=2, tau=1.0, alpha=0.5, r=1.0, s=1.0, sigma=0.05,
                omega=(0.6, 1.0), M=5.3, Kbound=1.0, Tbound=1.0)
    base.update(kw)
    return KamParameters(**base)


def test_valid_instance_and_derived_norms():
    p = _mk()
    assert p.eta == 1.0
    assert p.omega_sup == 1.0
    assert p.omega_l1 == pytest.approx(1.6)
    assert p.nu == 2.0


@pytest.mark.parametrize("kw", [
    {"d": 1},
    {"tau": 0.5},
    {"alpha": 0.0},
    {"r": 0.0},
    {"s": 1.5},
    {"sigma": 0.6},           # must stay below s/2
    {"omega": (1.0,)},        # wrong length
    {"M": -1.0},
    {"Kbound": 0.0},
    {"Tbound": 0.5},          # eta = T K >= 1 fails
])
def test_invalid_inputs_rejected(kw):
    with pytest.raises(InvalidParams):
        _mk(**kw)


def test_extra_round_trips_in_json():
    p = _mk(extra={"nu": 2.5, "E0": 1e-6})
    j = p.to_json()
    assert j["extra"] == {"E0": 1e-6, "nu": 2.5}
    assert KamParameters(**j).omega == p.omega


def test_require_extra_names_the_field():
    p = _mk()
    with pytest.raises(InvalidParams, match="s_hat"):
        p.require_extra("s_hat", "SalamonZehnder")
