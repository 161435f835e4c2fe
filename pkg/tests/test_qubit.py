import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from afcmemory.qubit import (
    DoubleWriteConfig,
    FidelityRecord,
    TimeBinQubit,
    fidelity_poles,
    fidelity_total,
    fit_alpha,
    fringe_scan,
    store_timebin,
    total_fidelity_value,
    visibility_model,
)

ETA = 0.028
PN = 2.0e-3


def test_qubit_guards():
    with pytest.raises(ValueError):
        TimeBinQubit(0.5, 0.5)
    with pytest.raises(ValueError):
        TimeBinQubit(mu_q=-1.0)
    with pytest.raises(ValueError):
        DoubleWriteConfig(alpha=0.5)
    with pytest.raises(ValueError):
        store_timebin(TimeBinQubit(bin_separation=1.0), DoubleWriteConfig(write_separation=1.2), PN, ETA)


def test_early_state_fills_side_bin_only():
    out = store_timebin(TimeBinQubit.early(mu_q=1.0), DoubleWriteConfig(), PN, ETA)
    ee, central, ll = out.signal
    assert ll == 0.0
    assert ee > 0 and central == pytest.approx(ee, rel=1e-12)


def test_balanced_constructive_is_four_times_side():
    q = TimeBinQubit(delta_alpha=30.0, mu_q=2.0)
    out = store_timebin(q, DoubleWriteConfig(delta_beta=30.0), PN, ETA)
    assert out.signal[1] == pytest.approx(4 * out.signal[2], rel=1e-12)


def test_balanced_destructive_leaves_noise():
    q = TimeBinQubit(delta_alpha=30.0, mu_q=2.0)
    out = store_timebin(q, DoubleWriteConfig(delta_beta=210.0), PN, ETA)
    assert out.central == pytest.approx(PN, abs=1e-15)


@given(
    theta=st.floats(0, math.pi / 2),
    da=st.floats(0, 360),
    db=st.floats(0, 360),
    mu=st.floats(0, 10),
    alpha=st.floats(1, 5),
)
def test_bin_energy_conservation(theta, da, db, mu, alpha):
    q = TimeBinQubit(math.cos(theta), math.sin(theta), da, mu_q=mu)
    out = store_timebin(q, DoubleWriteConfig(db, alpha=alpha), 0.0, ETA)
    # averaged over the write phase the central bin holds (c1^2 + c2^2) of a side-bin unit
    avg = np.mean([store_timebin(q, DoubleWriteConfig(b, alpha=alpha), 0.0, ETA).central for b in np.arange(0, 360, 45)])
    unit = ETA * mu / (2 * alpha)
    assert out.ee + out.ll == pytest.approx(unit, rel=1e-12, abs=1e-15)
    assert avg == pytest.approx(unit, rel=1e-9, abs=1e-15)
    assert out.central <= 2 * unit * (1 + 1e-12) + 1e-15


def test_fidelity_limits():
    assert fidelity_poles(0.11, 0.11) == pytest.approx(2 / 3)
    assert fidelity_poles(5.9, 0.11) == pytest.approx(0.982, abs=0.001)
    assert visibility_model(1.5, 0.11, 2.5) == pytest.approx(0.732, abs=0.001)
    assert visibility_model(0.0, 0.11, 2.5) == 0.0
    assert total_fidelity_value(1.5, 0.11, 2.5) == pytest.approx(0.889, abs=0.001)
    assert total_fidelity_value(5.9, 0.11, 2.5) == pytest.approx(0.966, abs=0.001)


@given(mu=st.floats(0, 50), mu1p=st.floats(1e-3, 1), alpha=st.floats(1, 10))
def test_fidelity_record_consistent(mu, mu1p, alpha):
    r = fidelity_total(mu, mu1p, alpha)
    assert r.f_total == pytest.approx(r.f_el / 3 + 2 * r.f_pm / 3, abs=1e-12)
    assert r.visibility == pytest.approx(2 * r.f_pm - 1, abs=1e-12)
    assert r.f_total == pytest.approx(total_fidelity_value(mu, mu1p, alpha), abs=1e-12)
    assert 0.5 <= r.f_total <= 1.0


def test_from_components():
    r = FidelityRecord.from_components(1.5, 0.935, 0.862)
    assert r.f_total == pytest.approx(0.935 / 3 + 2 * 0.862 / 3)
    assert r.visibility == pytest.approx(0.724)
    with pytest.raises(ValueError):
        FidelityRecord.from_components(1.0, 1.2, 0.8)


def test_uncertainty_propagation():
    r = fidelity_total(1.5, 0.11, 2.5, alpha_sigma=0.3)
    assert r.uncertainties["f_el"] == pytest.approx(0.0, abs=1e-9)
    assert r.uncertainties["f_total"] > 0
    assert fidelity_total(1.5, 0.11, 2.5).uncertainties == {}


@pytest.mark.parametrize("mu_q", [0.6, 1.5, 5.9])
def test_fringe_recovers_visibility(mu_q):
    dw = DoubleWriteConfig()
    scan = fringe_scan(TimeBinQubit(mu_q=mu_q), dw, ETA, 2_000_000, seed=(3, int(mu_q * 10)))
    expect = visibility_model(mu_q, dw.mu1p, dw.alpha)
    assert abs(scan.visibility - expect) <= 2 * scan.visibility_sigma


def test_fringe_csv(tmp_path):
    scan = fringe_scan(TimeBinQubit(), DoubleWriteConfig(), ETA, 100_000, seed=0)
    p = tmp_path / "fringe.csv"
    scan.to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "delta_beta_deg,counts,fit_value"
    assert len(lines) == 9


def test_alpha_fit():
    res = fit_alpha()
    assert res.params["alpha"] == pytest.approx(2.5, abs=0.3)
    assert res.uncertainties["alpha"] > 0
