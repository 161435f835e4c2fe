import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from afcmemory import detection
from afcmemory.detection import (
    DEFAULT_ANCHORS,
    CountHistogram,
    DetectionChain,
    FilterConfig,
    NoiseModel,
    calibrate_noise,
    expected_counts,
    mu_one,
    noise_budget,
    simulate_counting,
    simulate_windows,
    snr_from_counts,
    snr_from_histogram,
)


@pytest.fixture(scope="module")
def chain():
    return DetectionChain()


@pytest.fixture(scope="module")
def noise(chain):
    return calibrate_noise(DEFAULT_ANCHORS, chain)


# chain and filter ---------------------------------------------------------------


def test_chain_transmission_and_guards():
    c = DetectionChain()
    assert c.transmission == pytest.approx(0.13 * 0.60)
    assert c.dark_per_gate == pytest.approx(10 * 0.7e-6)
    with pytest.raises(ValueError):
        DetectionChain(path_transmission=1.2)
    with pytest.raises(ValueError):
        DetectionChain(dark_rate=-1.0)


def test_filter_guards():
    with pytest.raises(ValueError):
        FilterConfig(hole_width=0.0)
    with pytest.raises(ValueError):
        FilterConfig(control_extinction=0.5)
    with pytest.raises(ValueError):
        FilterConfig(mode="notch")
    assert FilterConfig(mode="bypass", hole_width=0.0).passes_control
    assert not FilterConfig(hole_width=2.0).passes_control
    assert FilterConfig(hole_width=24.0).passes_control


# noise calibration ------------------------------------------------------------


@pytest.mark.parametrize("k", range(3))
def test_anchor_reproduction(chain, noise, k):
    flt, p_n, sigma = DEFAULT_ANCHORS[k]
    got = noise_budget(chain, flt, noise).total
    assert got == pytest.approx(p_n, rel=1e-9)
    assert abs(got - p_n) <= sigma


def test_single_anchor_one_parameter(chain):
    flt = FilterConfig(mode="bypass")
    m = calibrate_noise([(flt, 0.1)], chain, params=("leakage",))
    assert noise_budget(chain, flt, m).total == pytest.approx(0.1, rel=1e-12)
    assert m.rho == 0.0 and m.broadband == 0.0


def test_infeasible_anchors(chain):
    # more noise with the filter than without it
    anchors = [(FilterConfig(), 0.3, 0.01), (FilterConfig(mode="pit"), 0.02, 0.01), (FilterConfig(mode="bypass"), 0.01, 0.01)]
    with pytest.raises(ValueError, match="infeasible anchors"):
        calibrate_noise(anchors, chain)


def test_overdetermined_is_weighted_least_squares(chain, noise):
    anchors = list(DEFAULT_ANCHORS) + [(FilterConfig(hole_width=4.0), noise_budget(chain, FilterConfig(hole_width=4.0), noise).total, 1e-4)]
    m = calibrate_noise(anchors, chain)
    for name in detection.NOISE_PARAMS:
        assert getattr(m, name) == pytest.approx(getattr(noise, name), rel=1e-8)


def test_uncalibrated_model_rejected(chain):
    with pytest.raises(ValueError, match="uncalibrated"):
        noise_budget(chain, FilterConfig(), NoiseModel())


def test_control_pulses_contribute_equally(chain, noise):
    two = noise_budget(chain, FilterConfig(), noise, n_control=2)
    one = noise_budget(chain, FilterConfig(), noise, n_control=1)
    none = noise_budget(chain, FilterConfig(), noise, n_control=0)
    assert one.fluorescence == 0.5 * two.fluorescence
    assert none.fluorescence == 0.0
    assert two.dark == one.dark == none.dark


def test_filter_sweep_monotone(chain, noise):
    rows = detection.filter_sweep(noise, np.linspace(0.25, 24.0, 97), 0.028, chain)
    pn = np.array([r["p_N"] for r in rows])
    assert np.all(np.diff(pn) >= 0)
    # control light passes once the hole reaches it
    steps = np.diff(pn)
    k = int(np.argmax(steps))
    assert rows[k]["hole_width_MHz"] < 2 * FilterConfig().control_separation <= rows[k + 1]["hole_width_MHz"]
    assert steps[k] > 10 * np.median(steps)


def test_filter_signal_transmission_limits():
    assert detection.filter_signal_transmission(FilterConfig(mode="bypass")) == 1.0
    narrow = detection.filter_signal_transmission(FilterConfig(hole_width=0.1))
    wide = detection.filter_signal_transmission(FilterConfig(hole_width=20.0))
    assert narrow < wide <= 1.0
    assert wide == pytest.approx(1.0, abs=1e-12)


# expected counts and SNR ----------------------------------------------------------


def test_snr_operating_point(chain):
    m = expected_counts(1.15, 0.028, chain, 2.0e-3)
    assert m.snr == pytest.approx(16, abs=3)
    assert mu_one(0.028, 2.0e-3) == pytest.approx(0.07, abs=0.01)


def test_no_input_no_signal(chain):
    m = expected_counts(0.0, 0.028, chain, 2.0e-3)
    assert m.echo == m.noise
    assert m.snr == 0.0


@given(mu=st.floats(0.01, 10), eta=st.floats(0.001, 0.5), pn=st.floats(1e-4, 0.3))
def test_snr_at_mu_one_is_one(mu, eta, pn):
    c = DetectionChain()
    mu1 = mu_one(eta, pn)
    assert expected_counts(mu1, eta, c, pn).snr == pytest.approx(1.0, rel=1e-12)
    assert expected_counts(mu, eta, c, pn).snr == pytest.approx(mu / mu1, rel=1e-12)


def test_snr_from_counts_contract():
    est = snr_from_counts(1630, 100)
    assert est.snr == pytest.approx(15.3)
    assert est.sigma == pytest.approx(math.sqrt(1630 / 100**2 + 1630**2 / 100**3))
    assert snr_from_counts(250, 250).snr == 0.0
    inf = snr_from_counts(10, 0)
    assert inf.infinite and math.isinf(inf.snr)


def test_mismatched_windows_rejected():
    h = CountHistogram([0, 1, 3], [5, 5], 10, {"echo": (0, 1), "noise": (1, 3)})
    with pytest.raises(ValueError, match="matched"):
        snr_from_histogram(h)


# Monte Carlo -------------------------------------------------------------------


def test_poisson_total_oracle():
    h = simulate_counting([0, 1], [2e-3], 500_000, seed=11)
    assert abs(h.counts[0] - 1000) <= 3 * math.sqrt(1000)


def test_zero_mean_all_zero():
    h = simulate_counting([0, 1, 2, 3], [0, 0, 0], 50_000, seed=5)
    assert h.total == 0


def test_same_seed_same_histogram():
    a = simulate_counting(np.linspace(0, 1, 21), np.full(20, 1e-3), 123_457, seed=(4, 2))
    b = simulate_counting(np.linspace(0, 1, 21), np.full(20, 1e-3), 123_457, seed=(4, 2))
    c = simulate_counting(np.linspace(0, 1, 21), np.full(20, 1e-3), 123_457, seed=(4, 3))
    assert np.array_equal(a.counts, b.counts)
    assert not np.array_equal(a.counts, c.counts)


def test_independent_of_worker_count():
    args = (np.linspace(0, 1, 11), np.full(10, 3e-3), 250_001, (9, 1))
    serial = simulate_counting(*args)
    threaded = simulate_counting(*args, workers=4)
    assert np.array_equal(serial.counts, threaded.counts)


@given(
    means=st.lists(st.floats(0, 0.05), min_size=1, max_size=6),
    trials=st.integers(1, 30_000),
    seed=st.integers(0, 2**32),
)
def test_histogram_invariants(means, trials, seed):
    edges = np.arange(len(means) + 1, dtype=float)
    h = simulate_counting(edges, means, trials, seed, {"w": (0.0, float(len(means)))})
    assert np.all(h.counts >= 0)
    assert h.window_sum("w") <= h.total


def test_operating_point_monte_carlo(chain):
    means = expected_counts(1.15, 0.028, chain, 2.0e-3)
    est = snr_from_histogram(simulate_windows(means, 700_000, seed=1))
    assert abs(est.snr - 16.3) <= 2 * est.sigma


def test_window_means_consistent_over_seeds(chain):
    means = expected_counts(1.15, 0.028, chain, 2.0e-3)
    trials = 100_000
    inside = 0
    for seed in range(100):
        h = simulate_windows(means, trials, seed)
        ok = True
        for name, mu in (("echo", means.echo), ("noise", means.noise)):
            expect = mu * trials
            ok &= abs(h.window_sum(name) - expect) < 4 * math.sqrt(expect)
        inside += ok
    assert inside >= 99


def test_histogram_merge_and_csv(tmp_path):
    a = simulate_counting([0, 1, 2], [0.01, 0.02], 1000, 1, {"echo": (0, 1)})
    b = simulate_counting([0, 1, 2], [0.01, 0.02], 1000, 2, {"echo": (0, 1)})
    m = a.merge(b)
    assert m.trials == 2000 and np.array_equal(m.counts, a.counts + b.counts)
    p = tmp_path / "h.csv"
    m.to_csv(p)
    assert p.read_text().splitlines()[0] == "bin_start_us,bin_end_us,counts"
    back = CountHistogram.from_csv(p, 2000, {"echo": (0, 1)})
    assert np.array_equal(back.counts, m.counts) and np.array_equal(back.bin_edges, m.bin_edges)


def test_counting_guards():
    with pytest.raises(ValueError):
        simulate_counting([0, 1], [-0.1], 10, 0)
    with pytest.raises(ValueError):
        simulate_counting([0, 1], [0.1], 0, 0)
    with pytest.raises(ValueError):
        simulate_counting([0, 1], [0.1], 10, -3)


def test_time_histogram_echo_window_holds_signal(chain):
    means = expected_counts(1.15, 0.028, chain, 2.0e-3)
    edges, bm, win = detection.time_histogram_means(means)
    h = CountHistogram(edges, np.zeros(len(bm), dtype=int), 1, win)
    centers = 0.5 * (edges[1:] + edges[:-1])
    lo, hi = win["echo"]
    m = (centers >= lo) & (centers < hi)
    assert bm[m].sum() == pytest.approx(means.echo, rel=1e-9)
    lo, hi = win["noise"]
    m = (centers >= lo) & (centers < hi)
    assert bm[m].sum() == pytest.approx(means.noise, rel=0.02)
    assert h.window_width("echo") == pytest.approx(h.window_width("noise"), rel=1e-12)
