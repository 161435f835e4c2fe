"""Noise sources, spectral filtering and photon counting.

Noise is quoted as p_N, mean photons per trial in the echo window referred
to the memory output.  Three sources are modelled:

* fluorescence with spectral density ``rho`` (per MHz) that passes through the
  filter hole of width w, ``rho * w * (1 - t)``, where t = exp(-filter depth)
  is the transmission outside the hole;
* a broadband fluorescence floor ``broadband`` attenuated to ``broadband * t``
  by the filter;
* leaked control light ``leakage`` in the echo mode, reduced by the control
  extinction whenever the control frequency falls outside the hole.

Both control pulses contribute equally to the fluorescence; only the read
pulse overlaps the echo gate and contributes leakage.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from scipy.special import erf

FILTER_MODES = ("hole", "pit", "bypass")


@dataclass(frozen=True)
class DetectionChain:
    path_transmission: float = 0.13
    fiber_coupling: float = 0.60
    detector_efficiency: float = 0.60
    dark_rate: float = 10.0
    gate_window: float = 0.7
    spatial_extinction: float = 1e-5
    grating_attenuation: float = 1.0

    def __post_init__(self):
        for name in ("path_transmission", "fiber_coupling", "detector_efficiency", "spatial_extinction", "grating_attenuation"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.dark_rate < 0:
            raise ValueError("dark rate must be non-negative")
        if not self.gate_window > 0:
            raise ValueError("gate window must be positive")

    @property
    def transmission(self) -> float:
        """Memory output to registered click; fibre coupling is inside path_transmission."""
        return self.path_transmission * self.detector_efficiency

    @property
    def dark_per_gate(self) -> float:
        """Dark counts per trial in one gate (rate in Hz, gate in us)."""
        return self.dark_rate * self.gate_window * 1e-6


@dataclass(frozen=True)
class FilterConfig:
    mode: str = "hole"
    hole_width: float = 2.0
    control_extinction: float = 750.0
    signal_pass_loss: float = 0.1
    filter_depth: float = 7.0
    control_separation: float = 10.2
    pit_width: float = 14.0

    def __post_init__(self):
        if self.mode not in FILTER_MODES:
            raise ValueError(f"filter mode must be one of {FILTER_MODES}, got {self.mode!r}")
        if self.mode == "hole" and not self.hole_width > 0:
            raise ValueError("hole width must be positive")
        if self.control_extinction < 1:
            raise ValueError("control extinction must be at least 1")
        if not 0 <= self.signal_pass_loss < 1:
            raise ValueError("signal pass loss must lie in [0, 1)")
        if self.filter_depth < 0:
            raise ValueError("filter depth must be non-negative")

    @property
    def width(self) -> float:
        return self.pit_width if self.mode == "pit" else self.hole_width

    @property
    def passes_control(self) -> bool:
        if self.mode in ("pit", "bypass"):
            return True
        return self.hole_width / 2 >= self.control_separation

    @property
    def outside_transmission(self) -> float:
        return math.exp(-self.filter_depth)


def hole_filter(width: float, **kw) -> FilterConfig:
    return FilterConfig(mode="hole", hole_width=width, **kw)


def pit_filter(**kw) -> FilterConfig:
    return FilterConfig(mode="pit", **kw)


def bypassed_filter(**kw) -> FilterConfig:
    return FilterConfig(mode="bypass", **kw)


NOISE_PARAMS = ("rho", "broadband", "leakage")


@dataclass(frozen=True)
class NoiseModel:
    """Source strengths at the memory output for a pair of control pulses."""

    rho: float | None = None
    broadband: float | None = None
    leakage: float | None = None

    def __post_init__(self):
        for name in NOISE_PARAMS:
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def calibrated(self) -> bool:
        return all(getattr(self, n) is not None for n in NOISE_PARAMS)


@dataclass(frozen=True)
class NoiseBudget:
    fluorescence: float
    leakage: float
    dark: float

    @property
    def total(self) -> float:
        return self.fluorescence + self.leakage + self.dark

    def row(self) -> dict[str, float]:
        return {"fluorescence": self.fluorescence, "leakage": self.leakage, "dark": self.dark, "p_N": self.total}


def _design_row(flt: FilterConfig, chain: DetectionChain, n_control: int = 2) -> np.ndarray:
    """Coefficients of (rho, broadband, leakage) in p_N for one filter setting."""
    k = n_control / 2.0
    if flt.mode == "bypass":
        return np.array([0.0, k, 1.0])
    t = flt.outside_transmission * chain.grating_attenuation
    x = 1.0 if flt.passes_control else 1.0 / flt.control_extinction
    return np.array([k * flt.width * (1.0 - t), k * t, x])


def noise_budget(
    chain: DetectionChain,
    flt: FilterConfig,
    noise: NoiseModel,
    n_control: int = 2,
    read_pulse: bool = True,
) -> NoiseBudget:
    """Noise per trial in the echo window, referred to the memory output.

    ``n_control`` is the number of control pulses that fire (0, 1 or 2); the
    fluorescence scales with it.  Leakage comes from the read pulse only.
    Dark counts are divided by the chain transmission.
    """
    if not noise.calibrated:
        raise ValueError("noise model is uncalibrated; run calibrate_noise first")
    if n_control not in (0, 1, 2):
        raise ValueError("n_control must be 0, 1 or 2")
    c = _design_row(flt, chain, n_control)
    fl = c[0] * noise.rho + c[1] * noise.broadband
    lk = c[2] * noise.leakage if read_pulse and n_control > 0 else 0.0
    dark = chain.dark_per_gate / chain.transmission
    return NoiseBudget(float(fl), float(lk), float(dark))


# measured anchors: (filter, p_N, 1-sigma)
DEFAULT_ANCHORS: tuple[tuple[FilterConfig, float, float], ...] = (
    (FilterConfig(mode="hole", hole_width=2.0), 2.0e-3, 0.3e-3),
    (FilterConfig(mode="pit"), 2.3e-2, 0.6e-2),
    (FilterConfig(mode="bypass"), 0.23, 0.01),
)


def calibrate_noise(
    anchors: Sequence[tuple] = DEFAULT_ANCHORS,
    chain: DetectionChain | None = None,
    params: Sequence[str] = NOISE_PARAMS,
) -> NoiseModel:
    """Solve for the source strengths that reproduce measured p_N values.

    ``anchors`` holds (FilterConfig, p_N) or (FilterConfig, p_N, sigma)
    tuples.  Parameters not listed in ``params`` are held at 0.  With as
    many anchors as parameters the solution is exact; with more it is the
    weighted least-squares solution.
    """
    chain = chain or DetectionChain()
    params = tuple(params)
    bad = set(params) - set(NOISE_PARAMS)
    if bad:
        raise ValueError(f"unknown noise parameter(s) {sorted(bad)}")
    if len(anchors) < len(params):
        raise ValueError(f"{len(params)} parameters need at least {len(params)} anchors, got {len(anchors)}")
    cols = [NOISE_PARAMS.index(p) for p in params]
    dark = chain.dark_per_gate / chain.transmission
    A, y, w = [], [], []
    for a in anchors:
        flt, pn = a[0], float(a[1])
        sig = float(a[2]) if len(a) > 2 else 1.0
        A.append(_design_row(flt, chain)[cols] / sig)
        y.append((pn - dark) / sig)
    A = np.array(A)
    y = np.array(y)
    if len(params) == len(anchors):
        try:
            sol = np.linalg.solve(A, y)
        except np.linalg.LinAlgError as exc:
            raise ValueError("anchors do not determine the noise parameters") from exc
    else:
        sol, *_ = np.linalg.lstsq(A, y, rcond=None)
    if np.any(sol < 0):
        neg = [p for p, v in zip(params, sol) if v < 0]
        raise ValueError(f"infeasible anchors: negative source strength required for {neg}")
    values = {p: 0.0 for p in NOISE_PARAMS}
    values.update({p: float(v) for p, v in zip(params, sol)})
    return NoiseModel(**values)


def filter_signal_transmission(flt: FilterConfig, pulse_fwhm: float = 0.43) -> float:
    """Energy fraction of a Gaussian pulse that crosses the filter.

    The pulse has intensity FWHM ``pulse_fwhm`` (us); the hole transmits
    fully over its width and ``exp(-filter_depth)`` elsewhere.
    """
    if flt.mode == "bypass":
        return 1.0
    # spectral intensity of a transform-limited Gaussian: FWHM = 4 ln2 / (2 pi fwhm)
    df = 2 * math.log(2) / (math.pi * pulse_fwhm)
    sig = df / (2 * math.sqrt(2 * math.log(2)))
    inside = erf(flt.width / 2 / (math.sqrt(2) * sig))
    t = flt.outside_transmission
    return float(inside + (1 - inside) * t)


class WindowMeans(NamedTuple):
    echo: float
    noise: float

    @property
    def snr(self) -> float:
        return (self.echo - self.noise) / self.noise if self.noise > 0 else math.inf


def expected_counts(
    mu_in: float,
    eta_sw: float,
    chain: DetectionChain,
    p_n: float,
    capture: float = 1.0,
    p_n_includes_dark: bool = True,
) -> WindowMeans:
    """Mean clicks per trial in the echo and noise windows.

    ``eta_sw`` is the storage efficiency into the echo window, so the default
    ``capture`` is 1.  When ``p_n`` already includes back-referred dark
    counts (as measured values do) they are not added again.
    """
    if mu_in < 0:
        raise ValueError("mu_in must be non-negative")
    T = chain.transmission
    noise = p_n * T
    if not p_n_includes_dark:
        noise += chain.dark_per_gate
    return WindowMeans(mu_in * eta_sw * capture * T + noise, noise)


def mu_one(eta_sw: float, p_n: float, capture: float = 1.0) -> float:
    """Input photon number at which the echo equals the noise (SNR = 1)."""
    return p_n / (eta_sw * capture)


# ---------------------------------------------------------------------------
# Monte Carlo counting


@dataclass(frozen=True)
class CountHistogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    trials: int
    windows: dict[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        e = np.array(self.bin_edges, dtype=float)
        c = np.array(self.counts, dtype=np.int64)
        if e.ndim != 1 or len(e) != len(c) + 1 or np.any(np.diff(e) <= 0):
            raise ValueError("bin edges must be increasing with one more entry than counts")
        if np.any(c < 0):
            raise ValueError("counts must be non-negative")
        e.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "bin_edges", e)
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "windows", dict(self.windows))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def window_sum(self, name: str) -> int:
        lo, hi = self.windows[name]
        centers = 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])
        m = (centers >= lo) & (centers < hi)
        return int(self.counts[m].sum())

    def window_width(self, name: str) -> float:
        lo, hi = self.windows[name]
        return hi - lo

    def merge(self, other: "CountHistogram") -> "CountHistogram":
        if not np.array_equal(self.bin_edges, other.bin_edges) or self.windows != other.windows:
            raise ValueError("histograms with different binning cannot be merged")
        return CountHistogram(self.bin_edges, self.counts + other.counts, self.trials + other.trials, self.windows)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_start_us", "bin_end_us", "counts"])
            for a, b, c in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts):
                w.writerow([repr(float(a)), repr(float(b)), int(c)])

    @classmethod
    def from_csv(cls, path: str | Path, trials: int, windows: Mapping[str, tuple[float, float]] | None = None):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        edges = np.append(data[:, 0], data[-1, 1])
        return cls(edges, data[:, 2].astype(np.int64), trials, dict(windows or {}))


def _seed_words(seed) -> list[int]:
    """Flatten an integer or a nested tuple of integers into entropy words."""
    words = [int(seed)] if np.isscalar(seed) else [w for s in seed for w in _seed_words(s)]
    if any(w < 0 for w in words):
        raise ValueError("seeds must be non-negative integers")
    return words


def _one_block(means: np.ndarray, n: int, words: list[int], b: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([*words, b])))
    return rng.poisson(means * n)


def _block_counts(means: np.ndarray, trials: int, seed, block_trials: int, workers: int = 1) -> np.ndarray:
    n_blocks = (trials + block_trials - 1) // block_trials
    words = _seed_words(seed)
    sizes = [min(block_trials, trials - b * block_trials) for b in range(n_blocks)]
    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _one_block(means, sizes[b], words, b), range(n_blocks)))
    else:
        parts = [_one_block(means, sizes[b], words, b) for b in range(n_blocks)]
    total = np.zeros(len(means), dtype=np.int64)
    for part in parts:
        total += part
    return total


def simulate_counting(
    bin_edges: Sequence[float],
    bin_means: Sequence[float],
    trials: int,
    seed: int | Sequence[int],
    windows: Mapping[str, tuple[float, float]] | None = None,
    block_trials: int = 10_000,
    workers: int = 1,
) -> CountHistogram:
    """Draw a count histogram for ``trials`` repetitions.

    ``bin_means`` are mean clicks per trial per bin.  Trials are grouped in
    fixed blocks; block b draws from its own counter-based stream seeded by
    (seed, b), so the result does not depend on evaluation order.  ``seed``
    may be a tuple of integers to label independent sub-experiments.
    ``workers`` > 1 draws blocks on a thread pool with identical results.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    means = np.asarray(bin_means, dtype=float)
    if np.any(means < 0):
        raise ValueError("bin means must be non-negative")
    counts = _block_counts(means, int(trials), seed, int(block_trials), int(workers))
    return CountHistogram(np.asarray(bin_edges, float), counts, int(trials), dict(windows or {}))


def simulate_windows(means: WindowMeans, trials: int, seed, gate: float = 0.7, echo_time: float = 12.8, **kw) -> CountHistogram:
    """Two-bin histogram: the echo window and an equal noise window after it."""
    lo = echo_time - gate / 2
    edges = [lo, lo + gate, lo + 2 * gate]
    windows = {"echo": (edges[0], edges[1]), "noise": (edges[1], edges[2])}
    return simulate_counting(edges, [means.echo, means.noise], trials, seed, windows, **kw)


def time_histogram_means(
    means: WindowMeans,
    echo_time: float = 12.8,
    echo_fwhm: float = 0.43,
    record: tuple[float, float] = (8.0, 18.0),
    bin_width: float = 0.05,
    gate: float = 0.7,
) -> tuple[np.ndarray, np.ndarray, dict[str, tuple[float, float]]]:
    """Per-bin means for a time-resolved trace of the retrieved light.

    The echo is Gaussian with intensity FWHM ``echo_fwhm``, scaled so that the
    echo window holds exactly ``means.echo - means.noise``.  Noise is flat at
    ``means.noise`` per gate.
    """
    edges = np.arange(record[0], record[1] + bin_width / 2, bin_width)
    sig = echo_fwhm / (2 * math.sqrt(2 * math.log(2)))
    cdf = 0.5 * (1 + erf((edges - echo_time) / (math.sqrt(2) * sig)))
    shape = np.diff(cdf)
    w_echo = (echo_time - gate / 2, echo_time + gate / 2)
    w_noise = (w_echo[1] + gate, w_echo[1] + 2 * gate)
    centers = 0.5 * (edges[1:] + edges[:-1])
    in_echo = (centers >= w_echo[0]) & (centers < w_echo[1])
    signal = means.echo - means.noise
    bin_means = np.full(len(centers), means.noise * bin_width / gate)
    if shape[in_echo].sum() > 0:
        bin_means += signal * shape / shape[in_echo].sum()
    return edges, bin_means, {"echo": w_echo, "noise": w_noise}


class SNREstimate(NamedTuple):
    snr: float
    sigma: float
    infinite: bool = False


def snr_from_counts(S: float, N: float) -> SNREstimate:
    """(S - N) / N with Poisson errors on both sums."""
    if N <= 0:
        return SNREstimate(math.inf, math.inf, True)
    snr = (S - N) / N
    sigma = math.sqrt(S / N**2 + S**2 / N**3)
    return SNREstimate(snr, sigma, False)


def snr_from_histogram(h: CountHistogram, signal: str = "echo", noise: str = "noise") -> SNREstimate:
    if noise not in h.windows or signal not in h.windows:
        raise ValueError("histogram lacks echo or noise window")
    if abs(h.window_width(signal) - h.window_width(noise)) > 1e-9:
        raise ValueError("echo and noise windows must have matched widths")
    return snr_from_counts(h.window_sum(signal), h.window_sum(noise))


def filter_sweep(
    noise: NoiseModel,
    widths: Sequence[float],
    eta_sw: float,
    chain: DetectionChain | None = None,
    reference: FilterConfig | None = None,
    pulse_fwhm: float = 0.43,
    capture: float = 1.0,
) -> list[dict[str, float]]:
    """p_N and mu_1 versus hole width.

    The storage efficiency is taken as measured with the ``reference``
    filter; other widths rescale it by their relative signal transmission.
    """
    chain = chain or DetectionChain()
    reference = reference or FilterConfig()
    t_ref = filter_signal_transmission(reference, pulse_fwhm)
    rows = []
    for w in widths:
        flt = replace(reference, mode="hole", hole_width=float(w))
        pn = noise_budget(chain, flt, noise).total
        rel = filter_signal_transmission(flt, pulse_fwhm) / t_ref
        rows.append({"hole_width_MHz": float(w), "p_N": pn, "mu1": mu_one(eta_sw * rel, pn, capture)})
    return rows
