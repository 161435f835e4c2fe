"""Time-bin qubit storage, double-write interference and the fidelity model.

A qubit c1|e> + c2 e^{i dalpha}|l> is written twice, the second write
delayed by the bin separation and phase-shifted by dbeta.  The output then
has three bins: ee, the overlapping el + le, and ll.  With the full echo
signal S = eta_sw * mu_q, the ee and ll bins carry S c1^2 / (2 alpha) and
S c2^2 / (2 alpha), and the central bin carries
S |c1 e^{i dbeta} + c2 e^{i dalpha}|^2 / (2 alpha).  For a balanced qubit at
maximal interference that is S/alpha, four times the ll signal.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .detection import DetectionChain, simulate_counting
from .fitkit import FitResult, fit


@dataclass(frozen=True)
class TimeBinQubit:
    c1: float = 1 / math.sqrt(2)
    c2: float = 1 / math.sqrt(2)
    delta_alpha: float = 0.0
    bin_separation: float = 1.0
    pulse_fwhm: float = 0.26
    mu_q: float = 1.0

    def __post_init__(self):
        if abs(self.c1**2 + self.c2**2 - 1.0) > 1e-9:
            raise ValueError("qubit amplitudes must satisfy c1^2 + c2^2 = 1")
        if self.mu_q < 0:
            raise ValueError("photons per qubit must be non-negative")
        if not self.bin_separation > 0:
            raise ValueError("bin separation must be positive")

    @classmethod
    def early(cls, **kw) -> "TimeBinQubit":
        return cls(1.0, 0.0, **kw)

    @classmethod
    def late(cls, **kw) -> "TimeBinQubit":
        return cls(0.0, 1.0, **kw)


@dataclass(frozen=True)
class DoubleWriteConfig:
    delta_beta: float = 0.0
    write_separation: float = 1.0
    alpha: float = 2.5
    mu1p: float = 0.11

    def __post_init__(self):
        if self.alpha < 1:
            raise ValueError("alpha must be at least 1")
        if not self.mu1p > 0:
            raise ValueError("mu1p must be positive")


@dataclass(frozen=True)
class OutputBins:
    """Mean photons per trial in each output bin at the memory output."""

    ee: float
    central: float
    ll: float
    noise: float

    @property
    def signal(self) -> tuple[float, float, float]:
        return (self.ee - self.noise, self.central - self.noise, self.ll - self.noise)


def store_timebin(q: TimeBinQubit, dw: DoubleWriteConfig, p_n: float, eta_sw: float) -> OutputBins:
    if abs(q.bin_separation - dw.write_separation) > 1e-12:
        raise ValueError("write separation must equal the qubit bin separation")
    pref = eta_sw * q.mu_q / (2 * dw.alpha)
    b, a = math.radians(dw.delta_beta), math.radians(q.delta_alpha)
    amp = q.c1 * complex(math.cos(b), math.sin(b)) + q.c2 * complex(math.cos(a), math.sin(a))
    return OutputBins(
        ee=pref * q.c1**2 + p_n,
        central=pref * abs(amp) ** 2 + p_n,
        ll=pref * q.c2**2 + p_n,
        noise=p_n,
    )


# ---------------------------------------------------------------------------
# fidelity model


def fidelity_poles(mu_q, mu1p):
    """Fraction of clicks in the correct bin for a pole state: (SNR+1)/(SNR+2)."""
    mu_q = np.asarray(mu_q, dtype=float)
    out = (mu_q + mu1p) / (mu_q + 2 * mu1p)
    return float(out) if out.ndim == 0 else out


def visibility_model(mu_q, mu1p, alpha):
    mu_q = np.asarray(mu_q, dtype=float)
    out = mu_q / (mu_q + 2 * alpha * mu1p)
    return float(out) if out.ndim == 0 else out


def fidelity_equator(mu_q, mu1p, alpha):
    v = visibility_model(mu_q, mu1p, alpha)
    return 0.5 + 0.5 * v


def total_fidelity_value(mu_q, mu1p, alpha):
    """One third pole fidelity plus two thirds equator fidelity."""
    mu_q = np.asarray(mu_q, dtype=float)
    out = (mu_q + mu1p) / (mu_q + 2 * mu1p) / 3 + (1 + mu_q / (mu_q + 2 * alpha * mu1p)) / 3
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FidelityRecord:
    mu_q: float
    f_el: float
    f_pm: float
    f_total: float
    visibility: float
    uncertainties: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("f_el", "f_pm", "f_total", "visibility"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")

    @classmethod
    def from_components(cls, mu_q: float, f_el: float, f_pm: float, **kw) -> "FidelityRecord":
        return cls(mu_q, f_el, f_pm, f_el / 3 + 2 * f_pm / 3, 2 * f_pm - 1, **kw)


def fidelity_total(mu_q: float, mu1p: float, alpha: float, mu1p_sigma: float = 0.0, alpha_sigma: float = 0.0) -> FidelityRecord:
    """Model fidelities at ``mu_q``; uncertainties by linear propagation."""
    if mu_q < 0 or not mu1p > 0 or alpha < 1:
        raise ValueError("need mu_q >= 0, mu1p > 0 and alpha >= 1")
    f_el = fidelity_poles(mu_q, mu1p)
    v = visibility_model(mu_q, mu1p, alpha)
    f_pm = 0.5 + 0.5 * v
    rec_vals = {"f_el": f_el, "f_pm": f_pm, "f_total": f_el / 3 + 2 * f_pm / 3, "visibility": v}

    def vals(m, a):
        fe = fidelity_poles(mu_q, m)
        vv = visibility_model(mu_q, m, a)
        return np.array([fe, 0.5 + 0.5 * vv, fe / 3 + (1 + vv) / 3, vv])

    unc = {}
    if mu1p_sigma or alpha_sigma:
        hm = 1e-6 * mu1p
        ha = 1e-6 * alpha
        dm = (vals(mu1p + hm, alpha) - vals(mu1p - hm, alpha)) / (2 * hm)
        da = (vals(mu1p, alpha + ha) - vals(mu1p, alpha - ha)) / (2 * ha)
        sig = np.sqrt((dm * mu1p_sigma) ** 2 + (da * alpha_sigma) ** 2)
        unc = dict(zip(("f_el", "f_pm", "f_total", "visibility"), map(float, sig)))
    return FidelityRecord(float(mu_q), uncertainties=unc, **rec_vals)


# measured fidelities: mu_q, F_el, F_pm, F_T and their 1-sigma errors, F_C
MEASURED_FIDELITIES = (
    # mu_q, F_el, s_el, F_pm, s_pm, F_T, s_T, F_C
    (5.9, 0.979, 0.015, 0.972, 0.017, 0.974, 0.012, 0.930),
    (3.2, 0.969, 0.022, 0.933, 0.012, 0.945, 0.011, 0.901),
    (1.5, 0.935, 0.029, 0.862, 0.016, 0.886, 0.014, 0.862),
    (1.1, 0.933, 0.031, 0.858, 0.015, 0.883, 0.014, 0.844),
    (0.6, 0.849, 0.042, 0.729, 0.013, 0.769, 0.016, 0.810),
)


def measured_table() -> dict[str, np.ndarray]:
    a = np.array(MEASURED_FIDELITIES)
    keys = ("mu_q", "F_el", "F_el_sigma", "F_pm", "F_pm_sigma", "F_T", "F_T_sigma", "F_C")
    return {k: a[:, i] for i, k in enumerate(keys)}


def fit_alpha(mu1p: float = 0.11, absolute_sigma: bool = True) -> FitResult:
    """Fit alpha to the measured total fidelities with mu1p held fixed."""
    t = measured_table()
    return fit(t["mu_q"], t["F_T"], t["F_T_sigma"], "fidelity_model", {"alpha": 2.0}, {"mu1p": mu1p}, absolute_sigma)


# ---------------------------------------------------------------------------
# fringe scans


@dataclass(frozen=True)
class FringeScan:
    delta_beta: np.ndarray
    counts: np.ndarray
    fit: FitResult
    trials: int

    @property
    def visibility(self) -> float:
        return self.fit.params["V"]

    @property
    def visibility_sigma(self) -> float:
        return self.fit.uncertainties["V"]

    def rows(self) -> list[dict[str, float]]:
        fitted = self.fit.predict(self.delta_beta)
        return [
            {"delta_beta_deg": float(b), "counts": int(c), "fit_value": float(f)}
            for b, c, f in zip(self.delta_beta, self.counts, fitted)
        ]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, ["delta_beta_deg", "counts", "fit_value"])
            w.writeheader()
            for r in self.rows():
                w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})


DEFAULT_PHASES = tuple(range(0, 360, 45))


def fringe_scan(
    q: TimeBinQubit,
    dw: DoubleWriteConfig,
    eta_sw: float,
    trials: int,
    seed,
    chain: DetectionChain | None = None,
    phases: Sequence[float] = DEFAULT_PHASES,
    p_n: float | None = None,
) -> FringeScan:
    """Central-bin counts versus double-write phase, with a sinusoid fit.

    The noise per bin defaults to eta_sw * mu1p, the level at which the poles
    measurement has unit SNR for mu_q = mu1p.  Each phase setting uses its
    own substream (seed, index).
    """
    chain = chain or DetectionChain()
    p_n = eta_sw * dw.mu1p if p_n is None else p_n
    phases = np.asarray(phases, dtype=float)
    counts = []
    for i, b in enumerate(phases):
        out = store_timebin(q, DoubleWriteConfig(float(b), dw.write_separation, dw.alpha, dw.mu1p), p_n, eta_sw)
        h = simulate_counting([0.0, 1.0], [out.central * chain.transmission], trials, (seed, i))
        counts.append(int(h.counts[0]))
    counts = np.array(counts)
    sigma = np.sqrt(np.maximum(counts, 1.0))
    res = fit(phases, counts, sigma, "sinusoid")
    return FringeScan(phases, counts, res, trials)
