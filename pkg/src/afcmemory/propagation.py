"""Linear propagation of optical envelopes through an absorption profile.

The crystal acts as a multiplicative filter H(nu) = exp(-d(nu)/2 + i phi(nu))
on the field spectrum, with phi fixed by causality (Kramers-Kronig).  Times
are in microseconds, frequencies in MHz, so a 1/Delta echo delay comes out
directly in microseconds.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spectrum import CombSpec, SpectralGrid, build_comb_analytic

MAX_DT = 0.02
_LN2 = math.log(2.0)


@dataclass(frozen=True)
class FieldEnvelope:
    samples: np.ndarray
    dt: float
    t0: float = 0.0
    carrier_offset: float = 0.0

    def __post_init__(self):
        a = np.array(self.samples, dtype=complex)
        if a.ndim != 1 or a.size < 2:
            raise ValueError("field samples must be a 1-D array with at least two points")
        if not np.all(np.isfinite(a)):
            raise ValueError("field samples must be finite")
        if not 0 < self.dt <= MAX_DT * (1 + 1e-12):
            raise ValueError(f"dt must lie in (0, {MAX_DT}] us, got {self.dt}")
        a.setflags(write=False)
        object.__setattr__(self, "samples", a)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.samples))

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    @property
    def energy(self) -> float:
        return float(np.sum(self.intensity) * self.dt)

    @property
    def duration(self) -> float:
        return self.dt * len(self.samples)

    def energy_between(self, start: float, stop: float) -> float:
        t = self.times
        m = (t >= start) & (t < stop)
        return float(np.sum(self.intensity[m]) * self.dt)

    def scaled(self, factor: complex) -> "FieldEnvelope":
        return FieldEnvelope(self.samples * factor, self.dt, self.t0, self.carrier_offset)

    def __add__(self, other: "FieldEnvelope") -> "FieldEnvelope":
        if (other.dt, other.t0, other.carrier_offset, len(other.samples)) != (
            self.dt,
            self.t0,
            self.carrier_offset,
            len(self.samples),
        ):
            raise ValueError("fields must share time axis and carrier to be added")
        return FieldEnvelope(self.samples + other.samples, self.dt, self.t0, self.carrier_offset)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time_us", "re", "im"])
            for t, a in zip(self.times, self.samples):
                w.writerow([repr(float(t)), repr(float(a.real)), repr(float(a.imag))])

    @classmethod
    def from_csv(cls, path: str | Path, carrier_offset: float = 0.0) -> "FieldEnvelope":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        t = data[:, 0]
        dt = float((t[-1] - t[0]) / (len(t) - 1))
        return cls(data[:, 1] + 1j * data[:, 2], dt, float(t[0]), carrier_offset)


def gaussian_pulse(
    fwhm: float,
    t_peak: float,
    duration: float,
    dt: float = 0.005,
    energy: float = 1.0,
    carrier_offset: float = 0.0,
) -> FieldEnvelope:
    """Gaussian pulse whose *intensity* has full width ``fwhm``."""
    n = int(round(duration / dt))
    t = dt * np.arange(n)
    a = np.exp(-2 * _LN2 * (t - t_peak) ** 2 / fwhm**2)
    a = a * math.sqrt(energy / (np.sum(a**2) * dt))
    return FieldEnvelope(a.astype(complex), dt, 0.0, carrier_offset)


@dataclass(frozen=True)
class SpectralResponse:
    frequencies: np.ndarray
    log_amplitude: np.ndarray
    phase: np.ndarray

    @property
    def transfer(self) -> np.ndarray:
        return np.exp(self.log_amplitude + 1j * self.phase)

    def at(self, nu) -> np.ndarray:
        # amplitude and phase interpolated separately; clamped beyond the grid
        la = np.interp(nu, self.frequencies, self.log_amplitude)
        ph = np.interp(nu, self.frequencies, self.phase)
        return np.exp(la + 1j * ph)


def hilbert_phase(log_amplitude: np.ndarray, pad_factor: int = 4) -> np.ndarray:
    """Minimum-phase partner of ``log_amplitude`` sampled on a uniform axis.

    The series is padded to ``pad_factor`` times its length with its edge
    values, folded onto positive quefrencies and transformed back; the
    imaginary part is the causal phase.
    """
    x = np.asarray(log_amplitude, dtype=float)
    n = len(x)
    m = pad_factor * n
    ext = np.empty(m)
    ext[:n] = x
    half = (m - n) // 2
    ext[n : n + half] = x[-1]
    ext[n + half :] = x[0]
    c = np.fft.ifft(ext)
    w = np.zeros(m)
    w[0] = 1.0
    w[1 : m // 2] = 2.0
    w[m // 2] = 1.0
    return np.fft.fft(c * w)[:n].imag


def kramers_kronig(grid: SpectralGrid, edge_fraction: float = 0.02, edge_tol: float = 0.01) -> SpectralResponse:
    """Causal transfer function of a crystal with profile ``grid``.

    |H| = exp(-d/2) exactly.  The outer ``edge_fraction`` of the window on
    each side must be flat to ``edge_tol`` of the profile's full range,
    otherwise the window is too narrow for a faithful transform.
    """
    d = grid.optical_depth
    k = max(2, int(edge_fraction * len(d)))
    span = float(np.ptp(d))
    if span > 0:
        worst = max(np.ptp(d[:k]), np.ptp(d[-k:]))
        if worst > edge_tol * span:
            raise ValueError(
                "grid window too narrow: optical depth still varies at the window edges"
            )
    la = -0.5 * np.asarray(d, dtype=float)
    phi = hilbert_phase(la) if span > 0 else np.zeros_like(la)
    return SpectralResponse(grid.frequencies, la, phi)


def propagate(
    field_in: FieldEnvelope,
    grid: SpectralGrid | SpectralResponse,
    alias_fraction: float = 0.01,
    band_tol: float = 1e-6,
) -> FieldEnvelope:
    """Pass ``field_in`` through the crystal described by ``grid``.

    The record is zero-padded so that its frequency step is no coarser than
    the grid spacing; the returned field has the input's time axis.
    """
    resp = grid if isinstance(grid, SpectralResponse) else kramers_kronig(grid)
    a = field_in.samples
    n = len(a)
    h = float(resp.frequencies[1] - resp.frequencies[0])
    n_pad = max(n, int(math.ceil(1.0 / (h * field_in.dt))))
    spec = np.fft.fft(a, n_pad)
    f = np.fft.fftfreq(n_pad, field_in.dt) + field_in.carrier_offset
    power = np.abs(spec) ** 2
    total = power.sum()
    if total == 0:
        return FieldEnvelope(np.zeros(n, complex), field_in.dt, field_in.t0, field_in.carrier_offset)
    outside = (f < resp.frequencies[0]) | (f > resp.frequencies[-1])
    if power[outside].sum() > band_tol * total:
        raise ValueError("field bandwidth does not fit inside the grid window")
    out = np.fft.ifft(spec * resp.at(f))
    tail = np.sum(np.abs(out[int(0.95 * n_pad) :]) ** 2)
    if tail > alias_fraction * np.sum(np.abs(a) ** 2):
        raise ValueError("aliasing detected: more than 1% of the energy reaches the end of the time record")
    return FieldEnvelope(out[:n], field_in.dt, field_in.t0, field_in.carrier_offset)


def afc_efficiency_analytic(spec: CombSpec) -> float:
    """Forward echo efficiency of an ideal comb.

    Gaussian teeth: dt^2 e^-dt e^(-7/F^2) e^-d0; square teeth replace the
    dephasing factor with sinc^2(pi/F).  ``dt`` is the effective depth d/F.
    """
    dt = spec.effective_depth
    base = dt**2 * math.exp(-dt) * math.exp(-spec.d0)
    if spec.tooth_shape == "gaussian":
        return base * math.exp(-7.0 / spec.finesse**2)
    x = math.pi / spec.finesse
    return base * (math.sin(x) / x) ** 2


@dataclass(frozen=True)
class EchoReport:
    transmitted_energy_fraction: float
    echo_energy_fraction: float
    echo_window_fraction: float
    capture_fraction: float
    echo_peak_time: float
    echo_delay: float
    window_used: tuple[float, float]
    residual_energy_fraction: float = 0.0

    def row(self) -> dict[str, float]:
        return {
            "transmitted_fraction": self.transmitted_energy_fraction,
            "eta_afc": self.echo_energy_fraction,
            "eta_afc_window": self.echo_window_fraction,
            "capture_fraction": self.capture_fraction,
            "echo_peak_time_us": self.echo_peak_time,
            "echo_delay_us": self.echo_delay,
            "window_start_us": self.window_used[0],
            "window_end_us": self.window_used[1],
        }


def _peak_time(t, y):
    k = int(np.argmax(y))
    if 0 < k < len(y) - 1:
        a, b, c = y[k - 1], y[k], y[k + 1]
        den = a - 2 * b + c
        if den != 0:
            return float(t[k] + 0.5 * (a - c) / den * (t[1] - t[0]))
    return float(t[k])


def extract_echo(
    field_out: FieldEnvelope,
    input_ref: FieldEnvelope,
    expected_echo_time: float,
    window_width: float = 0.7,
    input_threshold: float = 1e-3,
) -> EchoReport:
    """Energy budget of the first echo relative to the input pulse.

    ``expected_echo_time`` is the delay after the input peak (1/Delta).  The
    full echo support is that delay +/- half a delay; the detection window
    of ``window_width`` is centred on the echo peak found inside it.  Energy
    after the full support (higher echo orders) is reported as residual.
    """
    t = field_out.times
    e_in = input_ref.energy
    if e_in <= 0:
        raise ValueError("reference input carries no energy")
    t_in = _peak_time(input_ref.times, input_ref.intensity)
    if not expected_echo_time > 0 or t_in + expected_echo_time > t[-1]:
        raise ValueError("expected echo time lies outside the record")
    supp = input_ref.times[input_ref.intensity >= input_threshold * input_ref.intensity.max()]
    in_lo, in_hi = float(supp[0]), float(supp[-1])

    lo = t_in + expected_echo_time / 2
    hi = t_in + 1.5 * expected_echo_time
    zero = field_out.energy == 0.0
    if zero:
        peak = t_in + expected_echo_time
    else:
        m = (t >= lo) & (t < hi)
        peak = _peak_time(t[m], field_out.intensity[m])
    w = (peak - window_width / 2, peak + window_width / 2)
    if w[0] < in_hi and w[1] > in_lo:
        raise ValueError("window overlaps input pulse")
    if zero:
        return EchoReport(0.0, 0.0, 0.0, 0.0, peak, expected_echo_time, w, 0.0)

    transmitted = field_out.energy_between(t[0], lo) / e_in
    full = field_out.energy_between(lo, hi) / e_in
    win = field_out.energy_between(*w) / e_in
    residual = field_out.energy_between(hi, t[-1] + field_out.dt) / e_in
    return EchoReport(
        transmitted_energy_fraction=transmitted,
        echo_energy_fraction=full,
        echo_window_fraction=win,
        capture_fraction=win / full if full > 0 else 0.0,
        echo_peak_time=peak,
        echo_delay=peak - t_in,
        window_used=w,
        residual_energy_fraction=residual,
    )


def simulate_echo(
    spec: CombSpec,
    input_fwhm: float = 0.43,
    dt: float = 0.005,
    window_width: float = 0.7,
    pit_width: float | None = None,
    grid_window: float = 20.0,
    grid_spacing: float = 0.005,
) -> EchoReport:
    """Build an analytic comb, send a Gaussian pulse through it, score the echo.

    The record is 4/Delta long with the input peak at four pulse widths.
    """
    grid = build_comb_analytic(spec, window=grid_window, spacing=grid_spacing, pit_width=pit_width)
    delay = 1.0 / spec.delta
    t_peak = 4 * input_fwhm
    pulse = gaussian_pulse(input_fwhm, t_peak, 4 * delay, dt)
    out = propagate(pulse, grid)
    return extract_echo(out, pulse, delay, window_width)
