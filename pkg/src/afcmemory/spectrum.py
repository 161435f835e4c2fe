"""Hyperfine level scheme, optical pumping and comb profiles for Pr:Y2SiO5.

Frequencies are in MHz, durations in ms.  The comb centre (the signal
frequency) is at 0 MHz.  Every ion is labelled by the frequency of its
1/2g-3/2e transition, the *class frequency*; an ion whose class frequency is
``nu0`` absorbs on transition (g, e) at ``nu0 + transition_offsets[g, e]``.

Optical depth at probe frequency ``nu`` is

    d(nu) = bulk_depth * sum_{g,e} S[g, e] * p_g(nu - offset[g, e])

where ``S`` is the normalised relative-strength table and ``p_g`` the ground
state populations of the class at that frequency.  A thermal crystal has
``p_g = 1/3`` everywhere and therefore ``d = bulk_depth``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.signal import find_peaks

from .fitkit import FitError, levenberg_marquardt

# 1/2g-3/2g and 3/2g-5/2g splittings (MHz)
DEFAULT_GROUND_SPLITTINGS = (10.2, 17.3)
# 1/2e-3/2e and 3/2e-5/2e splittings (MHz)
DEFAULT_EXCITED_SPLITTINGS = (4.6, 4.8)
# Relative oscillator strengths of the nine transitions (rows 1/2g, 3/2g,
# 5/2g; columns 1/2e, 3/2e, 5/2e) for site 1, taken from published
# absorption measurements on this crystal.  Normalised on use.
LITERATURE_BRANCHING = (
    (0.55, 0.38, 0.07),
    (0.40, 0.60, 0.01),
    (0.05, 0.02, 0.93),
)

GROUND_LABELS = ("1/2g", "3/2g", "5/2g")
EXCITED_LABELS = ("1/2e", "3/2e", "5/2e")
REFERENCE_TRANSITION = (0, 1)

DEFAULT_WINDOW = 20.0
DEFAULT_SPACING = 0.005
DEFAULT_BULK_DEPTH = 7.0
MAX_SPACING = 0.010


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def sinkhorn(table, tol: float = 1e-13, max_iter: int = 10000) -> np.ndarray:
    """Scale a non-negative matrix so that rows and columns each sum to 1."""
    t = np.array(table, dtype=float)
    if t.shape != (3, 3):
        raise ValueError(f"branching table must be 3x3, got shape {t.shape}")
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError("branching table entries must be finite and non-negative")
    if np.any(t.sum(axis=1) == 0):
        raise ValueError("branching table has a row of zeros")
    if np.any(t.sum(axis=0) == 0):
        raise ValueError("branching table has a column of zeros")
    for _ in range(max_iter):
        t /= t.sum(axis=1, keepdims=True)
        t /= t.sum(axis=0, keepdims=True)
        if np.max(np.abs(t.sum(axis=1) - 1.0)) < tol:
            return t
    raise ValueError("branching table cannot be balanced to unit row and column sums")


@dataclass(frozen=True)
class HyperfineScheme:
    ground_splittings: tuple[float, float]
    excited_splittings: tuple[float, float]
    branching: np.ndarray = field(repr=False)

    def __post_init__(self):
        for s in (*self.ground_splittings, *self.excited_splittings):
            if not s > 0:
                raise ValueError(f"hyperfine splittings must be strictly positive, got {s}")
        object.__setattr__(self, "branching", _frozen(self.branching))

    @property
    def ground_energies(self) -> np.ndarray:
        a, b = self.ground_splittings
        return np.array([0.0, a, a + b])

    @property
    def excited_energies(self) -> np.ndarray:
        a, b = self.excited_splittings
        return np.array([0.0, a, a + b])

    @property
    def transition_offsets(self) -> np.ndarray:
        """Frequency of transition (g, e) relative to 1/2g-3/2e of the same ion."""
        eg, ee = self.ground_energies, self.excited_energies
        off = (ee[None, :] - eg[:, None]) - (ee[1] - eg[0])
        return off

    @property
    def decay_branching(self) -> np.ndarray:
        """Probability that excited state e decays to ground state g, indexed [g, e]."""
        return self.branching / self.branching.sum(axis=0, keepdims=True)

    @property
    def input_control_separation(self) -> float:
        """Signal (1/2g-3/2e) minus control (3/2g-3/2e) frequency of one ion."""
        off = self.transition_offsets
        return float(off[0, 1] - off[1, 1])


def build_level_scheme(
    ground_splittings: Sequence[float] = DEFAULT_GROUND_SPLITTINGS,
    excited_splittings: Sequence[float] = DEFAULT_EXCITED_SPLITTINGS,
    branching=LITERATURE_BRANCHING,
) -> HyperfineScheme:
    gs = tuple(float(x) for x in ground_splittings)
    es = tuple(float(x) for x in excited_splittings)
    if len(gs) != 2 or len(es) != 2:
        raise ValueError("expected two ground and two excited splittings")
    return HyperfineScheme(gs, es, sinkhorn(branching))


@dataclass(frozen=True)
class IonClass:
    class_offset: float
    resonant_transition: tuple[int, int]

    @property
    def label(self) -> str:
        g, e = self.resonant_transition
        return f"{GROUND_LABELS[g]}-{EXCITED_LABELS[e]}"


def enumerate_classes(scheme: HyperfineScheme) -> list[IonClass]:
    """The nine ion classes that absorb at the comb centre, one per transition."""
    off = scheme.transition_offsets
    return [IonClass(float(-off[g, e]), (g, e)) for g in range(3) for e in range(3)]


@dataclass(frozen=True)
class SpectralGrid:
    """Optical depth sampled on a uniform frequency axis.

    ``populations`` has shape (len(class_frequencies), 3) and is present only
    for grids produced by the pumping engine.
    """

    frequencies: np.ndarray
    optical_depth: np.ndarray
    class_frequencies: np.ndarray | None = None
    populations: np.ndarray | None = None
    bulk_depth: float | None = None

    def __post_init__(self):
        f = _frozen(self.frequencies)
        d = _frozen(self.optical_depth)
        if f.ndim != 1 or f.shape != d.shape or len(f) < 3:
            raise ValueError("frequencies and optical_depth must be 1-D arrays of equal length >= 3")
        steps = np.diff(f)
        h = steps.mean()
        if h <= 0 or np.max(np.abs(steps - h)) > 1e-6 * max(h, 1e-12) + 1e-12:
            raise ValueError("frequency grid must be uniformly increasing")
        if h > MAX_SPACING * (1 + 1e-9):
            raise ValueError(f"grid spacing {h * 1e3:.2f} kHz exceeds {MAX_SPACING * 1e3:.0f} kHz")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("optical depth must be finite and non-negative")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "optical_depth", d)
        if (self.populations is None) != (self.class_frequencies is None):
            raise ValueError("populations and class_frequencies must be given together")
        if self.populations is not None:
            p = _frozen(self.populations)
            c = _frozen(self.class_frequencies)
            if p.shape != (len(c), 3):
                raise ValueError("populations must have shape (n_classes, 3)")
            object.__setattr__(self, "populations", p)
            object.__setattr__(self, "class_frequencies", c)

    @property
    def spacing(self) -> float:
        return float((self.frequencies[-1] - self.frequencies[0]) / (len(self.frequencies) - 1))

    def depth_at(self, nu) -> np.ndarray:
        return np.interp(nu, self.frequencies, self.optical_depth)

    def mean_depth(self, lo: float, hi: float) -> float:
        m = (self.frequencies >= lo) & (self.frequencies <= hi)
        return float(self.optical_depth[m].mean())


# ---------------------------------------------------------------------------
# population model


def _class_axis(scheme: HyperfineScheme, frequencies: np.ndarray, h: float) -> np.ndarray:
    off = scheme.transition_offsets
    lo = np.round((frequencies[0] - off.max()) / h)
    hi = np.round((frequencies[-1] - off.min()) / h)
    return np.arange(lo, hi + 1) * h


def _shifts(scheme, class_frequencies, frequencies, h):
    # index into the class axis of the class absorbing at frequencies[0] on (g, e)
    off = scheme.transition_offsets
    base = (frequencies[0] - off - class_frequencies[0]) / h
    return np.round(base).astype(int)


def optical_depth_from_populations(
    scheme: HyperfineScheme,
    class_frequencies: np.ndarray,
    populations: np.ndarray,
    frequencies: np.ndarray,
    bulk_depth: float,
) -> np.ndarray:
    """Strength-weighted sum of all nine transitions over all classes.

    Linear in ``populations``.  Probe and class axes share the same spacing.
    """
    h = float(frequencies[1] - frequencies[0])
    start = _shifts(scheme, class_frequencies, frequencies, h)
    n = len(frequencies)
    if start.min() < 0 or start.max() + n > len(class_frequencies):
        raise ValueError("class axis does not cover the probe window")
    S = scheme.branching
    d = np.zeros(n)
    for g in range(3):
        for e in range(3):
            s = start[g, e]
            d += S[g, e] * populations[s : s + n, g]
    return bulk_depth * d


def thermal_grid(
    scheme: HyperfineScheme,
    window: float = DEFAULT_WINDOW,
    spacing: float = DEFAULT_SPACING,
    bulk_depth: float = DEFAULT_BULK_DEPTH,
) -> SpectralGrid:
    """Unpumped crystal: equal ground populations, flat depth ``bulk_depth``.

    ``window`` is the half-width of the probe axis around the comb centre.
    """
    if spacing > MAX_SPACING:
        raise ValueError(f"grid spacing must not exceed {MAX_SPACING} MHz")
    n = int(round(window / spacing))
    nu = np.arange(-n, n + 1) * spacing
    nu0 = _class_axis(scheme, nu, spacing)
    p = np.full((len(nu0), 3), 1.0 / 3.0)
    d = optical_depth_from_populations(scheme, nu0, p, nu, bulk_depth)
    return SpectralGrid(nu, d, nu0, p, float(bulk_depth))


@dataclass(frozen=True)
class PumpStep:
    """Laser band ``[center - sweep_width/2, center + sweep_width/2]``.

    ``center`` is expressed in the comb frame: the step addresses the ions
    whose class frequency lies under the band, through ``target`` = (g, e).
    ``linewidth`` is the FWHM of the spectral edge of the band.
    """

    center: float
    sweep_width: float
    duration: float
    target: tuple[int, int] = REFERENCE_TRANSITION
    strength: float = 1.0
    linewidth: float = 0.1

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("pump step duration must be positive")
        if self.sweep_width < 0:
            raise ValueError("pump step sweep width must be non-negative")
        if self.strength < 0:
            raise ValueError("pump strength must be non-negative")
        if not self.linewidth > 0:
            raise ValueError("pump linewidth must be positive")
        g, e = self.target
        if g not in (0, 1, 2) or e not in (0, 1, 2):
            raise ValueError(f"invalid target transition {self.target}")
        object.__setattr__(self, "target", (int(g), int(e)))


@dataclass(frozen=True)
class PumpSequence:
    steps: tuple[PumpStep, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __add__(self, other: "PumpSequence") -> "PumpSequence":
        return PumpSequence(self.steps + tuple(other.steps))


def _pump_once(scheme, nu0, p, step: PumpStep, rounds: int):
    off = scheme.transition_offsets
    S = scheme.branching
    B = scheme.decay_branching
    band_center = step.center + off[step.target]
    res = nu0[:, None, None] + off[None]
    outside = np.maximum(np.abs(res - band_center) - step.sweep_width / 2, 0.0)
    profile = np.exp(-4 * math.log(2) * outside**2 / step.linewidth**2)
    rate = step.strength * S[None] * profile
    active = rate.max(axis=(1, 2)) > 1e-14
    if not np.any(active):
        return p
    r = rate[active]
    # excitation probability per round, saturating at 1/2 per transition
    q = 0.5 * r / (1.0 + r.sum(axis=2, keepdims=True))
    M = np.zeros((len(r), 3, 3))
    for g in range(3):
        M[:, g, g] += 1.0 - q[:, g, :].sum(axis=1)
        for e in range(3):
            M[:, :, g] += q[:, g, e][:, None] * B[None, :, e]
    Mn = np.linalg.matrix_power(M, rounds)
    out = p.copy()
    out[active] = np.einsum("nij,nj->ni", Mn, p[active])
    return out


def simulate_pumping(
    grid: SpectralGrid,
    scheme: HyperfineScheme,
    sequence: PumpSequence | Iterable[PumpStep],
    rounds_per_ms: float = 4.0,
) -> SpectralGrid:
    """Apply a pump sequence as discrete excitation-decay rounds.

    Each step runs ``max(1, round(duration * rounds_per_ms))`` rounds.  In a
    round, an ion in ground state g is excited on (g, e) with a probability
    set by the step strength, the transition strength and the spectral
    profile of the band, then returns to ground state g' with the decay
    branching ratio of e.  Every class on the continuous class axis is
    evolved, so the nine discrete classes are included implicitly.
    """
    if not isinstance(sequence, PumpSequence):
        sequence = PumpSequence(tuple(sequence))
    if grid.populations is None:
        raise ValueError("grid carries no population data; start from thermal_grid()")
    if len(sequence) == 0:
        return grid
    h = grid.spacing
    nu0 = grid.class_frequencies
    off = scheme.transition_offsets
    for step in sequence:
        if h > step.linewidth / 4:
            raise ValueError(
                f"grid too coarse: spacing {h * 1e3:.2f} kHz does not resolve a {step.linewidth * 1e3:.0f} kHz pump linewidth"
            )
        band_center = step.center + off[step.target]
        reach = step.sweep_width / 2 + 3 * step.linewidth
        lo = nu0[0] + off[step.target]
        hi = nu0[-1] + off[step.target]
        if band_center + reach < lo or band_center - reach > hi:
            raise ValueError(f"sweep centred at {step.center} MHz lies outside the grid window")
    p = np.array(grid.populations)
    for step in sequence:
        rounds = max(1, int(round(step.duration * rounds_per_ms)))
        p = _pump_once(scheme, nu0, p, step, rounds)
    d = optical_depth_from_populations(scheme, nu0, p, grid.frequencies, grid.bulk_depth)
    return SpectralGrid(grid.frequencies, np.maximum(d, 0.0), nu0, p, grid.bulk_depth)


def memory_preparation_sequence(
    scheme: HyperfineScheme,
    delta: float = 0.2,
    bandwidth: float = 3.5,
    comb_repeats: int = 20,
    pit_width: float = 14.0,
    pit_strength: float = 200.0,
    burnback_width: float = 2.0,
    comb_strength: float = 1.0,
    comb_linewidth: float = 0.075,
) -> PumpSequence:
    """Pit, burn-back, clean, then a repeated comb burn with clean pulses.

    The pit is centred between the signal (0 MHz) and control frequencies so
    that both end up transparent.  The burn-back on 5/2g-5/2e repopulates
    1/2g near the centre; the clean step empties 3/2g there; the comb is
    carved by burning holes midway between the teeth.
    """
    sep = scheme.input_control_separation
    steps = [
        PumpStep(-sep / 2, pit_width, 100.0, (0, 1), pit_strength, 0.1),
        PumpStep(0.0, burnback_width, 50.0, (2, 2), 50.0, 0.5),
    ]
    clean = PumpStep(0.0, bandwidth, 50.0, (1, 1), 50.0, 0.1)
    steps.append(clean)
    holes = np.arange(-bandwidth / 2 + delta / 2, bandwidth / 2, delta)
    for _ in range(comb_repeats):
        for c in holes:
            steps.append(PumpStep(float(c), 0.0, 5.0, (0, 1), comb_strength, comb_linewidth))
        steps.append(PumpStep(0.0, bandwidth, 12.5, (1, 1), 50.0, 0.1))
    return PumpSequence(tuple(steps))


def filter_preparation_sequence(
    scheme: HyperfineScheme,
    hole_width: float = 2.0,
    strength: float = 200.0,
) -> PumpSequence:
    """Transparency window of ``hole_width`` around the signal frequency.

    Pumping on the signal transition piles population into 3/2g and 5/2g,
    so the control frequency of the same ions stays absorbing.
    """
    return PumpSequence((PumpStep(0.0, hole_width, 100.0, (0, 1), strength, 0.1),))


# ---------------------------------------------------------------------------
# analytic combs


@dataclass(frozen=True)
class CombSpec:
    delta: float = 0.2
    bandwidth: float = 3.6
    tooth_shape: str = "gaussian"
    d: float = 4.5
    d0: float = 0.75
    finesse: float = 4.7

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("comb period must be positive")
        if not self.finesse > 1:
            raise ValueError("finesse must exceed 1")
        if self.d < 0 or self.d0 < 0:
            raise ValueError("optical depths must be non-negative")
        if not self.bandwidth > 0:
            raise ValueError("comb bandwidth must be positive")
        if self.tooth_shape not in ("gaussian", "square"):
            raise ValueError(f"tooth shape must be 'gaussian' or 'square', got {self.tooth_shape!r}")

    @property
    def effective_depth(self) -> float:
        return self.d / self.finesse

    @property
    def tooth_width(self) -> float:
        return self.delta / self.finesse

    @property
    def n_teeth(self) -> int:
        return max(1, int(math.floor(self.bandwidth / self.delta + 0.5)))

    @property
    def tooth_centers(self) -> np.ndarray:
        n = self.n_teeth
        return (np.arange(n) - (n - 1) / 2) * self.delta


def comb_profile(spec: CombSpec, nu) -> np.ndarray:
    """d0 + d * sum of teeth, evaluated at ``nu``."""
    nu = np.asarray(nu, dtype=float)
    gw = spec.tooth_width
    out = np.full(nu.shape, spec.d0, dtype=float)
    if spec.d == 0:
        return out
    if spec.tooth_shape == "gaussian":
        for c in spec.tooth_centers:
            out += spec.d * np.exp(-4 * math.log(2) * (nu - c) ** 2 / gw**2)
    else:
        h = float(nu[1] - nu[0]) if nu.size > 1 else gw
        for c in spec.tooth_centers:
            # area-preserving edge samples
            out += spec.d * np.clip((gw / 2 - np.abs(nu - c)) / h + 0.5, 0.0, 1.0)
    return out


def build_comb_analytic(
    spec: CombSpec,
    window: float = DEFAULT_WINDOW,
    spacing: float = DEFAULT_SPACING,
    pit_width: float | None = None,
    bulk_depth: float = DEFAULT_BULK_DEPTH,
) -> SpectralGrid:
    """Ideal comb on a uniform grid of half-width ``window``.

    Teeth sit symmetrically about 0; their number is ``spec.n_teeth``.  Outside
    the comb the depth is ``d0``.  With ``pit_width`` set, samples outside the
    pit take ``bulk_depth`` instead.
    """
    if 2 * window < spec.bandwidth + 4 * spec.delta:
        raise ValueError("window must cover the comb bandwidth plus four periods")
    if spec.tooth_width < 4 * spacing:
        raise ValueError(
            f"grid spacing too coarse: {spacing * 1e3:.1f} kHz for {spec.tooth_width * 1e3:.1f} kHz teeth"
        )
    n = int(round(window / spacing))
    nu = np.arange(-n, n + 1) * spacing
    d = comb_profile(spec, nu)
    if pit_width is not None:
        d = np.where(np.abs(nu) > pit_width / 2, bulk_depth, d)
    return SpectralGrid(nu, d)


def _longest_regular_run(positions: np.ndarray, rel_tol: float = 0.2) -> np.ndarray:
    if len(positions) < 2:
        return positions
    gaps = np.diff(positions)
    ref = np.median(gaps)
    ok = np.abs(gaps - ref) <= rel_tol * ref
    best = (0, 0)
    start = None
    for i, good in enumerate(np.append(ok, False)):
        if good and start is None:
            start = i
        elif not good and start is not None:
            if i - start > best[1] - best[0]:
                best = (start, i)
            start = None
    return positions[best[0] : best[1] + 1]


def _half_width(nu, d, k, floor):
    half = (d[k] + floor) / 2
    lo = k
    while lo > 0 and d[lo] > half:
        lo -= 1
    hi = k
    while hi < len(d) - 1 and d[hi] > half:
        hi += 1
    left = np.interp(half, [d[lo], d[lo + 1]], [nu[lo], nu[lo + 1]])
    right = np.interp(half, [d[hi], d[hi - 1]], [nu[hi], nu[hi - 1]])
    return right - left


def measure_comb(grid: SpectralGrid, region: tuple[float, float] | None = None, min_teeth: int = 5) -> CombSpec:
    """Recover comb parameters from an optical-depth profile.

    The longest run of evenly spaced peaks is taken as the comb.  Starting
    from peak heights, floors and half-widths, a least-squares fit of
    ``d0 + d * sum(gaussian teeth)`` refines all parameters.  The reported
    bandwidth is ``n_teeth * delta``.
    """
    nu = grid.frequencies
    d = grid.optical_depth
    if region is not None:
        m = (nu >= region[0]) & (nu <= region[1])
        nu, d = nu[m], d[m]
    span = float(np.ptp(d)) if d.size else 0.0
    if span <= 1e-9 * max(1.0, float(np.max(d, initial=0.0))):
        raise ValueError("no periodic structure detected")
    peaks, _ = find_peaks(d, prominence=0.2 * span)
    if len(peaks) < min_teeth:
        raise ValueError("no periodic structure detected")
    pos = _longest_regular_run(nu[peaks])
    if len(pos) < min_teeth:
        raise ValueError("no periodic structure detected")
    idx = np.searchsorted(nu, pos)
    n = len(pos)
    k = np.arange(n)
    delta0, c0 = np.polyfit(k, pos, 1)
    floors = [d[a:b].min() for a, b in zip(idx[:-1], idx[1:])]
    d00 = float(np.median(floors))
    dd0 = float(np.median(d[idx]) - d00)
    mid = idx[n // 2]
    g0 = float(_half_width(nu, d, mid, d00))

    lo, hi = c0 - delta0 / 2, c0 + (n - 1) * delta0 + delta0 / 2
    m = (nu >= lo) & (nu <= hi)
    x, y = nu[m], d[m]

    def model(xx, d0, dd, gw, delta, c):
        centers = c + delta * k
        z = (xx[:, None] - centers[None, :]) / gw
        return d0 + dd * np.exp(-4 * math.log(2) * z**2).sum(axis=1)

    try:
        p, *_ = levenberg_marquardt(model, x, y, np.ones_like(y), [d00, dd0, g0, delta0, c0], max_iter=100)
        d0_fit, d_fit, gw_fit, delta_fit, _ = (float(v) for v in p)
    except FitError:
        d0_fit, d_fit, gw_fit, delta_fit = d00, dd0, g0, float(delta0)
    gw_fit = abs(gw_fit)
    finesse = delta_fit / gw_fit
    if not finesse > 1:
        raise ValueError("no periodic structure detected (teeth overlap)")
    return CombSpec(
        delta=delta_fit,
        bandwidth=n * delta_fit,
        tooth_shape="gaussian",
        d=max(d_fit, 0.0),
        d0=max(d0_fit, 0.0),
        finesse=finesse,
    )


def feature_width(grid: SpectralGrid, center: float = 0.0, search: float = 1.0) -> float:
    """FWHM of the absorbing feature peaking within ``search`` MHz of ``center``.

    The floor is the lowest depth within 4 MHz below the feature, which for
    a burn-back inside a pit is the pit floor.
    """
    nu, d = grid.frequencies, grid.optical_depth
    near = np.flatnonzero(np.abs(nu - center) <= search)
    k = int(near[np.argmax(d[near])])
    below = (nu >= nu[k] - 4.0) & (nu <= nu[k])
    floor = float(d[below].min())
    return float(_half_width(nu, d, k, floor))


# ---------------------------------------------------------------------------
# serialisation


def save_grid(path: str | Path, grid: SpectralGrid) -> None:
    """Write ``frequency_MHz,optical_depth`` CSV plus an ``.npz`` sidecar for populations."""
    path = Path(path)
    np.savetxt(
        path,
        np.column_stack([grid.frequencies, grid.optical_depth]),
        delimiter=",",
        header="frequency_MHz,optical_depth",
        comments="",
        fmt="%.17g",
    )
    side = _sidecar(path)
    if grid.populations is not None:
        np.savez(side, class_frequencies=grid.class_frequencies, populations=grid.populations, bulk_depth=grid.bulk_depth)
    elif side.exists():
        side.unlink()


def load_grid(path: str | Path) -> SpectralGrid:
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    side = _sidecar(path)
    if side.exists():
        with np.load(side) as z:
            return SpectralGrid(data[:, 0], data[:, 1], z["class_frequencies"], z["populations"], float(z["bulk_depth"]))
    return SpectralGrid(data[:, 0], data[:, 1])


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".populations.npz")
