"""Best classical (measure-and-prepare) fidelity for weak coherent time-bin qubits.

A classical device that receives n photons can estimate the qubit with
fidelity F_n = (n + 1) / (n + 2).  It may discard events, but must
reproduce the memory's efficiency: the probability that it emits anything
is fixed.  Maximising the average fidelity of the emitted states is a
linear program whose solution accepts the largest photon numbers first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import poisson

from .qubit import MEASURED_FIDELITIES, total_fidelity_value

TAIL = 1e-12
CONVENTIONS = ("eta", "click")


def estimation_fidelity(n) -> np.ndarray:
    """(n + 1) / (n + 2) for n >= 1 and a random guess, 1/2, for n = 0."""
    n = np.asarray(n, dtype=float)
    return np.where(n == 0, 0.5, (n + 1) / (n + 2))


def poisson_weights(mu: float, tail: float = TAIL) -> np.ndarray:
    """P(n) for n = 0..n_max, with n_max the first n whose upper tail is below ``tail``."""
    n_max = int(poisson.isf(tail, mu)) + 1
    while poisson.sf(n_max, mu) >= tail:
        n_max += 1
    return poisson.pmf(np.arange(n_max + 1), mu)


@dataclass(frozen=True)
class BenchmarkResult:
    mu: float
    eta: float
    fc: float
    strategy: np.ndarray = field(repr=False)
    accepted_probability: float = 0.0
    weights: np.ndarray = field(default=None, repr=False)

    @property
    def threshold(self) -> int:
        """Smallest photon number accepted with non-zero probability."""
        nz = np.flatnonzero(self.strategy > 0)
        return int(nz[0]) if nz.size else -1


def greedy_strategy(weights: np.ndarray, accept: float) -> np.ndarray:
    """Accept photon numbers from the top down until ``accept`` is reached."""
    q = np.zeros(len(weights))
    left = accept
    for n in range(len(weights) - 1, -1, -1):
        if weights[n] <= left:
            q[n] = 1.0
            left -= weights[n]
        else:
            q[n] = left / weights[n] if weights[n] > 0 else 0.0
            break
    return q


def strategy_fidelity(weights: np.ndarray, q: np.ndarray) -> float:
    f = estimation_fidelity(np.arange(len(weights)))
    num = math.fsum(weights * q * f)
    den = math.fsum(weights * q)
    return num / den


def classical_bound_distribution(weights: Sequence[float], accept: float) -> BenchmarkResult:
    """Bound for an arbitrary photon-number distribution ``weights``."""
    w = np.asarray(weights, dtype=float)
    if not 0 < accept <= 1 + 1e-12:
        raise ValueError("accepted probability must lie in (0, 1]")
    accept = min(accept, math.fsum(w))
    q = greedy_strategy(w, accept)
    fc = strategy_fidelity(w, q)
    return BenchmarkResult(float("nan"), accept, fc, q, math.fsum(w * q), w)


def classical_bound(mu: float, eta: float, convention: str = "eta") -> BenchmarkResult:
    """Classical fidelity bound for Poissonian input with mean ``mu``.

    With ``convention="eta"`` the classical device must emit with
    probability ``eta``; with ``"click"`` it must emit with probability
    1 - exp(-mu * eta), the chance that a lossy channel of transmission eta
    delivers at least one photon.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    if not 0 < eta <= 1:
        raise ValueError("eta must lie in (0, 1]")
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    w = poisson_weights(mu)
    accept = eta if convention == "eta" else -math.expm1(-mu * eta)
    accept = min(accept, math.fsum(w))
    q = greedy_strategy(w, accept)
    return BenchmarkResult(float(mu), float(eta), strategy_fidelity(w, q), q, math.fsum(w * q), w)


def fock_bound() -> float:
    """Single-photon input: the classical device always sees exactly one photon."""
    return classical_bound_distribution([0.0, 1.0], 1.0).fc


@dataclass(frozen=True)
class CrossingResult:
    mu_star: float
    always_quantum: bool
    table: list[dict[str, float]]
    mu1p: float
    alpha: float
    eta: float


def quantum_crossing(
    mu1p: float,
    alpha: float,
    eta: float,
    bracket: tuple[float, float] = (0.01, 10.0),
    tol: float = 1e-4,
    table_mu: Sequence[float] | None = None,
    convention: str = "eta",
) -> CrossingResult:
    """Photon number above which the fidelity model beats the classical bound.

    Bisection on F_T(mu) - F_C(mu, eta).  If the model is above the bound at
    both ends of ``bracket``, ``always_quantum`` is set and ``mu_star`` is
    the lower end.  The table compares model and measured fidelities with
    the bound at the measured photon numbers.
    """

    def gap(mu):
        return total_fidelity_value(mu, mu1p, alpha) - classical_bound(mu, eta, convention).fc

    lo, hi = bracket
    glo, ghi = gap(lo), gap(hi)
    always = False
    if glo > 0 and ghi > 0:
        mu_star, always = lo, True
    elif glo <= 0 and ghi <= 0:
        raise ValueError("no sign change of F_T - F_C in the bracket")
    else:
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if (gap(mid) > 0) == (ghi > 0):
                hi = mid
            else:
                lo = mid
        mu_star = 0.5 * (lo + hi)

    measured = {row[0]: row[5] for row in MEASURED_FIDELITIES}
    mus = table_mu if table_mu is not None else sorted(measured)
    table = []
    for mu in mus:
        fc = classical_bound(mu, eta, convention).fc
        ft = total_fidelity_value(mu, mu1p, alpha)
        row = {"mu_q": float(mu), "F_T_model": ft, "F_C": fc, "model_minus_bound": ft - fc}
        if mu in measured:
            row["F_T_measured"] = measured[mu]
            row["measured_minus_bound"] = measured[mu] - fc
        table.append(row)
    return CrossingResult(float(mu_star), always, table, mu1p, alpha, eta)


def fidelity_curves(mu_grid: Sequence[float], mu1p: float, alpha: float, eta: float) -> list[dict[str, float]]:
    """Model fidelity and classical bounds at memory efficiency ``eta`` and at unit efficiency."""
    rows = []
    for mu in mu_grid:
        rows.append(
            {
                "mu_q": float(mu),
                "F_T": total_fidelity_value(mu, mu1p, alpha),
                "F_C": classical_bound(mu, eta).fc,
                "F_C_eta1": classical_bound(mu, 1.0).fc,
                "F_fock": 2.0 / 3.0,
            }
        )
    return rows
