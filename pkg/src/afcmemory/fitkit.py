"""Weighted least-squares fitting for the quantities extracted from memory data.

Four model families are supported:

``linear``          y = slope * x + intercept          (SNR versus input photon number)
``gaussian_decay``  y = y0 * exp(-(pi*gamma*x)**2 / (2 ln 2))   (SNR versus spin storage time)
``sinusoid``        y = A * (1 + V cos(x - phi)) + B   (fringes versus phase in degrees)
``fidelity_model``  total fidelity versus photons per qubit, parameters alpha and mu1p

The linear model is solved in closed form.  The others use a damped
Gauss-Newton (Levenberg) iteration with a central-difference Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

MODEL_KINDS = ("linear", "gaussian_decay", "sinusoid", "fidelity_model")

_LN2 = math.log(2.0)


def gaussian_decay(x, y0, gamma):
    return y0 * np.exp(-((np.pi * gamma * np.asarray(x, dtype=float)) ** 2) / (2 * _LN2))


def sinusoid(x, A, V, phi, B=0.0):
    """Fringe with one period per 360 degrees; ``x`` and ``phi`` in degrees."""
    return A * (1.0 + V * np.cos(np.deg2rad(np.asarray(x, dtype=float) - phi))) + B


def linear(x, slope, intercept):
    return slope * np.asarray(x, dtype=float) + intercept


def _fidelity_model(x, alpha, mu1p):
    from .qubit import total_fidelity_value

    return total_fidelity_value(np.asarray(x, dtype=float), mu1p, alpha)


_MODELS: dict[str, tuple[Callable, tuple[str, ...], dict[str, float]]] = {
    "linear": (linear, ("slope", "intercept"), {}),
    "gaussian_decay": (gaussian_decay, ("y0", "gamma"), {}),
    "sinusoid": (sinusoid, ("A", "V", "phi", "B"), {"B": 0.0}),
    "fidelity_model": (_fidelity_model, ("alpha", "mu1p"), {}),
}


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class FitResult:
    model_kind: str
    params: dict[str, float]
    uncertainties: dict[str, float]
    residual_norm: float
    converged: bool
    iterations: int = 0
    chi2: float = 0.0
    dof: int = 0
    covariance: np.ndarray | None = field(default=None, repr=False)
    free: tuple[str, ...] = ()
    message: str = ""

    def predict(self, x):
        func, names, _ = _MODELS[self.model_kind]
        return func(x, *[self.params[n] for n in names])

    def row(self) -> dict[str, float]:
        out = {}
        for name, value in self.params.items():
            out[name] = value
            out[f"{name}_sigma"] = self.uncertainties.get(name, 0.0)
        return out


# ---------------------------------------------------------------------------
# finite differences


def _steps(p, order=2):
    # step balancing truncation against rounding for a stencil of this order
    return np.finfo(float).eps ** (1.0 / (order + 1)) * np.maximum(np.abs(p), 1e-3)


def jacobian(func: Callable, x, p, method: str = "central") -> np.ndarray:
    """Jacobian of ``func(x, *p)`` with respect to ``p``.

    ``method`` is ``"central"`` (3-point, used by the fitter) or
    ``"richardson"`` (5-point stencil, used as an accuracy reference).
    """
    p = np.asarray(p, dtype=float)
    h = _steps(p, 4 if method == "richardson" else 2)
    cols = []
    for j in range(len(p)):
        e = np.zeros_like(p)
        e[j] = h[j]
        if method == "central":
            col = (func(x, *(p + e)) - func(x, *(p - e))) / (2 * h[j])
        elif method == "richardson":
            col = (
                -func(x, *(p + 2 * e))
                + 8 * func(x, *(p + e))
                - 8 * func(x, *(p - e))
                + func(x, *(p - 2 * e))
            ) / (12 * h[j])
        elif method == "forward":
            col = (func(x, *(p + e)) - func(x, *p)) / h[j]
        else:
            raise ValueError(f"unknown difference method {method!r}")
        cols.append(np.asarray(col, dtype=float))
    return np.stack(cols, axis=1)


def _gradient_cosine(J, r):
    # largest cosine between the residual and any Jacobian column
    rn = np.linalg.norm(r)
    if rn == 0.0:
        return 0.0
    cn = np.linalg.norm(J, axis=0)
    cn = np.where(cn == 0.0, 1.0, cn)
    return float(np.max(np.abs(J.T @ r) / (cn * rn)))


def levenberg_marquardt(
    func: Callable,
    x,
    y,
    sigma,
    p0: Sequence[float],
    max_iter: int = 200,
    gtol: float = 1e-10,
    xtol: float = 1e-14,
):
    """Minimise sum(((y - func(x, *p)) / sigma)**2).

    Returns ``(p, covariance, chi2, iterations, converged, message)``.  The
    first trial step is undamped Gauss-Newton; damping is switched on (and
    adapted by factors of 10) only when a step fails to lower chi2.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    p = np.array(p0, dtype=float)

    def resid(q):
        return (y - func(x, *q)) / sigma

    r = resid(p)
    chi2 = float(r @ r)
    lam = 0.0
    it = 0
    converged = False
    message = "maximum iterations reached"
    method = "central"

    def jac(q):
        return jacobian(func, x, q, method) / sigma[:, None]

    J = jac(p)
    while it < max_iter:
        if _gradient_cosine(J, r) <= gtol:
            converged = True
            message = "gradient tolerance reached"
            break
        A = J.T @ J
        g = J.T @ r
        improved = False
        while lam < 1e16:
            M = A + lam * np.diag(np.diag(A))
            try:
                step = np.linalg.solve(M, g)
            except np.linalg.LinAlgError as exc:
                raise FitError("singular normal matrix") from exc
            trial = p + step
            r_new = resid(trial)
            chi2_new = float(r_new @ r_new)
            # allow rounding-level ties so the final Gauss-Newton polish can proceed
            if np.isfinite(chi2_new) and chi2_new <= chi2 * (1 + 1e-14):
                improved = True
                break
            lam = 1e-3 if lam == 0.0 else lam * 10.0
        small = improved and np.all(np.abs(step) <= xtol * (np.abs(p) + xtol))
        if improved:
            it += 1
            p, r, chi2 = trial, r_new, chi2_new
            lam = lam / 10.0 if lam > 1e-12 else 0.0
        if not improved or small:
            # the 3-point Jacobian has hit its rounding floor; finish with the 5-point stencil
            if method == "central":
                method = "richardson"
                lam = 0.0
                J = jac(p)
                continue
            converged = _gradient_cosine(jac(p), r) <= gtol
            message = "step tolerance reached" if improved else "no further decrease of chi2 possible"
            break
        J = jac(p)
    else:
        converged = _gradient_cosine(J, r) <= gtol

    A = J.T @ J
    if np.linalg.cond(A) > 1e14:
        raise FitError("singular normal matrix")
    cov = np.linalg.inv(A)
    return p, cov, chi2, it, converged, message


# ---------------------------------------------------------------------------
# public entry point


def _initial_guess(kind, x, y, sigma, fixed):
    w = 1.0 / sigma**2
    if kind == "gaussian_decay":
        pos = y > 0
        if pos.sum() >= 2:
            X = np.vstack([np.ones(pos.sum()), x[pos] ** 2]).T
            coef, *_ = np.linalg.lstsq(X * np.sqrt(w[pos])[:, None], np.log(y[pos]) * np.sqrt(w[pos]), rcond=None)
            y0 = float(np.exp(coef[0]))
            k = max(-coef[1], 1e-12)
            gamma = math.sqrt(2 * _LN2 * k) / math.pi
        else:
            y0, gamma = float(np.max(y)), 1.0 / max(np.ptp(x), 1e-9)
        return {"y0": y0, "gamma": gamma}
    if kind == "sinusoid":
        B = fixed.get("B", 0.0)
        rad = np.deg2rad(x)
        X = np.vstack([np.ones_like(rad), np.cos(rad), np.sin(rad)]).T
        coef, *_ = np.linalg.lstsq(X * np.sqrt(w)[:, None], (y - B) * np.sqrt(w), rcond=None)
        A = float(coef[0]) if coef[0] != 0 else 1.0
        amp = math.hypot(coef[1], coef[2])
        phi = math.degrees(math.atan2(coef[2], coef[1]))
        return {"A": A, "V": amp / A, "phi": phi, "B": B}
    if kind == "fidelity_model":
        return {"alpha": 1.0, "mu1p": 0.1}
    return {}


def _linear_fit(x, y, sigma, fixed):
    w = 1.0 / sigma**2
    if "slope" in fixed and "intercept" in fixed:
        raise ValueError("linear fit with every parameter fixed")
    if "intercept" in fixed:
        b = fixed["intercept"]
        sxx = np.sum(w * x * x)
        slope = float(np.sum(w * x * (y - b)) / sxx)
        cov = np.array([[1.0 / sxx]])
        params = {"slope": slope, "intercept": float(b)}
        free = ("slope",)
    elif "slope" in fixed:
        a = fixed["slope"]
        sw = np.sum(w)
        b = float(np.sum(w * (y - a * x)) / sw)
        cov = np.array([[1.0 / sw]])
        params = {"slope": float(a), "intercept": b}
        free = ("intercept",)
    else:
        N = np.array([[np.sum(w * x * x), np.sum(w * x)], [np.sum(w * x), np.sum(w)]])
        rhs = np.array([np.sum(w * x * y), np.sum(w * y)])
        if np.linalg.cond(N) > 1e14:
            raise FitError("singular normal matrix")
        slope, b = np.linalg.solve(N, rhs)
        cov = np.linalg.inv(N)
        params = {"slope": float(slope), "intercept": float(b)}
        free = ("slope", "intercept")
    r = (y - linear(x, params["slope"], params["intercept"])) / sigma
    return params, free, cov, float(r @ r)


def fit(
    x,
    y,
    sigma,
    model_kind: str,
    initial_guess: Mapping[str, float] | None = None,
    fixed: Mapping[str, float] | None = None,
    absolute_sigma: bool = True,
    max_iter: int = 200,
) -> FitResult:
    """Fit ``model_kind`` to data points ``(x, y)`` with 1-sigma errors ``sigma``.

    ``fixed`` pins parameters to given values.  For ``sinusoid`` the offset
    ``B`` is fixed at 0 unless supplied, because ``A`` and ``B`` are otherwise
    degenerate.  With ``absolute_sigma=False`` the covariance is rescaled by
    the reduced chi-square.
    """
    if model_kind not in _MODELS:
        raise ValueError(f"unknown model kind {model_kind!r}; expected one of {MODEL_KINDS}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), y.shape).astype(float)
    if x.shape != y.shape:
        raise ValueError("x and y must have the same shape")
    if np.any(sigma <= 0):
        raise ValueError("sigma must be strictly positive")

    func, names, default_fixed = _MODELS[model_kind]
    fixed = {**default_fixed, **dict(fixed or {})}
    unknown = set(fixed) - set(names)
    if unknown:
        raise ValueError(f"cannot fix unknown parameter(s) {sorted(unknown)}")
    free = tuple(n for n in names if n not in fixed)
    if len(x) < len(free) + 2:
        raise ValueError(f"need at least {len(free) + 2} points for {len(free)} free parameters, got {len(x)}")

    if model_kind == "linear":
        params, free, cov, chi2 = _linear_fit(x, y, sigma, fixed)
        iterations, converged, message = 0, True, "closed form"
    else:
        guess = _initial_guess(model_kind, x, y, sigma, fixed)
        guess.update(initial_guess or {})
        missing = [n for n in free if n not in guess]
        if missing:
            raise ValueError(f"initial guess required for {missing}")

        def reduced(xx, *q):
            kw = dict(fixed)
            kw.update(zip(free, q))
            return func(xx, *[kw[n] for n in names])

        p, cov, chi2, iterations, converged, message = levenberg_marquardt(
            reduced, x, y, sigma, [guess[n] for n in free], max_iter=max_iter
        )
        params = dict(fixed)
        params.update({n: float(v) for n, v in zip(free, p)})
        params = {n: float(params[n]) for n in names}

    dof = len(x) - len(free)
    if not absolute_sigma and dof > 0:
        cov = cov * (chi2 / dof)
    unc = {n: 0.0 for n in names}
    unc.update({n: float(math.sqrt(max(cov[i, i], 0.0))) for i, n in enumerate(free)})
    return FitResult(
        model_kind=model_kind,
        params=params,
        uncertainties=unc,
        residual_norm=float(math.sqrt(chi2)),
        converged=bool(converged),
        iterations=int(iterations),
        chi2=float(chi2),
        dof=int(dof),
        covariance=cov,
        free=free,
        message=message,
    )
