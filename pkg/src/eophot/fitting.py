"""Weighted least-squares fits for fringes, dips and generic forward models.

Each fit seeds a coarse grid over the nonlinear parameters (solving the
linear ones exactly at every node) and refines the best node with
Levenberg-Marquardt.
"""

from __future__ import annotations

import inspect
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

__all__ = ["FitResult", "fit_squared_sinusoid", "fit_dip", "fit_model", "fit_poisson"]


@dataclass
class FitResult:
    kind: str
    params: dict
    errors: dict
    visibility: float
    visibility_err: float
    residual_norm: float
    converged: bool = True
    message: str = ""
    covariance: np.ndarray | None = field(default=None, repr=False)
    model: object = field(default=None, repr=False, compare=False)

    def predict(self, xs):
        """Fitted curve evaluated at ``xs``."""
        return self.model(np.asarray(xs, dtype=float), *self.params.values())

    def as_dict(self) -> dict:
        out = {"kind": self.kind, "visibility": self.visibility, "visibility_err": self.visibility_err,
               "residual_norm": self.residual_norm, "converged": self.converged, "message": self.message}
        for k, v in self.params.items():
            out[k] = v
            out[k + "_err"] = self.errors[k]
        return out


def _prepare(xs, ys, weights, min_points):
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d arrays of equal length")
    if x.size < min_points:
        raise ValueError(f"need at least {min_points} points, got {x.size}")
    if weights is None:
        w = np.ones_like(y)
        absolute = False
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != y.shape or np.any(w < 0):
            raise ValueError("weights must be non-negative, one per point")
        absolute = True
    return x, y, w, absolute


def _linear_grid_solve(basis, y, w):
    """Weighted LS for ``y ~ c0*basis + c1`` at every grid node; ``basis`` is (..., n)."""
    sw = w
    s11 = (sw * basis * basis).sum(-1)
    s1 = (sw * basis).sum(-1)
    s0 = sw.sum()
    sy1 = (sw * basis * y).sum(-1)
    sy = (sw * y).sum()
    det = s11 * s0 - s1 * s1
    with np.errstate(divide="ignore", invalid="ignore"):
        c0 = np.where(det > 0, (sy1 * s0 - s1 * sy) / det, 0.0)
        c1 = np.where(det > 0, (s11 * sy - s1 * sy1) / det, sy / s0)
    resid = ((sw * (c0[..., None] * basis + c1[..., None] - y) ** 2)).sum(-1)
    return c0, c1, resid


def _covariance(res, absolute: bool, n_points: int):
    J = res.jac
    jtj = J.T @ J
    cov = np.linalg.pinv(jtj, rcond=1e-12)
    if not absolute:
        dof = max(n_points - J.shape[1], 1)
        cov = cov * (2 * res.cost) / dof
    return cov


def _refine(fun, p0, x_scale="jac", bounds=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if bounds is None:
            return least_squares(fun, p0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                 x_scale=x_scale, max_nfev=20000)
        return least_squares(fun, p0, method="trf", bounds=bounds, xtol=1e-15, ftol=1e-15, gtol=1e-15,
                             x_scale=x_scale, max_nfev=20000)


def fit_squared_sinusoid(xs, ys, weights=None, n_periods: int = 240, n_phases: int = 72, p0=None) -> FitResult:
    """Fit ``y = A sin^2(pi x / period + phase) + B``.

    ``weights`` are inverse variances; when given, parameter errors use them
    as absolute, otherwise they are scaled by the residual variance.
    Visibility is ``A / (A + 2B)``, i.e. (max - min) / (max + min).
    A starting point ``p0 = (A, B, period, phase)`` skips the grid search.
    """
    x, y, w, absolute = _prepare(xs, ys, weights, 5)
    span = np.ptp(x)
    dx = np.min(np.diff(np.unique(x))) if np.unique(x).size > 1 else 1.0
    if span <= 0:
        raise ValueError("xs must span a non-zero range")
    if p0 is None:
        periods = np.geomspace(max(4 * dx, span / 20), 2 * span, n_periods)
        phases = np.linspace(0, np.pi, n_phases, endpoint=False)
        arg = np.pi * x[None, None, :] / periods[:, None, None] + phases[None, :, None]
        basis = np.sin(arg) ** 2
        a, b, resid = _linear_grid_solve(basis, y, w)
        i, j = np.unravel_index(np.argmin(resid), resid.shape)
        p0 = np.array([a[i, j], b[i, j], periods[i], phases[j]])
    p0 = np.asarray(p0, dtype=float)

    sw = np.sqrt(w)

    def fun(p):
        return sw * (p[0] * np.sin(np.pi * x / p[2] + p[3]) ** 2 + p[1] - y)

    res = _refine(fun, p0)
    amp, off, period, phase = res.x
    cov = _covariance(res, absolute, x.size)
    if amp < 0:
        # A sin^2(u) + B == -A sin^2(u + pi/2) + (A + B)
        amp, off, phase = -amp, off + res.x[0], phase + np.pi / 2
        T = np.array([[-1, 0, 0, 0], [1, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=float)
        cov = T @ cov @ T.T
    phase = phase % np.pi
    errs = np.sqrt(np.clip(np.diag(cov), 0, None))
    denom = amp + 2 * off
    if denom > 0 and amp > 0:
        vis = amp / denom
        grad = np.array([2 * off / denom**2, -2 * amp / denom**2, 0, 0])
        vis_err = float(np.sqrt(max(grad @ cov @ grad, 0.0)))
    else:
        vis, vis_err = 0.0, 0.0
    vis = float(np.clip(vis, 0.0, 1.0))
    names = ["amplitude", "offset", "period", "phase"]
    return FitResult(
        "squared_sinusoid",
        dict(zip(names, map(float, (amp, off, period, phase)))),
        dict(zip(names, map(float, errs))),
        vis,
        vis_err,
        float(np.sqrt(2 * res.cost)),
        bool(res.success),
        "" if res.success else f"refinement did not converge: {res.message}; residual {np.sqrt(2 * res.cost):.4g}",
        cov,
        _sinusoid,
    )


def _sinusoid(x, amplitude, offset, period, phase):
    return amplitude * np.sin(np.pi * x / period + phase) ** 2 + offset


def _dip(x, baseline, visibility, center, width):
    return baseline * (1 - visibility * np.exp(-((x - center) ** 2) / (2 * width**2)))


def fit_dip(xs, ys, weights=None, n_centers: int = 121, n_widths: int = 60, p0=None) -> FitResult:
    """Fit a Gaussian dip ``y = B (1 - V exp(-(x - x0)^2 / (2 w^2)))``; visibility is V.

    The width is kept at or above the sample spacing, since a narrower dip
    would only chase a single low point. A starting point
    ``p0 = (B, V, x0, w)`` skips the grid search.
    """
    x, y, w, absolute = _prepare(xs, ys, weights, 5)
    span = np.ptp(x)
    if span <= 0:
        raise ValueError("xs must span a non-zero range")
    dx = np.min(np.diff(np.unique(x)))
    if p0 is None:
        centers = np.linspace(x.min(), x.max(), n_centers)
        widths = np.geomspace(dx, span / 2, n_widths)
        g = np.exp(-((x[None, None, :] - centers[None, :, None]) ** 2) / (2 * widths[:, None, None] ** 2))
        c, base, resid = _linear_grid_solve(g, y, w)
        i, j = np.unravel_index(np.argmin(resid), resid.shape)
        b0 = base[i, j]
        v0 = -c[i, j] / b0 if b0 != 0 else 0.0
        p0 = np.array([b0, v0, centers[j], widths[i]])
    p0 = np.asarray(p0, dtype=float)

    sw = np.sqrt(w)

    def fun(p):
        return sw * (p[0] * (1 - p[1] * np.exp(-((x - p[2]) ** 2) / (2 * p[3] ** 2))) - y)

    p0[3] = max(abs(p0[3]), dx)
    res = _refine(fun, p0, bounds=([-np.inf, -np.inf, -np.inf, dx], np.inf))
    base_, vis, center, width = res.x
    cov = _covariance(res, absolute, x.size)
    errs = np.sqrt(np.clip(np.diag(cov), 0, None))
    names = ["baseline", "visibility", "center", "width"]
    return FitResult(
        "dip",
        dict(zip(names, map(float, (base_, vis, center, width)))),
        dict(zip(names, map(float, errs))),
        float(np.clip(vis, 0.0, 1.0)),
        float(errs[1]),
        float(np.sqrt(2 * res.cost)),
        bool(res.success),
        "" if res.success else f"refinement did not converge: {res.message}; residual {np.sqrt(2 * res.cost):.4g}",
        cov,
        _dip,
    )


def fit_model(model, xs, ys, p0, names, weights=None, kind: str = "model") -> FitResult:
    """Least-squares fit of ``model(x, *p)`` from the starting point ``p0``."""
    x, y, w, absolute = _prepare(xs, ys, weights, len(p0) + 1)
    sw = np.sqrt(w)

    def fun(p):
        return sw * (model(x, *p) - y)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = least_squares(fun, np.asarray(p0, dtype=float), method="lm", x_scale="jac",
                            xtol=1e-12, ftol=1e-12, max_nfev=5000)
    cov = _covariance(res, absolute, x.size)
    errs = np.sqrt(np.clip(np.diag(cov), 0, None))
    return FitResult(
        kind,
        dict(zip(names, map(float, res.x))),
        dict(zip(names, map(float, errs))),
        float("nan"),
        float("nan"),
        float(np.sqrt(2 * res.cost)),
        bool(res.success),
        "" if res.success else str(res.message),
        cov,
        model,
    )


def fit_poisson(fit, xs, counts, passes: int = 3, **kw) -> FitResult:
    """Fit Poisson counts with variances taken from the fitted curve.

    Weighting by the observed counts favours downward fluctuations and biases
    fringe minima low, so the first pass uses those weights only to get a
    curve, and each later pass reweights with ``1 / prediction``.
    """
    ys = np.asarray(counts, dtype=float)
    warm = "p0" in inspect.signature(fit).parameters
    result = fit(xs, ys, weights=1.0 / np.maximum(ys, 1.0), **kw)
    for _ in range(passes - 1):
        if warm:
            kw = dict(kw, p0=list(result.params.values()))
        result = fit(xs, ys, weights=1.0 / np.maximum(result.predict(xs), 1.0), **kw)
    return result
