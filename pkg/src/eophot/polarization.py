"""Two-photon polarization interference at a balanced beamsplitter.

Photon states are ``cos(a)|H> + exp(i b) sin(a)|V>``. The coincidence
probability, its partial derivatives with respect to the controlled photon's
angles, and a classifier for stationary points live here.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PolarizationState",
    "Stationary",
    "StationaryPointError",
    "coincidence_prob",
    "coincidence_prob_angles",
    "coincidence_grad",
    "squared_overlap",
    "squared_overlap_angles",
    "stokes",
    "classify_stationary",
    "from_jones",
]


@dataclass(frozen=True)
class PolarizationState:
    alpha: float
    beta: float = 0.0

    @property
    def jones(self) -> np.ndarray:
        return np.array([np.cos(self.alpha), np.exp(1j * self.beta) * np.sin(self.alpha)])


def from_jones(vec) -> PolarizationState:
    """Angles of a Jones vector, discarding global phase and normalization."""
    h, v = np.asarray(vec, dtype=complex)
    norm = np.hypot(abs(h), abs(v))
    alpha = float(np.arctan2(abs(v), abs(h)))
    beta = float(np.angle(v) - np.angle(h)) if abs(h) > 0 and abs(v) > 0 else 0.0
    if norm == 0:
        raise ValueError("zero Jones vector")
    return PolarizationState(alpha, beta)


class Stationary(enum.Enum):
    PARALLEL = "parallel"
    ORTHOGONAL = "orthogonal"
    NOT_STATIONARY = "not_stationary"


class StationaryPointError(ArithmeticError):
    """A vanishing gradient at a state pair that is neither parallel nor orthogonal."""


def coincidence_prob_angles(alpha, beta, gamma, delta):
    """``1/2 |cos(a) sin(g) e^{i d} - cos(g) sin(a) e^{i b}|^2``, broadcasting."""
    amp = np.cos(alpha) * np.sin(gamma) * np.exp(1j * delta) - np.cos(gamma) * np.sin(alpha) * np.exp(
        1j * beta
    )
    return 0.5 * np.abs(amp) ** 2


def coincidence_prob(p1: PolarizationState, p2: PolarizationState) -> float:
    return float(coincidence_prob_angles(p1.alpha, p1.beta, p2.alpha, p2.beta))


def coincidence_grad(alpha, beta, gamma, delta):
    """Partials of the coincidence probability with respect to ``alpha`` and ``beta``.

    From ``P = [1 - cos2a cos2g - sin2a sin2g cos(b - d)] / 4``; note the
    beta partial carries 1/4, not 1/2.
    """
    d_alpha = 0.5 * (
        np.sin(2 * alpha) * np.cos(2 * gamma)
        - np.cos(2 * alpha) * np.sin(2 * gamma) * np.cos(delta - beta)
    )
    d_beta = 0.25 * np.sin(beta - delta) * np.sin(2 * alpha) * np.sin(2 * gamma)
    return d_alpha, d_beta


def squared_overlap_angles(alpha, beta, gamma, delta):
    amp = np.cos(alpha) * np.cos(gamma) + np.exp(1j * (delta - beta)) * np.sin(alpha) * np.sin(gamma)
    return np.abs(amp) ** 2


def squared_overlap(p1: PolarizationState, p2: PolarizationState) -> float:
    return float(squared_overlap_angles(p1.alpha, p1.beta, p2.alpha, p2.beta))


def stokes(alpha, beta) -> np.ndarray:
    """Unit Poincare-sphere vector (S1, S2, S3)."""
    return np.stack(
        [np.cos(2 * alpha), np.sin(2 * alpha) * np.cos(beta), np.sin(2 * alpha) * np.sin(beta)],
        axis=-1,
    )


def _sphere_gradient_norm(alpha, beta, gamma, delta) -> float:
    # P = (1 - s1.s2)/4, so the tangential gradient is -(s2 - (s1.s2) s1)/4
    s1 = stokes(alpha, beta)
    s2 = stokes(gamma, delta)
    g = -(s2 - np.dot(s1, s2) * s1) / 4
    return float(np.linalg.norm(g))


def classify_stationary(
    alpha: float,
    beta: float,
    gamma: float,
    delta: float,
    grad_tol: float = 1e-9,
    overlap_tol: float = 1e-6,
) -> Stationary:
    """Classify a point of the coincidence landscape over the controlled angles.

    At ``sin(2 alpha) = 0`` the phase ``beta`` is a dead coordinate and the
    angle gradient can vanish without the state being stationary; such points
    are judged by the gradient on the Poincare sphere instead.
    """
    if grad_tol <= 0 or overlap_tol <= 0:
        raise ValueError("tolerances must be > 0")
    da, db = coincidence_grad(alpha, beta, gamma, delta)
    if np.hypot(da, db) >= grad_tol:
        return Stationary.NOT_STATIONARY
    if abs(np.sin(2 * alpha)) < np.sqrt(grad_tol):
        if _sphere_gradient_norm(alpha, beta, gamma, delta) >= np.sqrt(grad_tol):
            return Stationary.NOT_STATIONARY
    ov = float(squared_overlap_angles(alpha, beta, gamma, delta))
    if ov > 1 - overlap_tol:
        return Stationary.PARALLEL
    if ov < overlap_tol:
        return Stationary.ORTHOGONAL
    raise StationaryPointError(
        f"vanishing gradient at intermediate overlap {ov:.6g} "
        f"(alpha={alpha}, beta={beta}, gamma={gamma}, delta={delta})"
    )
