"""Small-scale bosonic Fock-space algebra.

Basis states are occupation tuples; multi-photon states evolve under a mode
unitary ``U`` through the substitution ``a_j^dag -> sum_k U[k, j] a_k^dag``.
Two independent routes compute the lifted amplitudes: direct expansion of
the creation-operator polynomial, and permanents of ``U`` submatrices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, factorial, sqrt
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "FockState",
    "StateVector",
    "ModeUnitary",
    "enumerate_basis",
    "permanent",
    "product_state",
    "apply_mode_unitary",
    "fock_transfer_matrix",
    "detection_probability",
    "pattern_probabilities",
    "two_photon_coincidence_prob",
    "beamsplitter",
]

UNITARY_ATOL = 1e-10


class FockState(tuple):
    """Occupation numbers, one per mode, e.g. ``FockState((1, 1))`` for |11>."""

    def __new__(cls, occupations: Iterable[int]):
        occ = tuple(int(n) for n in occupations)
        if len(occ) < 1:
            raise ValueError("a Fock state needs at least one mode")
        if any(n < 0 for n in occ):
            raise ValueError(f"occupations must be non-negative, got {occ}")
        return super().__new__(cls, occ)

    @property
    def num_modes(self) -> int:
        return len(self)

    @property
    def num_photons(self) -> int:
        return sum(self)

    def __repr__(self) -> str:
        return "|" + ",".join(str(n) for n in self) + ">"


@dataclass(frozen=True)
class ModeUnitary:
    """Unitary acting on creation operators; column ``j`` is the image of mode ``j``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"mode unitary must be square, got shape {m.shape}")
        if not np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=UNITARY_ATOL, rtol=0):
            raise ValueError("matrix is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: "ModeUnitary") -> "ModeUnitary":
        return ModeUnitary(self.matrix @ other.matrix)


@dataclass(frozen=True)
class StateVector:
    """Complex superposition over Fock states of equal mode count and photon number."""

    basis: tuple
    amplitudes: np.ndarray

    def __post_init__(self):
        basis = tuple(FockState(b) for b in self.basis)
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if len(basis) == 0:
            raise ValueError("empty basis")
        if len(basis) != amps.size:
            raise ValueError("one amplitude per basis state is required")
        if len(set(basis)) != len(basis):
            raise ValueError("basis states must be distinct")
        modes = {b.num_modes for b in basis}
        photons = {b.num_photons for b in basis}
        if len(modes) != 1 or len(photons) != 1:
            raise ValueError("basis states must share mode count and photon number")
        amps.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_fock(cls, occupations: Sequence[int]) -> "StateVector":
        return cls((FockState(occupations),), np.array([1.0 + 0j]))

    @classmethod
    def from_dict(cls, terms: Mapping[Sequence[int], complex]) -> "StateVector":
        keys = list(terms)
        return cls(tuple(keys), np.array([terms[k] for k in keys], dtype=complex))

    @property
    def num_modes(self) -> int:
        return self.basis[0].num_modes

    @property
    def num_photons(self) -> int:
        return self.basis[0].num_photons

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def amplitude(self, pattern: Sequence[int]) -> complex:
        pattern = FockState(pattern)
        for b, a in zip(self.basis, self.amplitudes):
            if b == pattern:
                return complex(a)
        return 0j

    def as_dict(self) -> dict:
        return {b: complex(a) for b, a in zip(self.basis, self.amplitudes)}

    def in_basis(self, basis: Sequence[FockState]) -> np.ndarray:
        """Amplitudes re-indexed onto ``basis`` (missing states get zero)."""
        lookup = self.as_dict()
        return np.array([lookup.get(FockState(b), 0j) for b in basis], dtype=complex)


def enumerate_basis(num_modes: int, num_photons: int) -> list[FockState]:
    """All occupation patterns, lexicographically descending.

    >>> enumerate_basis(2, 2)
    [|2,0>, |1,1>, |0,2>]
    """
    if num_modes < 1:
        raise ValueError("num_modes must be >= 1")
    if num_photons < 0:
        raise ValueError("num_photons must be >= 0")

    def rec(modes, photons):
        if modes == 1:
            yield (photons,)
            return
        for first in range(photons, -1, -1):
            for rest in rec(modes - 1, photons - first):
                yield (first,) + rest

    out = [FockState(occ) for occ in rec(num_modes, num_photons)]
    assert len(out) == comb(num_photons + num_modes - 1, num_photons)
    return out


def permanent(m: np.ndarray) -> complex:
    """Permanent via Ryser's inclusion-exclusion formula (O(2^n n^2))."""
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("permanent needs a square matrix")
    if n == 0:
        return 1.0 + 0j
    total = 0j
    for r in range(1, n + 1):
        sign = (-1) ** r
        for cols in itertools.combinations(range(n), r):
            total += sign * np.prod(m[:, cols].sum(axis=1))
    return (-1) ** n * total


def _as_matrix(u) -> np.ndarray:
    return u.matrix if isinstance(u, ModeUnitary) else np.asarray(u, dtype=complex)


def _expand_linear_forms(forms: Sequence[np.ndarray]) -> dict:
    """Expand a product of creation-operator linear forms acting on vacuum.

    ``forms[p][k]`` is the coefficient of ``a_k^dag`` in the p-th factor.
    Returns ket coefficients keyed by occupation tuple, using
    ``prod_k (a_k^dag)^{m_k} |0> = sqrt(prod_k m_k!) |m>``.
    """
    d = len(forms[0])
    out: dict = {}
    for modes in itertools.product(range(d), repeat=len(forms)):
        coeff = 1.0 + 0j
        for form, k in zip(forms, modes):
            coeff *= form[k]
            if coeff == 0:
                break
        if coeff == 0:
            continue
        occ = [0] * d
        for k in modes:
            occ[k] += 1
        key = tuple(occ)
        out[key] = out.get(key, 0j) + coeff
    for key in out:
        out[key] *= sqrt(np.prod([factorial(n) for n in key]))
    return out


def product_state(photons: Sequence[Sequence[complex]]) -> StateVector:
    """State created by one photon per wavefunction, ``prod_p (sum_k c_pk a_k^dag)|0>``.

    Result is normalized; overlapping wavefunctions produce bunching terms.
    """
    forms = [np.asarray(p, dtype=complex) for p in photons]
    if len({f.size for f in forms}) != 1:
        raise ValueError("all photon wavefunctions need the same mode count")
    terms = _expand_linear_forms(forms)
    basis = [b for b in enumerate_basis(forms[0].size, len(forms)) if b in terms]
    amps = np.array([terms[b] for b in basis])
    amps = amps / np.linalg.norm(amps)
    return StateVector(tuple(basis), amps)


def _evolve_expansion(u: np.ndarray, s: StateVector) -> dict:
    out: dict = {}
    for occ, amp in zip(s.basis, s.amplitudes):
        if amp == 0:
            continue
        forms = [u[:, j] for j, n in enumerate(occ) for _ in range(n)]
        norm = sqrt(np.prod([factorial(n) for n in occ]))
        if not forms:
            out[occ] = out.get(occ, 0j) + amp
            continue
        for key, c in _expand_linear_forms(forms).items():
            out[key] = out.get(key, 0j) + amp * c / norm
    return out


def _modes_list(occ: Sequence[int]) -> list[int]:
    return [j for j, n in enumerate(occ) for _ in range(n)]


def _fact_norm(occ: Sequence[int]) -> float:
    return float(np.prod([factorial(n) for n in occ]))


def _evolve_permanent(u: np.ndarray, s: StateVector) -> dict:
    out_basis = enumerate_basis(s.num_modes, s.num_photons)
    out = {}
    for b_out in out_basis:
        rows = _modes_list(b_out)
        total = 0j
        for b_in, amp in zip(s.basis, s.amplitudes):
            if amp == 0:
                continue
            cols = _modes_list(b_in)
            sub = u[np.ix_(rows, cols)]
            total += amp * permanent(sub) / sqrt(_fact_norm(b_in) * _fact_norm(b_out))
        out[b_out] = total
    return out


def apply_mode_unitary(u, s: StateVector, method: str = "auto") -> StateVector:
    """Evolve ``s`` under the mode unitary ``u``.

    ``method`` selects direct operator expansion (``"expand"``) or the
    permanent formula (``"permanent"``); ``"auto"`` expands for up to two
    photons. The output is expressed over the full canonical basis.
    """
    m = _as_matrix(u)
    if m.shape[0] != s.num_modes:
        raise ValueError(f"unitary acts on {m.shape[0]} modes but state has {s.num_modes}")
    if method == "auto":
        method = "expand" if s.num_photons <= 2 else "permanent"
    if method == "expand":
        terms = _evolve_expansion(m, s)
    elif method == "permanent":
        terms = _evolve_permanent(m, s)
    else:
        raise ValueError(f"unknown method {method!r}")
    basis = enumerate_basis(s.num_modes, s.num_photons)
    return StateVector(tuple(basis), np.array([terms.get(b, 0j) for b in basis]))


def fock_transfer_matrix(u, num_photons: int, method: str = "auto") -> np.ndarray:
    """Lift of ``u`` to the ``num_photons`` sector, indexed by :func:`enumerate_basis`."""
    m = _as_matrix(u)
    basis = enumerate_basis(m.shape[0], num_photons)
    cols = [apply_mode_unitary(m, StateVector.from_fock(b), method).amplitudes for b in basis]
    return np.column_stack(cols)


def detection_probability(s: StateVector, pattern: Sequence[int]) -> float:
    pattern = FockState(pattern)
    if pattern.num_modes != s.num_modes:
        raise ValueError("pattern and state have different mode counts")
    if pattern.num_photons != s.num_photons:
        raise ValueError(
            f"pattern has {pattern.num_photons} photons, state has {s.num_photons}"
        )
    return abs(s.amplitude(pattern)) ** 2


def pattern_probabilities(s: StateVector) -> dict:
    return {b: abs(a) ** 2 for b, a in zip(s.basis, s.amplitudes)}


def beamsplitter(transmissivity: float = 0.5) -> ModeUnitary:
    """Symmetric two-mode splitter, ``a^dag -> t c^dag + i r d^dag``."""
    t = sqrt(transmissivity)
    r = sqrt(1.0 - transmissivity)
    return ModeUnitary(np.array([[t, 1j * r], [1j * r, t]]))


def two_photon_coincidence_prob(transmissivity: float, overlap: float) -> float:
    """Probability of one photon per output when two photons of overlap ``overlap`` meet.

    ``T^2 + R^2 - 2 T R m``; ``m = 1`` gives full Hong-Ou-Mandel suppression
    at ``T = 1/2``.
    """
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError("transmissivity must lie in [0, 1]")
    if not 0.0 <= overlap <= 1.0:
        raise ValueError("overlap must lie in [0, 1]")
    t = transmissivity
    r = 1.0 - t
    return t * t + r * r - 2.0 * t * r * overlap
