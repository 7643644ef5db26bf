"""Entropy of the waveguide environment after the pulse has passed.

For an initial mixture p_a0 |a><a| + p_b0 |b><b| the environment state
is a rank <= 4 mixture: the vacuum branch (weight p_a0 |psi|^2), the
b-photon branch (p_a0 N_b), and a 2x2 block spanned by the scattered
a-photon and the freely propagated pulse.  Its eigenvalues only need
the branch weights and one overlap, so entropies come from a closed
formula rather than any density-matrix diagonalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalConsistencyError, ParameterError
from .dynamics import FieldState
from .model import InitialMixture, LambdaSystem, PulseSpec, envelope_at

__all__ = [
    "EnvSpectrum",
    "AsymptoticOverlap",
    "FiniteTimeOverlap",
    "EntropyCurve",
    "env_eigenvalues",
    "von_neumann",
    "quantum_branch_entropy",
    "classical_entropy",
    "overlap_asymptotic",
    "overlap_finite_time",
    "entropy_curve",
    "heat_to_pab",
]

HBAR = 1.0


def _check_unit_interval(name, value, slack=1e-12):
    if value < -slack or value > 1.0 + slack:
        raise ParameterError(f"{name} = {value} outside [0, 1]")


def env_eigenvalues(mixture: InitialMixture, psi_sq: float, n_a: float,
                    n_b: float, overlap_sq: float) -> np.ndarray:
    """Eigenvalues of the reduced environment state (length 4, sorted).

    Parameters
    ----------
    psi_sq, n_a, n_b : float
        Excited population and branch weights of the a-started pure
        state; they must add up to 1.
    overlap_sq : float
        |<free pulse | scattered a photon>|^2 (normalized vectors).
    """
    for name, val in (("psi_sq", psi_sq), ("n_a", n_a), ("n_b", n_b),
                      ("overlap_sq", overlap_sq)):
        _check_unit_interval(name, val)
    if abs(psi_sq + n_a + n_b - 1.0) > 1e-9:
        raise ParameterError(
            f"branch weights must sum to 1, got {psi_sq + n_a + n_b}"
        )
    p_a0, p_b0 = mixture.p_a0, mixture.p_b0
    lam1 = p_a0 * psi_sq
    lam2 = p_a0 * n_b
    half = 0.5 * (p_a0 * n_a + p_b0)
    disc = math.sqrt((p_a0 * n_a - p_b0) ** 2
                     + 4.0 * p_a0 * p_b0 * n_a * overlap_sq)
    lam3 = half + 0.5 * disc
    lam4 = half - 0.5 * disc
    lams = np.array([lam1, lam2, lam3, lam4])
    return np.sort(np.clip(lams, 0.0, None))[::-1]


def von_neumann(eigenvalues) -> float:
    """S = -sum lambda ln lambda, with 0 ln 0 = 0."""
    lams = np.asarray(eigenvalues, dtype=float)
    if np.any(lams < -1e-12):
        raise ParameterError(f"negative eigenvalue in {lams}")
    if lams.sum() > 1.0 + 1e-10:
        raise ParameterError(f"eigenvalues sum to {lams.sum()} > 1")
    lams = np.clip(lams, 0.0, None)
    pos = lams[lams > 0.0]
    return float(-np.sum(pos * np.log(pos)))


def quantum_branch_entropy(n_a: float, n_b: float, psi_sq: float) -> float:
    """Entropy of the branch distribution of the a-started pure state."""
    return von_neumann([n_a, n_b, psi_sq])


def classical_entropy(s_e: float, mixture: InitialMixture, s_q: float) -> float:
    """S_E^c = S_E - p_a0 S_q: environment entropy net of quantum spread.

    The b-started branch scatters nothing, so only the a-branch quantum
    entropy is subtracted.
    """
    out = s_e - mixture.p_a0 * s_q
    if out < -1e-12:
        raise NumericalConsistencyError(
            f"classical entropy came out negative ({out:.3e})"
        )
    return max(out, 0.0)


@dataclass(frozen=True)
class AsymptoticOverlap:
    """Long-time overlap data derived from p_ab(inf) alone."""

    value: float        # sqrt(N_a) <free | scattered>  =  1 - (Gamma/2 gamma_b) p
    n_a: float
    overlap_sq: float


def overlap_asymptotic(system: LambdaSystem, p_ab_infty: float) -> AsymptoticOverlap:
    """Overlap between the scattered a photon and the free pulse, t -> inf.

    sqrt(N_a) <1_a^free | 1_a~> = 1 - (Gamma / (2 gamma_b)) p_ab(inf); the
    normalized squared overlap is that value squared over N_a = 1 - p_ab.
    Valid for p_ab(inf) in [0, 4 gamma_a gamma_b / Gamma^2].
    """
    gamma = system.gamma_total
    p_max = 4.0 * system.gamma_a * system.gamma_b / gamma**2
    if p_ab_infty < -1e-12 or p_ab_infty > p_max * (1.0 + 1e-9):
        raise ParameterError(
            f"p_ab_infty = {p_ab_infty} outside [0, 4 gamma_a gamma_b / Gamma^2 "
            f"= {p_max}]"
        )
    value = 1.0 - (gamma / (2.0 * system.gamma_b)) * p_ab_infty
    n_a = 1.0 - p_ab_infty
    if n_a < 1e-14:
        return AsymptoticOverlap(value=value, n_a=n_a, overlap_sq=0.0)
    overlap_sq = min(value * value / n_a, 1.0)
    return AsymptoticOverlap(value=value, n_a=n_a, overlap_sq=overlap_sq)


@dataclass(frozen=True)
class FiniteTimeOverlap:
    value: complex      # <1_a^free(t) | 1_a~(t)>, normalized
    n_a: float
    degenerate: bool


def overlap_finite_time(field: FieldState, pulse: PulseSpec,
                        system: LambdaSystem) -> FiniteTimeOverlap:
    """Overlap of the current a-branch field with the free-flying pulse.

    Computed in position space on the field's grid.  When essentially all
    population has left the a branch (N_a < 1e-14) the normalized overlap
    is meaningless; 0 is returned with the ``degenerate`` flag set.
    """
    c = system.c_speed
    free = envelope_at(pulse, field.z - c * field.t)
    num = np.trapezoid(np.conj(free) * field.phi_a, field.z) \
        / (2.0 * math.pi * system.rho_density * c)
    n_a = field.branch_weight("a")
    if n_a < 1e-14:
        return FiniteTimeOverlap(value=0.0 + 0.0j, n_a=n_a, degenerate=True)
    return FiniteTimeOverlap(value=complex(num / math.sqrt(n_a)),
                             n_a=n_a, degenerate=False)


@dataclass(frozen=True)
class EnvSpectrum:
    """Eigenvalues and entropies of the environment state at one instant."""

    lambdas: np.ndarray
    psi_sq: float
    n_a: float
    n_b: float
    overlap_sq: float
    s_e: float
    s_q: float
    s_e_c: float

    def __post_init__(self):
        self.lambdas.flags.writeable = False

    @classmethod
    def from_branches(cls, mixture: InitialMixture, psi_sq: float, n_a: float,
                      n_b: float, overlap_sq: float) -> "EnvSpectrum":
        lams = env_eigenvalues(mixture, psi_sq, n_a, n_b, overlap_sq)
        s_e = von_neumann(lams)
        s_q = quantum_branch_entropy(n_a, n_b, psi_sq)
        s_e_c = classical_entropy(s_e, mixture, s_q)
        return cls(lambdas=lams, psi_sq=psi_sq, n_a=n_a, n_b=n_b,
                   overlap_sq=overlap_sq, s_e=s_e, s_q=s_q, s_e_c=s_e_c)

    def as_dict(self) -> dict:
        return {
            "lambdas": [float(x) for x in self.lambdas],
            "psi_sq": self.psi_sq,
            "n_a": self.n_a,
            "n_b": self.n_b,
            "overlap_sq": self.overlap_sq,
            "s_e": self.s_e,
            "s_q": self.s_q,
            "s_e_c": self.s_e_c,
        }


@dataclass(frozen=True)
class EntropyCurve:
    """Asymptotic entropies swept over the reachable p_ab(inf) range."""

    p_ab: np.ndarray
    s_e: np.ndarray
    s_e_c: np.ndarray

    def __post_init__(self):
        for arr in (self.p_ab, self.s_e, self.s_e_c):
            arr.flags.writeable = False


def entropy_curve(system: LambdaSystem, mixture: InitialMixture,
                  n_points: int = 200) -> EntropyCurve:
    """S_E and S_E^c versus the long-time transfer probability.

    The sweep runs from p_ab = 0 to the family maximum
    4 gamma_a gamma_b / Gamma^2 (= 1 only for gamma_a = gamma_b).
    """
    if n_points < 2:
        raise ParameterError("n_points must be at least 2")
    gamma = system.gamma_total
    p_max = 4.0 * system.gamma_a * system.gamma_b / gamma**2
    p_grid = np.linspace(0.0, p_max, n_points)
    s_e = np.empty(n_points)
    s_e_c = np.empty(n_points)
    for i, p in enumerate(p_grid):
        ov = overlap_asymptotic(system, p)
        spec = EnvSpectrum.from_branches(mixture, 0.0, ov.n_a, p, ov.overlap_sq)
        s_e[i] = spec.s_e
        s_e_c[i] = spec.s_e_c
    return EntropyCurve(p_ab=p_grid, s_e=s_e, s_e_c=s_e_c)


def heat_to_pab(system: LambdaSystem, q_diss: float) -> float:
    """Invert the heat bookkeeping for the transfer probability.

    p_ab(inf) = Q / (hbar omega_a Gamma / gamma_b - hbar delta_ab).
    """
    denom = (HBAR * system.omega_a * system.gamma_total / system.gamma_b
             - HBAR * system.delta_ab)
    if denom <= 0.0:
        raise ParameterError(
            f"heat-to-probability denominator {denom} is not positive"
        )
    return q_diss / denom
