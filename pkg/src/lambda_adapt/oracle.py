"""Brute-force cross-check on a discretized waveguide.

The continuum is replaced by two uniform combs of modes (one per decay
branch) and the full one-excitation Schroedinger equation is solved with
no Wigner-Weisskopf or input-output shortcut.  Everything downstream of
the main package can then be compared against this model: transition
probabilities, branch weights, work and heat quadratures, and the exact
partial trace of the environment.

The comb approximates the continuum as long as (i) the window is much
wider than the emission line, (ii) the spacing is much finer than every
physical rate, and (iii) times stay well below the recurrence 2 pi /
spacing.  Defaults: 2001 modes per branch over a window of 40 Gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.signal import czt
from scipy.sparse.linalg import expm_multiply

from .errors import (
    BandwidthError,
    ConfigurationError,
    NumericalConsistencyError,
    ParameterError,
)
from .dynamics import field_amplitudes, integrate_psi
from .entropy import EnvSpectrum, overlap_finite_time, von_neumann
from .model import InitialMixture, LambdaSystem, PulseSpec, SimGrid

__all__ = [
    "DiscreteBath",
    "OneExcitationState",
    "OracleRun",
    "OracleMeasurement",
    "DeviationReport",
    "build_hamiltonian",
    "discretize_pulse",
    "evolve",
    "measure",
    "measure_series",
    "compare",
]

DRIFT_TOL = 1e-10


@dataclass(frozen=True)
class DiscreteBath:
    """Uniform frequency combs standing in for the two continua.

    ``bandwidth`` is the full window width; both branch combs share the
    spacing bandwidth / (n_modes - 1) and are centered on their own
    transition (omega_a and omega_b).
    """

    n_modes: int = 2001
    bandwidth: float = 0.0

    def __post_init__(self):
        if self.n_modes < 3 or self.n_modes % 2 == 0:
            raise ConfigurationError(
                f"n_modes must be odd and >= 3, got {self.n_modes}"
            )
        if not self.bandwidth > 0:
            raise ConfigurationError("bandwidth must be positive")

    @classmethod
    def default(cls, system: LambdaSystem, n_modes: int = 2001) -> "DiscreteBath":
        return cls(n_modes=n_modes, bandwidth=40.0 * system.gamma_total)

    @property
    def spacing(self) -> float:
        return self.bandwidth / (self.n_modes - 1)

    @property
    def density(self) -> float:
        return 1.0 / self.spacing

    @property
    def recurrence_time(self) -> float:
        return 2.0 * math.pi / self.spacing

    def offsets(self) -> np.ndarray:
        """Mode frequencies relative to the comb center."""
        n = self.n_modes
        return (np.arange(n) - (n - 1) / 2.0) * self.spacing

    def check_against(self, system: LambdaSystem, t_final: float | None = None):
        g = system.gamma_total
        if self.bandwidth < 20.0 * g * (1 - 1e-12):
            raise ConfigurationError(
                f"bandwidth {self.bandwidth} < 20 Gamma = {20 * g}: the window "
                "clips the emission line"
            )
        if self.spacing > g / 20.0 * (1 + 1e-12):
            raise ConfigurationError(
                f"spacing {self.spacing:.3g} > Gamma/20: comb too coarse"
            )
        if t_final is not None and t_final >= self.recurrence_time:
            raise ConfigurationError(
                f"t_final = {t_final} reaches the recurrence time "
                f"{self.recurrence_time:.3g}; enlarge the bath"
            )


@dataclass(frozen=True)
class OneExcitationState:
    """Amplitudes in the one-excitation basis.

    Layout: excited |e, vac>, a-branch modes (system in |a>), b-branch
    modes (system in |b>), and optionally the decoupled backward sector
    (system in |b> with an a-branch photon).
    """

    excited: complex
    a_modes: np.ndarray
    b_modes: np.ndarray
    backward: np.ndarray | None = None

    def pack(self) -> np.ndarray:
        parts = [np.array([self.excited], dtype=complex),
                 np.asarray(self.a_modes, dtype=complex),
                 np.asarray(self.b_modes, dtype=complex)]
        if self.backward is not None:
            parts.append(np.asarray(self.backward, dtype=complex))
        return np.concatenate(parts)

    @classmethod
    def unpack(cls, vec: np.ndarray, n_modes: int) -> "OneExcitationState":
        vec = np.asarray(vec, dtype=complex)
        if vec.size == 1 + 2 * n_modes:
            back = None
        elif vec.size == 1 + 3 * n_modes:
            back = vec[1 + 2 * n_modes:]
        else:
            raise ParameterError(
                f"vector of length {vec.size} does not fit {n_modes} modes"
            )
        return cls(excited=complex(vec[0]), a_modes=vec[1:1 + n_modes],
                   b_modes=vec[1 + n_modes:1 + 2 * n_modes], backward=back)

    @classmethod
    def from_pulse(cls, amps: np.ndarray, *, backward: bool = False,
                   include_backward_block: bool = False) -> "OneExcitationState":
        """Photon in the a-branch comb; system in |a> (or |b> if backward)."""
        n = amps.shape[0]
        zeros = np.zeros(n, dtype=complex)
        if backward:
            return cls(excited=0.0, a_modes=zeros, b_modes=zeros.copy(),
                       backward=np.asarray(amps, dtype=complex))
        back = zeros.copy() if include_backward_block else None
        return cls(excited=0.0, a_modes=np.asarray(amps, dtype=complex),
                   b_modes=zeros, backward=back)


def build_hamiltonian(system: LambdaSystem, bath: DiscreteBath,
                      include_backward: bool = False) -> sp.csr_matrix:
    """Sparse one-excitation Hamiltonian (lab frame, hbar = 1).

    Diagonal: omega_a for |e, vac>, omega_j for a-modes, delta_ab +
    omega_j^b for b-modes (and delta_ab + omega_j for the backward
    sector, which has no off-diagonal elements at all: an a-branch
    photon cannot raise |b>).  Couplings are +/- i g_k with
    g_k = sqrt(gamma_k * spacing / (2 pi)).
    """
    bath.check_against(system)
    n = bath.n_modes
    offs = bath.offsets()
    g_a = math.sqrt(system.gamma_a * bath.spacing / (2.0 * math.pi))
    g_b = math.sqrt(system.gamma_b * bath.spacing / (2.0 * math.pi))

    dim = 1 + (3 if include_backward else 2) * n
    diag = np.empty(dim, dtype=complex)
    diag[0] = system.omega_a
    diag[1:1 + n] = system.omega_a + offs
    diag[1 + n:1 + 2 * n] = system.delta_ab + (system.omega_b + offs)
    if include_backward:
        diag[1 + 2 * n:] = system.delta_ab + (system.omega_a + offs)

    rows = [np.arange(dim)]
    cols = [np.arange(dim)]
    vals = [diag]
    a_idx = 1 + np.arange(n)
    b_idx = 1 + n + np.arange(n)
    for idx, g in ((a_idx, g_a), (b_idx, g_b)):
        rows.extend([np.zeros(n, dtype=int), idx])
        cols.extend([idx, np.zeros(n, dtype=int)])
        vals.extend([np.full(n, -1j * g), np.full(n, 1j * g)])
    h = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )
    return h


def discretize_pulse(pulse: PulseSpec, bath: DiscreteBath,
                     system: LambdaSystem) -> np.ndarray:
    """Project the initial envelope onto the a-branch comb.

    Computes phi_j ~ integral phi_a(z, 0) e^{-i omega_j z / c} dz on a
    fine spatial grid (chirp z-transform over all bins at once), scales
    to physical units, and renormalizes so sum |phi_j|^2 = 1.

    Raises
    ------
    BandwidthError
        If more than 1% of the pulse's spectral weight falls outside
        the comb window before renormalization.
    """
    c = pulse.c
    z_breaks = pulse.space_breakpoints()
    z_lo = min(-c * pulse.settle_time() * 1.2, z_breaks[0])
    # resolve the fastest beat between envelope and comb edge
    k_max = (0.5 * bath.bandwidth + abs(pulse.detuning(system))) / c
    dz = 0.011 / max(k_max, 1e-300)
    dz = min(dz, -z_lo / 64.0)
    n_z = int(math.ceil(-z_lo / dz)) + 1
    z = np.linspace(z_lo, 0.0, n_z)
    dz = z[1] - z[0]
    # phi_a(z, 0) with carrier, trapezoid end weights folded in
    vals = pulse.shape_at(z).astype(complex) * np.exp(1j * pulse.carrier * z / c)
    vals[0] *= 0.5
    vals[-1] *= 0.5
    omega_start = system.omega_a + bath.offsets()[0]
    # F_j = dz * sum_m vals_m e^{-i omega_j z_m / c} via a chirp z-transform
    w = np.exp(-1j * bath.spacing * dz / c)
    a = np.exp(1j * omega_start * dz / c)
    f = czt(vals, m=bath.n_modes, w=w, a=a)
    omegas = system.omega_a + bath.offsets()
    f *= dz * np.exp(-1j * omegas * z_lo / c)
    # physical scale: with rho_eff = 1/spacing the captured weight is
    # sum |F_j|^2 * spacing / (2 pi c)^2 / rho_phys when fully inside
    amps = f * math.sqrt(bath.spacing / pulse.rho) / (2.0 * math.pi * c)
    captured = float(np.sum(np.abs(amps) ** 2))
    if captured < 0.99:
        raise BandwidthError(
            f"only {captured:.4f} of the pulse spectrum fits in the comb "
            "window; widen the bath or narrow the pulse"
        )
    return amps / math.sqrt(captured)


@dataclass(frozen=True)
class OracleRun:
    """States of a discrete-bath evolution at the requested output times.

    States are stored in the interaction-free rotating frame at
    omega_ref (the |e> diagonal); multiply state k by
    e^{-i omega_ref t_k} for lab-frame amplitudes.  Global per-state
    phases drop out of every measurement.
    """

    times: np.ndarray
    states: np.ndarray          # (n_out, dim) complex
    omega_ref: float
    bath: DiscreteBath
    system: LambdaSystem
    include_backward: bool
    norm_drift: float

    def __post_init__(self):
        self.times.flags.writeable = False
        self.states.flags.writeable = False

    def state_at(self, index: int) -> OneExcitationState:
        return OneExcitationState.unpack(self.states[index], self.bath.n_modes)

    def excited_series(self) -> np.ndarray:
        """psi~(t) in the omega_ref rotating frame (= psi e^{i omega_a t})."""
        return self.states[:, 0]

    def energy_series(self, h: sp.csr_matrix) -> np.ndarray:
        """<H>(t) including the frame shift; conserved up to solver error."""
        out = np.empty(self.times.size)
        shifted = h - sp.identity(h.shape[0], format="csr") * self.omega_ref
        for k in range(self.times.size):
            y = self.states[k]
            out[k] = float(np.real(np.vdot(y, shifted @ y))) \
                + self.omega_ref * float(np.real(np.vdot(y, y)))
        return out


def _rk4_sparse(h_shift: sp.csr_matrix, y0: np.ndarray, t_out: np.ndarray,
                dt_target: float) -> tuple[np.ndarray, float]:
    n_out = t_out.size
    states = np.empty((n_out, y0.size), dtype=complex)
    states[0] = y0
    y = y0.copy()
    drift = 0.0
    for k in range(1, n_out):
        span = t_out[k] - t_out[k - 1]
        steps = max(1, int(math.ceil(span / dt_target - 1e-12)))
        hstep = span / steps
        for _ in range(steps):
            k1 = -1j * (h_shift @ y)
            k2 = -1j * (h_shift @ (y + 0.5 * hstep * k1))
            k3 = -1j * (h_shift @ (y + 0.5 * hstep * k2))
            k4 = -1j * (h_shift @ (y + hstep * k3))
            y = y + (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[k] = y
        drift = max(drift, abs(float(np.real(np.vdot(y, y))) - 1.0))
    return states, drift


def evolve(h: sp.csr_matrix, state: OneExcitationState, t_final: float, *,
           bath: DiscreteBath, system: LambdaSystem, n_out: int = 201,
           dt: float | None = None, method: str = "auto") -> OracleRun:
    """Integrate i dy/dt = H y and record n_out snapshots on [0, t_final].

    Methods: "eigh" (exact dense eigendecomposition, dim <= 4097), "rk4"
    (fixed-step, norm drift checked against 1e-10), "expm" (Krylov-free
    scaling-and-squaring propagation, for long narrowband runs), "auto"
    picks by size.  The evolution happens in the frame rotating at the
    |e> diagonal, which removes the huge common optical phase.
    """
    if t_final <= 0:
        raise ParameterError("t_final must be positive")
    bath.check_against(system, t_final=t_final)
    dim = h.shape[0]
    y0 = state.pack()
    if y0.size != dim:
        raise ParameterError(f"state dim {y0.size} != hamiltonian dim {dim}")
    norm0 = float(np.real(np.vdot(y0, y0)))
    if abs(norm0 - 1.0) > 1e-9:
        raise ParameterError(f"initial state norm {norm0} != 1")

    omega_ref = float(np.real(h[0, 0]))
    h_shift = (h - omega_ref * sp.identity(dim, dtype=complex, format="csr")).tocsr()
    band = float(np.max(np.abs(h_shift.diagonal())))
    if dt is None:
        dt = 0.01 / band if band > 0 else t_final
    t_out = np.linspace(0.0, t_final, n_out)

    if method == "auto":
        if dim <= 2100:
            method = "eigh"
        elif t_final / dt <= 400_000:
            method = "rk4"
        else:
            method = "expm"

    if method == "eigh":
        if dim > 4097:
            raise ConfigurationError("eigh method limited to dim <= 4097")
        dense = h_shift.toarray()
        evals, evecs = np.linalg.eigh(dense)
        w0 = evecs.conj().T @ y0
        # y(t_k) = V diag(e^{-i evals t_k}) V^dag y0, all times at once
        states = (np.exp(-1j * np.outer(t_out, evals)) * w0) @ evecs.T
        drift = float(np.max(np.abs(np.sum(np.abs(states) ** 2, axis=1) - 1.0)))
    elif method == "rk4":
        states, drift = _rk4_sparse(h_shift, y0, t_out, dt)
    elif method == "expm":
        states = expm_multiply(-1j * h_shift.tocsc(), y0,
                               start=0.0, stop=t_final, num=n_out,
                               endpoint=True)
        states = np.asarray(states, dtype=complex)
        drift = float(np.max(np.abs(np.sum(np.abs(states) ** 2, axis=1) - 1.0)))
    else:
        raise ParameterError(f"unknown method {method!r}")

    if drift > DRIFT_TOL:
        raise NumericalConsistencyError(
            f"norm drift {drift:.3e} exceeds {DRIFT_TOL}; reduce the step"
        )
    return OracleRun(times=t_out, states=states, omega_ref=omega_ref,
                     bath=bath, system=system,
                     include_backward=state.backward is not None,
                     norm_drift=drift)


@dataclass(frozen=True)
class OracleMeasurement:
    """Exact observables of one snapshot, mixture-weighted."""

    t: float
    p_e: float
    n_a: float
    n_b: float
    p_ab: float
    overlap_sq: float
    lambdas: np.ndarray
    s_e: float
    s_q: float
    norm: float


@dataclass(frozen=True)
class OracleSeries:
    """Vectorized measurements over all snapshots of a run."""

    times: np.ndarray
    p_e: np.ndarray
    n_a: np.ndarray
    n_b: np.ndarray
    overlap_sq: np.ndarray
    lambdas: np.ndarray      # (n_out, 4)
    s_e: np.ndarray
    s_q: np.ndarray
    norm: np.ndarray

    @property
    def p_ab(self) -> np.ndarray:
        return self.n_b


def _entropy_rows(lams: np.ndarray) -> np.ndarray:
    lams = np.clip(lams, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lams > 0.0, lams * np.log(lams), 0.0)
    return -np.sum(terms, axis=-1)


def measure_series(run: OracleRun, mixture: InitialMixture) -> OracleSeries:
    """Exact partial trace of the environment at every snapshot.

    The environment state is rank <= 4: vacuum, the b-branch photon, and
    a 2x2 block mixing the scattered a photon with the free-flying pulse
    (the reference for the photon had the system started in |b>).  Its
    eigenvalues follow from scalar products of the stored amplitudes; no
    large matrix is ever diagonalized.
    """
    n = run.bath.n_modes
    states = run.states
    if run.include_backward:
        back = states[:, 1 + 2 * n:]
        if float(np.max(np.abs(back))) > 1e-12:
            raise ParameterError(
                "measure expects a forward-sector run; backward amplitudes "
                "are populated"
            )
        states = states[:, :1 + 2 * n]
    a_block = states[:, 1:1 + n]
    b_block = states[:, 1 + n:1 + 2 * n]
    p_e = np.abs(states[:, 0]) ** 2
    n_a = np.sum(np.abs(a_block) ** 2, axis=1)
    n_b = np.sum(np.abs(b_block) ** 2, axis=1)
    norm = p_e + n_a + n_b

    # free pulse reference in the same rotating frame
    a0 = a_block[0]
    offs = run.bath.offsets()
    phases = np.exp(-1j * np.outer(run.times, offs))
    free = phases * a0
    cross = np.sum(np.conj(a_block) * free, axis=1)

    p_a0, p_b0 = mixture.p_a0, mixture.p_b0
    lam1 = p_a0 * p_e
    lam2 = p_a0 * n_b
    alpha = p_a0 * n_a
    beta = np.full_like(alpha, p_b0)
    gamma2 = p_a0 * p_b0 * np.abs(cross) ** 2
    half = 0.5 * (alpha + beta)
    disc = np.sqrt(0.25 * (alpha - beta) ** 2 + gamma2)
    lam3 = half + disc
    lam4 = half - disc
    lams = np.stack([lam1, lam2, lam3, lam4], axis=1)

    with np.errstate(divide="ignore", invalid="ignore"):
        overlap_sq = np.where(n_a > 1e-14, np.abs(cross) ** 2 / np.where(
            n_a > 1e-14, n_a, 1.0), 0.0)
    s_e = _entropy_rows(lams)
    s_q = _entropy_rows(np.stack([p_e, n_a, n_b], axis=1))
    return OracleSeries(times=run.times.copy(), p_e=p_e, n_a=n_a, n_b=n_b,
                        overlap_sq=overlap_sq, lambdas=lams, s_e=s_e,
                        s_q=s_q, norm=norm)


def measure(run: OracleRun, mixture: InitialMixture,
            index: int = -1) -> OracleMeasurement:
    """Measurement of a single snapshot (default: the last one)."""
    series = measure_series(run, mixture)
    k = range(series.times.size)[index]
    return OracleMeasurement(
        t=float(series.times[k]), p_e=float(series.p_e[k]),
        n_a=float(series.n_a[k]), n_b=float(series.n_b[k]),
        p_ab=float(series.n_b[k]), overlap_sq=float(series.overlap_sq[k]),
        lambdas=series.lambdas[k].copy(), s_e=float(series.s_e[k]),
        s_q=float(series.s_q[k]), norm=float(series.norm[k]),
    )


DEFAULT_TOLERANCES = {
    "p_e": 1e-3,
    "p_ab": 1e-3,
    "n_a": 1e-3,
    "n_b": 1e-3,
    "s_e": 1e-2,
    "w": 5e-3,
    "q": 5e-3,
}


@dataclass(frozen=True)
class DeviationReport:
    """Worst-case oracle-vs-analytic deviations and their verdicts."""

    deviations: dict
    tolerances: dict
    failures: tuple
    norm_drift: float
    t_final: float
    n_modes: int
    bandwidth: float

    @property
    def passed(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "deviations": dict(self.deviations),
            "tolerances": dict(self.tolerances),
            "failures": list(self.failures),
            "norm_drift": self.norm_drift,
            "t_final": self.t_final,
            "n_modes": self.n_modes,
            "bandwidth": self.bandwidth,
        }


def _quadrature_work(system, pulse, times, psi_rot):
    g_a = system.coupling("a")
    shape = pulse.shape_at(-system.c_speed * times)
    delta_l = pulse.detuning(system)
    rot = shape * np.exp(-1j * delta_l * times) if delta_l != 0.0 else shape
    integrand = -2.0 * g_a * np.real(rot * np.conj(psi_rot))
    return system.omega_a * float(np.trapezoid(integrand, times))


def compare(system: LambdaSystem, pulse: PulseSpec, mixture: InitialMixture,
            bath: DiscreteBath | None = None, *, t_final: float | None = None,
            n_out: int = 301, method: str = "auto",
            tolerances: dict | None = None) -> DeviationReport:
    """Run the discrete-mode model and the analytic pipeline side by side.

    Work and heat are integrated with the same trapezoid rule on the
    same output grid for both sides, so their deviation reflects the
    dynamics, not quadrature differences.
    """
    if bath is None:
        bath = DiscreteBath.default(system)
    if t_final is None:
        t_final = 15.0 / system.gamma_total
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tol.update(tolerances)

    amps = discretize_pulse(pulse, bath, system)
    h = build_hamiltonian(system, bath)
    run = evolve(h, OneExcitationState.from_pulse(amps), t_final,
                 bath=bath, system=system, n_out=n_out, method=method)
    oracle = measure_series(run, mixture)

    rate = max(system.gamma_total, pulse.spectral_scale())
    dt = 0.005 / rate
    c = system.c_speed
    z_lo = -c * max(t_final, pulse.settle_time() * 1.2)
    grid = SimGrid(t_max=t_final, dt=dt, z_min=z_lo,
                   z_max=c * t_final * (1 + 1e-9) + c * dt, dz=c * dt)
    traj = integrate_psi(system, pulse, grid)

    t_out = run.times
    p_e_an = np.interp(t_out, traj.times, traj.p_e)
    p_ab_an = np.interp(t_out, traj.times, traj.p_ab)
    n_a_an = 1.0 - p_e_an - p_ab_an

    s_e_an = np.empty(t_out.size)
    for k, t in enumerate(t_out):
        field = field_amplitudes(traj, system, pulse, grid, float(t))
        ov = overlap_finite_time(field, pulse, system)
        ov_sq = 0.0 if ov.degenerate else min(abs(ov.value) ** 2, 1.0)
        spec = EnvSpectrum.from_branches(mixture, float(p_e_an[k]),
                                         float(n_a_an[k]), float(p_ab_an[k]),
                                         ov_sq)
        s_e_an[k] = spec.s_e

    w_or = _quadrature_work(system, pulse, t_out, run.excited_series())
    psi_an = np.interp(t_out, traj.times, traj.psi.real) \
        + 1j * np.interp(t_out, traj.times, traj.psi.imag)
    w_an = _quadrature_work(system, pulse, t_out, psi_an)
    gtot = system.gamma_total
    q_or = system.omega_a * gtot * float(np.trapezoid(oracle.p_e, t_out)) \
        - system.delta_ab * float(oracle.n_b[-1])
    q_an = system.omega_a * gtot * float(np.trapezoid(p_e_an, t_out)) \
        - system.delta_ab * float(p_ab_an[-1])

    deviations = {
        "p_e": float(np.max(np.abs(oracle.p_e - p_e_an))),
        "p_ab": float(np.max(np.abs(oracle.n_b - p_ab_an))),
        "n_a": float(np.max(np.abs(oracle.n_a - n_a_an))),
        "n_b": float(np.max(np.abs(oracle.n_b - p_ab_an))),
        "s_e": float(np.max(np.abs(oracle.s_e - s_e_an))),
        # energies compared in units of hbar omega_a so the verdict does
        # not depend on the absolute optical frequency
        "w": abs(w_or - w_an) / system.omega_a,
        "q": abs(q_or - q_an) / system.omega_a,
    }
    failures = tuple(name for name, dev in deviations.items()
                     if dev > tol[name])
    return DeviationReport(deviations=deviations, tolerances=tol,
                           failures=failures, norm_drift=run.norm_drift,
                           t_final=float(t_final), n_modes=bath.n_modes,
                           bandwidth=bath.bandwidth)
