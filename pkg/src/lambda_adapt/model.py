"""System, pulse, mixture, and grid value types.

Geometry conventions: the emitter sits at z = 0, the incoming photon
travels toward +z, and the initial envelope lives on z <= 0 so that the
front of the pulse reaches the emitter at t = 0.  Envelope shapes are
normalized so that (1 / (2 pi rho c)) * integral |phi(z, 0)|^2 dz = 1,
which makes the one-photon state unit norm.  hbar = 1 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import (
    ConfigurationError,
    DegenerateInputError,
    ParameterError,
    UnsupportedEnvelopeError,
)

__all__ = [
    "LambdaSystem",
    "Exponential",
    "Gaussian",
    "Rectangular",
    "Sampled",
    "PulseSpec",
    "InitialMixture",
    "SimGrid",
    "make_pulse",
    "envelope_at",
]

# Gaussian envelopes are centered this many rms widths before the emitter,
# which keeps the truncated weight at z > 0 below e^-32.
_GAUSS_OFFSET = 8.0


@dataclass(frozen=True)
class LambdaSystem:
    """Three-level lambda emitter coupled to a unidirectional waveguide.

    Parameters
    ----------
    omega_a : float
        |a> -> |e> transition frequency (sets the energy scale of work).
    delta_ab : float
        Energy of |b> above |a>; omega_b = omega_a - delta_ab.
    gamma_a, gamma_b : float
        Decay rates of |e> into the a- and b-branch continua.
    rho_density : float
        Frequency density of waveguide modes (flat).
    c_speed : float
        Propagation speed in the waveguide.
    """

    omega_a: float
    delta_ab: float = 0.0
    gamma_a: float = 1.0
    gamma_b: float = 1.0
    rho_density: float = 1.0
    c_speed: float = 1.0

    def __post_init__(self):
        if not self.omega_a > 0:
            raise ParameterError(f"omega_a must be positive, got {self.omega_a}")
        if self.gamma_a <= 0 or self.gamma_b <= 0:
            raise ParameterError(
                f"decay rates must be positive, got gamma_a={self.gamma_a}, "
                f"gamma_b={self.gamma_b}"
            )
        if self.rho_density <= 0 or self.c_speed <= 0:
            raise ParameterError("rho_density and c_speed must be positive")
        if self.omega_b <= 0:
            raise ParameterError(
                f"omega_b = omega_a - delta_ab = {self.omega_b} must stay positive"
            )

    @property
    def omega_b(self) -> float:
        return self.omega_a - self.delta_ab

    @property
    def gamma_total(self) -> float:
        return self.gamma_a + self.gamma_b

    def coupling(self, branch: str) -> float:
        """Flat coupling constant g_k = sqrt(Gamma_k / (2 pi rho))."""
        if branch == "a":
            gamma = self.gamma_a
        elif branch == "b":
            gamma = self.gamma_b
        else:
            raise ParameterError(f"branch must be 'a' or 'b', got {branch!r}")
        return math.sqrt(gamma / (2.0 * math.pi * self.rho_density))


@dataclass(frozen=True)
class Exponential:
    """Rising exponential envelope, exp(Delta z / 2c) on z <= 0.

    The Fourier transform is a Lorentzian of HWHM ``linewidth / 2``
    centered on the carrier, so this is the wavepacket emitted by
    time-reversing the decay of an emitter with linewidth ``linewidth``.
    """

    linewidth: float

    def _check(self):
        if not self.linewidth > 0:
            raise ParameterError(f"linewidth must be positive, got {self.linewidth}")

    def norm_constant(self, rho, c):
        return math.sqrt(2.0 * math.pi * rho * self.linewidth)

    def shape_values(self, z, rho, c):
        z = np.asarray(z, dtype=float)
        out = np.where(z <= 0.0, np.exp(0.5 * self.linewidth * np.minimum(z, 0.0) / c), 0.0)
        return self.norm_constant(rho, c) * out

    def spectral_scale(self):
        return self.linewidth

    def settle_time(self, c):
        # amplitude at the emitter falls as exp(-linewidth t / 2)
        return 20.0 / self.linewidth

    def peak_intensity_rate(self, rho, c):
        return self.linewidth

    def drive_breakpoints(self, c):
        return ()

    def space_breakpoints(self, c):
        return (0.0,)


@dataclass(frozen=True)
class Gaussian:
    """Gaussian envelope of temporal rms width ``sigma``.

    Centered at z0 = -offset * c * sigma and truncated to z <= 0.  The
    default offset of 8 puts the truncated weight at ~e^-32; smaller
    offsets (>= 4) trade a still-negligible truncation for an earlier
    arrival of the peak.  The normalization accounts for the truncation
    exactly.
    """

    sigma: float
    offset: float = _GAUSS_OFFSET

    def _check(self):
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if not self.offset >= 4.0:
            raise ParameterError(
                f"offset must be >= 4 sigma to keep the truncated tail "
                f"negligible, got {self.offset}")

    @property
    def _offset(self):
        return self.offset * self.sigma

    def norm_constant(self, rho, c):
        s = c * self.sigma
        weight = s * math.sqrt(2.0 * math.pi) * ndtr(self.offset)
        return math.sqrt(2.0 * math.pi * rho * c / weight)

    def shape_values(self, z, rho, c):
        z = np.asarray(z, dtype=float)
        s = c * self.sigma
        z0 = -c * self._offset
        out = np.where(z <= 0.0, np.exp(-((z - z0) ** 2) / (4.0 * s * s)), 0.0)
        return self.norm_constant(rho, c) * out

    def spectral_scale(self):
        return 1.0 / self.sigma

    def settle_time(self, c):
        return (self.offset + 6.5) * self.sigma

    def peak_intensity_rate(self, rho, c):
        return self.norm_constant(rho, c) ** 2 / (2.0 * math.pi * rho)

    def drive_breakpoints(self, c):
        return ()

    def space_breakpoints(self, c):
        return (0.0,)


@dataclass(frozen=True)
class Rectangular:
    """Flat envelope of duration ``duration`` (support -c tau <= z <= 0)."""

    duration: float

    def _check(self):
        if not self.duration > 0:
            raise ParameterError(f"duration must be positive, got {self.duration}")

    def norm_constant(self, rho, c):
        return math.sqrt(2.0 * math.pi * rho / self.duration)

    def shape_values(self, z, rho, c):
        z = np.asarray(z, dtype=float)
        inside = (z <= 0.0) & (z >= -c * self.duration)
        return self.norm_constant(rho, c) * np.where(inside, 1.0, 0.0)

    def spectral_scale(self):
        return 1.0 / self.duration

    def settle_time(self, c):
        return self.duration

    def peak_intensity_rate(self, rho, c):
        return 1.0 / self.duration

    def drive_breakpoints(self, c):
        # the drive switches off abruptly when the back edge passes z = 0
        return (self.duration,)

    def space_breakpoints(self, c):
        return (-c * self.duration, 0.0)


@dataclass(frozen=True)
class Sampled:
    """Envelope given on a discrete z grid, linearly interpolated.

    The amplitude may be complex.  Outside the sampled window the shape
    is zero (hard truncation).  ``make_pulse`` renormalizes the samples;
    constructing the dataclass directly performs no validation.
    """

    z: np.ndarray
    amplitude: np.ndarray

    def _check(self):
        z = np.asarray(self.z, dtype=float)
        amp = np.asarray(self.amplitude)
        if z.ndim != 1 or amp.shape != z.shape or z.size < 2:
            raise ParameterError("sampled envelope needs matching 1-d z and amplitude")
        if np.any(np.diff(z) <= 0):
            raise ParameterError("sampled z grid must be strictly increasing")
        if np.any((np.abs(amp) > 0) & (z > 0)):
            raise ParameterError("sampled envelope has support at z > 0")
        if not np.all(np.isfinite(z)) or not np.all(np.isfinite(amp)):
            raise ParameterError("sampled envelope contains non-finite values")

    def norm_constant(self, rho, c):
        z = np.asarray(self.z, dtype=float)
        amp = np.asarray(self.amplitude, dtype=complex)
        raw = np.trapezoid(np.abs(amp) ** 2, z)
        if raw <= 0.0:
            raise DegenerateInputError("sampled envelope has zero norm")
        return math.sqrt(2.0 * math.pi * rho * c / raw)

    def shape_values(self, z, rho, c):
        zq = np.asarray(z, dtype=float)
        amp = np.asarray(self.amplitude, dtype=complex)
        k = self.norm_constant(rho, c)
        re = np.interp(zq, self.z, amp.real, left=0.0, right=0.0)
        im = np.interp(zq, self.z, amp.imag, left=0.0, right=0.0)
        return k * (re + 1j * im)

    def spectral_scale(self):
        # resolve features down to the sample spacing
        dz = float(np.min(np.diff(np.asarray(self.z, dtype=float))))
        span = float(self.z[-1] - self.z[0])
        return max(2.0 / span, 0.2 / dz)

    def settle_time(self, c):
        return -float(self.z[0]) / c

    def peak_intensity_rate(self, rho, c):
        amp = np.asarray(self.amplitude, dtype=complex)
        k = self.norm_constant(rho, c)
        return float(np.max(np.abs(k * amp) ** 2)) / (2.0 * math.pi * rho)

    def drive_breakpoints(self, c):
        return ()

    def space_breakpoints(self, c):
        return (float(self.z[0]), float(self.z[-1]))


_FAMILIES = (Exponential, Gaussian, Rectangular, Sampled)


@dataclass(frozen=True)
class PulseSpec:
    """A normalized single-photon wavepacket with a carrier frequency."""

    carrier: float
    envelope: object
    rho: float = 1.0
    c: float = 1.0

    def shape_at(self, z):
        """Normalized envelope phi_shape(z, 0), no carrier phase."""
        return self.envelope.shape_values(z, self.rho, self.c)

    def detuning(self, system: LambdaSystem) -> float:
        """Carrier detuning from the a-branch transition, delta_L."""
        return self.carrier - system.omega_a

    def spectral_scale(self) -> float:
        return self.envelope.spectral_scale()

    def settle_time(self) -> float:
        return self.envelope.settle_time(self.c)

    def drive_breakpoints(self):
        return self.envelope.drive_breakpoints(self.c)

    def space_breakpoints(self):
        return self.envelope.space_breakpoints(self.c)

    def peak_intensity_rate(self) -> float:
        return self.envelope.peak_intensity_rate(self.rho, self.c)


def make_pulse(envelope, carrier: float, system: LambdaSystem) -> PulseSpec:
    """Validate an envelope and attach it to the system's waveguide.

    Parameters
    ----------
    envelope : Exponential | Gaussian | Rectangular | Sampled
        Envelope family instance; Sampled data is renormalized here.
    carrier : float
        Carrier frequency omega_L (> 0).
    system : LambdaSystem
        Supplies the waveguide constants rho and c.
    """
    if not isinstance(envelope, _FAMILIES):
        raise UnsupportedEnvelopeError(
            f"unknown envelope family {type(envelope).__name__!r}"
        )
    if not carrier > 0:
        raise ParameterError(f"carrier frequency must be positive, got {carrier}")
    envelope._check()
    rho, c = system.rho_density, system.c_speed
    if isinstance(envelope, Sampled):
        k = envelope.norm_constant(rho, c)  # raises on zero norm
        amp = np.asarray(envelope.amplitude, dtype=complex) * k
        z = np.asarray(envelope.z, dtype=float).copy()
        amp.flags.writeable = False
        z.flags.writeable = False
        # after rescaling, norm_constant evaluates to 1 for the new samples
        envelope = Sampled(z=z, amplitude=amp)
    return PulseSpec(carrier=float(carrier), envelope=envelope, rho=rho, c=c)


def envelope_at(pulse: PulseSpec, z):
    """Initial pulse amplitude phi(z, 0) = phi_shape(z) e^{i omega_L z / c}.

    Accepts a scalar or an array of positions.
    """
    zq = np.asarray(z, dtype=float)
    vals = pulse.shape_at(zq) * np.exp(1j * pulse.carrier * zq / pulse.c)
    if np.isscalar(z) or getattr(z, "ndim", 0) == 0:
        return complex(vals)
    return vals


@dataclass(frozen=True)
class InitialMixture:
    """Classical mixture of the two ground states before the pulse."""

    p_a0: float
    p_b0: float

    def __post_init__(self):
        if min(self.p_a0, self.p_b0) < 0 or abs(self.p_a0 + self.p_b0 - 1.0) > 1e-12:
            raise ParameterError(
                f"mixture weights must be a distribution, got ({self.p_a0}, {self.p_b0})"
            )

    @classmethod
    def pure_a(cls):
        return cls(1.0, 0.0)

    @classmethod
    def spontaneous(cls, system: LambdaSystem):
        """Mixture left by spontaneous emission from |e>: p_k = Gamma_k / Gamma."""
        g = system.gamma_total
        return cls(system.gamma_a / g, system.gamma_b / g)


@dataclass(frozen=True)
class SimGrid:
    """Uniform time step and spatial window for trajectory and field work."""

    t_max: float
    dt: float
    z_min: float
    z_max: float
    dz: float

    def validate(self, system: LambdaSystem, pulse: PulseSpec):
        if min(self.t_max, self.dt, self.dz) <= 0:
            raise ConfigurationError("t_max, dt, dz must all be positive")
        rate = max(system.gamma_total, pulse.spectral_scale())
        if self.dt > 0.01 / rate * (1 + 1e-9):
            raise ConfigurationError(
                f"dt = {self.dt} too coarse; need dt <= 0.01 / "
                f"max(gamma_total, spectral scale) = {0.01 / rate:.3g}"
            )
        c = system.c_speed
        if self.z_min > -c * self.t_max * (1 - 1e-12):
            raise ConfigurationError(
                f"z_min = {self.z_min} does not cover the initial pulse; "
                f"need z_min <= -c t_max = {-c * self.t_max:.6g}"
            )
        if self.dz > c * self.dt * (1 + 1e-9):
            raise ConfigurationError(
                f"dz = {self.dz} must not exceed c dt = {c * self.dt:.3g}"
            )

    @classmethod
    def auto(cls, system: LambdaSystem, pulse: PulseSpec, *, t_max=None,
             dt=None, ledger_tol=None):
        """Build a grid adequate for the given system and pulse.

        ``ledger_tol`` tightens dt so the trapezoid error of the heat and
        work quadratures (which scales as dt^2/12 times the peak curvature
        of p_e, bounded by 2 gamma_a * peak drive intensity) stays below
        roughly a quarter of the requested absolute tolerance.
        """
        rate = max(system.gamma_total, pulse.spectral_scale())
        if t_max is None:
            t_max = pulse.settle_time() + 20.0 / system.gamma_total
        if dt is None:
            dt = 0.005 / rate
            if ledger_tol is not None:
                curv = 2.0 * system.gamma_a * pulse.peak_intensity_rate()
                if curv > 0:
                    dt = min(dt, math.sqrt(1.5 * ledger_tol / curv))
        c = system.c_speed
        grid = cls(t_max=float(t_max), dt=float(dt),
                   z_min=-c * float(t_max), z_max=c * float(t_max),
                   dz=c * float(dt))
        grid.validate(system, pulse)
        return grid
