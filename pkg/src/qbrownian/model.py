"""System + bath model declarations and the dissipation / noise kernels.

Conventions (hbar = k_B = 1):

* The system is N oscillators with masses M_r, frequencies Omega_r, each
  coupled linearly to one shared bath of oscillators through its position
  with per-oscillator weight w_r.

* The bath enters the reduced dynamics only through the spectral weight

      J(w) = (M_ref * gamma / pi) * w * (w / w_ref)**s * exp(-w**2 / cutoff**2)

  against which both memory kernels are integrals,

      dissipation_kernel: gamma_rr'(t) = -w_r w_r' Int J(w) sin(w t) dw
      noise_kernel:       nu_rr'(t)    = +w_r w_r' Int J(w) coth(w/2T) cos(w t) dw.

  The 1/pi prefactor normalizes the ohmic (s = 0) weak-coupling friction
  coefficient to exactly gamma, i.e. amplitudes relax as exp(-gamma t / 2)
  and the classical transition matrix approaches exp(-gamma t / 2) times a
  canonical transformation.

* Frequencies in SystemSpec are the physical (renormalized) ones: the
  equations of motion use the memory term in subtracted form,
  Int gamma(t-s) [X(s) - X(t)] ds - (Int_t^inf gamma) X(t), equivalently the
  standard quadratic counterterm is part of the Hamiltonian.  The discrete
  bath oracle includes the same counterterm, so both descriptions relax
  around the declared Omega_r.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as gamma_function

from .errors import QuadratureError

#: integration window in units of the cutoff; the Gaussian tail beyond
#: 8*cutoff is below 1e-27 of the peak.
OMEGA_MAX_CUTOFFS = 8.0


@dataclass(frozen=True)
class SpectralDensity:
    """Bath spectral function parameters.

    gamma     -- dissipation constant (frequency units)
    cutoff    -- high-frequency Gaussian cutoff
    exponent  -- infrared exponent s; 0 is ohmic
    omega_ref -- reference frequency scale entering (w/w_ref)**s
    mass_ref  -- mass entering the prefactor
    """

    gamma: float
    cutoff: float
    exponent: float = 0.0
    omega_ref: float = 1.0
    mass_ref: float = 1.0

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.cutoff <= 0 or self.omega_ref <= 0:
            raise ValueError("cutoff and omega_ref must be positive")
        if self.exponent < 0:
            raise ValueError("sub-ohmic exponents are not supported")

    @property
    def omega_max(self):
        return OMEGA_MAX_CUTOFFS * self.cutoff

    def weight(self, omega):
        """Spectral weight J(w) integrated against sin/cos in the kernels."""
        omega = np.asarray(omega, dtype=float)
        out = (self.mass_ref * self.gamma / np.pi) * omega * np.exp(
            -(omega**2) / self.cutoff**2
        )
        if self.exponent != 0.0:
            out = out * np.where(
                omega > 0, (omega / self.omega_ref) ** self.exponent, 0.0
            )
        return out

    def static_weight_integral(self):
        """Int_0^inf J(w)/w dw, the counterterm strength (closed form)."""
        s = self.exponent
        return (
            self.mass_ref
            * self.gamma
            / np.pi
            * self.omega_ref ** (-s)
            * 0.5
            * gamma_function((s + 1.0) / 2.0)
            * self.cutoff ** (s + 1.0)
        )

    def scalar_dissipation(self, t):
        """Scalar kernel -Int J(w) sin(w t) dw, vectorized over t."""
        t = np.asarray(t, dtype=float)
        if self.exponent == 0.0:
            lam = self.cutoff
            return (
                -(self.mass_ref * self.gamma * lam**3 / (4.0 * np.sqrt(np.pi)))
                * t
                * np.exp(-(lam**2) * t**2 / 4.0)
            )
        return -_kernel_quadrature(self, t, kind="sin")

    def scalar_noise(self, t, temperature):
        """Scalar kernel Int J(w) coth(w/2T) cos(w t) dw, vectorized over t."""
        t = np.asarray(t, dtype=float)
        return _kernel_quadrature(self, t, kind="cos", temperature=temperature)


@dataclass(frozen=True)
class SystemSpec:
    """Masses, frequencies, and bath-coupling weights of the N oscillators."""

    masses: tuple
    frequencies: tuple
    weights: tuple = None

    def __post_init__(self):
        masses = tuple(float(m) for m in np.atleast_1d(self.masses))
        freqs = tuple(float(f) for f in np.atleast_1d(self.frequencies))
        if self.weights is None:
            weights = tuple(1.0 for _ in masses)
        else:
            weights = tuple(float(w) for w in np.atleast_1d(self.weights))
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "weights", weights)
        if not (len(masses) == len(freqs) == len(weights)):
            raise ValueError("masses, frequencies, weights must have equal length")
        if any(m <= 0 for m in masses) or any(f <= 0 for f in freqs):
            raise ValueError("masses and frequencies must be positive")

    @property
    def n_oscillators(self):
        return len(self.masses)

    @property
    def mass_matrix(self):
        return np.diag(self.masses)

    @property
    def weight_vector(self):
        return np.array(self.weights)


@dataclass(frozen=True)
class BathState:
    """Initial thermal state of the bath."""

    temperature: float

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be nonnegative")

    def coth_factor(self, omega):
        """coth(w/2T) with the T -> 0 limit equal to 1."""
        omega = np.asarray(omega, dtype=float)
        if self.temperature == 0:
            return np.ones_like(omega)
        return 1.0 / np.tanh(omega / (2.0 * self.temperature))


@dataclass(frozen=True)
class ModelSpec:
    """Complete open-system model: system, spectral density, bath state."""

    system: SystemSpec
    spectral_density: SpectralDensity
    bath: BathState

    @property
    def n_oscillators(self):
        return self.system.n_oscillators


@dataclass(frozen=True)
class CaseParams:
    """Two-oscillator parameterization by detuning and scaled temperature.

    delta = (Omega_1^2 - Omega_2^2) / (Omega_1^2 + Omega_2^2), theta = T
    divided by sqrt(Omega_1^2 + Omega_2^2).  Frequencies are normalized so
    that Omega_1^2 + Omega_2^2 = frequency_scale^2 (default 1).
    """

    delta: float
    theta: float
    frequency_scale: float = 1.0

    def __post_init__(self):
        if not abs(self.delta) < 1:
            raise ValueError("|delta| must be < 1")
        if self.theta < 0:
            raise ValueError("theta must be nonnegative")

    @property
    def omega1(self):
        return self.frequency_scale * np.sqrt((1.0 + self.delta) / 2.0)

    @property
    def omega2(self):
        return self.frequency_scale * np.sqrt((1.0 - self.delta) / 2.0)

    @property
    def temperature(self):
        return self.theta * self.frequency_scale

    def to_model(self, gamma, cutoff, mass=1.0, exponent=0.0, omega_ref=1.0):
        """Expand to a symmetric equal-mass two-oscillator ModelSpec."""
        system = SystemSpec(
            masses=(mass, mass),
            frequencies=(self.omega1, self.omega2),
            weights=(1.0, 1.0),
        )
        sd = SpectralDensity(
            gamma=gamma,
            cutoff=cutoff,
            exponent=exponent,
            omega_ref=omega_ref,
            mass_ref=mass,
        )
        return ModelSpec(system=system, spectral_density=sd, bath=BathState(self.temperature))


# ---------------------------------------------------------------------------
# kernel quadrature


def _kernel_quadrature(sd, t, kind, temperature=None, epsabs=1e-12, epsrel=1e-10):
    """Adaptive quadrature of J(w) [coth] sin/cos(w t) over [0, omega_max]."""
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(tt)
    coth = (lambda w: 1.0) if temperature in (None, 0.0) else (
        lambda w: 1.0 / np.tanh(w / (2.0 * temperature))
    )
    osc = np.cos if kind == "cos" else np.sin

    for i, ti in enumerate(tt.ravel()):
        def integrand(w, ti=ti):
            if w == 0.0:
                # J(0) coth(0/2T) -> 2 T M gamma / pi for the ohmic cos kernel
                if kind == "cos" and temperature not in (None, 0.0) and sd.exponent == 0:
                    return 2.0 * temperature * sd.mass_ref * sd.gamma / np.pi
                return 0.0
            return sd.weight(w) * coth(w) * osc(w * ti)

        # cap subinterval length so the oscillation w*t is resolved
        pieces = max(1, int(np.ceil(abs(ti) * sd.omega_max / (20.0 * np.pi))))
        edges = np.linspace(0.0, sd.omega_max, pieces + 1)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, err = quad(
                integrand, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=400
            )
            if err > max(epsabs, epsrel * max(abs(val), 1e-30)) * 50:
                raise QuadratureError(
                    f"kernel quadrature error {err:.2e} on [{lo:.3g}, {hi:.3g}] "
                    f"exceeds tolerance (t = {ti:.4g})"
                )
            total += val
        out.ravel()[i] = total
    return out if np.ndim(t) else float(out.ravel()[0])


def dissipation_kernel(system, sd, t):
    """N x N dissipation kernel matrix gamma_rr'(t) = -w_r w_r' Int J sin."""
    if t < 0:
        raise ValueError("kernel time must be nonnegative")
    w = system.weight_vector
    if sd.exponent == 0.0:
        scalar = float(sd.scalar_dissipation(t))
    else:
        scalar = float(-_kernel_quadrature(sd, t, kind="sin"))
    return scalar * np.outer(w, w)


def noise_kernel(system, sd, bath, t):
    """N x N noise kernel matrix nu_rr'(t) = w_r w_r' Int J coth cos."""
    if t < 0:
        raise ValueError("kernel time must be nonnegative")
    w = system.weight_vector
    scalar = float(_kernel_quadrature(sd, t, kind="cos", temperature=bath.temperature))
    return scalar * np.outer(w, w)
