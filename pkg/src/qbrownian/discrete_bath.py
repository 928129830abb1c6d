"""Independent ground truth: exact closed-system evolution with an explicit
finite bath, followed by partial trace over the bath.

The spectral weight J(w) is binned onto a linear frequency grid; each bin
becomes one bath oscillator with coupling c_i^2 = 2 m_i w_i * (bin mass of
J), which reproduces the kernel integrals bin by bin.  The full quadratic
Hamiltonian (including the same frequency counterterm as the reduced
dynamics) generates a linear flow; covariances evolve by exact matrix
conjugation with the flow exponential, so the only approximation is the
bath discretization itself.  Results are meaningful up to the Poincare
recurrence time 2 pi / (grid spacing).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import NumericsError
from .model import ModelSpec
from .phase_space import PhaseSpaceLayout, build_symplectic_form


@dataclass(frozen=True)
class BathRealization:
    """Explicit finite bath: frequencies, couplings, unit masses."""

    omegas: np.ndarray
    couplings: np.ndarray
    masses: np.ndarray

    @property
    def n_modes(self):
        return len(self.omegas)

    @property
    def grid_spacing(self):
        return float(self.omegas[1] - self.omegas[0]) if self.n_modes > 1 else np.inf

    @property
    def recurrence_time(self):
        return 2.0 * np.pi / self.grid_spacing

    def kernel_weight_sum(self, f):
        """Sum_i c_i^2/(2 m_i w_i) f(w_i), the mode-sum version of Int J f."""
        return np.sum(
            self.couplings**2 / (2.0 * self.masses * self.omegas) * f(self.omegas)
        )

    def dissipation_kernel(self, t):
        """Mode-sum dissipation kernel -Sum c^2/(2 m w) sin(w t)."""
        w2 = self.couplings**2 / (2.0 * self.masses * self.omegas)
        return -np.sin(np.multiply.outer(t, self.omegas)) @ w2

    def noise_kernel(self, t, temperature):
        coth = (
            1.0 / np.tanh(self.omegas / (2.0 * temperature))
            if temperature > 0
            else np.ones_like(self.omegas)
        )
        w2 = self.couplings**2 / (2.0 * self.masses * self.omegas) * coth
        return np.cos(np.multiply.outer(t, self.omegas)) @ w2


def discretize_bath(sd, n_modes, omega_max=None, n_bin_quad=64):
    """Linear-grid bath whose couplings carry the exact per-bin J mass.

    c_i^2 = 2 m_i w_i Int_bin J(w) dw, with w_i the bin midpoints; the
    midpoint-value limit of this is the familiar 2 m w^2 I(w) dw rule.
    """
    if n_modes < 10:
        raise ValueError("need at least 10 bath modes")
    if omega_max is None:
        omega_max = 5.0 * sd.cutoff
    if omega_max < 5.0 * sd.cutoff:
        raise ValueError("omega_max must cover at least 5 cutoffs")
    edges = np.linspace(0.0, omega_max, n_modes + 1)
    mids = 0.5 * (edges[1:] + edges[:-1])
    x, w = np.polynomial.legendre.leggauss(n_bin_quad)
    half = 0.5 * (edges[1] - edges[0])
    nodes = mids[:, None] + half * x[None, :]
    bin_mass = (sd.weight(nodes.ravel()).reshape(nodes.shape) * (half * w)[None, :]).sum(
        axis=1
    )
    masses = np.ones(n_modes)
    couplings = np.sqrt(2.0 * masses * mids * np.clip(bin_mass, 0.0, None))
    return BathRealization(omegas=mids, couplings=couplings, masses=masses)


def coupling_resolution_warning(model, bath):
    """Report when the bath grid is too coarse for the damping width."""
    if bath.grid_spacing > model.spectral_density.gamma:
        return (
            f"bath grid spacing {bath.grid_spacing:.3g} exceeds the damping "
            f"width gamma = {model.spectral_density.gamma:.3g}; long-time "
            "accuracy is limited by the recurrence window"
        )
    return None


# ---------------------------------------------------------------------------
# closed-system evolution


@dataclass(frozen=True)
class ClosedSystem:
    """Linear flow generator and bookkeeping for system + explicit bath."""

    model: ModelSpec
    bath: BathRealization
    generator: np.ndarray     # (2N+2M) x (2N+2M) flow matrix

    @property
    def n_system(self):
        return self.model.n_oscillators

    @property
    def dim(self):
        return self.generator.shape[0]


def build_closed_system(model, bath):
    """Hamiltonian flow generator of system + bath in interleaved layout.

    The system stiffness includes the counterterm
    sum_i c_i^2 / (m_i w_i^2) * w_r w_r', matching the subtracted memory
    of the reduced description, so both relax around the declared
    frequencies.
    """
    sys = model.system
    N = sys.n_oscillators
    M = bath.n_modes
    dim = 2 * (N + M)
    G = np.zeros((dim, dim))
    wvec = sys.weight_vector
    counter = np.sum(bath.couplings**2 / (bath.masses * bath.omegas**2))
    for r in range(N):
        G[2 * r + 1, 2 * r + 1] = 1.0 / sys.masses[r]
        for s in range(N):
            G[2 * r, 2 * s] += counter * wvec[r] * wvec[s]
        G[2 * r, 2 * r] += sys.masses[r] * sys.frequencies[r] ** 2
    for i in range(M):
        qi = 2 * N + 2 * i
        G[qi, qi] = bath.masses[i] * bath.omegas[i] ** 2
        G[qi + 1, qi + 1] = 1.0 / bath.masses[i]
        for r in range(N):
            G[2 * r, qi] = G[qi, 2 * r] = wvec[r] * bath.couplings[i]
    layout = PhaseSpaceLayout(N + M)
    omega = build_symplectic_form(layout)
    return ClosedSystem(model=model, bath=bath, generator=omega @ G)


def thermal_bath_covariance(bath, temperature):
    """Block-diagonal thermal covariance of the bath modes."""
    coth = (
        1.0 / np.tanh(bath.omegas / (2.0 * temperature))
        if temperature > 0
        else np.ones_like(bath.omegas)
    )
    out = np.zeros((2 * bath.n_modes, 2 * bath.n_modes))
    for i in range(bath.n_modes):
        out[2 * i, 2 * i] = coth[i] / (2.0 * bath.masses[i] * bath.omegas[i])
        out[2 * i + 1, 2 * i + 1] = bath.masses[i] * bath.omegas[i] * coth[i] / 2.0
    return out


def initial_covariance(closed, V_system):
    """diag(V_system, thermal bath) for the closed system."""
    N, M = closed.n_system, closed.bath.n_modes
    V = np.zeros((closed.dim, closed.dim))
    V[: 2 * N, : 2 * N] = V_system
    V[2 * N :, 2 * N :] = thermal_bath_covariance(
        closed.bath, closed.model.bath.temperature
    )
    return V


def evolve_closed(closed, V_full, times):
    """Exact covariance evolution V(t) = e^{At} V e^{A^T t} on a uniform grid.

    Returns the (n_times, dim, dim) trajectory.  The uniform grid lets a
    single step exponential be reused; each step is an exact conjugation,
    so no integrator error is introduced.
    """
    times = np.asarray(times, dtype=float)
    if times[0] != 0.0 or (len(times) > 1 and not np.allclose(
        np.diff(times), times[1] - times[0], rtol=1e-9, atol=0.0
    )):
        raise ValueError("closed evolution expects a uniform grid from 0")
    coupled = np.any(closed.bath.couplings != 0.0)
    if coupled and times[-1] > closed.bath.recurrence_time:
        raise NumericsError(
            f"requested horizon {times[-1]:.3g} exceeds the bath recurrence "
            f"time {closed.bath.recurrence_time:.3g}; the oracle is invalid there"
        )
    out = np.empty((len(times),) + V_full.shape)
    out[0] = V_full
    if len(times) > 1:
        E = expm(closed.generator * (times[1] - times[0]))
        V = V_full
        for k in range(1, len(times)):
            V = E @ V @ E.T
            out[k] = 0.5 * (V + V.T)
            V = out[k]
    return out


def reduced_covariance(closed, V_full):
    """System sub-block: the Gaussian partial trace over the bath."""
    n = 2 * closed.n_system
    return np.asarray(V_full)[..., :n, :n]


def oracle_covariances(model, V_system, times, n_modes, omega_max=None):
    """Reduced system covariances from the explicit-bath closed evolution."""
    bath = discretize_bath(model.spectral_density, n_modes, omega_max)
    closed = build_closed_system(model, bath)
    V0 = initial_covariance(closed, V_system)
    traj = evolve_closed(closed, V0, times)
    return reduced_covariance(closed, traj), bath
