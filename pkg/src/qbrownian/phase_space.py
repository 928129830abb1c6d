"""Phase-space conventions, symplectic forms, and covariance-matrix algebra.

Units are hbar = k_B = 1 throughout the package.  Phase-space coordinates
are ordered interleaved, (X_1, P_1, X_2, P_2, ..., X_N, P_N); this is the
single canonical layout.  The (+,-) coordinates used for two-oscillator
witnesses are a view obtained with :func:`plus_minus_rotation`, never a
second storage format.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnphysicalStateError

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class PhaseSpaceLayout:
    """Index bookkeeping for N oscillators in interleaved ordering."""

    n_oscillators: int

    def __post_init__(self):
        if self.n_oscillators < 1:
            raise ValueError("need at least one oscillator")

    @property
    def dim(self):
        return 2 * self.n_oscillators

    def x_index(self, r):
        return 2 * r

    def p_index(self, r):
        return 2 * r + 1


def build_symplectic_form(layout):
    """Block-diagonal Omega with 2x2 blocks J = [[0, 1], [-1, 0]]."""
    n = layout.n_oscillators
    omega = np.zeros((2 * n, 2 * n))
    for r in range(n):
        omega[2 * r, 2 * r + 1] = 1.0
        omega[2 * r + 1, 2 * r] = -1.0
    return omega


def partial_transpose_matrix(layout, subset):
    """Diagonal +-1 matrix inverting the momenta of the given oscillators."""
    subset = frozenset(subset)
    n = layout.n_oscillators
    if not subset:
        raise ValueError("partial transpose needs a nonempty subset")
    if not subset < set(range(n)):
        raise ValueError("subset must be a proper subset of range(N)")
    diag = np.ones(2 * n)
    for r in subset:
        diag[2 * r + 1] = -1.0
    return np.diag(diag)


def partial_transpose_form(layout, subset):
    """Momentum-inverted symplectic form Lambda Omega Lambda."""
    lam = partial_transpose_matrix(layout, subset)
    omega = build_symplectic_form(layout)
    return lam @ omega @ lam


def min_ppt_eigenvalue(V, omega_tilde):
    """Smallest eigenvalue of the Hermitian matrix V + (i/2) Omega_tilde.

    A negative value certifies entanglement for any state; a nonnegative
    value certifies separability only for Gaussian states.
    """
    V = np.asarray(V, dtype=float)
    if not np.allclose(V, V.T, atol=HERMITIAN_TOL * max(1.0, np.abs(V).max())):
        raise ValueError("covariance matrix must be symmetric")
    herm = V + 0.5j * np.asarray(omega_tilde)
    return float(np.linalg.eigvalsh(herm)[0])


def plus_minus_rotation(layout):
    """Linear map to (X+, P+, X-, P-) coordinates for two oscillators.

    X+- = (X_1 +- X_2)/2 and P+- = P_1 +- P_2.  The map is canonical;
    partial transposition of oscillator 2 acts on these coordinates by
    exchanging P+ and P-.
    """
    if layout.n_oscillators != 2:
        raise ValueError("plus/minus coordinates are defined for N = 2")
    return np.array(
        [
            [0.5, 0.0, 0.5, 0.0],
            [0.0, 1.0, 0.0, 1.0],
            [0.5, 0.0, -0.5, 0.0],
            [0.0, 1.0, 0.0, -1.0],
        ]
    )


def symplectic_eigenvalues(V, omega=None):
    """Symplectic spectrum of a covariance matrix (>= 1/2 for physical states)."""
    V = np.asarray(V, dtype=float)
    n = V.shape[0] // 2
    if omega is None:
        omega = build_symplectic_form(PhaseSpaceLayout(n))
    ev = np.linalg.eigvals(1j * omega @ V)
    return np.sort(np.abs(ev))[::2][:n]


def physicality_defect(V, omega=None):
    """Most negative eigenvalue of V + (i/2)Omega (0 for exactly pure states)."""
    V = np.asarray(V, dtype=float)
    n = V.shape[0] // 2
    if omega is None:
        omega = build_symplectic_form(PhaseSpaceLayout(n))
    return float(np.linalg.eigvalsh(V + 0.5j * omega)[0])


def require_physical(V, omega=None, tol=1e-9):
    """Raise UnphysicalStateError naming the violated eigenvalue."""
    lam = physicality_defect(V, omega)
    if lam < -tol:
        raise UnphysicalStateError(
            f"covariance violates the uncertainty relation: "
            f"min eig(V + i/2 Omega) = {lam:.3e}"
        )
    return V


# ---------------------------------------------------------------------------
# covariance presets


def vacuum_covariance(layout):
    """V = I/2, the ground state of unit-impedance oscillators (M_r Omega_r = 1)."""
    return 0.5 * np.eye(layout.dim)


def thermal_covariance(layout, nu):
    """Isotropic thermal-like covariance nu * I with nu >= 1/2."""
    if nu < 0.5:
        raise ValueError("thermal covariance needs nu >= 1/2")
    return float(nu) * np.eye(layout.dim)


def squeezer(layout, r, oscillator):
    """Single-mode squeezing symplectic diag(e^-r, e^r) on one oscillator."""
    S = np.eye(layout.dim)
    S[2 * oscillator, 2 * oscillator] = np.exp(-r)
    S[2 * oscillator + 1, 2 * oscillator + 1] = np.exp(r)
    return S


def rotation(layout, theta, oscillator):
    """Single-mode phase-space rotation on one oscillator."""
    S = np.eye(layout.dim)
    c, s = np.cos(theta), np.sin(theta)
    i = 2 * oscillator
    S[i : i + 2, i : i + 2] = [[c, s], [-s, c]]
    return S


def beamsplitter(layout, theta, pair=(0, 1)):
    """Passive two-mode mixing of the given oscillator pair."""
    S = np.eye(layout.dim)
    c, s = np.cos(theta), np.sin(theta)
    a, b = (2 * pair[0], 2 * pair[1])
    for k in range(2):
        S[a + k, a + k] = c
        S[b + k, b + k] = c
        S[a + k, b + k] = s
        S[b + k, a + k] = -s
    return S


def two_mode_squeezer(layout, r, pair=(0, 1)):
    """Two-mode squeezing symplectic on the given oscillator pair."""
    S = np.eye(layout.dim)
    ch, sh = np.cosh(r), np.sinh(r)
    a, b = (2 * pair[0], 2 * pair[1])
    S[a, a] = S[b, b] = ch
    S[a + 1, a + 1] = S[b + 1, b + 1] = ch
    S[a, b] = S[b, a] = sh
    S[a + 1, b + 1] = S[b + 1, a + 1] = -sh
    return S


def two_mode_squeezed_covariance(layout, r):
    """Covariance of the two-mode squeezed vacuum with squeeze parameter r."""
    if layout.n_oscillators != 2:
        raise ValueError("two-mode squeezed state needs N = 2")
    S = two_mode_squeezer(layout, r)
    return 0.5 * S @ S.T


def factorized_squeezed_covariance(layout, r1, r2):
    """Product of two single-mode squeezed vacua."""
    if layout.n_oscillators != 2:
        raise ValueError("factorized squeezed preset needs N = 2")
    S = squeezer(layout, r1, 0) @ squeezer(layout, r2, 1)
    return 0.5 * S @ S.T


def random_pure_covariance(layout, rng, max_squeeze=1.5):
    """Covariance V = S S^T / 2 of a random pure Gaussian state.

    S is a product of random rotations, single-mode squeezers and (for
    N >= 2) beamsplitters and two-mode squeezers with squeeze parameters
    bounded by max_squeeze.
    """
    n = layout.n_oscillators
    S = np.eye(layout.dim)
    for r in range(n):
        S = rotation(layout, rng.uniform(0, 2 * np.pi), r) @ S
        S = squeezer(layout, rng.uniform(-max_squeeze, max_squeeze), r) @ S
    for a in range(n):
        for b in range(a + 1, n):
            S = beamsplitter(layout, rng.uniform(0, 2 * np.pi), (a, b)) @ S
            S = two_mode_squeezer(
                layout, rng.uniform(-max_squeeze, max_squeeze), (a, b)
            ) @ S
    for r in range(n):
        S = rotation(layout, rng.uniform(0, 2 * np.pi), r) @ S
    return 0.5 * S @ S.T


def random_factorized_pure_covariance(layout, rng, max_squeeze=1.5):
    """Covariance of a random product of single-mode pure Gaussian states."""
    n = layout.n_oscillators
    S = np.eye(layout.dim)
    for r in range(n):
        S = rotation(layout, rng.uniform(0, 2 * np.pi), r) @ S
        S = squeezer(layout, rng.uniform(-max_squeeze, max_squeeze), r) @ S
        S = rotation(layout, rng.uniform(0, 2 * np.pi), r) @ S
    return 0.5 * S @ S.T


def random_orthosymplectic(layout, rng):
    """Random passive (orthogonal and symplectic) transformation."""
    n = layout.n_oscillators
    S = np.eye(layout.dim)
    for r in range(n):
        S = rotation(layout, rng.uniform(0, 2 * np.pi), r) @ S
    for a in range(n):
        for b in range(a + 1, n):
            S = beamsplitter(layout, rng.uniform(0, 2 * np.pi), (a, b)) @ S
    return S
