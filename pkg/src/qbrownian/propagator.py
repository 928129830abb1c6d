"""Gaussian phase-space propagator: classical transition matrix R(t) and
environment-induced diffusion matrix S(t).

A covariance matrix evolves as V_t = R(t) V_0 R(t)^T + S(t).  R is
assembled from the sine-like homogeneous solution v(t) of the dissipative
classical equations of motion (v(0) = 0, vdot(0) = I),

    R = [[vdot, v M^-1], [M vddot, M vdot M^-1]]   (position/momentum blocks),

reindexed to the interleaved layout.  S collapses the double-time noise
integrals to a single frequency quadrature: with

    G_r(w, t) = Int_0^t (v(s) M^-1 w)_r e^{iws} ds

and Gd its vdot analogue, each block is Int dw J(w) coth(w/2T) Re[G G*].

Two homogeneous-solution strategies:

* numeric -- a time-stepped Volterra scheme: fourth-order exponential
  Adams-Moulton stepping (the oscillator part is propagated exactly) with
  the memory convolution evaluated by product integration (cubic-Hermite
  representation of v between nodes, dissipation-kernel moments integrated
  exactly per interval).  The step is refined by halving until v(t_end)
  changes by less than the requested relative tolerance.

* analytic -- the exact modal solution of the local-friction model
  (ohmic, cutoff >> Omega), which also gives G in closed form and is the
  right tool for long horizons (gamma t >> 1).

mode="auto" picks analytic for ohmic weak-coupling two-oscillator models
away from resonance (|delta| >= 1e-3) and numeric otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import expm

from . import ohmic_pair
from .errors import ConvergenceError
from .model import ModelSpec
from .phase_space import require_physical

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)

#: kernel support cut: the Gaussian factor is below 1e-18 of its peak
_KERNEL_SUPPORT_CUTOFFS = 13.0


# ---------------------------------------------------------------------------
# data containers


@dataclass(frozen=True)
class HomogeneousSolution:
    """Sine-like homogeneous solution sampled on the requested grid."""

    times: np.ndarray          # (n,)
    v: np.ndarray              # (n, N, N)
    vd: np.ndarray
    vdd: np.ndarray
    model: ModelSpec
    source: object             # _GridSource or ModalSolution

    @property
    def n_oscillators(self):
        return self.v.shape[1]


@dataclass(frozen=True)
class _GridSource:
    """Uniform internal grid backing a numeric solution."""

    h: float
    v: np.ndarray
    vd: np.ndarray
    vdd: np.ndarray

    @property
    def times(self):
        return self.h * np.arange(self.v.shape[0])


@dataclass(frozen=True)
class PropagatorPair:
    """The pair (R, S) defining Gaussian propagation at one time."""

    t: float
    R: np.ndarray
    S: np.ndarray


@dataclass(frozen=True)
class MasterEqCoefficients:
    """Drift A = Rdot R^-1 and diffusion D = Sdot/2 - sym(A S) at one time."""

    t: float
    A: np.ndarray
    D: np.ndarray


# ---------------------------------------------------------------------------
# time grids


def _validate_grid(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("time grid must be one-dimensional and nonempty")
    if times[0] != 0.0:
        raise ValueError("time grid must start at 0")
    if times.size > 1 and not np.all(np.diff(times) > 0):
        raise ValueError("time grid must be strictly increasing")
    return times


def _internal_step(model, times):
    """Default internal step: 40 points per period of the fastest oscillator."""
    omega_max = max(model.system.frequencies)
    h = 2.0 * np.pi / omega_max / 40.0
    dt = np.diff(times)
    if dt.size and np.allclose(dt, dt[0], rtol=1e-12, atol=0.0):
        # align with a uniform output grid so outputs are exact nodes
        h = dt[0] / max(1, int(np.ceil(dt[0] / h)))
    return h


# ---------------------------------------------------------------------------
# memory weights (product integration with cubic-Hermite v)


def _dissipation_on_array(sd, u):
    """Scalar dissipation kernel on an array of lags."""
    if sd.exponent == 0.0:
        return sd.scalar_dissipation(u)
    # vectorized fixed-panel quadrature of -Int J sin(w u) dw
    edges = np.linspace(0.0, sd.omega_max, 257)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    wn = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    ww = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    weight = sd.weight(wn) * ww
    return -np.sin(np.multiply.outer(u, wn)) @ weight


def _memory_weights(sd, h, n_steps):
    """Per-interval Hermite product weights for the memory convolution.

    Returns (jmax, wv_left, wv_right, ws_left, ws_right): for interval
    j (lag u in [j h, (j+1) h]),

        Int_j K(u) v(t-u) du ~= wv_left[j]  v_{k-j}   + wv_right[j] v_{k-j-1}
                              + ws_left[j] (-vd_{k-j}) + ws_right[j] (-vd_{k-j-1})

    with weights integrating the kernel against the cubic-Hermite basis
    exactly (12-point Gauss-Legendre per interval).  Weights vanish for
    j beyond the kernel support.
    """
    support = _KERNEL_SUPPORT_CUTOFFS / sd.cutoff
    jmax = min(n_steps, int(np.ceil(support / h)))
    # subdivide every lag interval so the kernel's 1/cutoff structure is
    # resolved by the moment quadrature regardless of the step size (the
    # total work is then bounded by the kernel support, not by h)
    n_sub = max(1, int(np.ceil(h * sd.cutoff)))
    j = np.arange(jmax + 1)
    lo = j * h                                     # (J,)
    sub_edges = np.arange(n_sub + 1) * (h / n_sub)  # (n_sub+1,)
    mid = 0.5 * (sub_edges[1:] + sub_edges[:-1])
    half = 0.5 * (sub_edges[1] - sub_edges[0])
    # offsets within one step interval, all subpanels flattened: (n_sub*12,)
    offs = (mid[:, None] + half * _GL_NODES[None, :]).ravel()
    ww = np.tile(half * _GL_WEIGHTS, n_sub)
    uu = lo[:, None] + offs[None, :]               # (J, n_sub*12)
    K = _dissipation_on_array(sd, uu.ravel()).reshape(uu.shape)
    x = offs[None, :] / h
    h00 = 2 * x**3 - 3 * x**2 + 1
    h10 = x**3 - 2 * x**2 + x
    h01 = -2 * x**3 + 3 * x**2
    h11 = x**3 - x**2
    wv_left = (K * h00) @ ww
    wv_right = (K * h01) @ ww
    ws_left = h * ((K * h10) @ ww)
    ws_right = h * ((K * h11) @ ww)
    return jmax, wv_left, wv_right, ws_left, ws_right


class _MemoryConvolution:
    """Evaluates conv(t_k) = Int_0^{t_k} K(t_k - s) v(s) ds on the grid."""

    def __init__(self, sd, h, n_steps):
        (self.jmax, wvl, wvr, wsl, wsr) = _memory_weights(sd, h, n_steps)
        self.wvl, self.wsl = wvl, wsl
        # node-collapsed weights: conv(t_k) = sum_m cv[m] v_{k-m} + cs[m] vd_{k-m}
        # (valid once k > jmax; the boundary case is assembled per interval)
        self.cv = np.zeros(self.jmax + 2)
        self.cs = np.zeros(self.jmax + 2)
        self.cv[: self.jmax + 1] += wvl
        self.cv[1:] += wvr
        self.cs[: self.jmax + 1] -= wsl
        self.cs[1:] -= wsr
        # time-reversed copies for contiguous history dot products
        self.cv_rev = self.cv[::-1].copy()
        self.cs_rev = self.cs[::-1].copy()
        self.wvr, self.wsr = wvr, wsr

    def history_part(self, k1, v, vd):
        """Contribution to conv(t_{k1}) from everything except v_{k1}, vd_{k1}."""
        jm = min(k1 - 1, self.jmax)
        if jm < 0:
            return 0.0
        if k1 > self.jmax:
            m = self.jmax + 1
            out = np.tensordot(self.cv_rev[:m], v[k1 - m : k1], axes=(0, 0))
            out += np.tensordot(self.cs_rev[:m], vd[k1 - m : k1], axes=(0, 0))
            return out
        # boundary: intervals j = 0..jm only
        out = np.tensordot(self.wvr[: jm + 1][::-1], v[k1 - jm - 1 : k1], axes=(0, 0))
        out -= np.tensordot(self.wsr[: jm + 1][::-1], vd[k1 - jm - 1 : k1], axes=(0, 0))
        if jm >= 1:
            out += np.tensordot(self.wvl[1 : jm + 1][::-1], v[k1 - jm : k1], axes=(0, 0))
            out -= np.tensordot(self.wsl[1 : jm + 1][::-1], vd[k1 - jm : k1], axes=(0, 0))
        return out

    def head_coefficients(self):
        """Coefficients of v_{k1} and vd_{k1} in conv(t_{k1})."""
        return self.wvl[0], -self.wsl[0]


# ---------------------------------------------------------------------------
# exponential multistep machinery


def _phi_matrices(A, count):
    """phi_1..phi_count of the matrix A via one augmented exponential."""
    n = A.shape[0]
    big = np.zeros((n + count * n, n + count * n))
    big[:n, :n] = A
    for k in range(count):
        big[k * n : (k + 1) * n, (k + 1) * n : (k + 2) * n] = np.eye(n)
    E = expm(big)
    return [E[:n, (k + 1) * n : (k + 2) * n] for k in range(count)]


def _lagrange_poly_coeffs(nodes):
    """Ascending power coefficients of the Lagrange basis on the nodes."""
    out = []
    for i, xi in enumerate(nodes):
        poly = np.array([1.0])
        for j, xj in enumerate(nodes):
            if j == i:
                continue
            poly = np.convolve(poly, np.array([-xj, 1.0])) / (xi - xj)
        out.append(poly)
    return out


def _update_matrices(L, h, nodes):
    """C_i with Int_0^h e^{L(h-tau)} f(t_k+tau) dtau ~= sum_i C_i f(k+nodes_i)."""
    phis = _phi_matrices(L * h, len(nodes))
    factorials = [math.factorial(j) for j in range(len(nodes))]
    mats = []
    for coeffs in _lagrange_poly_coeffs(nodes):
        C = np.zeros_like(L)
        for j, a in enumerate(coeffs):
            C += a * factorials[j] * phis[j]
        mats.append(h * C)
    return mats


# ---------------------------------------------------------------------------
# numeric Volterra solver


def _solve_on_grid(model, h, n):
    """March the homogeneous solution on the uniform grid t_k = k h."""
    sys = model.system
    sd = model.spectral_density
    N = sys.n_oscillators
    W2 = np.diag(np.array(sys.frequencies) ** 2)
    L = np.zeros((2 * N, 2 * N))
    L[:N, N:] = np.eye(N)
    L[N:, :N] = -W2
    E = expm(L * h)

    v = np.zeros((n + 1, N, N))
    vd = np.zeros((n + 1, N, N))
    f = np.zeros((n + 1, N, N))
    vd[0] = np.eye(N)

    if sd.gamma == 0.0:
        for k in range(n):
            y = E @ np.vstack([v[k], vd[k]])
            v[k + 1], vd[k + 1] = y[:N], y[N:]
        vdd = -np.einsum("ab,kbc->kac", W2, v)
        return _GridSource(h=h, v=v, vd=vd, vdd=vdd)

    conv = _MemoryConvolution(sd, h, n)
    cv_head, cs_head = conv.head_coefficients()
    k0 = -sd.static_weight_integral()
    Cmat = np.diag(2.0 / np.array(sys.masses)) @ np.outer(
        sys.weight_vector, sys.weight_vector
    )
    Chead_v = -Cmat * (cv_head - k0)
    Chead_s = -Cmat * cs_head

    def force(k1, vk, vdk):
        if k1 == 0:
            return Cmat @ (k0 * vk)
        hist = conv.history_part(k1, v, vd)
        return (-Cmat) @ hist + Chead_v @ vk + Chead_s @ vdk

    # bottom-block update matrices (f enters the velocity row only);
    # order-2 exponential trapezoid startup on micro-steps, then order-4
    # exponential Adams-Moulton PECE
    C_pred = [C[:, N:] for C in _update_matrices(L, h, [0.0, -1.0, -2.0, -3.0])]
    C_corr = [C[:, N:] for C in _update_matrices(L, h, [1.0, 0.0, -1.0, -2.0])]

    n_micro = 16
    hm = h / n_micro
    n_start = min(3, n)
    Em = expm(L * hm)
    Cm = [C[:, N:] for C in _update_matrices(L, hm, [0.0, 1.0])]
    conv_m = _MemoryConvolution(sd, hm, n_start * n_micro)
    cvh_m, csh_m = conv_m.head_coefficients()
    vm = np.zeros((n_start * n_micro + 1, N, N))
    sm = np.zeros_like(vm)
    sm[0] = np.eye(N)

    def force_micro(k1):
        if k1 == 0:
            return np.zeros((N, N))
        hist = conv_m.history_part(k1, vm, sm)
        total = hist + cvh_m * vm[k1] + csh_m * sm[k1]
        return -Cmat @ (total - k0 * vm[k1])

    for k in range(n_start * n_micro):
        y = np.concatenate([vm[k], sm[k]])
        fk = force_micro(k)
        ynew = Em @ y + (Cm[0] + Cm[1]) @ fk
        for _ in range(2):
            vm[k + 1], sm[k + 1] = ynew[:N], ynew[N:]
            fn = force_micro(k + 1)
            ynew = Em @ y + Cm[0] @ fk + Cm[1] @ fn
        vm[k + 1], sm[k + 1] = ynew[:N], ynew[N:]
    for k in range(n_start + 1):
        v[k] = vm[k * n_micro]
        vd[k] = sm[k * n_micro]
        f[k] = force(k, v[k], vd[k])

    for k in range(n_start, n):
        y = np.concatenate([v[k], vd[k]])
        Ey = E @ y
        acc = Ey + C_pred[0] @ f[k] + C_pred[1] @ f[k - 1]
        acc += C_pred[2] @ f[k - 2] + C_pred[3] @ f[k - 3]
        v[k + 1], vd[k + 1] = acc[:N], acc[N:]
        fnew = force(k + 1, acc[:N], acc[N:])
        acc = Ey + C_corr[0] @ fnew + C_corr[1] @ f[k]
        acc += C_corr[2] @ f[k - 1] + C_corr[3] @ f[k - 2]
        v[k + 1], vd[k + 1] = acc[:N], acc[N:]
        f[k + 1] = force(k + 1, acc[:N], acc[N:])

    vdd = -np.einsum("ab,kbc->kac", W2, v) + f
    return _GridSource(h=h, v=v, vd=vd, vdd=vdd)


def _free_solution(model, times):
    """Closed-form gamma = 0 solution (decoupled oscillators)."""
    freqs = np.array(model.system.frequencies)
    v = np.zeros((len(times), len(freqs), len(freqs)))
    vd = np.zeros_like(v)
    vdd = np.zeros_like(v)
    for r, w in enumerate(freqs):
        v[:, r, r] = np.sin(w * times) / w
        vd[:, r, r] = np.cos(w * times)
        vdd[:, r, r] = -w * np.sin(w * times)
    modes = ohmic_pair.ModalSolution(
        exponents=np.concatenate([1j * freqs, -1j * freqs]),
        amplitudes=np.array(
            [np.diag([1.0 / (2j * w) if i == r else 0.0 for i in range(len(freqs))])
             for r, w in enumerate(freqs)]
            + [np.diag([-1.0 / (2j * w) if i == r else 0.0 for i in range(len(freqs))])
               for r, w in enumerate(freqs)],
            dtype=complex,
        ),
    )
    return HomogeneousSolution(
        times=times, v=v, vd=vd, vdd=vdd, model=model, source=modes
    )


def _sample_modal(model, modes, times):
    """HomogeneousSolution from a modal source; the acceleration comes from
    the true memory dynamics (removes the local model's initial slip)."""
    return HomogeneousSolution(
        times=times,
        v=modes.value(times),
        vd=modes.deriv(times),
        vdd=ohmic_pair.memory_second_deriv(model, modes, times),
        model=model,
        source=modes,
    )


def _sample_grid(src, times, model):
    """Sample a grid source at the requested times (cubic interpolation)."""
    tin = src.times
    if np.max(times) > tin[-1] * (1 + 1e-12) + 1e-15:
        raise ValueError(
            f"requested time {np.max(times):.6g} is beyond the solved "
            f"horizon {tin[-1]:.6g}"
        )
    out = []
    for arr in (src.v, src.vd, src.vdd):
        if len(tin) >= 4:
            spline = CubicSpline(tin, arr, axis=0)
            out.append(spline(times))
        else:
            out.append(arr[np.searchsorted(tin, times)])
    return out


def solve_homogeneous(model, time_grid, mode="auto", rtol=1e-6, max_halvings=8):
    """Homogeneous solution v (and derivatives) on the requested grid.

    mode: "numeric" (full memory kernel, Volterra marching), "analytic"
    (exact local-friction modal form, ohmic only), or "auto".
    """
    times = _validate_grid(time_grid)
    sd = model.spectral_density

    if sd.gamma == 0.0:
        return _free_solution(model, times)

    if mode == "auto":
        mode = "numeric"
        if (
            sd.exponent == 0.0
            and model.n_oscillators == 2
            and model.system.weights == (1.0, 1.0)
            and len(set(model.system.masses)) == 1
            and abs(ohmic_pair.delta_of(model)) >= ohmic_pair.RESONANCE_DELTA_FLOOR
            and sd.gamma / min(model.system.frequencies) <= ohmic_pair.WEAK_DAMPING_MAX
        ):
            mode = "analytic"

    if mode == "analytic":
        modes = ohmic_pair.local_modal_solution(model)
        return _sample_modal(model, modes, times)
    if mode != "numeric":
        raise ValueError(f"unknown mode {mode!r}")

    t_end = times[-1] if times[-1] > 0 else 1.0
    h = _internal_step(model, times)
    src = _solve_on_grid(model, h, int(np.ceil(t_end / h - 1e-12)))
    scale = max(np.abs(src.v[-1]).max(), 1e-3 * np.abs(src.v).max(), 1e-30)
    for _ in range(max_halvings):
        fine = _solve_on_grid(model, h / 2, int(np.ceil(t_end / (h / 2) - 1e-12)))
        diff = np.abs(fine.v[-1] - src.v[-1]).max()
        src = fine
        h = h / 2
        if diff < rtol * scale:
            break
    else:
        raise ConvergenceError(
            f"step halving to h = {h:.3e} did not converge "
            f"(last change {diff:.3e} vs tolerance {rtol * scale:.3e})"
        )
    v, vd, vdd = _sample_grid(src, times, model)
    return HomogeneousSolution(
        times=times, v=v, vd=vd, vdd=vdd, model=model, source=src
    )


# ---------------------------------------------------------------------------
# classical transition matrix


def _interleave(XX, XP, PX, PP):
    n = XX.shape[-1]
    out = np.zeros(XX.shape[:-2] + (2 * n, 2 * n))
    out[..., 0::2, 0::2] = XX
    out[..., 0::2, 1::2] = XP
    out[..., 1::2, 0::2] = PX
    out[..., 1::2, 1::2] = PP
    return out


def classical_transition(hom):
    """R(t) on hom's grid, interleaved layout; R(0) = Identity."""
    masses = np.array(hom.model.system.masses)
    minv = np.diag(1.0 / masses)
    m = np.diag(masses)
    XX = hom.vd
    XP = hom.v @ minv
    PX = np.einsum("ab,kbc->kac", m, hom.vdd)
    PP = np.einsum("ab,kbc,cd->kad", m, hom.vd, minv)
    return _interleave(XX, XP, PX, PP)


# ---------------------------------------------------------------------------
# diffusion matrix


def spectral_nodes(model, peak_halfwidths=30.0, peak_resolution=5.0, base_panels=None):
    """Frequency quadrature nodes and weights for the diffusion integrals.

    Composite Gauss-Legendre panels on [0, 8 cutoff] with refinement zones
    of width peak_halfwidths * gamma around each oscillator frequency
    (panel width gamma / peak_resolution inside).  Weights include
    J(w) coth(w / 2T).
    """
    sd = model.spectral_density
    g = sd.gamma
    hi = sd.omega_max
    freqs = np.array(model.system.frequencies)
    base = min(sd.cutoff / 8.0, freqs.min() / 6.0)
    if base_panels is not None:
        base = hi / base_panels
    edges = set(np.linspace(0.0, hi, int(np.ceil(hi / base)) + 1))
    if g > 0:
        half = peak_halfwidths * g
        step = g / peak_resolution
        for fc in freqs:
            zone = np.arange(max(fc - half, 0.0), min(fc + half, hi) + step, step)
            edges.update(zone.tolist())
    edges = np.array(sorted(edges))
    keep = np.concatenate([[True], np.diff(edges) > 1e-12 * hi])
    edges = edges[keep]
    mid = 0.5 * (edges[1:] + edges[:-1])
    half_w = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half_w[:, None] * _GL_NODES[None, :]).ravel()
    wq = (half_w[:, None] * _GL_WEIGHTS[None, :]).ravel()
    weights = wq * sd.weight(nodes) * model.bath.coth_factor(nodes)
    return nodes, weights


def _oscillatory_moments(omega, h, count=4):
    """E_k(w) = Int_0^h u^k e^{iwu} du for k < count, stable for small wh."""
    z = 1j * omega * h
    out = np.empty((count, omega.size), dtype=complex)
    small = np.abs(z) < 1e-3
    ez = np.exp(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        E = (ez - 1.0) / (1j * omega)
        for k in range(count):
            if k > 0:
                E = (h**k * ez - k * Eprev) / (1j * omega)
            out[k] = E
            Eprev = E
    # series fallback: E_k = h^{k+1} sum_j z^j / (j! (j+k+1))
    if small.any():
        zs = z[small]
        for k in range(count):
            acc = np.zeros_like(zs)
            term = np.ones_like(zs)
            for j in range(12):
                acc = acc + term / (j + k + 1.0)
                term = term * zs / (j + 1.0)
            out[k][small] = h ** (k + 1) * acc
    return out


def _hermite_coeffs(yl, yr, sl, sr, h):
    """Cubic coefficients a0..a3 of the Hermite segment on [0, h]."""
    d = (yr - yl) / h
    a0 = yl
    a1 = sl
    a2 = (3.0 * d - 2.0 * sl - sr) / h
    a3 = (sl + sr - 2.0 * d) / (h * h)
    return a0, a1, a2, a3


def _diffusion_from_grid(model, src, times, nodes, weights):
    """S(t) by Filon-type accumulation of G over the uniform internal grid."""
    sys = model.system
    N = sys.n_oscillators
    masses = np.array(sys.masses)
    mw = sys.weight_vector / masses
    # y = v M^-1 w and derivatives on the internal grid
    y = src.v @ mw
    yd = src.vd @ mw
    ydd = src.vdd @ mw
    h = src.h
    E = _oscillatory_moments(nodes, h)
    phase_step = np.exp(1j * nodes * h)

    times = np.asarray(times, dtype=float)
    t_top = src.times[-1]
    if times.max() > t_top * (1 + 1e-12) + 1e-15:
        raise ValueError(
            f"requested time {times.max():.6g} is beyond the solved horizon {t_top:.6g}"
        )
    order = np.argsort(times)
    G = np.zeros((N, nodes.size), dtype=complex)
    Gd = np.zeros_like(G)
    phase = np.ones(nodes.size, dtype=complex)
    out = np.zeros((times.size, 2 * N, 2 * N))
    j = 0

    def emit(idx, t_out):
        Gp, Gdp = G.copy(), Gd.copy()
        frac = t_out - j * h
        if frac > 1e-15 * max(t_out, h):
            Ep = _oscillatory_moments(nodes, frac)
            tj1 = min(j + 1, len(y) - 1)
            for target, f, fd in ((Gp, y, yd), (Gdp, yd, ydd)):
                a0, a1, a2, a3 = _hermite_coeffs(f[j], f[tj1], fd[j], fd[tj1], h)
                seg = (
                    a0[:, None] * Ep[0][None, :]
                    + a1[:, None] * Ep[1][None, :]
                    + a2[:, None] * Ep[2][None, :]
                    + a3[:, None] * Ep[3][None, :]
                )
                target += phase[None, :] * seg
        out[idx] = _assemble_S(Gp, Gdp, masses, weights)

    for idx in order:
        t_out = times[idx]
        while (j + 1) * h <= t_out * (1 + 1e-15) and j + 1 < len(y):
            for target, f, fd in ((G, y, yd), (Gd, yd, ydd)):
                a0, a1, a2, a3 = _hermite_coeffs(f[j], f[j + 1], fd[j], fd[j + 1], h)
                seg = (
                    a0[:, None] * E[0][None, :]
                    + a1[:, None] * E[1][None, :]
                    + a2[:, None] * E[2][None, :]
                    + a3[:, None] * E[3][None, :]
                )
                target += phase[None, :] * seg
            phase = phase * phase_step
            j += 1
        emit(idx, t_out)
    return out


def _diffusion_from_modes(model, modes, times, nodes, weights):
    """S(t) with closed-form G for a modal homogeneous solution."""
    sys = model.system
    masses = np.array(sys.masses)
    mw = sys.weight_vector / masses
    amp = modes.amplitudes @ mw          # (K, N)
    mu = modes.exponents                 # (K,)
    z = mu[:, None] + 1j * nodes[None, :]
    out = np.zeros((len(times), 2 * sys.n_oscillators, 2 * sys.n_oscillators))
    for i, t in enumerate(np.asarray(times, dtype=float)):
        gk = (np.exp(z * t) - 1.0) / z                     # (K, nodes)
        G = np.einsum("kr,kw->rw", amp, gk)
        Gd = np.einsum("k,kr,kw->rw", mu, amp, gk)
        out[i] = _assemble_S(G, Gd, masses, weights)
    return out


def _assemble_S(G, Gd, masses, weights):
    """Interleave the XX / XP / PP frequency sums into one 2N x 2N matrix."""
    SXX = np.einsum("w,rw,sw->rs", weights, G, G.conj()).real
    SPP = np.einsum("w,rw,sw->rs", weights, Gd, Gd.conj()).real
    SXP = np.einsum("w,rw,sw->rs", weights, G, Gd.conj()).real
    m = masses
    S = _interleave(SXX, SXP * m[None, :], (SXP * m[None, :]).T, SPP * np.outer(m, m))
    return 0.5 * (S + S.T)


def diffusion_matrix(hom, times=None, nodes=None):
    """S(t) at the requested times (default: hom's grid); interleaved layout."""
    model = hom.model
    if times is None:
        times = hom.times
    times = np.asarray(times, dtype=float)
    if model.spectral_density.gamma == 0.0:
        n = 2 * model.n_oscillators
        return np.zeros((times.size, n, n))
    if nodes is None:
        nodes = spectral_nodes(model)
    wn, ww = nodes
    if isinstance(hom.source, _GridSource):
        return _diffusion_from_grid(model, hom.source, times, wn, ww)
    return _diffusion_from_modes(model, hom.source, times, wn, ww)


# ---------------------------------------------------------------------------
# top-level assembly and covariance evolution


def build_propagator(model, time_grid, mode="auto", rtol=1e-6, nodes=None):
    """R and S arrays on the grid; returns (times, R, S)."""
    hom = solve_homogeneous(model, time_grid, mode=mode, rtol=rtol)
    R = classical_transition(hom)
    S = diffusion_matrix(hom, nodes=nodes)
    return hom.times, R, S


def transition_at(hom, times):
    """R at arbitrary times, resampling hom's source."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    src = hom.source
    if isinstance(src, _GridSource):
        v, vd, vdd = _sample_grid(src, times, hom.model)
        sampled = HomogeneousSolution(
            times=times, v=v, vd=vd, vdd=vdd, model=hom.model, source=src
        )
    else:
        sampled = _sample_modal(hom.model, src, times)
    return classical_transition(sampled)


def pair_at(hom, t, nodes=None):
    """PropagatorPair at one (possibly off-grid) time."""
    R = transition_at(hom, [t])[0]
    S = diffusion_matrix(hom, times=np.array([t]), nodes=nodes)[0]
    return PropagatorPair(t=float(t), R=R, S=S)


def propagator_pairs(model, time_grid, **kwargs):
    times, R, S = build_propagator(model, time_grid, **kwargs)
    return [PropagatorPair(t=float(t), R=R[i], S=S[i]) for i, t in enumerate(times)]


def evolve_covariance(V0, pair, check=True):
    """V_t = R V_0 R^T + S; V_0 must satisfy the uncertainty relation."""
    V0 = np.asarray(V0, dtype=float)
    if check:
        require_physical(V0)
    V = pair.R @ V0 @ pair.R.T + pair.S
    return 0.5 * (V + V.T)


# ---------------------------------------------------------------------------
# master-equation coefficients


def _fd_derivative(times, arr):
    """Fourth-order finite-difference d/dt along axis 0 (uniform grid)."""
    times = np.asarray(times, dtype=float)
    h = times[1] - times[0]
    if not np.allclose(np.diff(times), h, rtol=1e-9, atol=0.0):
        raise ValueError("master coefficients need a uniform time grid")
    n = len(times)
    if n < 5:
        raise ValueError("need at least five grid points")
    out = np.empty_like(arr)
    out[2:-2] = (arr[:-4] - 8 * arr[1:-3] + 8 * arr[3:-1] - arr[4:]) / (12 * h)
    fwd = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12 * h)
    fwd1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / (12 * h)
    for k, st in ((0, fwd), (1, fwd1)):
        out[k] = np.tensordot(st, arr[:5], axes=(0, 0))
        out[n - 1 - k] = -np.tensordot(st, arr[-5:][::-1], axes=(0, 0))
    return out


def master_coefficients(times, R, S):
    """Drift and diffusion coefficient matrices on the grid.

    A = Rdot R^-1 and D = Sdot/2 - (A S + S A^T)/2, with time derivatives
    taken by fourth-order central differences (one-sided at the ends).
    """
    Rd = _fd_derivative(times, R)
    Sd = _fd_derivative(times, S)
    A = np.array([rd @ np.linalg.inv(r) for rd, r in zip(Rd, R)])
    AS = np.einsum("kab,kbc->kac", A, S)
    D = 0.5 * Sd - 0.5 * (AS + np.transpose(AS, (0, 2, 1)))
    return [
        MasterEqCoefficients(t=float(t), A=A[i], D=D[i]) for i, t in enumerate(times)
    ]


def integrate_master_equation(times, coeffs, V0, rtol=1e-11, atol=1e-13):
    """Integrate Vdot = A V + V A^T + 2 D from V0 across the grid.

    Returns V(t_end).  A(t), D(t) are cubic-spline interpolants of the
    given coefficients; used to cross-check the propagator evolution.
    """
    from scipy.integrate import solve_ivp

    times = np.asarray(times, dtype=float)
    A = np.array([c.A for c in coeffs])
    D = np.array([c.D for c in coeffs])
    A_spl = CubicSpline(times, A, axis=0)
    D_spl = CubicSpline(times, D, axis=0)
    n = A.shape[1]

    def rhs(t, y):
        V = y.reshape(n, n)
        At = A_spl(t)
        out = At @ V + V @ At.T + 2.0 * D_spl(t)
        return out.ravel()

    sol = solve_ivp(
        rhs,
        (times[0], times[-1]),
        np.asarray(V0, dtype=float).ravel(),
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=False,
    )
    if not sol.success:
        raise ConvergenceError(f"master-equation integration failed: {sol.message}")
    V = sol.y[:, -1].reshape(n, n)
    return 0.5 * (V + V.T)
