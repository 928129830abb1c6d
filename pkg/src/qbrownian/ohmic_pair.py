"""Closed-form machinery for two equal-mass oscillators with symmetric
ohmic coupling to the bath.

Everything here works in the weak-damping regime gamma << Omega_i.  Two
closed forms for the homogeneous solution are provided:

* :func:`leading_order_v` -- the published leading-order pole expressions
  in the (+,-) basis, valid away from resonance (|delta| >= 1e-3).  The
  (-,-) element is the symmetric residue form; see the module tests for
  the cross-validation against the memory-kernel solver.

* :class:`LocalModalSolution` -- the exact modal solution of the
  local-friction model (memory replaced by its Markovian limit), which
  has no resonance denominator and is the backend of the propagator's
  analytic mode.

Also here: the asymptotic diffusion integrals and their weak-damping
thermal closed forms, and the high-temperature (Fokker-Planck) growth
laws for the Wigner-ellipse area bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erf

from .errors import NearResonanceError, QuadratureError

#: analytic expressions switch to the numeric solver below this detuning
RESONANCE_DELTA_FLOOR = 1e-3

#: validity guard for the weak-damping closed forms
WEAK_DAMPING_MAX = 0.1

# (+,-) <-> interleaved transformation for the X block:
# (X+, X-) = T (X1, X2)
_T_PM = 0.5 * np.array([[1.0, 1.0], [1.0, -1.0]])
_T_PM_INV = np.array([[1.0, 1.0], [1.0, -1.0]])


def _case_frequencies(model):
    """Validate the symmetric two-oscillator structure and return (O1, O2, g)."""
    sys = model.system
    sd = model.spectral_density
    if sys.n_oscillators != 2:
        raise ValueError("case model needs exactly two oscillators")
    if sys.masses[0] != sys.masses[1]:
        raise ValueError("case model needs equal masses")
    if sys.weights != (1.0, 1.0):
        raise ValueError("case model needs symmetric coupling weights (1, 1)")
    if sd.exponent != 0.0:
        raise ValueError("case model analytics are ohmic only")
    return sys.frequencies[0], sys.frequencies[1], sd.gamma


def delta_of(model):
    o1, o2 = model.system.frequencies
    return (o1**2 - o2**2) / (o1**2 + o2**2)


@dataclass(frozen=True)
class ModalSolution:
    """Homogeneous solution v(t) = Re sum_k exp(mu_k t) A_k (original basis).

    v(0) = 0 and vdot(0) = I, so v plays the sine-like role: the position
    row of the classical transition matrix is [vdot, v M^-1].
    """

    exponents: np.ndarray      # (K,) complex
    amplitudes: np.ndarray     # (K, N, N) complex

    @property
    def n_oscillators(self):
        return self.amplitudes.shape[1]

    def _sum(self, t, order):
        t = np.asarray(t, dtype=float)
        mu = self.exponents
        fac = mu[:, None, None] ** order if order else np.ones((len(mu), 1, 1))
        phases = np.exp(np.multiply.outer(t, mu))  # t-shape + (K,)
        out = np.tensordot(phases, fac * self.amplitudes, axes=(-1, 0))
        return out.real

    def value(self, t):
        return self._sum(t, 0)

    def deriv(self, t):
        return self._sum(t, 1)

    def second_deriv(self, t):
        return self._sum(t, 2)


def leading_order_v(model):
    """Published leading-order damped-mode expressions, (+,-) basis.

    Returns a ModalSolution whose value() yields matrices in the ordered
    basis (+, -).  Use :func:`pm_to_original` to change basis.
    """
    o1, o2, g = _case_frequencies(model)
    delta = delta_of(model)
    if abs(delta) < RESONANCE_DELTA_FLOOR:
        raise NearResonanceError(
            f"|delta| = {abs(delta):.2e} < {RESONANCE_DELTA_FLOOR}: "
            "the closed forms are singular; use the numeric solver"
        )
    if g / min(o1, o2) > WEAK_DAMPING_MAX:
        raise ValueError("leading-order expressions need gamma/Omega <= 0.1")

    den = 4.0 * o1 * o2 * (o2**2 - o1**2)
    # v_{++}: sin and cos coefficient table, then the exponential form
    spp1 = o2 * (g**2 - 2 * o1**2 + 2 * o2**2) / den        # sin(o1 t)
    spp2 = -o1 * (g**2 + 2 * o1**2 - 2 * o2**2) / den       # sin(o2 t)
    cpp1 = -4 * g * o1 * o2 / den                            # cos(o1 t)
    cpp2 = 4 * g * o1 * o2 / den                             # cos(o2 t)
    # v_{+-} = v_{-+}
    spm1 = 1.0 / (2 * o1)
    spm2 = -1.0 / (2 * o2)
    # v_{--}: residue form (the printed expression has a corrupted O(gamma) part)
    dtil = 0.5 * (o1**2 - o2**2)
    smm1 = 1.0 / (2 * o1)
    smm2 = 1.0 / (2 * o2)
    cmm1 = -g / (2 * dtil)
    cmm2 = g / (2 * dtil)

    def build(sin1, cos1, sin2, cos2):
        # a sin + b cos = Re[(b - i a) exp(+i O t)] summed over conjugates
        return [
            (cos1 - 1j * sin1) / 2.0,
            (cos1 + 1j * sin1) / 2.0,
            (cos2 - 1j * sin2) / 2.0,
            (cos2 + 1j * sin2) / 2.0,
        ]

    app = build(spp1, cpp1, spp2, cpp2)
    apm = build(spm1, 0.0, spm2, 0.0)
    amm = build(smm1, cmm1, smm2, cmm2)
    exps = np.array(
        [
            -0.5 * g + 1j * o1,
            -0.5 * g - 1j * o1,
            -0.5 * g + 1j * o2,
            -0.5 * g - 1j * o2,
        ]
    )
    amps = np.zeros((4, 2, 2), dtype=complex)
    for k in range(4):
        amps[k] = [[app[k], apm[k]], [apm[k], amm[k]]]
    return ModalSolution(exponents=exps, amplitudes=amps)


def pm_to_original(modal):
    """Change a (+,-)-basis ModalSolution to original oscillator basis."""
    amps = np.einsum("ab,kbc,cd->kad", _T_PM_INV, modal.amplitudes, _T_PM)
    return ModalSolution(exponents=modal.exponents, amplitudes=amps)


def local_modal_solution(model):
    """Exact modal solution of the local-friction (Markovian dissipation) model.

    The memory term is replaced by its local limit, a friction matrix
    Phi_rr' = gamma (M_ref / M_r) w_r w_r'; the resulting constant-
    coefficient system is diagonalized exactly.  Valid for ohmic baths with
    cutoff >> Omega; no restriction on the detuning.
    """
    sys = model.system
    sd = model.spectral_density
    if sd.exponent != 0.0:
        raise ValueError("local-friction mode is ohmic only")
    n = sys.n_oscillators
    w = sys.weight_vector
    minv = np.diag(1.0 / np.array(sys.masses))
    W2 = np.diag(np.array(sys.frequencies) ** 2)
    phi = sd.gamma * sd.mass_ref * minv @ np.outer(w, w)
    L = np.zeros((2 * n, 2 * n))
    L[:n, n:] = np.eye(n)
    L[n:, :n] = -W2
    L[n:, n:] = -phi
    lam, Q = np.linalg.eig(L)
    Qi = np.linalg.inv(Q)
    amps = np.einsum("ak,kb->kab", Q[:n], Qi[:, n:])
    return ModalSolution(exponents=lam, amplitudes=amps)


def memory_convolution(sd, modal, t):
    """Int_0^t gamma_k(t-s) v(s) ds for a modal v and an ohmic kernel.

    Closed form: the Gaussian-kernel convolution of each exponential mode
    reduces to complex error functions.  Used to give modal solutions the
    acceleration of the true memory dynamics, which removes the local
    approximation's initial slip (the memory force vanishes at t = 0, so
    R(0) is exactly the identity).
    """
    if sd.exponent != 0.0:
        raise ValueError("closed-form memory convolution is ohmic only")
    t = np.asarray(t, dtype=float)
    kappa = sd.mass_ref * sd.gamma * sd.cutoff**3 / (4.0 * np.sqrt(np.pi))
    a = sd.cutoff / 2.0
    out = np.zeros(t.shape + modal.amplitudes.shape[1:], dtype=complex)
    for mu, A in zip(modal.exponents, modal.amplitudes):
        w0 = mu / (2.0 * a)
        w1 = a * t + w0
        gauss = (np.exp(-(w0**2)) - np.exp(-(w1**2))) / (2.0 * a**2)
        err = (w0 / a**2) * (np.sqrt(np.pi) / 2.0) * (erf(w1) - erf(w0))
        E = np.exp(w0**2) * (gauss - err)
        out += np.multiply.outer(np.exp(mu * t) * (-kappa) * E, A)
    return out.real


def memory_second_deriv(model, modal, t):
    """Acceleration of the modal solution under the true memory dynamics.

    vddot = -W^2 v - C (Int gamma_k(t-s) v(s) ds - K0 v), with the
    counterterm K0 = Int_0^inf gamma_k; exact for the memory equation
    evaluated on the given v.
    """
    sys = model.system
    sd = model.spectral_density
    W2 = np.diag(np.array(sys.frequencies) ** 2)
    Cmat = np.diag(2.0 / np.array(sys.masses)) @ np.outer(
        sys.weight_vector, sys.weight_vector
    )
    k0 = -sd.static_weight_integral()
    v = modal.value(t)
    mem = memory_convolution(sd, modal, t)
    return -np.einsum("ab,...bc->...ac", W2, v) - np.einsum(
        "ab,...bc->...ac", Cmat, mem - k0 * v
    )


# ---------------------------------------------------------------------------
# asymptotic diffusion matrix


@dataclass(frozen=True)
class AsymptoticS:
    """Diagonal (+,-)-basis entries of the long-time diffusion matrix."""

    s_xpxp: float
    s_ppp: float
    s_xmxm: float
    s_pmpm: float

    def as_array(self):
        return np.array([self.s_xpxp, self.s_ppp, self.s_xmxm, self.s_pmpm])


def _asymptotic_integral(power, extra, model, epsrel=1e-10):
    """Int_0^inf w^power f(w) extra(w) dw with the double-Lorentzian f."""
    o1, o2, g = _case_frequencies(model)
    sd = model.spectral_density
    T = model.bath.temperature

    def f(w):
        num = np.exp(-(w**2) / sd.cutoff**2)
        if T > 0:
            num = num / np.tanh(w / (2.0 * T))
        d1 = 2.0 * (w**2 - o1**2) ** 2 + g**2 * (w**2 + o1**2)
        d2 = 2.0 * (w**2 - o2**2) ** 2 + g**2 * (w**2 + o2**2)
        return num / (d1 * d2)

    def integrand(w):
        if w == 0.0:
            return 0.0
        return w**power * f(w) * extra(w)

    hi = sd.omega_max
    pieces = sorted({0.0, o1, o2, min(2 * max(o1, o2), hi), hi})
    total = 0.0
    for lo, up in zip(pieces[:-1], pieces[1:]):
        val, err = quad(
            integrand,
            lo,
            up,
            epsabs=1e-14,
            epsrel=epsrel,
            limit=800,
            points=[p for p in (o1, o2) if lo < p < up] or None,
        )
        if err > 1e-6 * max(abs(val), 1e-25):
            raise QuadratureError(
                f"asymptotic diffusion integral did not converge on "
                f"[{lo:.3g}, {up:.3g}]: err {err:.2e}"
            )
        total += val
    return total


def asymptotic_diffusion(model):
    """Long-time diagonal diffusion entries in the (+,-) basis.

    Evaluates the four one-dimensional integrals with the double-Lorentzian
    resonance structure by adaptive quadrature with panels anchored at the
    two oscillator frequencies.
    """
    o1, o2, g = _case_frequencies(model)
    if g <= 0:
        raise ValueError("asymptotic diffusion needs gamma > 0")
    M = model.system.masses[0]
    ssum = o1**2 + o2**2
    ddiff2 = (o1**2 - o2**2) ** 2

    pref_x = g / (M * np.pi)
    pref_p = 4.0 * M * g / np.pi
    roof = lambda w: (ssum - 2.0 * w**2) ** 2
    one = lambda w: 1.0
    return AsymptoticS(
        s_xpxp=pref_x * _asymptotic_integral(1, roof, model),
        s_ppp=pref_p * _asymptotic_integral(3, roof, model),
        s_xmxm=pref_x * ddiff2 * _asymptotic_integral(1, one, model),
        s_pmpm=pref_p * ddiff2 * _asymptotic_integral(3, one, model),
    )


def weak_damping_thermal_S(model):
    """Delta-function (weak-damping) limit of the asymptotic diffusion.

    These are the thermal-state second moments of the uncoupled pair,
    expressed in the (+,-) basis: the X+X+ and X-X- entries coincide, as
    do P+P+ and P-P-.
    """
    o1, o2, _ = _case_frequencies(model)
    M = model.system.masses[0]
    c1 = model.bath.coth_factor(o1)
    c2 = model.bath.coth_factor(o2)
    sx = (c1 / o1 + c2 / o2) / (8.0 * M)
    sp = (M / 2.0) * (o1 * c1 + o2 * c2)
    return AsymptoticS(s_xpxp=sx, s_ppp=sp, s_xmxm=sx, s_pmpm=sp)


# ---------------------------------------------------------------------------
# high-temperature (Fokker-Planck) growth laws


def fokker_planck_bounds(case, gamma, t):
    """Published high-temperature growth laws of the four area bounds.

    Returns (A_{X+P+}, A_{X-P-}, A_{X+P-}, A_{X-P+}) lower bounds at time
    t for CaseParams case in the time-local high-temperature regime
    (T >> cutoff >> Omega, detuning >> gamma).  Caller is responsible for
    regime validity.
    """
    t = np.asarray(t, dtype=float)
    T = case.temperature
    d2 = abs(case.omega1**2 - case.omega2**2)
    gT2 = gamma**2 * T**2
    app = 0.25 * (1.0 - gamma * t + gT2 * t**4)
    amm = 0.25 * (1.0 - gamma * t + gT2 * d2**4 * t**12 / (2**8 * 3**4 * 35))
    apm = 11.0 * gT2 * d2**2 * t**8 / 256.0
    amp = gT2 * d2**2 * t**8 / 256.0
    return app, amm, apm, amp


@dataclass(frozen=True)
class FPRegimeReport:
    """Result of fitting the numeric mixed-pair area bound to a power law."""

    window: tuple
    slope: float
    coefficient: float
    reference_coefficient: float
    coefficient_ratio: float
    mixed_pair_ratio: float
    positivity_violation_window: tuple
    conclusive: bool


def validate_fp_regime(case, gamma, times, area_bounds):
    """Fit the numeric A_{X+P-} bound against the published t^8 law.

    times, area_bounds: arrays of t and of the four bound curves as rows
    (same order as :func:`fokker_planck_bounds`).  The log-log slope and
    amplitude of the X+P- bound are fitted on the given window, compared
    against the published coefficient 11 gamma^2 T^2 Delta^4 / 256, and the
    ratio of the two mixed-pair bounds is averaged.  Also reports where the
    X+P+ bound dips below zero (the early-time positivity violation of the
    time-local limit).
    """
    times = np.asarray(times, dtype=float)
    apm = np.asarray(area_bounds[2], dtype=float)
    amp = np.asarray(area_bounds[3], dtype=float)
    mask = (times > 0) & (apm > 0) & (amp > 0)
    if mask.sum() < 4 or np.ptp(np.log(times[mask])) < 0.5:
        return FPRegimeReport(
            window=(float(times.min()), float(times.max())),
            slope=np.nan,
            coefficient=np.nan,
            reference_coefficient=np.nan,
            coefficient_ratio=np.nan,
            mixed_pair_ratio=np.nan,
            positivity_violation_window=(np.nan, np.nan),
            conclusive=False,
        )
    lt, lb = np.log(times[mask]), np.log(apm[mask])
    slope, _ = np.polyfit(lt, lb, 1)
    T = case.temperature
    d2 = abs(case.omega1**2 - case.omega2**2)
    ref = 11.0 * gamma**2 * T**2 * d2**2 / 256.0
    # amplitude read off at the window center assuming the t^8 law
    tc = np.exp(lt.mean())
    coeff = float(np.exp(np.interp(np.log(tc), lt, lb)) / tc**8)

    app = np.asarray(area_bounds[0], dtype=float)
    neg = times[app < 0]
    viol = (float(neg.min()), float(neg.max())) if neg.size else (np.nan, np.nan)
    return FPRegimeReport(
        window=(float(times[mask].min()), float(times[mask].max())),
        slope=float(slope),
        coefficient=coeff,
        reference_coefficient=ref,
        coefficient_ratio=coeff / ref,
        mixed_pair_ratio=float(np.mean(apm[mask] / amp[mask])),
        positivity_violation_window=viol,
        conclusive=True,
    )
