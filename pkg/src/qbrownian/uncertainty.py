"""Generalized uncertainty bounds and entanglement witnesses built from (R, S).

For any initial state, V_t >= -(i/2) R Omega R^T + S; for factorized
initial states the same holds with Omega replaced by the momentum-inverted
form Omega_tilde.  The scalar curves derived from these matrix bounds:

* lambda_bound(t):        min eig of -(i/2)(R Omega R^T - Omega_tilde) + S;
  negative values are sufficient for the existence of entangled states.
* lambda_tilde_bound(t):  min eig of -(i/2)(R Omega_tilde R^T - Omega_tilde) + S;
  nonpositive values mean some factorized states can become entangled.

For two oscillators the four Wigner-ellipse projection areas in the (+,-)
coordinates give weaker scalar witnesses; their (R, S)-level lower bounds
are the ohmic weak-coupling forms with the e^{-gamma t} shrinking factor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phase_space import (
    PhaseSpaceLayout,
    build_symplectic_form,
    partial_transpose_form,
    plus_minus_rotation,
)


@dataclass(frozen=True)
class BoundMatrix:
    """A Hermitian bound matrix at one time, tagged by its construction."""

    t: float
    B: np.ndarray
    kind: str

    @property
    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.B)[0])


@dataclass(frozen=True)
class WitnessCurve:
    """Time series of a scalar bound or eigenvalue."""

    times: np.ndarray
    values: np.ndarray
    label: str

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")


def state_bound(t, R, S, omega_form, kind="state-bound"):
    """B = -(i/2) R Omega_form R^T + S (Hermitian)."""
    B = -0.5j * (R @ omega_form @ R.T) + S
    return BoundMatrix(t=float(t), B=B, kind=kind)


def lambda_bound(R, S, omega, omega_tilde):
    """min eig of -(i/2)(R Omega R^T - Omega_tilde) + S."""
    B = -0.5j * (R @ omega @ R.T - omega_tilde) + S
    return float(np.linalg.eigvalsh(B)[0])


def lambda_tilde_bound(R, S, omega_tilde):
    """min eig of -(i/2)(R Omega_tilde R^T - Omega_tilde) + S."""
    B = -0.5j * (R @ omega_tilde @ R.T - omega_tilde) + S
    return float(np.linalg.eigvalsh(B)[0])


def lambda_min_evolved(V0, R, S, omega_tilde):
    """min eig of V_t + (i/2) Omega_tilde for V_t = R V0 R^T + S."""
    V = R @ V0 @ R.T + S
    return float(np.linalg.eigvalsh(V + 0.5j * omega_tilde)[0])


def witness_curves(times, R, S, layout=None, subset=(1,)):
    """lambda_bound and lambda_tilde_bound curves over a propagator grid."""
    n = R.shape[-1] // 2
    layout = layout or PhaseSpaceLayout(n)
    omega = build_symplectic_form(layout)
    omega_t = partial_transpose_form(layout, subset)
    lb = np.array([lambda_bound(R[i], S[i], omega, omega_t) for i in range(len(times))])
    lt = np.array(
        [lambda_tilde_bound(R[i], S[i], omega_t) for i in range(len(times))]
    )
    return (
        WitnessCurve(times=np.asarray(times, float), values=lb, label="lambda_bound"),
        WitnessCurve(times=np.asarray(times, float), values=lt, label="lambda_tilde_bound"),
    )


# ---------------------------------------------------------------------------
# Wigner-ellipse projection areas (two oscillators)


_PM_CACHE = {}


def _pm_matrix(layout):
    if layout.n_oscillators not in _PM_CACHE:
        _PM_CACHE[layout.n_oscillators] = plus_minus_rotation(layout)
    return _PM_CACHE[layout.n_oscillators]


def area_functions(V, layout=None):
    """The four uncertainty areas in (+,-) coordinates.

    Returns (A_{X+P+}, A_{X-P-}, A_{X+P-}, A_{X-P+}).  Any state satisfies
    the first two >= 1/4; a factorized state also satisfies the mixed
    pairs >= 1/4, so a mixed-pair violation certifies entanglement.
    """
    layout = layout or PhaseSpaceLayout(2)
    L = _pm_matrix(layout)
    Vp = L @ np.asarray(V, dtype=float) @ L.T
    app = Vp[0, 0] * Vp[1, 1] - Vp[0, 1] ** 2
    amm = Vp[2, 2] * Vp[3, 3] - Vp[2, 3] ** 2
    apm = Vp[0, 0] * Vp[3, 3] - Vp[0, 3] ** 2
    amp = Vp[2, 2] * Vp[1, 1] - Vp[2, 1] ** 2
    return app, amm, apm, amp


def area_lower_bounds(t, S, gamma, layout=None):
    """State-independent lower bounds of the four areas (ohmic weak coupling).

    (+,+) and (-,-) bounds carry the shrinking factor e^{-gamma t}/4 plus a
    determinant of diffusion entries; the mixed pairs are pure diffusion
    determinants and start from zero.
    """
    layout = layout or PhaseSpaceLayout(2)
    L = _pm_matrix(layout)
    Sp = L @ np.asarray(S, dtype=float) @ L.T
    shrink = 0.25 * np.exp(-gamma * t)
    app = shrink + Sp[0, 0] * Sp[1, 1] - Sp[0, 1] ** 2
    amm = shrink + Sp[2, 2] * Sp[3, 3] - Sp[2, 3] ** 2
    apm = Sp[0, 0] * Sp[3, 3] - Sp[0, 3] ** 2
    amp = Sp[2, 2] * Sp[1, 1] - Sp[2, 1] ** 2
    return app, amm, apm, amp


def area_bound_curves(times, S, gamma, layout=None):
    """The four area lower bounds as WitnessCurve objects."""
    labels = ("area_pp", "area_mm", "area_pm", "area_mp")
    rows = np.array(
        [area_lower_bounds(t, S[i], gamma, layout) for i, t in enumerate(times)]
    ).T
    return tuple(
        WitnessCurve(times=np.asarray(times, float), values=rows[k], label=labels[k])
        for k in range(4)
    )


# ---------------------------------------------------------------------------
# tripartite bounds


@dataclass(frozen=True)
class TripartiteBounds:
    """Per-subsystem bound matrices for a three-oscillator split."""

    t: float
    subsystem: int
    sufficiency: BoundMatrix       # -(i/2) R Omega R^T + S + (i/2) Omega_tilde_i
    factorizability: BoundMatrix   # -(i/2)(R Omega_tilde_i R^T - Omega_tilde_i) + S


def tripartite_bounds(t, R, S, subsystem, layout=None):
    """Bound matrices for partial transposition of one of three oscillators.

    sufficiency: a negative minimal eigenvalue certifies that entangled
    states exist at time t for this split.  factorizability: the matrix
    must be negative semidefinite for an initially factorized state to
    possibly remain factorized.
    """
    layout = layout or PhaseSpaceLayout(3)
    if layout.n_oscillators != 3:
        raise ValueError("tripartite bounds need N = 3")
    if subsystem not in (0, 1, 2):
        raise ValueError("subsystem index must be 0, 1 or 2")
    omega = build_symplectic_form(layout)
    omega_i = partial_transpose_form(layout, {subsystem})
    suff = BoundMatrix(
        t=float(t),
        B=-0.5j * (R @ omega @ R.T) + S + 0.5j * omega_i,
        kind="tripartite-sufficiency",
    )
    fact = BoundMatrix(
        t=float(t),
        B=-0.5j * (R @ omega_i @ R.T - omega_i) + S,
        kind="tripartite-factorizability",
    )
    return TripartiteBounds(t=float(t), subsystem=subsystem, sufficiency=suff, factorizability=fact)


def tripartite_report(t, R, S, layout=None):
    """Per-subsystem minimal eigenvalues plus the all-splits conjunction.

    The sufficiency criterion's strength for a single split versus all
    three is not settled; both views are reported.
    """
    layout = layout or PhaseSpaceLayout(3)
    per = [tripartite_bounds(t, R, S, i, layout) for i in range(3)]
    suff = [b.sufficiency.min_eigenvalue for b in per]
    fact = [b.factorizability.B for b in per]
    fact_max = [float(np.linalg.eigvalsh(B)[-1]) for B in fact]
    return {
        "sufficiency_min_eigs": suff,
        "sufficiency_all_negative": all(x < 0 for x in suff),
        "factorizability_max_eigs": fact_max,
        "factorizability_all_nonpositive": all(x <= 0 for x in fact_max),
    }


# ---------------------------------------------------------------------------
# disentanglement time


@dataclass(frozen=True)
class DisentanglementResult:
    """Largest zero of lambda_bound, or the no-crossing diagnosis."""

    status: str          # "crossed" or "no-crossing"
    time: float          # nan when no crossing
    sign: int            # sign of the curve when there is no crossing

    @property
    def crossed(self):
        return self.status == "crossed"


def disentanglement_time(curve, refine=None, t_tol=None):
    """Largest root of lambda_bound(t) = 0 on the curve's grid.

    Entanglement oscillations create multiple roots; the last one is the
    meaningful upper bound on entanglement survival.  With a callable
    refine(t) the bracketing interval is bisected to t_tol (default: one
    thousandth of the grid span).
    """
    t = np.asarray(curve.times, dtype=float)
    y = np.asarray(curve.values, dtype=float)
    sign_change = np.nonzero(np.sign(y[:-1]) * np.sign(y[1:]) < 0)[0]
    if sign_change.size == 0:
        exact = np.nonzero(y == 0.0)[0]
        exact = exact[exact > 0]
        if exact.size:
            return DisentanglementResult("crossed", float(t[exact[-1]]), 0)
        nonzero = y[np.abs(y) > 0]
        sign = int(np.sign(nonzero[-1])) if nonzero.size else 0
        return DisentanglementResult("no-crossing", float("nan"), sign)
    i = sign_change[-1]
    lo, hi = t[i], t[i + 1]
    if refine is None:
        ylo, yhi = y[i], y[i + 1]
        root = lo + (hi - lo) * (-ylo) / (yhi - ylo)
        return DisentanglementResult("crossed", float(root), 0)
    if t_tol is None:
        t_tol = 1e-3 * (t[-1] - t[0])
    flo = y[i]
    while hi - lo > t_tol:
        mid = 0.5 * (lo + hi)
        fmid = refine(mid)
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi = mid
    return DisentanglementResult("crossed", float(0.5 * (lo + hi)), 0)
