"""Disentanglement time versus temperature.

The last zero of the lambda_bound curve upper-bounds the survival time of
entanglement for every Gaussian initial state.  Sweeping the scaled
temperature reproduces the characteristic monotone decrease.
"""

import os

import numpy as np

from qbrownian import (
    CaseParams,
    PhaseSpaceLayout,
    build_propagator,
    build_symplectic_form,
    disentanglement_time,
    lambda_bound,
    pair_at,
    partial_transpose_form,
    solve_homogeneous,
    witness_curves,
)
from qbrownian.svgplot import line_plot

layout = PhaseSpaceLayout(2)
omega = build_symplectic_form(layout)
omega_t = partial_transpose_form(layout, {1})
gamma = 1e-3


def t_dis(theta, delta):
    model = CaseParams(delta=delta, theta=theta).to_model(gamma=gamma, cutoff=10.0)
    ts = np.linspace(0.0, 15.0 / gamma, 1201)
    times, R, S = build_propagator(model, ts)
    curve, _ = witness_curves(times, R, S)
    hom = solve_homogeneous(model, ts)

    def refine(t):
        p = pair_at(hom, t)
        return lambda_bound(p.R, p.S, omega, omega_t)

    res = disentanglement_time(curve, refine=refine, t_tol=1e-4 / gamma)
    return res.time * gamma if res.crossed else np.nan


thetas = np.array([0.2, 0.35, 0.5, 0.7, 1.0, 1.5, 2.0])
rows = {}
for delta in (0.02, 0.38):
    rows[delta] = [t_dis(th, delta) for th in thetas]
    print(f"delta={delta}: t_dis*gamma =", np.round(rows[delta], 3))

out = os.path.join(os.path.dirname(os.path.abspath(__file__)), "tdis_sweep.svg")
line_plot(
    thetas,
    [rows[0.02], rows[0.38]],
    ["delta = 0.02", "delta = 0.38"],
    out,
    xlabel="theta",
    title="Disentanglement time (units of 1/gamma) vs scaled temperature",
)
print("figure written to", out)
