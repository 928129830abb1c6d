"""Build the Gaussian phase-space propagator for a damped oscillator pair.

Walks through the core objects: a declarative model, the homogeneous
solution of the dissipative classical dynamics, the transition matrix R,
the diffusion matrix S, and covariance evolution V_t = R V_0 R^T + S.
"""

import numpy as np

from qbrownian import (
    CaseParams,
    PhaseSpaceLayout,
    PropagatorPair,
    build_propagator,
    build_symplectic_form,
    evolve_covariance,
    symplectic_eigenvalues,
    vacuum_covariance,
)

# Two oscillators at detuning delta, scaled temperature theta, both coupled
# symmetrically to an ohmic bath with dissipation constant gamma.
model = CaseParams(delta=0.38, theta=0.7).to_model(gamma=0.05, cutoff=10.0)
print("frequencies:", np.round(model.system.frequencies, 4))
print("temperature:", model.bath.temperature)

times = np.linspace(0.0, 60.0, 121)
times, R, S = build_propagator(model, times)

# R starts at the identity and contracts phase-space volume at rate gamma;
# S starts at zero and is positive semidefinite throughout.
layout = PhaseSpaceLayout(2)
omega = build_symplectic_form(layout)
print("|R(0) - 1| =", np.abs(R[0] - np.eye(4)).max())
print("|S(0)| =", np.abs(S[0]).max())
k = len(times) // 2
contraction = np.abs(R[k] @ omega @ R[k].T).max()
print(f"phase-space contraction at t={times[k]:.0f}:",
      f"|R Om R^T| ~ {contraction:.3f} vs e^-gt = {np.exp(-0.05*times[k]):.3f}")
print("min eig S(t_end):", np.linalg.eigvalsh(S[-1]).min())

# Evolve the vacuum: it heats toward the bath temperature.
V0 = vacuum_covariance(layout)
for i in (0, 40, 120):
    V = evolve_covariance(V0, PropagatorPair(t=times[i], R=R[i], S=S[i]))
    print(f"t = {times[i]:5.1f}: symplectic eigenvalues "
          f"{np.round(symplectic_eigenvalues(V), 4)} (vacuum would be 0.5)")
