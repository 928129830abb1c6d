"""Run-configuration parsing for the command-line tool.

A run configuration is a single INI-style text file with the blocks

    [model]   oscillators, frequencies or delta (+ frequency_scale), masses,
              weights
    [bath]    gamma, cutoff, exponent, omega_ref, mass_ref, and exactly one
              of temperature / theta
    [grid]    points, and exactly one of t_max (absolute) / t_max_gamma
              (units of 1/gamma)
    [task]    subcommand-specific options (mode, initial_state, subset,
              thetas, deltas, bath_modes, omega_max, threshold)
    [output]  precision

Convenience parameterization: giving delta and theta expands to the
symmetric two-oscillator model with sqrt(Omega1^2 + Omega2^2) equal to
frequency_scale (default 1).  See the README for the full schema.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .model import BathState, ModelSpec, SpectralDensity, SystemSpec
from .phase_space import (
    PhaseSpaceLayout,
    factorized_squeezed_covariance,
    thermal_covariance,
    two_mode_squeezed_covariance,
    vacuum_covariance,
)


def _floats(text):
    try:
        return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list {text!r}") from exc


@dataclass(frozen=True)
class RunConfig:
    """Parsed and validated run configuration."""

    model: ModelSpec
    times: np.ndarray
    task: dict
    precision: int
    resolved: str          # canonical one-line echo for CSV provenance
    seed: int = 0

    @property
    def layout(self):
        return PhaseSpaceLayout(self.model.n_oscillators)


def _require(section, key, cast=float):
    if key not in section:
        raise ConfigError(f"missing required field [{section.name}] {key}")
    try:
        return cast(section[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for [{section.name}] {key}: {section[key]!r}") from exc


def load_config(path, seed=0):
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    if "model" not in parser or "bath" not in parser:
        raise ConfigError("config needs [model] and [bath] sections")
    msec = parser["model"]
    bsec = parser["bath"]
    gsec = parser["grid"] if "grid" in parser else {}
    tsec = dict(parser["task"]) if "task" in parser else {}
    osec = parser["output"] if "output" in parser else {}

    scale = float(msec.get("frequency_scale", 1.0))
    if "delta" in msec:
        if "frequencies" in msec:
            raise ConfigError("give either [model] delta or frequencies, not both")
        delta = _require(msec, "delta")
        if not abs(delta) < 1:
            raise ConfigError("[model] delta must satisfy |delta| < 1")
        freqs = (
            scale * np.sqrt((1 + delta) / 2.0),
            scale * np.sqrt((1 - delta) / 2.0),
        )
    elif "frequencies" in msec:
        freqs = _floats(msec["frequencies"])
    else:
        raise ConfigError("missing required field [model] frequencies (or delta)")
    n = int(msec.get("oscillators", len(freqs)))
    if n != len(freqs):
        raise ConfigError("[model] oscillators disagrees with the frequency list")
    masses = _floats(msec["masses"]) if "masses" in msec else tuple(1.0 for _ in freqs)
    weights = _floats(msec["weights"]) if "weights" in msec else None
    try:
        system = SystemSpec(masses=masses, frequencies=freqs, weights=weights)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    gamma = _require(bsec, "gamma")
    cutoff = _require(bsec, "cutoff")
    sd = SpectralDensity(
        gamma=gamma,
        cutoff=cutoff,
        exponent=float(bsec.get("exponent", 0.0)),
        omega_ref=float(bsec.get("omega_ref", 1.0)),
        mass_ref=float(bsec.get("mass_ref", masses[0])),
    )
    has_T = "temperature" in bsec
    has_theta = "theta" in bsec
    if has_T == has_theta:
        raise ConfigError("give exactly one of [bath] temperature / theta")
    if has_T:
        temperature = _require(bsec, "temperature")
    else:
        freq_norm = float(np.sqrt(np.sum(np.asarray(freqs) ** 2)))
        temperature = _require(bsec, "theta") * freq_norm
    try:
        model = ModelSpec(system=system, spectral_density=sd, bath=BathState(temperature))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    points = int(gsec.get("points", 201))
    if points < 2:
        raise ConfigError("[grid] points must be >= 2")
    if "t_max" in gsec and "t_max_gamma" in gsec:
        raise ConfigError("give either [grid] t_max or t_max_gamma, not both")
    if "t_max" in gsec:
        t_max = float(gsec["t_max"])
    elif "t_max_gamma" in gsec:
        if gamma == 0.0:
            raise ConfigError("[grid] t_max_gamma needs gamma > 0; give t_max")
        t_max = float(gsec["t_max_gamma"]) / gamma
    else:
        raise ConfigError("missing required field [grid] t_max (or t_max_gamma)")
    if t_max <= 0:
        raise ConfigError("[grid] horizon must be positive")
    times = np.linspace(0.0, t_max, points)

    precision = int(osec.get("precision", 12)) if osec else 12
    resolved = _resolved_line(model, times, tsec, precision, seed)
    return RunConfig(
        model=model,
        times=times,
        task=tsec,
        precision=precision,
        resolved=resolved,
        seed=seed,
    )


def _resolved_line(model, times, task, precision, seed):
    sys, sd, bath = model.system, model.spectral_density, model.bath
    items = {
        "masses": list(sys.masses),
        "frequencies": [f"{f:.12g}" for f in sys.frequencies],
        "weights": list(sys.weights),
        "gamma": f"{sd.gamma:.12g}",
        "cutoff": f"{sd.cutoff:.12g}",
        "exponent": f"{sd.exponent:.12g}",
        "omega_ref": f"{sd.omega_ref:.12g}",
        "mass_ref": f"{sd.mass_ref:.12g}",
        "temperature": f"{bath.temperature:.12g}",
        "t_max": f"{times[-1]:.12g}",
        "points": len(times),
        "precision": precision,
        "seed": seed,
    }
    items.update({f"task.{k}": v for k, v in sorted(task.items())})
    return "; ".join(f"{k}={items[k]}" for k in sorted(items))


def initial_covariance_from_task(task, layout):
    """Initial covariance preset named in the task block, or None.

    Presets: vacuum | thermal:NU | two-mode-squeezed:R |
    factorized-squeezed:R1,R2 | matrix:row;row;... (2N x 2N, row-major).
    """
    text = task.get("initial_state")
    if text is None:
        return None
    text = text.strip()
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    if name == "vacuum":
        return vacuum_covariance(layout)
    if name == "thermal":
        return thermal_covariance(layout, float(arg))
    if name == "two-mode-squeezed":
        return two_mode_squeezed_covariance(layout, float(arg))
    if name == "factorized-squeezed":
        r1, r2 = _floats(arg)
        return factorized_squeezed_covariance(layout, r1, r2)
    if name == "matrix":
        rows = [
            [float(x) for x in row.split(",") if x.strip()]
            for row in arg.split(";")
            if row.strip()
        ]
        V = np.array(rows, dtype=float)
        if V.shape != (layout.dim, layout.dim):
            raise ConfigError(
                f"initial_state matrix must be {layout.dim}x{layout.dim}, "
                f"got {V.shape}"
            )
        return V
    raise ConfigError(f"unknown initial_state preset {text!r}")
