import numpy as np
import numpy.testing as npt
import pytest

from qbrownian.model import (
    BathState,
    CaseParams,
    ModelSpec,
    SpectralDensity,
    SystemSpec,
    dissipation_kernel,
    noise_kernel,
)


def brute_force_kernel(sd, t, kind, temperature=None, n=400_000):
    """Independent high-resolution trapezoid oracle for the kernel integrals."""
    w = np.linspace(0.0, sd.omega_max, n)
    f = sd.weight(w)
    if temperature:
        with np.errstate(divide="ignore"):
            f = f * np.where(w > 0, 1.0 / np.tanh(w / (2.0 * temperature)), 0.0)
        if kind == "cos" and sd.exponent == 0:
            f[0] = 2.0 * temperature * sd.mass_ref * sd.gamma / np.pi
    f = f * (np.cos(w * t) if kind == "cos" else np.sin(w * t))
    trapezoid = getattr(np, "trapezoid", np.trapz)
    return trapezoid(f, w)


SYM2 = SystemSpec(masses=(1.0, 1.0), frequencies=(0.83, 0.56))


def test_zero_coupling_gives_zero_kernels():
    sd = SpectralDensity(gamma=0.0, cutoff=10.0)
    npt.assert_array_equal(dissipation_kernel(SYM2, sd, 0.7), np.zeros((2, 2)))
    npt.assert_array_equal(
        noise_kernel(SYM2, sd, BathState(1.0), 0.7), np.zeros((2, 2))
    )


def test_symmetric_coupling_factorizes():
    sd = SpectralDensity(gamma=0.3, cutoff=5.0)
    k = dissipation_kernel(SYM2, sd, 0.21)
    npt.assert_allclose(k, k[0, 0] * np.ones((2, 2)), rtol=1e-12)
    nu = noise_kernel(SYM2, sd, BathState(0.7), 0.21)
    npt.assert_allclose(nu, nu[0, 0] * np.ones((2, 2)), rtol=1e-12)
    sys_w = SystemSpec(masses=(1.0, 2.0), frequencies=(0.8, 0.6), weights=(0.5, 1.5))
    k = dissipation_kernel(sys_w, sd, 0.21)
    w = np.array([0.5, 1.5])
    npt.assert_allclose(k, k[0, 0] / 0.25 * np.outer(w, w), rtol=1e-12)


def test_dissipation_vanishes_at_zero_lag():
    sd = SpectralDensity(gamma=0.2, cutoff=8.0)
    npt.assert_allclose(dissipation_kernel(SYM2, sd, 0.0), 0.0, atol=1e-15)


@pytest.mark.parametrize("t", [0.05, 0.2, 0.6])
def test_ohmic_dissipation_matches_trapezoid_oracle(t):
    sd = SpectralDensity(gamma=0.13, cutoff=7.0)
    oracle = -brute_force_kernel(sd, t, "sin")
    val = dissipation_kernel(SYM2, sd, t)[0, 0]
    npt.assert_allclose(val, oracle, rtol=1e-8)


@pytest.mark.parametrize("t", [0.0, 0.3, 1.7])
def test_noise_kernel_matches_trapezoid_oracle(t):
    sd = SpectralDensity(gamma=0.13, cutoff=7.0)
    bath = BathState(0.9)
    oracle = brute_force_kernel(sd, t, "cos", temperature=0.9)
    val = noise_kernel(SYM2, sd, bath, t)[0, 0]
    npt.assert_allclose(val, oracle, rtol=1e-7)


def test_superohmic_kernels_match_trapezoid_oracle():
    sd = SpectralDensity(gamma=0.1, cutoff=6.0, exponent=1.0, omega_ref=2.0)
    t = 0.31
    npt.assert_allclose(
        dissipation_kernel(SYM2, sd, t)[0, 0],
        -brute_force_kernel(sd, t, "sin"),
        rtol=1e-7,
    )
    npt.assert_allclose(
        noise_kernel(SYM2, sd, BathState(0.5), t)[0, 0],
        brute_force_kernel(sd, t, "cos", temperature=0.5),
        rtol=1e-7,
    )


def test_zero_temperature_noise_kernel_is_finite():
    sd = SpectralDensity(gamma=0.1, cutoff=5.0)
    nu = noise_kernel(SYM2, sd, BathState(0.0), 0.2)
    oracle = brute_force_kernel(sd, 0.2, "cos")
    npt.assert_allclose(nu[0, 0], oracle, rtol=1e-8)


def test_noise_kernel_at_zero_lag_positive_semidefinite():
    for gamma in (0.01, 0.1):
        for cutoff in (3.0, 12.0):
            for temp in (0.0, 0.2, 5.0):
                sd = SpectralDensity(gamma=gamma, cutoff=cutoff)
                nu = noise_kernel(SYM2, sd, BathState(temp), 0.0)
                assert np.linalg.eigvalsh(nu).min() >= -1e-14


def test_high_temperature_noise_matches_white_noise_form():
    # theta = 50: nu(t) ~ 2T Int (J/w) cos(wt) dw = (2 M g T / pi) (sqrt(pi) L / 2) e^{-L^2 t^2/4}
    theta = 50.0
    sd = SpectralDensity(gamma=0.05, cutoff=10.0)
    bath = BathState(theta)
    for t in (0.0, 0.05, 0.15):
        white = (
            2.0 * theta * sd.mass_ref * sd.gamma / np.pi
            * np.sqrt(np.pi) * sd.cutoff / 2.0
            * np.exp(-sd.cutoff**2 * t**2 / 4.0)
        )
        val = noise_kernel(SYM2, sd, bath, t)[0, 0]
        assert abs(val / white - 1.0) < 0.05


def test_counterterm_strength_matches_quadrature():
    from scipy.integrate import quad

    for s in (0.0, 1.0, 2.0):
        sd = SpectralDensity(gamma=0.2, cutoff=4.0, exponent=s, omega_ref=1.5)
        val, _ = quad(lambda w: sd.weight(w) / w if w > 0 else 0.0, 0, sd.omega_max)
        npt.assert_allclose(sd.static_weight_integral(), val, rtol=1e-8)


def test_scalar_dissipation_closed_form_is_odd_and_vectorized():
    sd = SpectralDensity(gamma=0.1, cutoff=6.0)
    t = np.array([0.1, 0.5])
    vals = sd.scalar_dissipation(t)
    assert vals.shape == (2,)
    npt.assert_allclose(sd.scalar_dissipation(-t), -vals, rtol=1e-14)


def test_case_params_frequency_normalization():
    case = CaseParams(delta=0.38, theta=0.7)
    npt.assert_allclose(case.omega1**2 + case.omega2**2, 1.0, rtol=1e-14)
    npt.assert_allclose(
        (case.omega1**2 - case.omega2**2) / (case.omega1**2 + case.omega2**2),
        0.38,
        rtol=1e-14,
    )
    npt.assert_allclose(case.temperature, 0.7, rtol=1e-14)
    model = case.to_model(gamma=0.05, cutoff=10.0)
    assert isinstance(model, ModelSpec)
    assert model.system.weights == (1.0, 1.0)


def test_parameter_validation():
    with pytest.raises(ValueError):
        CaseParams(delta=1.0, theta=0.5)
    with pytest.raises(ValueError):
        CaseParams(delta=0.1, theta=-1.0)
    with pytest.raises(ValueError):
        SpectralDensity(gamma=-0.1, cutoff=1.0)
    with pytest.raises(ValueError):
        SpectralDensity(gamma=0.1, cutoff=1.0, exponent=-0.5)
    with pytest.raises(ValueError):
        SystemSpec(masses=(1.0,), frequencies=(1.0, 2.0))
    with pytest.raises(ValueError):
        BathState(temperature=-0.2)
