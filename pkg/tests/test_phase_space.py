import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbrownian.errors import UnphysicalStateError
from qbrownian.phase_space import (
    PhaseSpaceLayout,
    beamsplitter,
    build_symplectic_form,
    factorized_squeezed_covariance,
    min_ppt_eigenvalue,
    partial_transpose_form,
    partial_transpose_matrix,
    physicality_defect,
    plus_minus_rotation,
    random_factorized_pure_covariance,
    random_orthosymplectic,
    random_pure_covariance,
    require_physical,
    rotation,
    squeezer,
    symplectic_eigenvalues,
    thermal_covariance,
    two_mode_squeezed_covariance,
    two_mode_squeezer,
    vacuum_covariance,
)

J = np.array([[0.0, 1.0], [-1.0, 0.0]])


def test_symplectic_form_single_oscillator():
    npt.assert_array_equal(build_symplectic_form(PhaseSpaceLayout(1)), J)


def test_symplectic_form_two_oscillators_block_structure():
    om = build_symplectic_form(PhaseSpaceLayout(2))
    expected = np.zeros((4, 4))
    expected[:2, :2] = J
    expected[2:, 2:] = J
    npt.assert_array_equal(om, expected)


@given(n=st.integers(min_value=1, max_value=7))
def test_symplectic_form_is_orthogonal_and_squares_to_minus_identity(n):
    om = build_symplectic_form(PhaseSpaceLayout(n))
    npt.assert_allclose(om @ om.T, np.eye(2 * n), atol=1e-15)
    npt.assert_allclose(om @ om, -np.eye(2 * n), atol=1e-15)


def test_partial_transpose_second_of_two():
    ot = partial_transpose_form(PhaseSpaceLayout(2), {1})
    expected = np.zeros((4, 4))
    expected[:2, :2] = J
    expected[2:, 2:] = -J
    npt.assert_array_equal(ot, expected)


def test_partial_transpose_first_of_three():
    ot = partial_transpose_form(PhaseSpaceLayout(3), {0})
    expected = np.zeros((6, 6))
    expected[:2, :2] = -J
    expected[2:4, 2:4] = J
    expected[4:, 4:] = J
    npt.assert_array_equal(ot, expected)


@given(
    n=st.integers(min_value=2, max_value=6),
    data=st.data(),
)
@settings(max_examples=40)
def test_partial_transpose_form_properties(n, data):
    subset = data.draw(
        st.sets(st.integers(min_value=0, max_value=n - 1), min_size=1, max_size=n - 1)
    )
    layout = PhaseSpaceLayout(n)
    lam = partial_transpose_matrix(layout, subset)
    ot = partial_transpose_form(layout, subset)
    om = build_symplectic_form(layout)
    npt.assert_array_equal(lam @ lam, np.eye(2 * n))
    npt.assert_array_equal(ot.T, -ot)
    npt.assert_allclose(ot @ ot, -np.eye(2 * n), atol=1e-15)
    # spectrum is unchanged by the momentum inversions
    npt.assert_allclose(
        np.sort_complex(np.linalg.eigvals(ot)),
        np.sort_complex(np.linalg.eigvals(om)),
        atol=1e-12,
    )


@pytest.mark.parametrize("subset", [set(), {0, 1}])
def test_partial_transpose_rejects_trivial_bipartitions(subset):
    with pytest.raises(ValueError):
        partial_transpose_form(PhaseSpaceLayout(2), subset)


def test_min_ppt_eigenvalue_vacuum_saturates():
    layout = PhaseSpaceLayout(2)
    ot = partial_transpose_form(layout, {1})
    lam = min_ppt_eigenvalue(vacuum_covariance(layout), ot)
    assert abs(lam) < 1e-12


def test_min_ppt_eigenvalue_thermal():
    # analytic eigenvalues of nu*I + (i/2)Omega~ are nu +- 1/2
    layout = PhaseSpaceLayout(2)
    ot = partial_transpose_form(layout, {1})
    for nu in (0.5, 0.9, 2.7):
        lam = min_ppt_eigenvalue(thermal_covariance(layout, nu), ot)
        npt.assert_allclose(lam, nu - 0.5, atol=1e-12)


def test_min_ppt_eigenvalue_two_mode_squeezed():
    # closed-form symplectic eigenvalue of the partial transpose: e^{-2r}/2
    layout = PhaseSpaceLayout(2)
    ot = partial_transpose_form(layout, {1})
    for r in (0.3, 1.0):
        V = two_mode_squeezed_covariance(layout, r)
        lam = min_ppt_eigenvalue(V, ot)
        npt.assert_allclose(lam, 0.5 * np.exp(-2 * r) - 0.5, atol=1e-12)
        assert lam < 0


def test_min_ppt_eigenvalue_requires_symmetry():
    layout = PhaseSpaceLayout(2)
    ot = partial_transpose_form(layout, {1})
    V = vacuum_covariance(layout)
    V[0, 1] = 0.3
    with pytest.raises(ValueError):
        min_ppt_eigenvalue(V, ot)


def test_min_ppt_invariant_under_orthosymplectic_conjugation(rng):
    layout = PhaseSpaceLayout(2)
    ot = partial_transpose_form(layout, {1})
    V = random_pure_covariance(layout, rng)
    ref = min_ppt_eigenvalue(V, ot)
    for _ in range(5):
        O = random_orthosymplectic(layout, rng)
        lam = min_ppt_eigenvalue(O @ V @ O.T, O @ ot @ O.T)
        npt.assert_allclose(lam, ref, atol=1e-12)


def test_plus_minus_rotation_examples():
    L = plus_minus_rotation(PhaseSpaceLayout(2))
    npt.assert_allclose(L @ [1, 0, 1, 0], [1, 0, 0, 0], atol=1e-15)
    npt.assert_allclose(L @ [0, 1, 0, -1], [0, 0, 0, 2], atol=1e-15)


def test_plus_minus_rotation_is_canonical():
    layout = PhaseSpaceLayout(2)
    L = plus_minus_rotation(layout)
    om = build_symplectic_form(layout)
    npt.assert_allclose(L @ om @ L.T, om, atol=1e-15)


def test_plus_minus_rotation_needs_two_oscillators():
    with pytest.raises(ValueError):
        plus_minus_rotation(PhaseSpaceLayout(3))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_random_pure_covariances_are_pure(n, rng):
    layout = PhaseSpaceLayout(n)
    for _ in range(20):
        V = random_pure_covariance(layout, rng)
        assert abs(physicality_defect(V)) < 1e-10
        npt.assert_allclose(symplectic_eigenvalues(V), 0.5, atol=1e-9)


def test_random_factorized_pure_is_block_diagonal(rng):
    layout = PhaseSpaceLayout(2)
    for _ in range(10):
        V = random_factorized_pure_covariance(layout, rng)
        npt.assert_allclose(V[:2, 2:], 0.0, atol=1e-14)


def test_symplectic_building_blocks_are_symplectic(rng):
    layout = PhaseSpaceLayout(2)
    om = build_symplectic_form(layout)
    for S in (
        rotation(layout, 0.7, 1),
        squeezer(layout, 0.9, 0),
        beamsplitter(layout, 1.2),
        two_mode_squeezer(layout, 0.8),
    ):
        npt.assert_allclose(S @ om @ S.T, om, atol=1e-12)


def test_require_physical_names_eigenvalue():
    layout = PhaseSpaceLayout(1)
    bad = 0.2 * np.eye(2)
    with pytest.raises(UnphysicalStateError, match="-3"):
        require_physical(bad)


def test_factorized_squeezed_preset_is_physical_and_factorized():
    layout = PhaseSpaceLayout(2)
    V = factorized_squeezed_covariance(layout, 0.4, -0.7)
    require_physical(V)
    npt.assert_allclose(V[:2, 2:], 0.0, atol=1e-14)
