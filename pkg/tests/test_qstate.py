import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cglmp.qstate import (
    PureTwoQuditState,
    QutritBetaXi,
    SchmidtAngles,
    canonical_order,
    kappa_from_beta_xi,
    kappa_from_schmidt_angles,
    random_pure_state,
    sample_schmidt_kappa,
    schmidt_angles_from_kappa,
    schmidt_rank,
    state_from_kappa,
    state_from_schmidt,
)

angle = st.floats(-10, 10, allow_nan=False)


def test_qubit_quarter_pi_is_maximally_entangled():
    s = state_from_schmidt(SchmidtAngles(2, [np.pi / 4]))
    np.testing.assert_allclose(np.diag(s.amps), [2**-0.5, 2**-0.5], atol=1e-15)
    assert np.count_nonzero(s.amps - np.diag(np.diag(s.amps))) == 0


def test_qutrit_theta2_zero_drops_third_level():
    t1 = 0.37
    s = state_from_schmidt(SchmidtAngles(3, [t1, 0.0]))
    np.testing.assert_allclose(np.diag(s.amps), [np.cos(t1), np.sin(t1), 0.0], atol=1e-15)


def test_d4_chain_matches_hand_expansion():
    # k2 = sin t2 sin t3, k3 = sin t2 cos t3 for d = 4
    t1, t2, t3 = np.pi / 4, np.pi / 3, np.pi / 6
    expected = [np.cos(t2) * np.cos(t1), np.cos(t2) * np.sin(t1), np.sin(t2) * np.sin(t3), np.sin(t2) * np.cos(t3)]
    kappa = kappa_from_schmidt_angles(SchmidtAngles(4, [t1, t2, t3]))
    np.testing.assert_allclose(kappa, expected, atol=1e-15)
    np.testing.assert_allclose(kappa, [0.35355, 0.35355, 0.43301, 0.75], atol=5e-6)
    assert abs(np.sum(kappa**2) - 1) < 1e-15


def test_d5_chain_matches_hand_expansion():
    t = [0.1, 0.2, 0.3, 0.4]
    s2 = np.sin(t[1])
    expected = [
        np.cos(t[1]) * np.cos(t[0]),
        np.cos(t[1]) * np.sin(t[0]),
        s2 * np.sin(t[2]) * np.sin(t[3]),
        s2 * np.sin(t[2]) * np.cos(t[3]),
        s2 * np.cos(t[2]),
    ]
    np.testing.assert_allclose(kappa_from_schmidt_angles(SchmidtAngles(5, t)), expected, atol=1e-15)


@pytest.mark.parametrize("d", range(2, 9))
def test_schmidt_states_are_normalized(d):
    rng = np.random.default_rng(d)
    for _ in range(1000):
        theta = rng.uniform(-np.pi, np.pi, d - 1)
        s = state_from_schmidt(SchmidtAngles(d, theta))
        assert abs(np.sum(np.abs(s.amps) ** 2) - 1) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 8).flatmap(lambda d: st.lists(angle, min_size=d - 1, max_size=d - 1)))
def test_schmidt_consistent_with_kappa_constructor(theta):
    angles = SchmidtAngles(len(theta) + 1, theta)
    a = state_from_schmidt(angles).amps
    b = state_from_kappa(kappa_from_schmidt_angles(angles)).amps
    np.testing.assert_allclose(a, b, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 8).flatmap(lambda d: st.lists(st.floats(0, np.pi / 2), min_size=d - 1, max_size=d - 1)))
def test_angles_roundtrip_through_kappa(theta):
    angles = SchmidtAngles(len(theta) + 1, theta)
    kappa = kappa_from_schmidt_angles(angles)
    back = kappa_from_schmidt_angles(schmidt_angles_from_kappa(kappa))
    np.testing.assert_allclose(back, kappa, atol=1e-12)


def test_angle_count_mismatch():
    with pytest.raises(ValueError):
        SchmidtAngles(3, [0.1])
    with pytest.raises(ValueError):
        SchmidtAngles(1, [])


def test_beta_xi_examples():
    np.testing.assert_allclose(kappa_from_beta_xi(QutritBetaXi(np.pi / 2, np.pi / 4)), [2**-0.5, 2**-0.5, 0], atol=1e-15)
    spot = kappa_from_beta_xi(QutritBetaXi(np.pi / 6, 2 * np.pi / 15))
    np.testing.assert_allclose(spot, [0.45677, 0.20337, 0.86603], atol=5e-6)
    beta = np.arcsin(np.sqrt(2 / 3))
    np.testing.assert_allclose(kappa_from_beta_xi(QutritBetaXi(beta, np.pi / 4)), [3**-0.5] * 3, atol=1e-15)


@settings(max_examples=300)
@given(angle, angle)
def test_beta_xi_normalized(beta, xi):
    assert abs(np.sum(kappa_from_beta_xi(QutritBetaXi(beta, xi)) ** 2) - 1) < 1e-14


def test_state_from_kappa_examples():
    np.testing.assert_array_equal(state_from_kappa([1, 0]).amps, [[1, 0], [0, 0]])
    u = state_from_kappa([3**-0.5] * 3)
    np.testing.assert_allclose(u.amps, np.eye(3) / np.sqrt(3), atol=1e-15)
    spot = kappa_from_beta_xi(QutritBetaXi(np.pi / 6, 2 * np.pi / 15))
    np.testing.assert_allclose(np.diag(state_from_kappa(spot).amps), spot, atol=1e-15)


def test_state_from_kappa_rejects_unnormalized():
    with pytest.raises(ValueError):
        state_from_kappa([0.5, 0.5])
    # the 5-digit rounding of the spot state is off by ~6e-6 in norm
    with pytest.raises(ValueError):
        state_from_kappa([0.45677, 0.20337, 0.86603])


def test_state_rejects_bad_input():
    with pytest.raises(ValueError):
        PureTwoQuditState(np.ones((2, 3)) / np.sqrt(6))
    with pytest.raises(ValueError):
        PureTwoQuditState(np.eye(2))


def test_from_vector_order():
    psi = np.zeros(9)
    psi[1 * 3 + 2] = 1.0  # |1>|2>
    assert PureTwoQuditState.from_vector(psi).amps[1, 2] == 1.0


def test_schmidt_rank_examples():
    assert schmidt_rank(state_from_kappa([1, 0])) == 1
    assert schmidt_rank(state_from_kappa([2**-0.5, 2**-0.5])) == 2
    spot = kappa_from_beta_xi(QutritBetaXi(np.pi / 6, 2 * np.pi / 15))
    assert schmidt_rank(state_from_kappa(spot)) == 3


def test_schmidt_rank_of_non_diagonal_product():
    rng = np.random.default_rng(0)
    a = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    b = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    amps = np.outer(a, b)
    assert schmidt_rank(PureTwoQuditState(amps / np.linalg.norm(amps))) == 1
    assert schmidt_rank(random_pure_state(4, rng)) == 4


@settings(max_examples=200)
@given(st.lists(st.floats(-1, 1), min_size=2, max_size=7).filter(lambda k: np.sum(np.square(k)) > 1e-6))
def test_rank_counts_nonzero_kappa(raw):
    kappa = np.array(raw) / np.linalg.norm(raw)
    assert schmidt_rank(state_from_kappa(kappa)) == np.sum(np.abs(kappa) > 1e-9)


def test_canonical_order_puts_two_largest_first():
    sorted_kappa, perm = canonical_order([0.1, -0.9, 0.4])
    np.testing.assert_allclose(sorted_kappa, [0.9, 0.4, 0.1])
    assert list(perm) == [1, 2, 0]


def test_simplex_sampling_is_seeded_and_normalized():
    a = [sample_schmidt_kappa(5, np.random.default_rng(3)) for _ in range(2)]
    np.testing.assert_array_equal(a[0], a[1])
    rng = np.random.default_rng(4)
    for _ in range(100):
        k = sample_schmidt_kappa(5, rng)
        assert np.all(k >= 0) and abs(np.sum(k**2) - 1) < 1e-12
