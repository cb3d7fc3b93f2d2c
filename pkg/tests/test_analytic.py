import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cglmp.analytic import (
    RestrictedSetting,
    empirical_i3_rough,
    i2_closed_form,
    i3_closed_form,
    id_closed_form,
    literal_eta,
    optimal_eta,
    restricted_bound,
    restricted_max,
    restricted_value,
)
from cglmp.bell import cglmp_value, joint_tables
from cglmp.qstate import QutritBetaXi, SchmidtAngles, kappa_from_beta_xi, state_from_schmidt

MESH = np.linspace(-np.pi / 2, np.pi / 2, 400)
E1, E2 = np.meshgrid(MESH, MESH)


def pipeline(theta, e1, e2):
    d = len(theta) + 1
    return cglmp_value(state_from_schmidt(SchmidtAngles(d, theta)), RestrictedSetting(e1, e2).settings(d))


def published_form(d, t1, t2, e1, e2):
    if d == 2:
        return i2_closed_form(t1, e1, e2)
    if d == 3:
        return i3_closed_form(t1, t2, e1, e2)
    return id_closed_form(t1, t2, e1, e2, d)


def test_i2_examples():
    assert i2_closed_form(0, 0, 0) == 2
    assert i2_closed_form(np.pi / 4, -np.pi / 8, np.pi / 8) == pytest.approx(2 * np.sqrt(2), abs=1e-15)
    bound = 2 * np.sqrt(1 + np.sin(np.pi / 3) ** 2)
    assert bound == pytest.approx(2 * np.sqrt(1.75), abs=1e-15)
    assert np.max(i2_closed_form(np.pi / 6, E1, E2)) <= bound + 1e-12


def test_i3_examples():
    assert i3_closed_form(0.3, np.pi / 2, 0.7, -1.1) == pytest.approx(2, abs=1e-15)
    v = i3_closed_form(np.pi / 4, 0, -np.pi / 8, np.pi / 8)
    assert v == pytest.approx(0.25 * (2 + 6 * np.sqrt(2)), abs=1e-15)
    assert v == pytest.approx(0.5 * (1 + 3 * np.sqrt(2)), abs=1e-15)


def test_id_examples():
    assert id_closed_form(0.3, np.pi / 2, 0.7, -1.1, 5) == pytest.approx(2, abs=1e-15)
    e1, e2 = optimal_eta(np.pi / 4)
    assert id_closed_form(np.pi / 4, 0, e1, e2, 4) == pytest.approx(1 + np.sqrt(2), abs=1e-15)
    with pytest.raises(ValueError):
        id_closed_form(0.1, 0.1, 0, 0, 3)


@pytest.mark.parametrize("d", [2, 3])
def test_published_forms_match_pipeline_low_d(d):
    rng = np.random.default_rng(d)
    for _ in range(500):
        theta = rng.uniform(0, np.pi / 2, d - 1)
        e1, e2 = rng.uniform(-np.pi, np.pi, 2)
        t2 = theta[1] if d > 2 else 0.0
        assert pipeline(theta, e1, e2) == pytest.approx(published_form(d, theta[0], t2, e1, e2), abs=1e-9)


@pytest.mark.parametrize("d", range(2, 9))
def test_weighted_form_matches_pipeline(d):
    rng = np.random.default_rng(d)
    for _ in range(300):
        theta = rng.uniform(-np.pi, np.pi, d - 1)
        e1, e2 = rng.uniform(-np.pi, np.pi, 2)
        t2 = theta[1] if d > 2 else 0.0
        assert pipeline(theta, e1, e2) == pytest.approx(restricted_value(theta[0], t2, e1, e2, d), abs=1e-9)


def unit_weight_cglmp(tables):
    """CGLMP sum with every k-weight set to 1."""
    d = tables.shape[-1]
    t11, t12, t21, t22 = tables[0, 0], tables[0, 1], tables[1, 0], tables[1, 1]

    def eq(t, m):
        return sum(t[j, (j - m) % d] for j in range(d))

    def eq_ba(t, m):
        return sum(t[j, (j + m) % d] for j in range(d))

    total = 0.0
    for k in range(d // 2):
        total += eq(t11, k) + eq_ba(t21, k + 1) + eq(t22, k) + eq_ba(t12, k)
        total -= eq(t11, -k - 1) + eq_ba(t21, -k) + eq(t22, -k - 1) + eq_ba(t12, -k - 1)
    return total


@pytest.mark.parametrize("d", [4, 5, 6])
def test_published_dge4_form_drops_k_weight(d):
    rng = np.random.default_rng(d)
    worst_weighted = 0.0
    for _ in range(200):
        theta = rng.uniform(0, np.pi / 2, d - 1)
        e1, e2 = rng.uniform(-np.pi, np.pi, 2)
        state = state_from_schmidt(SchmidtAngles(d, theta))
        tables = joint_tables(state, RestrictedSetting(e1, e2).settings(d))
        published = id_closed_form(theta[0], theta[1], e1, e2, d)
        assert unit_weight_cglmp(tables) == pytest.approx(published, abs=1e-12)
        worst_weighted = max(worst_weighted, abs(cglmp_value(state, RestrictedSetting(e1, e2).settings(d)) - published))
    assert worst_weighted > 1e-3


def test_restricted_bound_examples():
    assert restricted_bound(np.pi / 4, 0.0, 2) == pytest.approx(2 * np.sqrt(2), abs=1e-15)
    assert restricted_bound(np.pi / 4, 0.0, 3) == pytest.approx(0.5 * (1 + 3 * np.sqrt(2)), abs=1e-15)
    assert restricted_bound(np.pi / 4, 0.0, 3) == pytest.approx(2.621320, abs=1e-6)


def test_restricted_bound_d7_grid_oracle():
    t1, t2 = 0.1, 0.2
    direct = (1 + np.sqrt(1 + np.sin(0.2) ** 2)) * np.cos(0.2) ** 2 + 2 * np.sin(0.2) ** 2
    grid_max = np.max(id_closed_form(t1, t2, E1, E2, 7))
    b = restricted_bound(t1, t2, 7)
    assert b == pytest.approx(direct, abs=1e-15)
    assert b == pytest.approx(2.018772389, abs=1e-9)
    assert 0 <= b - grid_max < 1e-4


def test_optimal_eta_examples():
    assert optimal_eta(0) == (0, 0)
    e1, e2 = optimal_eta(np.pi / 4)
    assert (e1, e2) == pytest.approx((-np.pi / 8, np.pi / 8), abs=1e-15)
    assert i2_closed_form(np.pi / 4, e1, e2) == pytest.approx(2 * np.sqrt(2), abs=1e-15)
    e1, e2 = optimal_eta(np.pi / 6)
    h = 0.5 * np.arctan(np.sqrt(3) / 2)
    assert (e1, e2) == pytest.approx((-h, h), abs=1e-15)
    assert i2_closed_form(np.pi / 6, e1, e2) == pytest.approx(restricted_bound(np.pi / 6, 0, 2), abs=1e-12)
    assert np.max(i2_closed_form(np.pi / 6, E1, E2)) <= restricted_bound(np.pi / 6, 0, 2) + 1e-9


def test_literal_eta_is_not_a_maximizer():
    e1, e2 = literal_eta(np.pi / 4)
    assert i2_closed_form(np.pi / 4, e1, e2) == pytest.approx(2, abs=1e-12)
    assert i2_closed_form(np.pi / 4, e1, e2) < restricted_bound(np.pi / 4, 0, 2) - 0.8


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_bound_attained_and_never_exceeded(d):
    rng = np.random.default_rng(100 + d)
    for n in range(100):
        t1 = rng.uniform(0, np.pi / 2)
        t2 = rng.uniform(0, np.pi / 2) if d > 2 else 0.0
        e1, e2 = optimal_eta(t1)
        assert published_form(d, t1, t2, e1, e2) == pytest.approx(restricted_bound(t1, t2, d), abs=1e-12)
        assert restricted_value(t1, t2, e1, e2, d) == pytest.approx(restricted_max(t1, t2, d), abs=1e-12)
        if n < 10:
            assert np.max(published_form(d, t1, t2, E1, E2)) <= restricted_bound(t1, t2, d) + 1e-9
            assert np.max(restricted_value(t1, t2, E1, E2, d)) <= restricted_max(t1, t2, d) + 1e-9


@pytest.mark.parametrize("d", [2, 3, 4, 7])
def test_strict_violation_margin(d):
    corners = [restricted_bound(a, b, d) - 2 for a in (0.05, np.pi / 2 - 0.05) for b in (0.0, np.pi / 2 - 0.05)]
    delta = min(corners)
    assert delta > 0
    for t1, t2 in itertools.product(np.linspace(0.05, np.pi / 2 - 0.05, 60), np.linspace(0, np.pi / 2 - 0.05, 60)):
        assert restricted_bound(t1, t2, d) - 2 >= delta * (1 - 1e-9)
        assert restricted_max(t1, t2, d) >= restricted_bound(t1, t2, d) - 1e-15


def test_no_violation_at_excluded_points():
    assert restricted_bound(0.0, 0.3, 3) == pytest.approx(2)
    assert restricted_bound(np.pi / 2, 0.3, 4) == pytest.approx(2)
    assert restricted_bound(0.7, np.pi / 2, 3) == pytest.approx(2)


def test_empirical_examples():
    spot = kappa_from_beta_xi(QutritBetaXi(np.pi / 6, 2 * np.pi / 15))
    assert abs(empirical_i3_rough(*spot) - 2.5366) <= 5e-4
    assert empirical_i3_rough(1.0, 0.0, 0.0) == pytest.approx(0.5491 + 0.9344 + 2.5871 - 2.0636, abs=1e-12)
    assert empirical_i3_rough(1.0, 0.0, 0.0) == pytest.approx(2.0070, abs=1e-12)
    with pytest.raises(ValueError):
        empirical_i3_rough(0.5, 0.5, 0.5)


def test_empirical_uniform_against_optimizer_value():
    from cglmp.optimize import OptimizerConfig, maximize_full
    from cglmp.qstate import state_from_kappa

    u = 3**-0.5
    full = maximize_full(state_from_kappa([u, u, u]), OptimizerConfig(restarts=3, seed=11)).best_value
    assert full == pytest.approx(2.8729, abs=1e-3)
    assert abs(empirical_i3_rough(u, u, u) - full) < 0.05


@settings(max_examples=200)
@given(st.floats(0, np.pi), st.floats(0, np.pi), st.permutations(range(3)))
def test_empirical_permutation_symmetric(beta, xi, perm):
    k = kappa_from_beta_xi(QutritBetaXi(beta, xi))
    if np.sum(k**6) < 1e-300:
        return
    assert empirical_i3_rough(*k[list(perm)]) == pytest.approx(empirical_i3_rough(*k), rel=1e-12)
