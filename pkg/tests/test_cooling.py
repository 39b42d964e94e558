import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from bosecool.cooling import (
    CoolingReport,
    asymptotic_small_alpha,
    block_sum_terms,
    block_tail,
    build_spectral_table,
    cool_at,
    local_minima,
    nn_approx_components,
    nn_bound_delta_n,
    nn_onset,
    optimal_permutation_cool,
    sweep_alpha,
)
from bosecool.errors import DomainError
from bosecool.fock import ThermalSpec


def test_first_block_layout():
    spec = ThermalSpec.from_y_alpha(0.7, 0.5)
    table = build_spectral_table(spec, 1)
    assert list(zip(table.n1, table.n2)) == [(0, 0), (0, 1), (1, 0)]
    y1, y2 = spec.ys
    np.testing.assert_allclose(table.weights, spec.xi * np.array([1, y2, y1]), rtol=1e-14)


def test_equal_frequencies_give_equal_weights_in_a_block():
    table = build_spectral_table(ThermalSpec((1.0, 1.0)), 6)
    for k in range(7):
        w = table.weights[table.n_total == k]
        np.testing.assert_allclose(w, w[0], rtol=1e-14)
    rep = optimal_permutation_cool(table)
    assert rep.dn == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("y_alpha,alpha", [(0.8, 0.3), (0.5, 0.9), (0.95, 0.6)])
def test_table_mass_plus_tail_is_one(y_alpha, alpha):
    spec = ThermalSpec.from_y_alpha(y_alpha, alpha)
    for B in (5, 40, 300):
        table = build_spectral_table(spec, B)
        assert table.weights.sum() + table.tail == pytest.approx(1.0, abs=1e-12)
        assert block_tail(spec, B) == table.tail


def test_table_limits():
    spec = ThermalSpec.from_y_alpha(0.8, 0.4)
    with pytest.raises(DomainError):
        build_spectral_table(spec, 0)
    with pytest.raises(DomainError):
        build_spectral_table(spec, 5001)


def test_small_table_warns_about_tail():
    rep = optimal_permutation_cool(build_spectral_table(ThermalSpec.from_y_alpha(0.9, 0.5), 4))
    assert rep.warnings


@pytest.mark.parametrize("y_alpha,alpha,B", [(0.8, 0.3, 3), (0.6, 0.7, 3), (0.9, 0.55, 2)])
def test_sorting_beats_random_permutations(y_alpha, alpha, B):
    table = build_spectral_table(ThermalSpec.from_y_alpha(y_alpha, alpha), B)
    best = optimal_permutation_cool(table)
    rng = np.random.default_rng(7)
    w = table.weights
    perms = rng.permuted(np.tile(np.arange(w.size), (100_000, 1)), axis=1)
    dn = (w[perms] - w) @ table.n_total
    assert dn.min() >= best.dn - 1e-15
    # the sorted arrangement itself is reached by exhaustive tie-free search on tiny tables
    if w.size <= 6:
        from itertools import permutations

        exhaustive = min((w[list(p)] - w) @ table.n_total for p in permutations(range(w.size)))
        assert exhaustive == pytest.approx(best.dn, abs=1e-15)


def test_sorted_weights_descend_along_slots():
    table = build_spectral_table(ThermalSpec.from_y_alpha(0.8, 0.35), 20)
    order = np.argsort(-table.weights, kind="stable")
    assert np.all(np.diff(table.weights[order]) <= 0)


def test_cop_semantics():
    assert CoolingReport(0.0, 0.0, 0.5).cop != CoolingReport(0.0, 0.0, 0.5).cop
    assert CoolingReport(0.1, -0.2, 0.5).cop == math.inf
    assert CoolingReport(0.1, -0.2, 0.5).cop_infinite
    rep = CoolingReport(0.2, -0.3, 0.5)
    assert rep.cop == pytest.approx(0.1 / 0.05)
    assert rep.efficiency == pytest.approx(0.1 / 0.5)
    assert rep.otto_bound == pytest.approx(0.5)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.3, 0.95), st.floats(0.05, 0.95))
def test_optimal_process_cools_and_respects_bounds(y_alpha, alpha):
    rep = cool_at(y_alpha, alpha, 400)
    assume(not rep.warnings)
    assert rep.dn <= 1e-15
    y = y_alpha ** (1 / alpha)
    assert -rep.dn >= nn_bound_delta_n(y, alpha) - 1e-12
    if rep.dn < -1e-12:
        assert rep.efficiency <= 1 - alpha + 1e-12


def test_onset_index():
    assert nn_onset(0.3) == 1
    assert nn_onset(0.5) == 1
    assert nn_onset(2 / 3) == 2
    assert nn_onset(0.75) == 3
    assert nn_onset(0.76) == 4


def test_nn_bound_limits():
    for alpha in (0.2, 0.5, 0.8):
        small = [nn_bound_delta_n(y, alpha) for y in (1e-4, 1e-8, 1e-12)]
        assert small[0] > small[1] > small[2] >= 0
        assert small[2] < 2e-5
        assert nn_bound_delta_n(1 - 1e-8, alpha) == pytest.approx((1 - alpha) / (1 + alpha), abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 0.98), st.floats(0.01, 0.98))
def test_nn_bound_grows_with_y(y, alpha):
    lo = nn_bound_delta_n(y, alpha)
    hi = nn_bound_delta_n(min(y + 0.01, 0.999), alpha)
    assert 0 <= lo <= hi + 1e-15


@pytest.mark.parametrize("y,alpha", [(0.3, 0.2), (0.5, 0.5), (0.64, 0.7), (0.9, 0.85)])
def test_components_sum_to_bound(y, alpha):
    comp = nn_approx_components(y, alpha)
    assert -(comp.dn1 + comp.dn2) == pytest.approx(nn_bound_delta_n(y, alpha), abs=1e-10)


def _nn_components_double_sum(y, alpha, terms=3000):
    m = nn_onset(alpha)
    xi = (1 - y) * (1 - y**alpha)
    i = np.arange(m, m + terms)[:, None]
    j = np.arange(terms)[None, :]
    weight = (y ** (alpha * (i + 1)) - y**i) * y ** (j * (1 + alpha))
    return xi * np.sum(weight * (i + j)), -xi * np.sum(weight * (i + j + 1))


@pytest.mark.parametrize("y,alpha", [(0.5, 0.5), (0.4, 0.8), (0.8, 0.3), (0.95, 0.9)])
def test_components_match_double_sums(y, alpha):
    comp = nn_approx_components(y, alpha)
    dn1, dn2 = _nn_components_double_sum(y, alpha)
    assert comp.dn1 == pytest.approx(dn1, abs=1e-10)
    assert comp.dn2 == pytest.approx(dn2, abs=1e-10)


def test_component_signs_at_half():
    comp = nn_approx_components(0.5, 0.5)
    assert comp.dn1 > 0 > comp.dn2
    assert 0.5 * -comp.dn2 <= comp.dn1
    assert comp.cop_lower_bound > 0


def test_cop_bound_grows_as_frequencies_merge():
    lbs = [nn_approx_components(0.5, a).cop_lower_bound for a in (0.9, 0.99, 0.999)]
    assert lbs[0] < lbs[1] < lbs[2]
    assert lbs[2] > 100


def test_nn_domain():
    with pytest.raises(DomainError):
        nn_bound_delta_n(1.0, 0.5)
    with pytest.raises(DomainError):
        nn_approx_components(0.5, 1.0)


def test_closed_form_block_terms_match_double_sum():
    eps = 0.3
    for a in range(8):
        b = np.arange(a + 1)
        base = np.exp(-eps * a * (a + 1) / 2)
        f1 = base * np.sum(b * np.exp(-eps * b))
        f2 = base * np.sum((a - b) * np.exp(-eps * b))
        g1, g2 = block_sum_terms(a, eps)
        # the closed forms carry the e^{2 eps}/(e^eps-1)^2 and e^eps/(e^eps-1)^2 normalisation
        em1 = math.expm1(eps)
        assert float(g1) * em1**2 / math.exp(2 * eps) == pytest.approx(
            float(np.sum(np.exp(-eps * (a / 2 + 1) * (a + 1)) * (a * math.expm1(-eps) + np.exp(a * eps) - 1))) * 1.0,
            rel=1e-12,
        )
        assert np.isfinite(g1) and np.isfinite(g2)
        assert f1 >= 0 and f2 >= 0


def test_block_terms_large_index_is_finite():
    f1, f2 = block_sum_terms(np.array([1e4, 1e5]), 0.01)
    assert np.all(np.isfinite(f1)) and np.all(np.isfinite(f2))


@pytest.mark.parametrize("eps", [0.01, 0.05, 0.3, 1.0])
def test_asymptotic_methods_agree(eps):
    direct = asymptotic_small_alpha(2.0, eps, "direct_sum")
    hs = asymptotic_small_alpha(2.0, eps, "hs_quadrature")
    assert hs.dn1 == pytest.approx(direct.dn1, rel=1e-8, abs=1e-12)
    assert hs.dn2 == pytest.approx(direct.dn2, rel=1e-8, abs=1e-12)
    em = asymptotic_small_alpha(2.0, eps, "euler_maclaurin")
    assert math.isfinite(em.dn1)


def test_asymptotic_matches_table_at_small_alpha():
    bw1, eps = 3.0, 0.2
    alpha = eps / bw1
    spec = ThermalSpec((bw1, eps), 1.0)
    rep = optimal_permutation_cool(build_spectral_table(spec, 400))
    asym = asymptotic_small_alpha(bw1, eps)
    # the asymptotic form keeps the slow-mode structure only; it should capture dn2 closely
    assert asym.dn2 == pytest.approx(rep.dn2, rel=0.1)
    assert asym.alpha == pytest.approx(alpha)


def test_asymptotic_efficiency_grows_as_eps_shrinks():
    etas = [asymptotic_small_alpha(10.0, e).efficiency for e in (1.0, 0.1, 0.01)]
    assert etas[0] < etas[1] < etas[2]


def test_asymptotic_rejects_bad_input():
    with pytest.raises(DomainError):
        asymptotic_small_alpha(1.0, 0.0)
    with pytest.raises(ValueError):
        asymptotic_small_alpha(1.0, 0.1, "simpson")


def test_sweep_rows_follow_grid_and_executor():
    from concurrent.futures import ThreadPoolExecutor

    grid = [0.2, 0.5, 0.8]
    rows = sweep_alpha(0.8, grid, 80, check_convergence=False)
    assert [r.alpha for r in rows] == grid
    with ThreadPoolExecutor(2) as ex:
        again = sweep_alpha(0.8, grid, 80, check_convergence=False, executor=ex)
    assert rows == again
    with pytest.raises(DomainError):
        sweep_alpha(0.8, [0.0, 0.5])


def test_local_minima():
    assert local_minima([0, 1, 2, 3, 4], [3, 1, 2, 0.5, 4]) == [1.0, 3.0]
    assert local_minima([0, 1], [1, 0]) == []
