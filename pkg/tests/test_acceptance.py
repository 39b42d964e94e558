"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line with the measured
numbers before asserting, so the verdicts read straight off ``pytest -v``.
"""

import math
import time

import numpy as np
import pytest

from bosecool.cooling import (
    build_spectral_table,
    cool_at,
    local_minima,
    nn_bound_delta_n,
    nn_onset,
    optimal_permutation_cool,
    asymptotic_small_alpha,
    sweep_alpha,
)
from bosecool.entropy import Guarantee
from bosecool.fock import ThermalSpec
from bosecool.linear import MomentState, propagate_moments, squeezing_map, total_dispersion
from bosecool.nonlinear import (
    NonlinearConfig,
    enumerate_second_order_terms,
    exact_evolve,
    manley_rowe_residual,
    resonance_scan,
    rwa_delta_n,
)
from bosecool.suites import entropy_trials, hall_fixture_certificate, linear_trials


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok

    return emit


@pytest.fixture(scope="module")
def linear_run():
    start = time.perf_counter()
    trials = list(linear_trials(42, 1000, None, 1.5, 1.0))
    return trials, time.perf_counter() - start


def test_criterion_01_linear_monotonicity(linear_run, report):
    trials, elapsed = linear_run
    min_dn = min(t.dn_moments for t in trials)
    worst = max(abs(t.dn_decomposition - t.dn_moments) for t in trials)
    ok = all(t.monotone_ok and t.decomposition_ok for t in trials) and elapsed < 10
    assert report(1, ok, f"1000 trials, min dn {min_dn:.3e}, decomposition residual {worst:.1e}, {elapsed:.1f} s")


def test_criterion_02_dispersion_bridge(linear_run, report):
    trials, _ = linear_run
    worst = max(abs(t.dispersion_change_undisplaced - t.dn_undisplaced) for t in trials)
    general = max(abs(t.dispersion_change - (t.dn_moments - t.displacement_norm)) for t in trials)
    # f = 0 map acting on a state with a nonzero mean
    state = MomentState([2.0], [[8.0]], [[0.0]])
    after = propagate_moments(squeezing_map([0.5]), state)
    dn = float(after.occupations.sum() - state.occupations.sum())
    ddisp = total_dispersion(after) - total_dispersion(state)
    ok = all(t.bridge_ok for t in trials) and state.is_physical() and dn >= 0 and ddisp < 0
    assert report(
        2, ok,
        f"undisplaced residual {worst:.1e}, general residual {general:.1e}; "
        f"nonzero-mean instance dn {dn:.3f}, dispersion change {ddisp:.3f}",
    )


def test_criterion_03_entropy_second_law(report):
    pairs = list(entropy_trials(42, 1000, 2))
    pairs_ok = all(t.ok and t.verdict == Guarantee.DSS.value for t in pairs)
    certified = [t for n in (3, 4) for t in entropy_trials(43 + n, 500, n) if t.verdict != Guarantee.NONE.value]
    certified_ok = all(t.delta_entropy >= -1e-9 for t in certified)
    cert = hall_fixture_certificate()
    rows = tuple(i + 1 for i in cert.rows or ())
    cols = tuple(j + 1 for j in cert.cols or ())
    fixture_ok = cert.verdict.value == "not_superstochastic" and rows == (2, 3) and cols == (1, 2)
    min_ds = min(t.delta_entropy for t in pairs + certified)
    ok = pairs_ok and certified_ok and fixture_ok
    assert report(
        3, ok,
        f"N=2: {len(pairs)} certified; N=3,4: {len(certified)} certified; min dS {min_ds:.3e}; "
        f"fixture {cert.verdict.value} I={set(rows)} J={set(cols)}",
    )


def test_criterion_04_optimal_cooling(report):
    rng = np.random.default_rng(4)
    beaten = 0
    for y_alpha, alpha in [(0.8, 0.3), (0.6, 0.7), (0.9, 0.55), (0.5, 0.9)]:
        table = build_spectral_table(ThermalSpec.from_y_alpha(y_alpha, alpha), 12)
        best = optimal_permutation_cool(table)
        w = table.weights
        for _ in range(10):
            perms = rng.permuted(np.tile(np.arange(w.size), (10_000, 1)), axis=1)
            beaten += int(np.sum((w[perms] - w) @ table.n_total < best.dn - 1e-15))
    worst_dn, worst_eta = -math.inf, -math.inf
    for y_alpha in (0.3, 0.6, 0.8, 0.95):
        for alpha in np.linspace(0.02, 0.98, 49):
            rep = cool_at(y_alpha, float(alpha), 300)
            worst_dn = max(worst_dn, rep.dn)
            worst_eta = max(worst_eta, rep.efficiency - (1 - alpha))
    ok = beaten == 0 and worst_dn < 0 and worst_eta <= 1e-12
    assert report(
        4, ok,
        f"sampled permutations beating the sort: {beaten} of 400000; max dn {worst_dn:.3e}; "
        f"max eta - (1 - alpha) {worst_eta:.3e}",
    )


def test_criterion_05_nearest_neighbour_envelope(report):
    # the bound is an m >> 1 statement; the grid covers the m >= 2 region where
    # at least 5m blocks fit inside 100 (alpha up to 20/21)
    start = time.perf_counter()
    y_alpha = 0.8
    worst = 0.0
    alphas = np.round(np.arange(0.505, 0.951, 0.005), 6)
    for alpha in alphas:
        m = nn_onset(alpha)
        y = y_alpha ** (1 / alpha)
        blocks = max(100, 5 * m)
        exact = cool_at(y_alpha, float(alpha), blocks).dn
        nn = -nn_bound_delta_n(y, alpha)
        ratio = abs(exact - nn) / y ** (2 * m)
        worst = max(worst, ratio)
    elapsed = time.perf_counter() - start
    ok = worst < 1 and elapsed < 60
    assert report(
        5, ok,
        f"{alphas.size} points on alpha in [{alphas[0]}, {alphas[-1]}], worst error/envelope {worst:.3f}, {elapsed:.1f} s",
    )


@pytest.fixture(scope="module")
def cop_sweep():
    grid = np.round(np.arange(0.02, 0.98 + 1e-9, 0.002), 6)
    return sweep_alpha(0.6, grid, 300, check_convergence=False)


def test_criterion_06_cop_kinks(cop_sweep, report):
    finite = [r for r in cop_sweep if math.isfinite(r.cop)]
    minima = local_minima([r.alpha for r in finite], [r.cop for r in finite])
    hits = {k: any(abs(m - k) <= 0.002 + 1e-9 for m in minima) for k in (1 / 2, 2 / 3, 3 / 4)}
    ok = all(hits.values())
    found = ", ".join(f"{k:.4f}:{'yes' if v else 'no'}" for k, v in hits.items())
    assert report(6, ok, f"minima near {found}")


def test_criterion_07_limit_witnesses(cop_sweep, report):
    rows = {r.alpha: r for r in cop_sweep}
    low, high = rows[0.02], rows[0.98]
    ok = low.efficiency > 0.95 and high.efficiency < 0.05 and high.cop > 100
    assert report(
        7, ok,
        f"y^alpha=0.6, 300 blocks: eta(0.02) {low.efficiency:.4f} (need > 0.95), "
        f"eta(0.98) {high.efficiency:.4f} (need < 0.05), K(0.98) {high.cop:.2f} (need > 100)",
    )


def test_criterion_08_asymptotic_cross_validation(report):
    grid = np.geomspace(0.007, 1.0, 40)
    worst, etas = 0.0, []
    for eps in grid:
        direct = asymptotic_small_alpha(10.0, float(eps), "direct_sum")
        hs = asymptotic_small_alpha(10.0, float(eps), "hs_quadrature")
        worst = max(worst, abs(hs.dn1 - direct.dn1) / abs(direct.dn1), abs(hs.dn2 - direct.dn2) / abs(direct.dn2))
        etas.append(direct.efficiency)
    # grid runs upward in eps, so eta must fall along it
    monotone = bool(np.all(np.diff(etas) < 0))
    ok = worst <= 1e-6 and monotone
    assert report(
        8, ok,
        f"worst relative disagreement {worst:.1e}; eta from {etas[-1]:.3f} at eps=1 to {etas[0]:.3f} at eps=0.007, "
        f"monotone {monotone}",
    )


def test_criterion_09_rwa_structure(report):
    start = time.perf_counter()
    configs = {g: NonlinearConfig.rescaled(1.0, 0.48, g, 20.0, "rwa") for g in (0.02, 0.01)}
    pert = {g: rwa_delta_n(c) for g, c in configs.items()}
    exact = {g: exact_evolve(c, check_convergence=False) for g, c in configs.items()}
    pert_ok = all(abs(p.dn2 + 2 * p.dn1) <= 1e-15 * max(1.0, abs(p.dn2)) for p in pert.values())
    invariant = max(abs(2 * e.dn1 + e.dn2) for e in exact.values())
    mr = manley_rowe_residual((10, 12), "rwa").interior
    rem = {g: abs(exact[g].dn - pert[g].dn) for g in configs}
    ratio = rem[0.02] / rem[0.01]
    elapsed = time.perf_counter() - start
    ok = pert_ok and invariant <= 1e-9 and mr <= 1e-12 and abs(ratio - 8) <= 0.2 * 8 and elapsed < 120
    assert report(
        9, ok,
        f"dn2 = -2 dn1 {pert_ok}; exact |2dn1+dn2| {invariant:.1e}; commutator {mr:.1e}; "
        f"remainder ratio {ratio:.2f} (need 8 +- 1.6); {elapsed:.1f} s",
    )


def test_criterion_10_resonance_map(report):
    grid = np.round(np.arange(0.05, 4.0 + 1e-9, 0.0025), 6)
    rows, _ = resonance_scan(0.35, 10 * math.pi, 0.01, grid)
    dn = {r.alpha: r.dn for r in rows}
    low = [a for a, v in dn.items() if 0.3 < a < 0.5 and v < 0]
    high = [a for a, v in dn.items() if a > 2 and v < 0]
    at_one = dn[1.0]
    rows2, _ = resonance_scan(0.6, 6 * math.pi, 0.01, grid)
    pocket = [r.alpha for r in rows2 if 2.6 <= r.alpha <= 3.0 and r.dn < 0]
    ok = bool(low) and bool(high) and at_one > 0 and bool(pocket)
    span = lambda xs: f"[{min(xs)}, {max(xs)}]" if xs else "none"
    assert report(
        10, ok,
        f"omega1=0.35: cooling on alpha {span(low)} and {span(high)}, dn(1) {at_one:.2e}; "
        f"omega1=0.6: pocket {span(pocket)}",
    )


def test_criterion_11_term_enumeration(report):
    start = time.perf_counter()
    count = enumerate_second_order_terms(ThermalSpec((1.0, 0.7), 1.0))
    elapsed = time.perf_counter() - start
    ok = (
        count.total_terms == 192
        and count.nonzero_terms == 18
        and count.hermiticity_consistent
        and count.cutoff_stable
        and elapsed < 30
    )
    assert report(
        11, ok,
        f"total {count.total_terms}, nonzero {count.nonzero_terms} (need 18), split {count.nonzero_by_split}, "
        f"hermitian {count.hermiticity_consistent}, cutoff-stable {count.cutoff_stable}, {elapsed:.1f} s",
    )
