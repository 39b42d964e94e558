"""Optimal permutation cooling of two thermal modes.

The best unitary for lowering the total photon number permutes the eigenvalues
of the thermal state so that they decrease along the ladder of total photon
number. Everything here works on the two-mode spectrum organised into blocks of
constant ``n1 + n2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError
from .fock import ThermalSpec

MAX_BLOCKS = 5000
DEFAULT_BLOCKS = 300
# energy cost counts as zero below this fraction of |dn1| + |dn2|
ZERO_COST = 1e-12
TAIL_WARNING = 1e-8


@dataclass(frozen=True)
class SpectralTable:
    """Thermal eigenvalues of two modes for all states with ``n1 + n2 <= block_count``.

    Entries are stored block by block and, inside a block, with ``n1``
    ascending: ``(0, k), (1, k-1), ..., (k, 0)``.
    """

    n1: np.ndarray
    n2: np.ndarray
    weights: np.ndarray
    block_count: int
    spec: ThermalSpec
    tail: float

    @property
    def n_total(self) -> np.ndarray:
        return self.n1 + self.n2

    def entries(self):
        """Iterate ``(n1, n2, n_total, weight)`` tuples."""
        for a, b, w in zip(self.n1.tolist(), self.n2.tolist(), self.weights.tolist()):
            yield a, b, a + b, w


def block_tail(spec: ThermalSpec, block_count: int) -> float:
    """Thermal probability of ``n1 + n2 > block_count``."""
    y1, y2 = spec.ys
    n1 = np.arange(block_count + 1)
    # P(n1 = j) * P(n2 > B - j), plus P(n1 > B)
    terms = (1 - y1) * np.exp(n1 * np.log(y1) + (block_count + 1 - n1) * np.log(y2))
    return float(terms.sum() + y1 ** (block_count + 1))


def build_spectral_table(spec: ThermalSpec, block_count: int) -> SpectralTable:
    if spec.num_modes != 2:
        raise DomainError("spectral tables are defined for two modes")
    if block_count < 1:
        raise DomainError("block_count must be at least 1")
    if block_count > MAX_BLOCKS:
        raise DomainError(f"block_count {block_count} exceeds the limit {MAX_BLOCKS}")
    totals = np.repeat(np.arange(block_count + 1), np.arange(1, block_count + 2))
    starts = totals * (totals + 1) // 2
    n1 = np.arange(totals.size) - starts
    n2 = totals - n1
    log_y1, log_y2 = -spec.beta * np.asarray(spec.omegas)
    weights = spec.xi * np.exp(n1 * log_y1 + n2 * log_y2)
    return SpectralTable(n1, n2, weights, block_count, spec, block_tail(spec, block_count))


@dataclass(frozen=True)
class CoolingReport:
    """Occupation changes of one cooling process and the derived figures of merit.

    ``energy_cost`` is dimensionless (``dn1 + alpha*dn2``). ``cop`` is ``inf``
    when cooling happens at zero cost and ``nan`` when nothing changes. Zero
    cost is judged relative to the size of the occupation changes, since near
    ``alpha = 1`` both can be far below ``1e-12`` and still well resolved.
    ``converged`` is ``None`` when no truncation check was run.
    """

    dn1: float
    dn2: float
    alpha: float
    warnings: tuple[str, ...] = field(default=())
    converged: bool | None = None

    @property
    def dn(self) -> float:
        return self.dn1 + self.dn2

    @property
    def energy_cost(self) -> float:
        return self.dn1 + self.alpha * self.dn2

    @property
    def _zero_cost(self) -> bool:
        return abs(self.energy_cost) <= ZERO_COST * (abs(self.dn1) + abs(self.dn2))

    @property
    def cop_infinite(self) -> bool:
        return self._zero_cost and self.dn < 0

    @property
    def cop(self) -> float:
        if self._zero_cost:
            return math.inf if self.dn < 0 else math.nan
        return -self.dn / self.energy_cost

    @property
    def efficiency(self) -> float:
        spread = self.dn1 - self.dn2
        if spread == 0:
            return 0.0
        return -self.dn / spread

    @property
    def otto_bound(self) -> float:
        return 1.0 - min(self.alpha, 1.0 / self.alpha)


def optimal_permutation_cool(table: SpectralTable) -> CoolingReport:
    """Rearrange the thermal weights in descending order along the total-number ladder.

    Ties are broken by the original slot order, and inside each block the
    largest weights go to the smallest ``n1``, which minimises ``dn1`` at the
    optimal ``dn``.
    """
    w = table.weights
    if w.size == 0:
        raise DomainError("empty spectral table")
    order = np.argsort(-w, kind="stable")
    delta = w[order] - w
    dn1 = float(delta @ table.n1)
    dn2 = float(delta @ table.n2)
    warnings = ()
    if table.tail > TAIL_WARNING * w.sum():
        warnings = (f"truncation tail {table.tail:.3e} exceeds {TAIL_WARNING:g} of the kept weight",)
    return CoolingReport(dn1, dn2, table.spec.alpha, warnings)


def nn_onset(alpha: float) -> int:
    """Index of the first block whose largest weight exceeds the smallest weight of the previous block."""
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    # guard against alpha/(1-alpha) landing a hair above an integer
    return max(1, math.ceil(alpha / (1 - alpha) - 1e-9))


def _check_y_alpha(y: float, alpha: float) -> None:
    if not 0 < y < 1:
        raise DomainError(f"y must lie in (0, 1), got {y}")
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def nn_bound_delta_n(y: float, alpha: float) -> float:
    """Closed-form lower bound on ``-dn_opt`` from nearest-neighbour block swaps.

    ``y = exp(-beta*omega_1)`` is the Boltzmann factor of the faster mode.
    """
    _check_y_alpha(y, alpha)
    m = nn_onset(alpha)
    ya = y**alpha
    return ((1 - y) * y ** (alpha * (m + 1)) - (1 - ya) * y**m) / (1 - y ** (alpha + 1))


@dataclass(frozen=True)
class NNComponents:
    dn1: float
    dn2: float
    cop_lower_bound: float


def nn_approx_components(y: float, alpha: float) -> NNComponents:
    """Per-mode occupation changes of the nearest-neighbour swaps and the resulting COP bound."""
    _check_y_alpha(y, alpha)
    m = nn_onset(alpha)
    xi = (1 - y) * (1 - y**alpha)
    q = y ** (1 + alpha)
    x = y**alpha
    # T0 = sum_{i>=m} d_i, T1 = sum_{i>=m} i d_i with d_i = y^(alpha(i+1)) - y^i
    T0 = x ** (m + 1) / (1 - x) - y**m / (1 - y)
    T1 = x * x**m * (m - (m - 1) * x) / (1 - x) ** 2 - y**m * (m - (m - 1) * y) / (1 - y) ** 2
    geo = 1 / (1 - q)
    geo_j = q / (1 - q) ** 2
    dn1 = xi * (T1 * geo + T0 * geo_j)
    dn2 = -xi * (T1 * geo + T0 * (geo_j + geo))
    cop_lb = 1.0 / ((1 - alpha) * (q / (1 - q) + 1 / (1 - x)))
    return NNComponents(dn1, dn2, cop_lb)


@dataclass(frozen=True)
class AsymptoticResult:
    epsilon: float
    dn1: float
    dn2: float
    alpha: float
    method: str
    error_estimate: float = 0.0

    @property
    def cop(self) -> float:
        return -(self.dn1 + self.dn2) / (self.dn1 + self.alpha * self.dn2)

    @property
    def efficiency(self) -> float:
        return -(self.dn1 + self.dn2) / (self.dn1 - self.dn2)


def block_sum_terms(a, eps: float):
    """Per-block summands of the small-alpha sums, in closed form.

    Returns ``(f1(a), f2(a))`` without the ``xi`` prefactor; ``sum_a f1`` is the
    final mean of ``n1`` over ``xi`` and ``sum_a f2`` that of ``n2``.
    """
    a = np.asarray(a, dtype=float)
    em1 = math.expm1(eps)
    # exponents combined before exponentiating so large a cannot overflow
    g1 = -(a / 2 + 1) * (a + 1) * eps
    f1 = math.exp(2 * eps) / em1**2 * (a * math.expm1(-eps) * np.exp(g1) + np.exp(g1 + a * eps) - np.exp(g1))
    g2 = -a * (a + 1) / 2 * eps
    f2 = math.exp(eps) / em1**2 * (a * em1 * np.exp(g2) + np.exp(g2 - a * eps) - np.exp(g2))
    return f1, f2


def _small_alpha_direct(eps: float) -> tuple[float, float]:
    # blocks a >= A contribute below exp(-eps*A^2/2) ~ 1e-30 relative
    A = int(math.ceil(math.sqrt(2 * 70 / eps))) + 2
    a = np.arange(A + 1)
    x = np.exp(-eps * np.arange(A + 1))
    cum_bx = np.cumsum(np.arange(A + 1) * x)  # sum_{b<=a} b e^{-eps b}
    cum_x = np.cumsum(x)
    gauss = np.exp(-eps * a * (a + 1) / 2)
    s1 = float(np.sum(gauss * cum_bx))
    s2 = float(np.sum(gauss * (a * cum_x - cum_bx)))
    return s1, s2


def _hs_integrals(eps: float) -> tuple[float, float, float]:
    half = 12 * math.sqrt(eps)

    def kernel(v: float) -> tuple[complex, complex]:
        z1 = np.exp(-(1j * v + 0.5 * eps))
        z3 = np.exp(-(1j * v + 1.5 * eps))
        g1 = math.expm1(-eps) * z3 / (1 - z3) ** 2 + 1 / (1 - z1) - 1 / (1 - z3)
        g2 = math.expm1(eps) * z1 / (1 - z1) ** 2 + 1 / (1 - z3) - 1 / (1 - z1)
        return g1, g2

    points = sorted(
        {p for p in (eps, 10 * eps, 100 * eps, math.sqrt(eps)) if p < half}
        | {2 * math.pi * k + d for k in range(1, 4) for d in (-eps, 0.0, eps) if 2 * math.pi * k + d < half}
    )
    results = []
    errors = []
    for idx in (0, 1):
        # imaginary part is odd in v; integrate twice the real part over v >= 0
        def integrand(v, idx=idx):
            return 2.0 * math.exp(-v * v / (2 * eps)) * kernel(v)[idx].real

        val, err = integrate.quad(integrand, 0.0, half, points=points or None, limit=2000, epsabs=0.0, epsrel=1e-11)
        results.append(val / math.sqrt(2 * math.pi * eps))
        errors.append(err / math.sqrt(2 * math.pi * eps))
    s1 = math.exp(-eps) * results[0]
    s2 = results[1]
    return s1, s2, max(errors[0] / max(abs(results[0]), 1e-300), errors[1] / max(abs(results[1]), 1e-300))


def _euler_maclaurin(eps: float) -> tuple[float, float, float]:
    upper = math.sqrt(2 * 80 / eps) + 10
    i1, e1 = integrate.quad(lambda x: float(block_sum_terms(x, eps)[0]), 0, upper, limit=500, epsrel=1e-12)
    i2, e2 = integrate.quad(lambda x: float(block_sum_terms(x, eps)[1]), 0, upper, limit=500, epsrel=1e-12)
    return i1, i2, max(e1 / abs(i1), e2 / abs(i2))


def asymptotic_small_alpha(beta_omega1: float, epsilon: float, method: str = "direct_sum") -> AsymptoticResult:
    """Optimal-cooling occupation changes in the small-alpha regime.

    ``epsilon = alpha * beta * omega_1`` is the scaled energy of the slow mode.
    ``method`` selects the evaluation route: ``direct_sum`` sums the block
    series, ``hs_quadrature`` integrates its Gaussian (Hubbard-Stratonovich)
    representation, ``euler_maclaurin`` keeps only the integral part of the
    Euler-Maclaurin expansion.
    """
    if not epsilon > 0 or not beta_omega1 > 0:
        raise DomainError("epsilon and beta_omega1 must be positive")
    xi = -math.expm1(-beta_omega1) * -math.expm1(-epsilon)
    n1i = 1 / math.expm1(beta_omega1)
    n2i = 1 / math.expm1(epsilon)
    err = 0.0
    if method == "direct_sum":
        s1, s2 = _small_alpha_direct(epsilon)
    elif method == "hs_quadrature":
        raw1, raw2, err = _hs_integrals(epsilon)
        em1 = math.expm1(epsilon)
        s1 = math.exp(2 * epsilon) / em1**2 * raw1
        s2 = math.exp(epsilon) / em1**2 * raw2
        if err > 1e-9:
            raise ConvergenceError(f"quadrature relative error {err:.2e} above 1e-9", err)
    elif method == "euler_maclaurin":
        s1, s2, err = _euler_maclaurin(epsilon)
    else:
        raise ValueError(f"unknown method {method!r}")
    return AsymptoticResult(epsilon, xi * s1 - n1i, xi * s2 - n2i, epsilon / beta_omega1, method, err)


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    dn: float
    dn1: float
    dn2: float
    cop: float
    efficiency: float
    energy_cost: float
    converged: bool


def cool_at(y_alpha: float, alpha: float, block_count: int = DEFAULT_BLOCKS) -> CoolingReport:
    spec = ThermalSpec.from_y_alpha(y_alpha, alpha)
    return optimal_permutation_cool(build_spectral_table(spec, block_count))


def sweep_point(y_alpha: float, alpha: float, block_count: int = DEFAULT_BLOCKS, check_convergence: bool = True) -> SweepRow:
    rep = cool_at(y_alpha, alpha, block_count)
    converged = True
    if check_convergence:
        fine = cool_at(y_alpha, alpha, min(2 * block_count, MAX_BLOCKS))
        converged = max(abs(fine.dn - rep.dn), abs(fine.dn1 - rep.dn1), abs(fine.dn2 - rep.dn2)) < 1e-9
    return SweepRow(alpha, rep.dn, rep.dn1, rep.dn2, rep.cop, rep.efficiency, rep.energy_cost, converged)


def sweep_alpha(
    y_alpha: float,
    alpha_grid,
    block_count: int = DEFAULT_BLOCKS,
    check_convergence: bool = True,
    executor=None,
) -> list[SweepRow]:
    """Optimal cooling across ``alpha`` at fixed ``exp(-beta*omega_2) = y_alpha``.

    ``executor`` may be any ``concurrent.futures`` executor; row order follows
    ``alpha_grid`` either way.
    """
    alphas = [float(a) for a in alpha_grid]
    if any(not 0 < a < 1 for a in alphas):
        raise DomainError("alpha grid must lie inside (0, 1)")
    args = [(y_alpha, a, block_count, check_convergence) for a in alphas]
    if executor is None:
        return [sweep_point(*arg) for arg in args]
    return list(executor.map(sweep_point, *zip(*args)))


def local_minima(xs, ys) -> list[float]:
    """Interior grid points whose value is below both neighbours."""
    ys = np.asarray(ys, dtype=float)
    xs = np.asarray(xs, dtype=float)
    idx = np.flatnonzero((ys[1:-1] < ys[:-2]) & (ys[1:-1] < ys[2:])) + 1
    return xs[idx].tolist()
