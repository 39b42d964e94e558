"""Bose-entropy second law for linear evolution.

The occupation transfer matrix ``M_ik = |S_ik|^2 + |R_ik|^2`` carries diagonal
occupations forward. Entropy growth is certified when ``M`` dominates a doubly
stochastic matrix (checked with a Hall-type subset inequality), or row by row
through a weaker sufficient condition.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeMismatchError
from .fock import ThermalSpec, bose_entropy_scalar
from .linear import BogoliubovMap, MomentState, is_generalized_diagonal

MAX_SUBSET_MODES = 20
EQUALITY_TOL = 1e-10
WITNESS_MARGIN = 1e-12
_CHUNK = 1 << 14


@dataclass(frozen=True)
class TransferMatrix:
    M: np.ndarray

    def __post_init__(self) -> None:
        M = np.atleast_2d(np.asarray(self.M, dtype=float))
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ShapeMismatchError(f"transfer matrix must be square, got {M.shape}")
        if np.any(M < 0):
            raise DomainError("transfer matrix entries must be non-negative")
        if np.any(M.sum(axis=1) < 1 - EQUALITY_TOL) or np.any(M.sum(axis=0) < 1 - EQUALITY_TOL):
            raise DomainError("transfer matrix row and column sums must be at least 1")
        object.__setattr__(self, "M", M)

    @classmethod
    def from_map(cls, bmap: BogoliubovMap) -> "TransferMatrix":
        return cls(np.abs(bmap.S) ** 2 + np.abs(bmap.R) ** 2)

    @property
    def size(self) -> int:
        return self.M.shape[0]

    @property
    def row_excess(self) -> np.ndarray:
        return self.M.sum(axis=1) - 1.0

    @property
    def col_excess(self) -> np.ndarray:
        return self.M.sum(axis=0) - 1.0


class Verdict(enum.Enum):
    SUPERSTOCHASTIC = "superstochastic"
    NOT_SUPERSTOCHASTIC = "not_superstochastic"


@dataclass(frozen=True)
class StochasticCertificate:
    """Outcome of the subset check.

    Positive verdicts carry ``theta`` (a dominated doubly stochastic matrix) for
    2x2 inputs. Negative verdicts carry 0-based ``rows`` and ``cols`` of a
    violating subset pair and the ``slack`` by which the inequality fails.
    """

    verdict: Verdict
    theta: np.ndarray | None = None
    rows: tuple[int, ...] | None = None
    cols: tuple[int, ...] | None = None
    slack: float = 0.0

    @property
    def ok(self) -> bool:
        return self.verdict is Verdict.SUPERSTOCHASTIC


def theta_2x2(M: np.ndarray) -> np.ndarray:
    """Doubly stochastic matrix dominated by a 2x2 matrix with unit-or-larger line sums.

    The smallest entry ``c`` (clipped to 1) is kept in place together with its
    diagonal partner; the complementary pair gets ``1 - c``.
    """
    M = np.asarray(M, dtype=float)
    k = int(np.argmin(M))
    c = min(float(M.flat[k]), 1.0)
    on_diagonal = k in (0, 3)
    if on_diagonal:
        return np.array([[c, 1 - c], [1 - c, c]])
    return np.array([[1 - c, c], [c, 1 - c]])


def _subset_masks(n: int, start: int, stop: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n)) & 1).astype(bool)


def check_superstochastic(tm: TransferMatrix, tol: float = EQUALITY_TOL) -> StochasticCertificate:
    """Decide whether ``M`` entrywise dominates some doubly stochastic matrix.

    The criterion ``sum_{i in I, k in J} M_ik >= |I| + |J| - N`` must hold for all
    subset pairs. For fixed ``I`` the tightest ``J`` collects the columns whose
    partial sums over ``I`` fall below 1, so the search runs over row subsets
    only. Row subsets are visited by size, then lexicographically, and the first
    violation found is returned.
    """
    M = tm.M
    n = tm.size
    if n > MAX_SUBSET_MODES:
        raise DomainError(f"subset enumeration limited to N <= {MAX_SUBSET_MODES}, got {n}")
    for size in range(1, n + 1):
        combos = itertools.combinations(range(n), size)
        while True:
            batch = list(itertools.islice(combos, _CHUNK))
            if not batch:
                break
            masks = np.zeros((len(batch), n))
            for r, rows in enumerate(batch):
                masks[r, list(rows)] = 1.0
            partial = masks @ M  # column sums restricted to I
            deficit = np.minimum(partial - 1.0, 0.0).sum(axis=1)
            # sum_J (partial - 1) >= |I| - N  <=>  sum_{I x J} M >= |I| + |J| - N
            slack = deficit - (size - n)
            bad = np.flatnonzero(slack < -tol)
            if bad.size:
                r = int(bad[0])
                cols = tuple(int(k) for k in np.flatnonzero(partial[r] < 1.0))
                return StochasticCertificate(
                    Verdict.NOT_SUPERSTOCHASTIC, rows=batch[r], cols=cols, slack=float(slack[r])
                )
    theta = theta_2x2(M) if n == 2 else None
    if n == 1:
        theta = np.ones((1, 1))
    return StochasticCertificate(Verdict.SUPERSTOCHASTIC, theta=theta)


def hall_condition_bruteforce(M: np.ndarray, tol: float = EQUALITY_TOL) -> bool:
    """Direct check of the subset inequality over all ``4^N`` pairs (small ``N`` only)."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    masks = _subset_masks(n, 0, 1 << n).astype(float)
    sizes = masks.sum(axis=1)
    sums = masks @ M @ masks.T
    rhs = sizes[:, None] + sizes[None, :] - n
    return bool(np.all(sums >= rhs - tol))


def _diagonal_input(bmap: BogoliubovMap, n0, tol: float) -> np.ndarray:
    n0 = np.atleast_1d(np.asarray(n0, dtype=float))
    if n0.size != bmap.num_modes:
        raise ShapeMismatchError("occupation vector length does not match the map")
    if np.any(n0 < 0):
        raise DomainError("occupations must be non-negative")
    return n0


def occupation_propagate(bmap: BogoliubovMap, n0, spec: ThermalSpec | None = None) -> np.ndarray:
    """Occupations after the map for an input with diagonal normal moments and vanishing first and anomalous moments.

    ``n_i(t) = sum_k M_ik n_k(0) + sum_k |R_ik|^2 + |f_i|^2``. ``n0`` may be an
    occupation vector or a :class:`MomentState`, which is then checked for the
    three moment conditions.
    """
    if isinstance(n0, MomentState):
        is_generalized_diagonal(n0, entropy_grade=True).raise_if_violated()
        n0 = n0.occupations
    n0 = _diagonal_input(bmap, n0, 0.0)
    absR2 = np.abs(bmap.R) ** 2
    M = np.abs(bmap.S) ** 2 + absR2
    return M @ n0 + absR2.sum(axis=1) + np.abs(bmap.f) ** 2


def bose_entropy_total(n) -> float:
    return float(np.sum(bose_entropy_scalar(np.atleast_1d(np.asarray(n, dtype=float)))))


def check_sufficient_nor(bmap: BogoliubovMap, n0, spec: ThermalSpec | None = None) -> np.ndarray:
    """Per-row test ``s(n_i(t)) >= sum_k (|S_ik|^2 - |R_ik|^2) s(n_k(0))``.

    Summing the rows uses unit column sums of ``|S|^2 - |R|^2``, so an all-true
    result implies entropy growth.
    """
    if isinstance(n0, MomentState):
        is_generalized_diagonal(n0, entropy_grade=True).raise_if_violated()
        n0 = n0.occupations
    n0 = _diagonal_input(bmap, n0, 0.0)
    nt = occupation_propagate(bmap, n0)
    weights = np.abs(bmap.S) ** 2 - np.abs(bmap.R) ** 2
    rhs = weights @ bose_entropy_scalar(n0)
    return bose_entropy_scalar(nt) >= rhs - 1e-12


class Guarantee(enum.Enum):
    DSS = "guaranteed_by_dss"
    NOR = "guaranteed_by_nor"
    NONE = "no_guarantee"


@dataclass(frozen=True)
class SecondLawReport:
    guarantee: Guarantee
    delta_entropy: float
    certificate: StochasticCertificate
    row_verdicts: np.ndarray


def second_law_verdict(bmap: BogoliubovMap, n0, spec: ThermalSpec | None = None) -> SecondLawReport:
    """Strongest available entropy-growth guarantee together with the measured change."""
    if isinstance(n0, MomentState):
        is_generalized_diagonal(n0, entropy_grade=True).raise_if_violated()
        n0 = n0.occupations
    n0 = _diagonal_input(bmap, n0, 0.0)
    cert = check_superstochastic(TransferMatrix.from_map(bmap))
    rows = check_sufficient_nor(bmap, n0)
    if cert.ok:
        guarantee = Guarantee.DSS
    elif rows.all():
        guarantee = Guarantee.NOR
    else:
        guarantee = Guarantee.NONE
    ds = bose_entropy_total(occupation_propagate(bmap, n0)) - bose_entropy_total(n0)
    return SecondLawReport(guarantee, ds, cert, rows)


def search_hall_violation(
    n: int, squeeze_budgets, trials_per_budget: int, seed: int = 0
) -> tuple[BogoliubovMap | None, int]:
    """Random search for a valid map whose transfer matrix fails the subset check.

    Returns the first offending map (or ``None``) and the number of maps tried.
    """
    from .linear import random_bogoliubov

    rng = np.random.default_rng(seed)
    tried = 0
    for budget in squeeze_budgets:
        for _ in range(trials_per_budget):
            bmap = random_bogoliubov(n, budget, 0.0, rng)
            tried += 1
            if not check_superstochastic(TransferMatrix.from_map(bmap)).ok:
                return bmap, tried
    return None, tried
