"""Seeded certification loops shared by the command line and the acceptance tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entropy import (
    Guarantee,
    TransferMatrix,
    check_superstochastic,
    second_law_verdict,
)
from .fock import ThermalSpec
from .linear import (
    BogoliubovMap,
    MomentState,
    delta_total_number,
    propagate_moments,
    random_bogoliubov,
    total_dispersion,
)

MONOTONE_TOL = 1e-9
IDENTITY_TOL = 1e-10
ENTROPY_TOL = 1e-9

# 3x3 pattern with zeros below the corner and a deficient lower-left block
HALL_FIXTURE = np.array(
    [
        [1.0, 0.6, 0.6],
        [0.0, 0.45, 0.6],
        [0.0, 0.45, 0.6],
    ]
)


def random_state(n: int, rng: np.random.Generator) -> tuple[str, MomentState]:
    """Thermal, diagonal, or correlated generalized-diagonal input state.

    Correlated states carry a random positive semidefinite ``<a_i^dagger a_j>``
    with zero first and anomalous moments.
    """
    kind = ("thermal", "diagonal", "correlated")[int(rng.integers(3))]
    if kind == "thermal":
        spec = ThermalSpec(tuple(rng.uniform(0.2, 3.0, n)), 1.0, normalize=False)
        return kind, MomentState.thermal(spec)
    if kind == "diagonal":
        return kind, MomentState.diagonal(rng.uniform(0.0, 3.0, n))
    G = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return kind, MomentState(np.zeros(n), G @ G.conj().T / n, np.zeros((n, n)))


@dataclass(frozen=True)
class LinearTrial:
    trial: int
    modes: int
    state_kind: str
    f_term: float
    R_term: float
    Y_term: float
    dn_decomposition: float
    dn_moments: float
    dispersion_change: float
    displacement_norm: float
    dn_undisplaced: float
    dispersion_change_undisplaced: float
    bmap: BogoliubovMap

    @property
    def monotone_ok(self) -> bool:
        return self.dn_moments >= -MONOTONE_TOL

    @property
    def decomposition_ok(self) -> bool:
        return abs(self.dn_decomposition - self.dn_moments) <= IDENTITY_TOL

    @property
    def bridge_ok(self) -> bool:
        """Dispersion sum equals the number change once the output means vanish.

        With a displacement the output mean is ``f`` and the general identity
        subtracts ``sum |f_i|^2``; both forms are checked.
        """
        undisplaced = abs(self.dispersion_change_undisplaced - self.dn_undisplaced) <= IDENTITY_TOL
        general = abs(self.dispersion_change - (self.dn_moments - self.displacement_norm)) <= IDENTITY_TOL
        return undisplaced and general

    @property
    def ok(self) -> bool:
        return self.monotone_ok and self.decomposition_ok and self.bridge_ok


def _dn(bmap: BogoliubovMap, state: MomentState) -> tuple[float, float]:
    after = propagate_moments(bmap, state)
    dn = float(np.sum(after.occupations - state.occupations))
    ddisp = total_dispersion(after) - total_dispersion(state)
    return dn, ddisp


def linear_trials(
    seed: int,
    trials: int,
    modes: int | None = None,
    squeeze_budget: float = 1.5,
    displacement_budget: float = 1.0,
):
    """Yield :class:`LinearTrial` records; ``modes=None`` draws N from 1..4 per trial."""
    rng = np.random.default_rng(seed)
    for k in range(trials):
        n = int(modes) if modes is not None else int(rng.integers(1, 5))
        bmap = random_bogoliubov(n, squeeze_budget, displacement_budget, rng)
        kind, state = random_state(n, rng)
        parts = delta_total_number(bmap, state)
        dn, ddisp = _dn(bmap, state)
        bare = BogoliubovMap(bmap.S, bmap.R, np.zeros(n))
        dn0, ddisp0 = _dn(bare, state)
        yield LinearTrial(
            k, n, kind, parts.f_term, parts.R_term, parts.Y_term, parts.total,
            dn, ddisp, float(np.sum(np.abs(bmap.f) ** 2)), dn0, ddisp0, bmap,
        )


@dataclass(frozen=True)
class EntropyTrial:
    trial: int
    modes: int
    verdict: str
    delta_entropy: float
    witness_rows: tuple[int, ...] | None
    witness_cols: tuple[int, ...] | None

    @property
    def ok(self) -> bool:
        return self.verdict == Guarantee.NONE.value or self.delta_entropy >= -ENTROPY_TOL


def entropy_trials(seed: int, trials: int, modes: int = 2, squeeze_budget: float = 1.5):
    """Random maps without displacement acting on diagonal occupations."""
    rng = np.random.default_rng(seed)
    for k in range(trials):
        bmap = random_bogoliubov(modes, squeeze_budget, 0.0, rng)
        n0 = rng.uniform(0.0, 3.0, modes)
        rep = second_law_verdict(bmap, n0)
        cert = rep.certificate
        yield EntropyTrial(k, modes, rep.guarantee.value, rep.delta_entropy, cert.rows, cert.cols)


def identity_entropy_trial(modes: int = 2) -> EntropyTrial:
    rep = second_law_verdict(BogoliubovMap.identity(modes), np.linspace(0.5, 1.5, modes))
    return EntropyTrial(-1, modes, rep.guarantee.value, rep.delta_entropy, None, None)


def hall_fixture_certificate():
    return check_superstochastic(TransferMatrix(HALL_FIXTURE))
