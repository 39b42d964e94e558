"""Linear (Bogoliubov) evolution of bosonic modes and the photon-number monotonicity law.

A map acts on Heisenberg operators as ``b_i = sum_j (S_ij a_j + R_ij a_j^dagger) + f_i``.
States enter only through their first and second moments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from .errors import PreconditionError, ShapeMismatchError
from .fock import ThermalSpec

SYMPLECTIC_TOL = 1e-10
DIAGONAL_TOL = 1e-10


def _max_abs(x: np.ndarray) -> float:
    return float(np.max(np.abs(x))) if x.size else 0.0


@dataclass(frozen=True)
class BogoliubovMap:
    S: np.ndarray
    R: np.ndarray
    f: np.ndarray

    def __post_init__(self) -> None:
        S = np.atleast_2d(np.asarray(self.S, dtype=complex))
        R = np.atleast_2d(np.asarray(self.R, dtype=complex))
        f = np.atleast_1d(np.asarray(self.f, dtype=complex))
        n = S.shape[0]
        if S.shape != (n, n) or R.shape != (n, n) or f.shape != (n,):
            raise ShapeMismatchError(
                f"inconsistent shapes S{S.shape}, R{R.shape}, f{f.shape}"
            )
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "f", f)

    @property
    def num_modes(self) -> int:
        return self.S.shape[0]

    @classmethod
    def identity(cls, n: int) -> "BogoliubovMap":
        return cls(np.eye(n), np.zeros((n, n)), np.zeros(n))

    def then(self, other: "BogoliubovMap") -> "BogoliubovMap":
        """Map obtained by applying ``self`` first and ``other`` second."""
        if other.num_modes != self.num_modes:
            raise ShapeMismatchError("maps act on different numbers of modes")
        S1, R1, f1 = self.S, self.R, self.f
        S2, R2, f2 = other.S, other.R, other.f
        return BogoliubovMap(
            S2 @ S1 + R2 @ R1.conj(),
            S2 @ R1 + R2 @ S1.conj(),
            S2 @ f1 + R2 @ f1.conj() + f2,
        )


@dataclass(frozen=True)
class SymplecticResiduals:
    """Max-norm residuals of the four commutation-preserving constraints."""

    forward_normal: float  # S S^dagger - R R^dagger - I
    forward_anomalous: float  # S R^T - R S^T
    inverse_normal: float  # S^dagger S - R^T R^* - I
    inverse_anomalous: float  # S^dagger R - R^T S^*
    tol: float = SYMPLECTIC_TOL

    @property
    def values(self) -> tuple[float, float, float, float]:
        return (self.forward_normal, self.forward_anomalous, self.inverse_normal, self.inverse_anomalous)

    @property
    def ok(self) -> bool:
        return max(self.values) <= self.tol


def validate_symplectic(bmap: BogoliubovMap, tol: float = SYMPLECTIC_TOL) -> SymplecticResiduals:
    S, R = bmap.S, bmap.R
    eye = np.eye(bmap.num_modes)
    return SymplecticResiduals(
        _max_abs(S @ S.conj().T - R @ R.conj().T - eye),
        _max_abs(S @ R.T - R @ S.T),
        _max_abs(S.conj().T @ S - R.T @ R.conj() - eye),
        _max_abs(S.conj().T @ R - R.T @ S.conj()),
        tol,
    )


def passive_map(U: np.ndarray) -> BogoliubovMap:
    U = np.asarray(U, dtype=complex)
    n = U.shape[0]
    return BogoliubovMap(U, np.zeros((n, n)), np.zeros(n))


def squeezing_map(r, theta=None) -> BogoliubovMap:
    """Independent single-mode squeezers: ``b = cosh(r) a + exp(i theta) sinh(r) a^dagger``."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    theta = np.zeros_like(r) if theta is None else np.atleast_1d(np.asarray(theta, dtype=float))
    return BogoliubovMap(np.diag(np.cosh(r)), np.diag(np.exp(1j * theta) * np.sinh(r)), np.zeros(r.size))


def two_mode_squeezer(r: float) -> BogoliubovMap:
    c, s = np.cosh(r), np.sinh(r)
    return BogoliubovMap(np.diag([c, c]), np.array([[0.0, s], [s, 0.0]]), np.zeros(2))


def displacement_map(f) -> BogoliubovMap:
    f = np.atleast_1d(np.asarray(f, dtype=complex))
    n = f.size
    return BogoliubovMap(np.eye(n), np.zeros((n, n)), f)


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    if n == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(n, random_state=rng)


def random_bogoliubov(
    n: int,
    squeeze_budget: float,
    displacement_budget: float,
    seed: int | np.random.Generator | None = None,
) -> BogoliubovMap:
    """Random valid map composed as passive, squeeze, passive, displace.

    Squeezing magnitudes are uniform in ``[0, squeeze_budget]`` per mode and
    displacements have modulus at most ``displacement_budget``. Randomness comes
    from ``numpy.random.default_rng`` (PCG64) seeded with ``seed``.
    """
    if squeeze_budget < 0 or displacement_budget < 0:
        raise ValueError("budgets must be non-negative")
    rng = np.random.default_rng(seed)
    first = passive_map(haar_unitary(n, rng))
    squeeze = squeezing_map(squeeze_budget * rng.random(n), 2 * np.pi * rng.random(n))
    second = passive_map(haar_unitary(n, rng))
    moduli = displacement_budget * rng.random(n)
    shift = displacement_map(moduli * np.exp(2j * np.pi * rng.random(n)))
    return first.then(squeeze).then(second).then(shift)


@dataclass(frozen=True)
class MomentState:
    """First and second moments of an N-mode state.

    ``first[i] = <a_i>``, ``normal[i, j] = <a_i^dagger a_j>``, ``anomalous[i, j] = <a_i a_j>``.
    """

    first: np.ndarray
    normal: np.ndarray
    anomalous: np.ndarray

    def __post_init__(self) -> None:
        first = np.atleast_1d(np.asarray(self.first, dtype=complex))
        normal = np.atleast_2d(np.asarray(self.normal, dtype=complex))
        anomalous = np.atleast_2d(np.asarray(self.anomalous, dtype=complex))
        n = first.size
        if normal.shape != (n, n) or anomalous.shape != (n, n):
            raise ShapeMismatchError("moment arrays have inconsistent shapes")
        object.__setattr__(self, "first", first)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "anomalous", anomalous)

    @property
    def num_modes(self) -> int:
        return self.first.size

    @classmethod
    def diagonal(cls, occupations) -> "MomentState":
        """Generalized-diagonal state with ``<a_i^dagger a_j> = delta_ij n_i``."""
        n = np.atleast_1d(np.asarray(occupations, dtype=float))
        z = np.zeros((n.size, n.size))
        return cls(np.zeros(n.size), np.diag(n), z)

    @classmethod
    def thermal(cls, spec: ThermalSpec) -> "MomentState":
        return cls.diagonal(spec.occupations)

    @classmethod
    def vacuum(cls, n: int) -> "MomentState":
        return cls.diagonal(np.zeros(n))

    @property
    def occupations(self) -> np.ndarray:
        return np.real(np.diag(self.normal)).copy()

    def covariance(self) -> np.ndarray:
        """Centered ``<d xi d xi^dagger>`` for ``xi = (a, a^dagger)``; positive semidefinite iff physical."""
        m = self.first
        N = self.normal
        A = self.anomalous
        eye = np.eye(self.num_modes)
        top = np.hstack([eye + N.T - np.outer(m, m.conj()), A - np.outer(m, m)])
        bottom = np.hstack([A.conj() - np.outer(m.conj(), m.conj()), N - np.outer(m.conj(), m)])
        return np.vstack([top, bottom])

    def is_physical(self, tol: float = 1e-10) -> bool:
        herm_ok = _max_abs(self.normal - self.normal.conj().T) <= tol
        sym_ok = _max_abs(self.anomalous - self.anomalous.T) <= tol
        cov = self.covariance()
        cov = 0.5 * (cov + cov.conj().T)
        return herm_ok and sym_ok and float(np.linalg.eigvalsh(cov).min()) >= -tol


def _check_dims(bmap: BogoliubovMap, state: MomentState) -> None:
    if bmap.num_modes != state.num_modes:
        raise ShapeMismatchError(
            f"map acts on {bmap.num_modes} modes, state has {state.num_modes}"
        )


def propagate_moments(bmap: BogoliubovMap, state: MomentState) -> MomentState:
    """Exact first and second moments after the map."""
    _check_dims(bmap, state)
    S, R, f = bmap.S, bmap.R, bmap.f
    m, N, A = state.first, state.normal, state.anomalous
    eye = np.eye(state.num_modes)
    mu = S @ m + R @ m.conj()
    # <a_k a_l^dagger> = delta_kl + N_lk
    anti = eye + N.T
    normal = (
        S.conj() @ N @ S.T
        + S.conj() @ A.conj() @ R.T
        + R.conj() @ A @ S.T
        + R.conj() @ anti @ R.T
        + np.outer(f.conj(), mu)
        + np.outer(mu.conj(), f)
        + np.outer(f.conj(), f)
    )
    anomalous = (
        S @ A @ S.T
        + S @ anti @ R.T
        + R @ N @ S.T
        + R @ A.conj() @ R.T
        + np.outer(f, mu)
        + np.outer(mu, f)
        + np.outer(f, f)
    )
    return MomentState(mu + f, normal, anomalous)


@dataclass(frozen=True)
class DiagonalityVerdict:
    first_ok: bool
    anomalous_ok: bool
    normal_diagonal_ok: bool | None
    worst_condition: str | None
    worst_index: tuple | None
    worst_value: float

    @property
    def ok(self) -> bool:
        checks = [self.first_ok, self.anomalous_ok]
        if self.normal_diagonal_ok is not None:
            checks.append(self.normal_diagonal_ok)
        return all(checks)

    def raise_if_violated(self) -> None:
        if not self.ok:
            raise PreconditionError(self.worst_condition, self.worst_index, self.worst_value)


def is_generalized_diagonal(
    state: MomentState, tol: float = DIAGONAL_TOL, entropy_grade: bool = False
) -> DiagonalityVerdict:
    """Check ``<a_i> = 0`` and ``<a_i a_j> = 0``; with ``entropy_grade`` also ``<a_i^dagger a_j> = 0`` for ``i != j``.

    The worst violating entry is reported, preferring the first failing condition
    in the order first, anomalous, normal_diagonal.
    """
    candidates = []
    first_abs = np.abs(state.first)
    i = int(np.argmax(first_abs))
    candidates.append(("first", (i,), float(first_abs[i])))
    anom_abs = np.abs(state.anomalous)
    ij = np.unravel_index(int(np.argmax(anom_abs)), anom_abs.shape)
    candidates.append(("anomalous", tuple(int(k) for k in ij), float(anom_abs[ij])))
    normal_ok = None
    if entropy_grade:
        off = np.abs(state.normal - np.diag(np.diag(state.normal)))
        ij = np.unravel_index(int(np.argmax(off)), off.shape)
        candidates.append(("normal_diagonal", tuple(int(k) for k in ij), float(off[ij])))
        normal_ok = candidates[2][2] <= tol
    failing = [c for c in candidates if c[2] > tol]
    worst = failing[0] if failing else (None, None, max(c[2] for c in candidates))
    return DiagonalityVerdict(
        candidates[0][2] <= tol,
        candidates[1][2] <= tol,
        normal_ok,
        *worst,
    )


@dataclass(frozen=True)
class NumberChange:
    """Split of the total occupation change into its three non-negative parts."""

    f_term: float
    R_term: float
    Y_term: float

    @property
    def total(self) -> float:
        return self.f_term + self.R_term + self.Y_term


def delta_total_number(
    bmap: BogoliubovMap, state: MomentState, tol: float = DIAGONAL_TOL
) -> NumberChange:
    """Change of the total mean occupation for a generalized-diagonal input.

    Returns ``sum|f_i|^2``, ``sum|R_ij|^2`` and ``2 sum_i <Y_i^dagger Y_i>`` with
    ``Y_i = sum_k R*_ik a_k``, which equals ``2 tr(R N R^dagger)``.
    """
    _check_dims(bmap, state)
    is_generalized_diagonal(state, tol).raise_if_violated()
    R = bmap.R
    y_term = 2.0 * float(np.real(np.trace(R @ state.normal @ R.conj().T)))
    return NumberChange(
        float(np.sum(np.abs(bmap.f) ** 2)),
        float(np.sum(np.abs(R) ** 2)),
        y_term,
    )


def dispersion(state: MomentState, mode: int) -> float:
    """``<a^dagger a> + 1/2 - |<a>|^2`` for the selected mode."""
    return float(
        np.real(state.normal[mode, mode]) + 0.5 - abs(state.first[mode]) ** 2
    )


def quadrature_dispersion(state: MomentState, mode: int) -> float:
    """Same quantity via ``Var(x) + Var(y)`` with ``a = x + i y``."""
    m = state.first[mode]
    n = np.real(state.normal[mode, mode])
    aa = state.anomalous[mode, mode]
    x2 = 0.25 * (2 * np.real(aa) + 2 * n + 1)
    y2 = 0.25 * (-2 * np.real(aa) + 2 * n + 1)
    return float(x2 - np.real(m) ** 2 + y2 - np.imag(m) ** 2)


def total_dispersion(state: MomentState) -> float:
    return sum(dispersion(state, i) for i in range(state.num_modes))


def energy_change(
    bmap: BogoliubovMap, state: MomentState, spec: ThermalSpec, tol: float = DIAGONAL_TOL
) -> float:
    """``sum_i omega_i (<b_i^dagger b_i> - <a_i^dagger a_i>)``; the sign is not fixed."""
    _check_dims(bmap, state)
    is_generalized_diagonal(state, tol).raise_if_violated()
    if spec.num_modes != state.num_modes:
        raise ShapeMismatchError("spec and state disagree on the number of modes")
    after = propagate_moments(bmap, state)
    return float(np.dot(spec.omegas, after.occupations - state.occupations))
