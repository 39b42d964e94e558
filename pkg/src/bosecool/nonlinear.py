"""Cooling by a chi-squared three-wave interaction between two modes.

The interaction is ``H_I = x1 x2^2 + x1^2 x2`` with ``x_k = a_k + a_k^dagger``.
Near the resonance ``omega_1 = 2 omega_2`` only ``a1 a2^dag^2 + h.c.`` survives
the rotating-wave approximation (RWA); that term conserves ``2 n1 + n2``.

Closed-form second-order results are evaluated in rescaled units where
``beta = 1`` (``beta*omega -> omega``, ``beta*g -> g``, ``t/beta -> t``).
:class:`NonlinearConfig` stores physical values and performs the rescaling.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.linalg import eigh

from .cooling import CoolingReport
from .errors import ConvergenceError, DomainError
from .fock import FockSpace, ThermalSpec, annihilation_matrix, cutoffs_for_tail, thermal_state

VARIANTS = ("full", "rwa")
VALIDITY_LIMIT = 0.3
EXACT_TAIL = 1e-8
EXACT_MAX_ENTRIES = 10**8
CUTOFF_SHIFT_TOL = 1e-6
NONZERO_REL = 1e-12


@dataclass(frozen=True)
class NonlinearConfig:
    spec: ThermalSpec
    g: float
    t: float
    variant: str = "full"
    warnings: tuple[str, ...] = field(default=(), init=False)

    def __post_init__(self) -> None:
        if self.spec.num_modes != 2:
            raise DomainError("the nonlinear model has exactly two modes")
        if self.variant not in VARIANTS:
            raise DomainError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.g < 0 or self.t < 0:
            raise DomainError("coupling and time must be non-negative")
        est = self.validity_estimate
        if est > VALIDITY_LIMIT:
            msg = f"second-order magnitude estimate {est:.3g} exceeds {VALIDITY_LIMIT}"
            object.__setattr__(self, "warnings", (msg,))

    @classmethod
    def rescaled(cls, omega1: float, omega2: float, g: float, t: float, variant: str = "full") -> "NonlinearConfig":
        """Config given directly in rescaled units (``beta = 1``)."""
        return cls(ThermalSpec((omega1, omega2), 1.0, normalize=False), g, t, variant)

    @property
    def omegas(self) -> tuple[float, float]:
        w1, w2 = self.spec.omegas
        return w1 * self.spec.beta, w2 * self.spec.beta

    @property
    def scaled_g(self) -> float:
        return self.g * self.spec.beta

    @property
    def scaled_t(self) -> float:
        return self.t / self.spec.beta

    @property
    def slowest_frequency(self) -> float:
        w1, w2 = self.spec.omegas
        if self.variant == "rwa":
            return abs(2 * w2 - w1)
        return min(w1, w2, abs(2 * w1 - w2), abs(2 * w2 - w1))

    @property
    def validity_estimate(self) -> float:
        """``g/Omega * |sin(Omega t / 2)|``, tending to ``g t / 2`` as ``Omega -> 0``."""
        om = self.slowest_frequency
        if om * self.t < 1e-12:
            return self.g * self.t / 2
        return self.g / om * abs(math.sin(om * self.t / 2))


_WORDS = (
    ("a1 a2 a2", (-1, -2)),
    ("a1+ a2 a2", (1, -2)),
    ("a1 a2+ a2+", (-1, 2)),
    ("a1+ a2+ a2+", (1, 2)),
    ("a1 a1 a2", (-2, -1)),
    ("a1+ a1+ a2", (2, -1)),
    ("a1 a1 a2+", (-2, 1)),
    ("a1+ a1+ a2+", (2, 1)),
)


@dataclass(frozen=True)
class MonomialTable:
    """The eight cubic words of the interaction and their free-evolution frequencies.

    Under free evolution each word picks up ``exp(-i W s)``; ``W`` is minus the
    energy the word adds, so annihilators count ``+omega``.
    """

    omega1: float
    omega2: float

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in _WORDS)

    @property
    def shifts(self) -> tuple[tuple[int, int], ...]:
        """Change of ``(n1, n2)`` caused by each word."""
        return tuple(s for _, s in _WORDS)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([-(d1 * self.omega1 + d2 * self.omega2) for d1, d2 in self.shifts])

    def matrices(self, space: FockSpace) -> list[np.ndarray]:
        ops = _ladder_ops(space)
        out = []
        for name, _ in _WORDS:
            m = np.eye(space.dim)
            for tok in name.split():
                m = m @ ops[tok]
            out.append(m)
        return out


def _ladder_ops(space: FockSpace) -> dict[str, np.ndarray]:
    a1 = annihilation_matrix(space, 0, dtype=float)
    a2 = annihilation_matrix(space, 1, dtype=float)
    return {"a1": a1, "a1+": a1.T, "a2": a2, "a2+": a2.T}


def interaction_matrix(space: FockSpace, variant: str = "full") -> np.ndarray:
    ops = _ladder_ops(space)
    if variant == "rwa":
        h = ops["a1"] @ ops["a2+"] @ ops["a2+"]
        return h + h.T
    if variant == "mirrored":
        h = ops["a2"] @ ops["a1+"] @ ops["a1+"]
        return h + h.T
    if variant != "full":
        raise DomainError(f"unknown variant {variant!r}")
    x1 = ops["a1"] + ops["a1+"]
    x2 = ops["a2"] + ops["a2+"]
    return x1 @ x2 @ x2 + x1 @ x1 @ x2


def build_hamiltonian(config: NonlinearConfig, space: FockSpace) -> np.ndarray:
    """Dense real symmetric ``H0 + g H_I`` in physical units."""
    if space.num_modes != 2:
        raise DomainError("space must have two modes")
    occ = space.occupations
    w1, w2 = config.spec.omegas
    H = config.g * interaction_matrix(space, config.variant)
    H[np.diag_indices_from(H)] += w1 * occ[:, 0] + w2 * occ[:, 1]
    return H


def phi_kernel(x, t: float):
    """``4 sin^2(x t / 2) / x^2`` with the removable value ``t^2`` at ``x = 0``."""
    x = np.asarray(x, dtype=float)
    out = t * t * np.sinc(x * t / (2 * np.pi)) ** 2
    return float(out) if out.ndim == 0 else out


def second_order_coefficients(w1: float, w2: float, c1_form: str = "printed") -> dict[str, tuple[float, float]]:
    """Weights of the six kernel terms for ``(dn1, dn2)`` in rescaled units.

    Keys ``A``..``F`` multiply ``Phi(w1+2w2)``, ``Phi(w1-2w2)``, ``Phi(w1)``,
    ``Phi(w2+2w1)``, ``Phi(w2-2w1)``, ``Phi(w2)``.

    The ``Phi(w1)`` weight of ``dn1`` defaults to ``4 e^w2/(e^w2-1)^2``
    (``c1_form="printed"``), which equals ``4 Var(n2)``. Second-order perturbation
    theory for the stated interaction gives the thermal mean of ``(2 n2 + 1)^2``
    instead, ``8 e^w2/(e^w2-1)^2 + 1``; select it with ``c1_form="derived"``.
    Only the derived form agrees with exact evolution as ``g -> 0``.
    """
    if c1_form not in ("derived", "printed"):
        raise DomainError(f"c1_form must be 'derived' or 'printed', got {c1_form!r}")

    def abc(u1, u2):
        den = math.expm1(u1) * math.expm1(u2) ** 2
        a1 = 2 * math.expm1(u1 + 2 * u2) / den
        b1 = 2 * (math.exp(u1) - math.exp(2 * u2)) / den
        var = math.exp(u2) / math.expm1(u2) ** 2
        c1 = 4 * var if c1_form == "printed" else 8 * var + 1
        return (a1, 2 * a1), (b1, -2 * b1), (c1, 0.0)

    A, B, C = abc(w1, w2)
    As, Bs, Cs = abc(w2, w1)
    # mirrored terms: mode labels swap along with the frequencies
    D, E, F = (As[1], As[0]), (Bs[1], Bs[0]), (Cs[1], Cs[0])
    return {"A": A, "B": B, "C": C, "D": D, "E": E, "F": F}


@dataclass(frozen=True)
class DeltaN:
    dn1: float
    dn2: float

    @property
    def dn(self) -> float:
        return self.dn1 + self.dn2


def perturbative_delta_n(config: NonlinearConfig, c1_form: str = "printed") -> DeltaN:
    """Second-order occupation changes under the full interaction."""
    if config.variant != "full":
        raise DomainError("perturbative_delta_n needs the full variant; use rwa_delta_n")
    w1, w2 = config.omegas
    t = config.scaled_t
    coef = second_order_coefficients(w1, w2, c1_form)
    args = {"A": w1 + 2 * w2, "B": w1 - 2 * w2, "C": w1, "D": w2 + 2 * w1, "E": w2 - 2 * w1, "F": w2}
    g2 = config.scaled_g**2
    dn1 = g2 * sum(coef[k][0] * phi_kernel(args[k], t) for k in args)
    dn2 = g2 * sum(coef[k][1] * phi_kernel(args[k], t) for k in args)
    return DeltaN(float(dn1), float(dn2))


@dataclass(frozen=True)
class RWAResult(DeltaN):
    cop: float | None = None
    efficiency: float | None = None


def rwa_delta_n(config: NonlinearConfig) -> RWAResult:
    """Second-order occupation changes under the resonant interaction alone."""
    if config.variant != "rwa":
        raise DomainError("rwa_delta_n needs the rwa variant")
    w1, w2 = config.omegas
    x = 2 * w2 - w1
    # 8 sin^2(x t/2)/x^2 = 2 Phi(x)
    dn1 = (
        2 * config.scaled_g**2 * phi_kernel(x, config.scaled_t)
        * (math.exp(w1) - math.exp(2 * w2)) / (math.expm1(w1) * math.expm1(w2) ** 2)
    )
    dn2 = -2 * dn1
    if dn1 + dn2 < 0:
        alpha = w2 / w1
        return RWAResult(dn1, dn2, 1 / (1 - 2 * alpha), 1 / 3)
    return RWAResult(dn1, dn2)


def default_cutoffs(spec: ThermalSpec) -> tuple[int, ...]:
    tail = cutoffs_for_tail(spec, EXACT_TAIL)
    occ = spec.occupations
    return tuple(max(12, math.ceil(6 * n), c) for n, c in zip(occ, tail))


def _sector_labels(space: FockSpace, variant: str) -> np.ndarray:
    occ = space.occupations
    if variant == "rwa":
        return 2 * occ[:, 0] + occ[:, 1]
    return np.zeros(space.dim, dtype=int)


def _evolved_occupations(config: NonlinearConfig, cutoffs) -> tuple[float, float]:
    space = FockSpace(cutoffs, max_entries=EXACT_MAX_ENTRIES)
    state = thermal_state(space, config.spec)
    p = np.real(np.diag(state.normalized()))
    H = build_hamiltonian(config, space)
    occ = space.occupations.astype(float)
    p_t = np.empty_like(p)
    # the RWA Hamiltonian is block diagonal in 2 n1 + n2; evolve each block alone
    labels = _sector_labels(space, config.variant)
    for lab in np.unique(labels):
        idx = np.flatnonzero(labels == lab)
        e, V = eigh(H[np.ix_(idx, idx)])
        U = (V * np.exp(-1j * e * config.t)) @ V.T
        p_t[idx] = (np.abs(U) ** 2) @ p[idx]
    d = (p_t - p) @ occ
    return float(d[0]), float(d[1])


def exact_evolve(
    config: NonlinearConfig,
    cutoffs=None,
    check_convergence: bool = True,
    strict: bool = False,
) -> CoolingReport:
    """Occupation changes from dense unitary evolution of the truncated thermal state.

    With ``check_convergence`` the computation is repeated at doubled cutoffs;
    a shift above ``1e-6`` in ``dn`` is flagged (or raised when ``strict``).
    """
    cutoffs = tuple(cutoffs) if cutoffs is not None else default_cutoffs(config.spec)
    dn1, dn2 = _evolved_occupations(config, cutoffs)
    warnings = list(config.warnings)
    converged = None
    if check_convergence:
        f1, f2 = _evolved_occupations(config, tuple(2 * c for c in cutoffs))
        shift = abs((f1 + f2) - (dn1 + dn2))
        converged = shift <= CUTOFF_SHIFT_TOL
        if not converged:
            msg = f"doubling the cutoffs shifts dn by {shift:.3e}"
            if strict:
                raise ConvergenceError(msg, shift)
            warnings.append(msg)
    w1, w2 = config.spec.omegas
    return CoolingReport(dn1, dn2, w2 / w1, tuple(warnings), converged)


@dataclass(frozen=True)
class CommutatorResidual:
    interior: float
    unrestricted: float


def manley_rowe_residual(cutoffs, variant: str = "rwa") -> CommutatorResidual:
    """Max-norm of ``[invariant, interaction]`` on the truncated space.

    ``variant="rwa"`` pairs ``2 n1 + n2`` with the resonant interaction,
    ``"mirrored"`` pairs ``n1 + 2 n2`` with its counterpart at ``omega_2 = 2 omega_1``,
    and ``"full"`` pairs ``2 n1 + n2`` with the complete interaction. The
    interior keeps states with both occupations at least two below the cutoff.
    """
    space = FockSpace(tuple(cutoffs), max_entries=EXACT_MAX_ENTRIES)
    occ = space.occupations
    weights = (1, 2) if variant == "mirrored" else (2, 1)
    inv = weights[0] * occ[:, 0] + weights[1] * occ[:, 1]
    H = interaction_matrix(space, variant)
    comm = inv[:, None] * H - H * inv[None, :]
    inside = np.all(occ <= np.array(space.cutoffs) - 2, axis=1)
    interior = np.abs(comm[np.ix_(inside, inside)])
    return CommutatorResidual(float(interior.max(initial=0.0)), float(np.abs(comm).max()))


@dataclass(frozen=True)
class TermCount:
    total_terms: int
    nonzero_terms: int
    hermiticity_consistent: bool
    nonzero_by_split: dict
    nonzero_words: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]
    cutoff_stable: bool | None = None


def _sparse_words(space: FockSpace) -> list[sparse.csr_matrix]:
    def ladder(c):
        return sparse.diags(np.sqrt(np.arange(1, c + 1, dtype=float)), 1, format="csr")

    c1, c2 = space.cutoffs
    ops = {
        "a1": sparse.kron(ladder(c1), sparse.identity(c2 + 1), format="csr"),
        "a2": sparse.kron(sparse.identity(c1 + 1), ladder(c2), format="csr"),
    }
    ops["a1+"] = ops["a1"].T.tocsr()
    ops["a2+"] = ops["a2"].T.tocsr()
    out = []
    for name, _ in _WORDS:
        m = sparse.identity(space.dim, format="csr")
        for tok in name.split():
            m = m @ ops[tok]
        out.append(m.tocsr())
    return out


def _count_terms(spec: ThermalSpec, cutoffs, observable: str, order: int):
    space = FockSpace(tuple(cutoffs), max_entries=EXACT_MAX_ENTRIES)
    h = _sparse_words(space)
    names = MonomialTable(*spec.omegas).names
    p = np.real(np.diag(thermal_state(space, spec).normalized()))
    occ = space.occupations
    n_obs = {"n1": occ[:, 0], "n2": occ[:, 1], "n": occ.sum(axis=1)}[observable].astype(float)
    inside = np.all(occ <= np.array(space.cutoffs) - 4, axis=1)
    values, words, herm = [], [], []
    eye = sparse.identity(space.dim, format="csr")
    for k in range(order + 1):
        kp = order - k
        for left in itertools.product(range(8), repeat=k):
            for right in itertools.product(range(8), repeat=kp):
                L = eye
                for i in left:
                    L = L @ h[i]
                R = eye
                for i in reversed(right):
                    R = R @ h[i]
                # tr(L rho R n) = sum_ij L_ij p_j R_ji n_i for diagonal rho and n
                weighted = sparse.diags(n_obs) @ L @ sparse.diags(p)
                values.append(float(weighted.multiply(R.T).sum()))
                theta = (L @ R).tocsr()[inside][:, inside]
                asym = abs(theta - theta.T)
                herm.append(bool(asym.max() <= 1e-9) if asym.nnz else True)
                words.append(((k, kp), tuple(names[i] for i in left), tuple(names[i] for i in right)))
    return np.array(values), words, herm


def _nonzero_mask(values: np.ndarray) -> np.ndarray:
    scale = np.abs(values).max(initial=0.0)
    if scale == 0.0:
        return np.zeros(values.shape, dtype=bool)
    return np.abs(values) > NONZERO_REL * scale


def enumerate_second_order_terms(
    spec: ThermalSpec,
    cutoffs=None,
    observable: str = "n",
    check_doubling: bool = True,
    order: int = 2,
) -> TermCount:
    """Enumerate the monomial traces ``tr(h_1..h_k rho h'_k'..h'_1 n)`` with ``k + k' = order``.

    There are ``8^order * (order + 1)`` of them. A trace counts as nonzero above
    ``1e-12`` of the largest magnitude (all count as zero if every trace vanishes).
    """
    if order < 1:
        raise DomainError("order must be at least 1")
    if cutoffs is None:
        cutoffs = cutoffs_for_tail(spec, 1e-12, minimum=2 * order + 4)
    values, words, herm = _count_terms(spec, cutoffs, observable, order)
    mask = _nonzero_mask(values)
    by_split: dict = {}
    for keep, (split, _, _) in zip(mask, words):
        by_split[split] = by_split.get(split, 0) + int(keep)
    stable = None
    if check_doubling:
        v2, _, _ = _count_terms(spec, tuple(2 * c for c in cutoffs), observable, order)
        m2 = _nonzero_mask(v2)
        stable = bool(np.array_equal(mask, m2))
    return TermCount(
        total_terms=len(values),
        nonzero_terms=int(mask.sum()),
        hermiticity_consistent=all(hh for hh, keep in zip(herm, mask) if keep),
        nonzero_by_split=by_split,
        nonzero_words=tuple((l, r) for keep, (_, l, r) in zip(mask, words) if keep),
        cutoff_stable=stable,
    )


@dataclass(frozen=True)
class ScanRow:
    alpha: float
    dn: float
    dn1: float
    dn2: float


def resonance_scan(omega1: float, t: float, g: float, alpha_grid, c1_form: str = "printed"):
    """Second-order ``dn`` across ``alpha = omega2/omega1`` in rescaled units.

    Returns the rows and the ``alpha`` midpoints where ``dn`` changes sign.
    """
    rows = []
    for a in alpha_grid:
        if not a > 0:
            raise DomainError("alpha grid must be positive")
        d = perturbative_delta_n(NonlinearConfig.rescaled(omega1, a * omega1, g, t), c1_form)
        rows.append(ScanRow(float(a), d.dn, d.dn1, d.dn2))
    signs = np.sign([r.dn for r in rows])
    flips = [
        0.5 * (rows[i].alpha + rows[i + 1].alpha)
        for i in range(len(rows) - 1)
        if signs[i] != signs[i + 1] and signs[i] != 0 and signs[i + 1] != 0
    ]
    return rows, flips
