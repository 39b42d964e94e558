"""Truncated Fock-space primitives.

Operators live on the tensor product of per-mode ladders ``{0, ..., cutoff}``.
Basis index ordering is row-major over the occupation tuple, with mode 0 the
slowest-varying index, i.e. ``|n1, n2>`` sits at ``n1 * (cutoff2 + 1) + n2``.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.special import xlogy

from .errors import DimensionOverflowError, DomainError

DEFAULT_MAX_ENTRIES = 10**6
DEFAULT_TAIL_TOL = 1e-10


@dataclass(frozen=True)
class FockSpace:
    """Truncated Fock space of ``len(cutoffs)`` bosonic modes.

    ``cutoffs[i]`` is the largest occupation kept for mode ``i`` (inclusive).
    """

    cutoffs: tuple[int, ...]
    max_entries: int = DEFAULT_MAX_ENTRIES

    def __post_init__(self) -> None:
        cutoffs = tuple(int(c) for c in self.cutoffs)
        if not cutoffs or any(c < 1 for c in cutoffs):
            raise DomainError(f"cutoffs must be positive integers, got {self.cutoffs}")
        object.__setattr__(self, "cutoffs", cutoffs)
        if self.dim**2 > self.max_entries:
            raise DimensionOverflowError(
                f"dimension {self.dim} needs {self.dim**2} dense entries, "
                f"above the limit of {self.max_entries}"
            )

    @property
    def num_modes(self) -> int:
        return len(self.cutoffs)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(c + 1 for c in self.cutoffs)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def index(self, occupations: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(occupations), self.dims))

    @cached_property
    def occupations(self) -> np.ndarray:
        """Integer array of shape ``(dim, num_modes)``: occupations of each basis state."""
        grids = np.indices(self.dims).reshape(self.num_modes, -1)
        return grids.T.copy()


@dataclass(frozen=True)
class ThermalSpec:
    """Frequencies and inverse temperature of independent thermal modes (hbar = 1).

    Two-mode specs are normalized so that ``omega_2 < omega_1`` (``alpha < 1``);
    the modes are swapped if needed and ``swapped`` records it. Pass
    ``normalize=False`` to keep the given order, e.g. for frequency scans that
    cross ``alpha = 1``.
    """

    omegas: tuple[float, ...]
    beta: float = 1.0
    normalize: InitVar[bool] = True
    swapped: bool = field(default=False, init=False)

    def __post_init__(self, normalize: bool) -> None:
        omegas = tuple(float(w) for w in np.atleast_1d(self.omegas))
        if not omegas:
            raise DomainError("at least one mode frequency is required")
        if not self.beta > 0 or not math.isfinite(self.beta):
            raise DomainError(f"beta must be positive and finite, got {self.beta}")
        if any(not w > 0 or not math.isfinite(w) for w in omegas):
            raise DomainError(f"frequencies must be positive and finite, got {omegas}")
        if normalize and len(omegas) == 2 and omegas[1] > omegas[0]:
            omegas = (omegas[1], omegas[0])
            object.__setattr__(self, "swapped", True)
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def from_ys(cls, ys: Sequence[float], normalize: bool = True) -> "ThermalSpec":
        """Build a spec with ``beta = 1`` from Boltzmann factors ``y_i = exp(-beta*omega_i)``."""
        ys = np.asarray(ys, dtype=float)
        if np.any((ys <= 0) | (ys >= 1)):
            raise DomainError(f"Boltzmann factors must lie in (0, 1), got {ys}")
        return cls(tuple(-np.log(ys)), 1.0, normalize)

    @classmethod
    def from_y_alpha(cls, y_alpha: float, alpha: float) -> "ThermalSpec":
        """Two-mode spec with ``exp(-beta*omega_2) = y_alpha`` and ``omega_2/omega_1 = alpha``."""
        if not 0 < y_alpha < 1:
            raise DomainError(f"y_alpha must lie in (0, 1), got {y_alpha}")
        if not alpha > 0:
            raise DomainError(f"alpha must be positive, got {alpha}")
        omega2 = -math.log(y_alpha)
        return cls((omega2 / alpha, omega2), 1.0, False)

    @property
    def num_modes(self) -> int:
        return len(self.omegas)

    @property
    def ys(self) -> np.ndarray:
        return np.exp(-self.beta * np.asarray(self.omegas))

    @property
    def xi(self) -> float:
        return float(np.prod(-np.expm1(-self.beta * np.asarray(self.omegas))))

    @property
    def alpha(self) -> float:
        if self.num_modes != 2:
            raise DomainError("alpha is defined for two-mode specs only")
        return self.omegas[1] / self.omegas[0]

    @property
    def occupations(self) -> np.ndarray:
        """Bose-Einstein mean occupations ``1/(exp(beta*omega) - 1)``."""
        return 1.0 / np.expm1(self.beta * np.asarray(self.omegas))


@dataclass(frozen=True)
class TruncatedState:
    """Density matrix on a truncated space together with the probability mass lost to truncation.

    ``rho`` is stored as truncated, not renormalized, so ``trace + trace_deficit == 1``.
    Use :meth:`normalized` for the renormalized matrix.
    """

    rho: np.ndarray
    trace_deficit: float = 0.0

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DomainError(f"rho must be square, got shape {rho.shape}")
        herm = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
        if herm > 1e-12:
            raise DomainError(f"rho is not Hermitian (residual {herm:.2e})")
        if self.trace_deficit < 0:
            raise DomainError("trace_deficit must be non-negative")
        total = np.real(np.trace(rho)) + self.trace_deficit
        if abs(total - 1.0) > 1e-10:
            raise DomainError(f"trace + trace_deficit = {total!r}, expected 1")
        if np.count_nonzero(rho - np.diag(np.diag(rho))) == 0:
            eigs = np.real(np.diag(rho))
        else:
            eigs = np.linalg.eigvalsh(rho)
        if eigs.size and eigs.min() < -1e-10:
            raise DomainError(f"rho has a negative eigenvalue {eigs.min():.2e}")
        object.__setattr__(self, "rho", rho)

    def normalized(self) -> np.ndarray:
        return self.rho / np.real(np.trace(self.rho))

    def expect(self, op: np.ndarray) -> float:
        """Expectation value of a Hermitian operator in the renormalized state."""
        return float(np.real(np.trace(self.normalized() @ op)))


def _ladder(cutoff: int, dtype) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1).astype(dtype)


def annihilation_matrix(space: FockSpace, mode: int, dtype=complex) -> np.ndarray:
    """Dense matrix of ``a_mode`` embedded in the full tensor-product space.

    On the selected mode the entries are ``<n-1|a|n> = sqrt(n)``; other modes
    carry the identity. The truncated ladder loses the canonical commutator at
    the top level: ``[a, a^dagger]`` there equals ``-cutoff`` instead of 1.
    """
    if not 0 <= mode < space.num_modes:
        raise DomainError(f"mode {mode} out of range for {space.num_modes} modes")
    out = np.ones((1, 1), dtype=dtype)
    for i, d in enumerate(space.dims):
        factor = _ladder(d - 1, dtype) if i == mode else np.eye(d, dtype=dtype)
        out = np.kron(out, factor)
    return out


def number_operator(space: FockSpace, mode: int, dtype=complex) -> np.ndarray:
    return np.diag(space.occupations[:, mode].astype(dtype))


def tail_mass(spec: ThermalSpec, cutoffs: Sequence[float]) -> float:
    """Exact thermal probability of the states excluded by per-mode ``cutoffs``.

    Cutoffs may be ``math.inf``.
    """
    if len(cutoffs) != spec.num_modes:
        raise DomainError("one cutoff per mode is required")
    # per-mode mass kept: 1 - y^(c+1)
    log_kept = 0.0
    for y, c in zip(spec.ys, cutoffs):
        if math.isinf(c):
            continue
        log_kept += math.log1p(-(y ** (c + 1)))
    return float(-math.expm1(log_kept))


def cutoffs_for_tail(spec: ThermalSpec, tol: float = DEFAULT_TAIL_TOL, minimum: int = 1) -> tuple[int, ...]:
    """Smallest per-mode cutoffs (tail split evenly over modes) with ``tail_mass <= tol``."""
    share = tol / spec.num_modes
    cutoffs = []
    for y in spec.ys:
        # y^(c+1) <= share, slightly conservative so the joint tail stays below tol
        c = math.ceil(math.log(share) / math.log(y)) if y > 0 else 0
        cutoffs.append(max(minimum, c))
    return tuple(cutoffs)


def thermal_state(space: FockSpace, spec: ThermalSpec) -> TruncatedState:
    """Product thermal state restricted to ``space``.

    The diagonal holds ``xi * exp(-beta * sum_i omega_i n_i)``; the exact tail
    mass goes into ``trace_deficit``.
    """
    if space.num_modes != spec.num_modes:
        raise DomainError("space and spec disagree on the number of modes")
    energies = space.occupations @ (spec.beta * np.asarray(spec.omegas))
    weights = spec.xi * np.exp(-energies)
    deficit = tail_mass(spec, space.cutoffs)
    # float rounding of the weight sum must not break the trace identity
    deficit = max(deficit, 0.0)
    weights *= (1.0 - deficit) / weights.sum() if weights.sum() > 0 else 1.0
    return TruncatedState(np.diag(weights).astype(complex), deficit)


def bose_entropy_scalar(n):
    """Bose entropy ``(1+n) ln(1+n) - n ln n`` of one mode with mean occupation ``n``.

    Works on scalars and arrays; ``s(0) = 0``.
    """
    arr = np.asarray(n, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"occupation must be non-negative, got {n}")
    out = xlogy(1.0 + arr, 1.0 + arr) - xlogy(arr, arr)
    return float(out) if out.ndim == 0 else out
