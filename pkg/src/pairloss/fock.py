"""Truncated Fock-space operators and states.

Two-mode basis states |n, i> (n quanta in oscillator 1, i in oscillator 2)
are stored at flat index ``n * M + i``, i.e. mode 1 is the slow index of
``np.kron``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np


class InvalidDimensionError(ValueError):
    pass


@dataclass(frozen=True)
class TruncatedSpace:
    cutoff_per_mode: int
    num_modes: int = 2

    def __post_init__(self):
        if self.cutoff_per_mode < 2:
            raise InvalidDimensionError(
                f"cutoff_per_mode must be >= 2, got {self.cutoff_per_mode}"
            )
        if self.num_modes not in (1, 2):
            raise InvalidDimensionError(f"num_modes must be 1 or 2, got {self.num_modes}")

    @property
    def total_dim(self) -> int:
        return self.cutoff_per_mode**self.num_modes

    def index(self, n: int, i: int = 0) -> int:
        """Flat index of |n, i> (or |n> for a single mode)."""
        M = self.cutoff_per_mode
        if self.num_modes == 1:
            return n
        return n * M + i

    def total_number(self) -> np.ndarray:
        """n1 + n2 for every flat basis index."""
        n = np.arange(self.cutoff_per_mode)
        if self.num_modes == 1:
            return n
        return np.add.outer(n, n).ravel()


@dataclass(frozen=True)
class StateVector:
    space: TruncatedSpace
    amplitudes: np.ndarray
    # 1 - (norm^2 before renormalisation); probability lost to the cutoff
    norm_deficit: float = 0.0


@dataclass(frozen=True)
class DensityMatrix:
    space: TruncatedSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = self.space.total_dim
        if self.matrix.shape != (d, d):
            raise InvalidDimensionError(
                f"matrix shape {self.matrix.shape} does not match space dim {d}"
            )
        if not np.all(np.isfinite(self.matrix)):
            raise FloatingPointError("density matrix has non-finite entries")

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def normalized(self) -> "DensityMatrix":
        """Hermitised copy with unit trace."""
        herm = 0.5 * (self.matrix + self.matrix.conj().T)
        return DensityMatrix(self.space, herm / np.trace(herm).real)


def _check_mode_dim(mode_dim: int) -> None:
    if mode_dim < 2:
        raise InvalidDimensionError(f"mode dimension must be >= 2, got {mode_dim}")


def ladder_lower(mode_dim: int) -> np.ndarray:
    """Hard-wall truncated annihilation operator, <n-1|a|n> = sqrt(n)."""
    _check_mode_dim(mode_dim)
    return np.diag(np.sqrt(np.arange(1, mode_dim, dtype=float)), 1).astype(complex)


def number_operator(mode_dim: int) -> np.ndarray:
    _check_mode_dim(mode_dim)
    return np.diag(np.arange(mode_dim, dtype=float)).astype(complex)


def quadrature_power(mode_dim: int, power: int) -> np.ndarray:
    """(a + a^dag)**power projected onto the first ``mode_dim`` levels.

    The power is taken in a space enlarged by ``power`` levels before
    truncating, so every retained matrix element is exact instead of
    carrying hard-wall artefacts at the top levels.
    """
    big = mode_dim + power
    a = ladder_lower(big)
    x = a + a.conj().T
    return np.linalg.matrix_power(x, power)[:mode_dim, :mode_dim]


def momentum_squared(mode_dim: int) -> np.ndarray:
    """(a^dag - a)(a^dag - a) projected exactly, i.e. -(p^2) * 2/omega."""
    big = mode_dim + 2
    a = ladder_lower(big)
    y = a.conj().T - a
    return (y @ y)[:mode_dim, :mode_dim]


def tensor_product(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product with ``A`` acting on the slow (mode-1) index."""
    A = np.asarray(A)
    B = np.asarray(B)
    for name, m in (("A", A), ("B", B)):
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidDimensionError(f"{name} must be square, got shape {m.shape}")
    return np.kron(A, B)


def embed(op: np.ndarray, mode: int, space: TruncatedSpace) -> np.ndarray:
    """Lift a single-mode operator onto ``space`` acting on ``mode`` (1 or 2)."""
    M = space.cutoff_per_mode
    if op.shape != (M, M):
        raise InvalidDimensionError(f"operator shape {op.shape} does not match cutoff {M}")
    if space.num_modes == 1:
        if mode != 1:
            raise ValueError("single-mode space only has mode 1")
        return op
    eye = np.eye(M, dtype=complex)
    if mode == 1:
        return tensor_product(op, eye)
    if mode == 2:
        return tensor_product(eye, op)
    raise ValueError(f"mode must be 1 or 2, got {mode}")


def mode_lower(space: TruncatedSpace, mode: int) -> np.ndarray:
    return embed(ladder_lower(space.cutoff_per_mode), mode, space)


def coherent_state(alpha: complex, M: int) -> StateVector:
    """Truncated coherent state |alpha>, renormalised to unit norm.

    The probability weight beyond the cutoff is kept in ``norm_deficit``.
    """
    _check_mode_dim(M)
    alpha = complex(alpha)
    if abs(alpha) ** 2 > M / 4:
        warnings.warn(
            f"|alpha|^2 = {abs(alpha) ** 2:.3g} is large for cutoff M={M}; "
            "truncation error may be significant",
            stacklevel=2,
        )
    n = np.arange(M)
    log_fact = np.array([math.lgamma(k + 1) for k in n])
    if alpha == 0:
        amps = np.zeros(M, dtype=complex)
        amps[0] = 1.0
    else:
        mag = np.exp(-abs(alpha) ** 2 / 2 + n * math.log(abs(alpha)) - 0.5 * log_fact)
        amps = mag * np.exp(1j * n * np.angle(alpha))
    norm2 = float(np.sum(np.abs(amps) ** 2))
    amps = amps / math.sqrt(norm2)
    return StateVector(TruncatedSpace(M, 1), amps, norm_deficit=1.0 - norm2)


def product_density(psi1: StateVector, psi2: StateVector) -> DensityMatrix:
    M1 = psi1.space.cutoff_per_mode
    M2 = psi2.space.cutoff_per_mode
    if M1 != M2 or psi1.space.num_modes != 1 or psi2.space.num_modes != 1:
        raise InvalidDimensionError(
            f"need two single-mode states of equal cutoff, got {M1} and {M2}"
        )
    psi = np.kron(psi1.amplitudes, psi2.amplitudes)
    rho = np.outer(psi, psi.conj())
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(TruncatedSpace(M1, 2), rho / np.trace(rho).real)


def basis_projector(space: TruncatedSpace, n: int, i: int = 0) -> DensityMatrix:
    """|n, i><n, i| as a density matrix."""
    rho = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    k = space.index(n, i)
    rho[k, k] = 1.0
    return DensityMatrix(space, rho)
