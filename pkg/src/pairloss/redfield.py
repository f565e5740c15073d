"""Redfield master equation in the eigenbasis of the lab-frame Hamiltonian.

With H_S = sum_j E_j |j><j| and coupling operators S_m = (a_m + a_m^dag)^2,
the Born-Markov equation with the memory integral extended to infinity is

    d rho / dt = -i [E, rho] + sum_m ( [Lambda_m rho, S_m] + [S_m, rho Lambda_m^dag] )

where (Lambda_m)_{jk} = gamma_m(E_k - E_j) (S_m)_{jk} / 2.  E_k - E_j > 0 is a
transition down in energy, so gamma evaluates to the emission rate there.
The imaginary (Lamb-shift) part of the one-sided transform is dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fock import DensityMatrix, InvalidDimensionError, TruncatedSpace, embed, quadrature_power
from .integrate import IntegratorConfig
from .lindblad import Trajectory, sampled_run
from .model import SystemParams, hamiltonian_lab, rate_gamma_array

EIGEN_TOL = 1e-10
# Bohr frequencies this close to zero (relative to omega0) use the zero-frequency rate
ZERO_FREQ_TOL = 1e-9


class EigenDecompositionError(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class EigenSystem:
    energies: np.ndarray
    vectors: np.ndarray
    space: TruncatedSpace

    def to_eigen(self, op: np.ndarray) -> np.ndarray:
        return self.vectors.conj().T @ op @ self.vectors

    def to_fock(self, op: np.ndarray) -> np.ndarray:
        return self.vectors @ op @ self.vectors.conj().T


def diagonalize(H: np.ndarray, space: TruncatedSpace) -> EigenSystem:
    E, V = np.linalg.eigh(H)
    scale = max(1.0, float(np.max(np.abs(E))))
    resid = np.max(np.abs(H @ V - V * E)) / scale
    unit = np.max(np.abs(V.conj().T @ V - np.eye(len(E))))
    if resid > EIGEN_TOL or unit > EIGEN_TOL:
        raise EigenDecompositionError(
            f"eigendecomposition residual {resid:.3g}, unitarity error {unit:.3g}"
        )
    return EigenSystem(E, V, space)


@dataclass(frozen=True, eq=False)
class GeneratorRedfield:
    eigensystem: EigenSystem
    params: SystemParams
    coupling_ops_eigen: tuple[np.ndarray, ...]
    lambda_ops: tuple[np.ndarray, ...]

    @property
    def space(self) -> TruncatedSpace:
        return self.eigensystem.space

    def bohr_frequencies(self) -> np.ndarray:
        """omega_{jk} = E_j - E_k."""
        E = self.eigensystem.energies
        return E[:, None] - E[None, :]


def build_redfield(params: SystemParams, space: TruncatedSpace) -> GeneratorRedfield:
    if space.num_modes != 2:
        raise InvalidDimensionError("the Redfield generator needs a two-mode space")
    eig = diagonalize(hamiltonian_lab(params, space), space)
    E = eig.energies
    # E_k - E_j for element (j, k)
    down = E[None, :] - E[:, None]
    x2 = quadrature_power(space.cutoff_per_mode, 2)
    S_ops, L_ops = [], []
    for mode in (1, 2):
        S = eig.to_eigen(embed(x2, mode, space))
        S = 0.5 * (S + S.conj().T)
        rates = rate_gamma_array(params.spectrum(mode), down, ZERO_FREQ_TOL * params.omega0)
        S_ops.append(S)
        L_ops.append(0.5 * rates * S)
    return GeneratorRedfield(eig, params, tuple(S_ops), tuple(L_ops))


def rhs_redfield(gen: GeneratorRedfield, rho) -> np.ndarray:
    """d rho / dt with rho in the eigenbasis."""
    r = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    E = gen.eigensystem.energies
    if r.shape != (len(E), len(E)):
        raise InvalidDimensionError(f"shape mismatch {r.shape} vs {(len(E), len(E))}")
    out = -1j * (E[:, None] - E[None, :]) * r
    for S, Lam in zip(gen.coupling_ops_eigen, gen.lambda_ops):
        A = Lam @ r
        B = r @ Lam.conj().T
        out += A @ S - S @ A + S @ B - B @ S
    return out


def redfield_superoperator(gen: GeneratorRedfield) -> sp.csr_matrix:
    """Liouvillian on row-major vec(rho), vec(A X B) = kron(A, B.T) vec(X)."""
    E = gen.eigensystem.energies
    d = len(E)
    eye = np.eye(d)
    L = np.diag(-1j * (E[:, None] - E[None, :]).ravel())
    for S, Lam in zip(gen.coupling_ops_eigen, gen.lambda_ops):
        L = L + (
            np.kron(Lam, S.T)
            - np.kron(S @ Lam, eye)
            + np.kron(S, Lam.conj())
            - np.kron(eye, (Lam.conj().T @ S).T)
        )
    return sp.csr_matrix(L)


def evolve_redfield(
    gen: GeneratorRedfield,
    rho0: DensityMatrix,
    cfg: IntegratorConfig,
    keep_states: bool = False,
) -> Trajectory:
    """Integrate from a Fock-basis state; samples are rotated back to the Fock basis."""
    eig = gen.eigensystem
    d = len(eig.energies)
    if rho0.matrix.shape != (d, d):
        raise InvalidDimensionError("initial state does not match the generator's space")

    def rhs_flat(t, y):
        return rhs_redfield(gen, y.reshape(d, d)).ravel()

    y0 = eig.to_eigen(rho0.matrix.astype(complex)).ravel()
    max_step = np.inf if cfg.max_step is None else cfg.max_step
    return sampled_run(
        rhs_flat,
        lambda: redfield_superoperator(gen),
        eig.to_fock,
        y0,
        gen.space,
        cfg,
        max_step,
        keep_states,
    )


__all__ = [
    "EigenSystem",
    "EigenDecompositionError",
    "GeneratorRedfield",
    "build_redfield",
    "diagonalize",
    "evolve_redfield",
    "redfield_superoperator",
    "rhs_redfield",
]
