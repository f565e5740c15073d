"""Physical ingredients: parameters, Ohmic bath rates, Hamiltonians, dissipators.

Units: hbar = k_B = m = 1 and omega0 = 1 by default.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .fock import (
    DensityMatrix,
    InvalidDimensionError,
    TruncatedSpace,
    embed,
    momentum_squared,
    mode_lower,
    number_operator,
    quadrature_power,
)

FRAMES = ("rotating", "lab-phase")


@dataclass(frozen=True)
class SystemParams:
    """Symmetric two-oscillator setup (omega_1 = omega_2 = omega0).

    ``gamma2`` overrides the dissipation strength of oscillator 2; ``None``
    means the symmetric case Gamma_1 = Gamma_2 = gamma0.
    """

    omega0: float = 1.0
    mu1: float = 1e-3
    mu2: float = 1e-3
    lam: float = 5e-4
    gamma0: float = 1e-3
    temperature: float = 0.0
    gamma2: float | None = None
    # Lamb-shift renormalisation is not modelled; the flag exists so that runs record it
    lamb_shift: bool = field(default=False, repr=False)

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        if self.lam < 0:
            raise ValueError(f"lam must be non-negative, got {self.lam}")
        if self.gamma0 < 0 or (self.gamma2 is not None and self.gamma2 < 0):
            raise ValueError("dissipation strengths must be non-negative")
        if self.temperature < 0:
            raise ValueError(f"temperature must be non-negative, got {self.temperature}")
        if self.lamb_shift:
            raise NotImplementedError("Lamb-shift renormalisation is not supported")
        if self.lam >= self.omega0 / 10:
            warnings.warn(
                f"lam={self.lam} is not small compared to omega0={self.omega0}; "
                "the RWA generator may be inaccurate",
                stacklevel=2,
            )

    @property
    def gamma_mode2(self) -> float:
        return self.gamma0 if self.gamma2 is None else self.gamma2

    @property
    def symmetric_dissipation(self) -> bool:
        return self.gamma2 is None or self.gamma2 == self.gamma0

    def spectrum(self, mode: int = 1) -> "BathSpectrum":
        gamma = self.gamma0 if mode == 1 else self.gamma_mode2
        return BathSpectrum(gamma, self.omega0, self.temperature)


@dataclass(frozen=True)
class BathSpectrum:
    """Ohmic bath, kappa(omega) = gamma0 * omega / (2 omega0)."""

    gamma0: float
    omega0: float
    temperature: float

    def kappa(self, omega: float) -> float:
        if omega < 0:
            raise ValueError("spectral density is defined for omega >= 0 only")
        return self.gamma0 * omega / (2 * self.omega0)

    def zero_frequency_rate(self) -> float:
        """Limit of kappa(w) N(w) as w -> 0+, i.e. gamma0 T / (2 omega0)."""
        return self.gamma0 * self.temperature / (2 * self.omega0)


def bose_einstein(omega: float, T: float) -> float:
    if not omega > 0:
        raise ValueError(f"Bose-Einstein occupation needs omega > 0, got {omega}")
    if T == 0:
        return 0.0
    x = omega / T
    # written in terms of exp(-x) so large x underflows to 0 instead of overflowing
    return math.exp(-x) / -math.expm1(-x)


def rate_gamma(spectrum: BathSpectrum, omega: float) -> float:
    """Emission (omega > 0) or absorption (omega < 0) rate at Bohr frequency omega."""
    if omega == 0:
        raise ValueError("rate_gamma is undefined at omega = 0")
    w = abs(omega)
    n = bose_einstein(w, spectrum.temperature)
    k = spectrum.kappa(w)
    return k * (n + 1) if omega > 0 else k * n


def rate_gamma_array(spectrum: BathSpectrum, omegas: np.ndarray, zero_tol: float) -> np.ndarray:
    """Vectorised rate_gamma; |omega| <= zero_tol maps to the zero-frequency limit."""
    omegas = np.asarray(omegas, dtype=float)
    w = np.abs(omegas)
    zero = w <= zero_tol
    k = spectrum.gamma0 * w / (2 * spectrum.omega0)
    T = spectrum.temperature
    if T == 0:
        n = np.zeros_like(w)
    else:
        # zero frequencies give 0/0 here; they are overwritten below
        safe = np.where(zero, 1.0, w)
        n = np.exp(-safe / T) / -np.expm1(-safe / T)
    out = np.where(omegas > 0, k * (n + 1), k * n)
    out[zero] = spectrum.zero_frequency_rate()
    return out


def upsilons(spectrum: BathSpectrum, lam: float) -> tuple[float, float]:
    """Cross-dissipator rates (Upsilon_plus, Upsilon_minus) at coupling lam.

    lam = 0 gives (0, 0) since the Ohmic density vanishes at zero frequency.
    """
    if lam < 0:
        raise ValueError(f"lam must be non-negative, got {lam}")
    if lam == 0:
        return 0.0, 0.0
    g_em = rate_gamma(spectrum, lam)
    g_abs = rate_gamma(spectrum, -lam)
    return g_em + g_abs, g_em - g_abs


def _require_two_modes(space: TruncatedSpace) -> None:
    if space.num_modes != 2:
        raise InvalidDimensionError("this operator needs a two-mode space")


def hamiltonian_rwa(
    params: SystemParams, space: TruncatedSpace, frame: str = "rotating"
) -> np.ndarray:
    """RWA oscillator Hamiltonian.

    ``frame="rotating"`` drops the common omega0 (n1 + n2) term, which commutes
    with every other part of the generator.
    """
    _require_two_modes(space)
    if frame not in FRAMES:
        raise ValueError(f"frame must be one of {FRAMES}, got {frame!r}")
    M = space.cutoff_per_mode
    n = number_operator(M)
    n1, n2 = embed(n, 1, space), embed(n, 2, space)
    a1, a2 = mode_lower(space, 1), mode_lower(space, 2)
    w = params.omega0 if frame == "lab-phase" else 0.0
    H = (w + params.mu1) * n1 + params.mu1 * (n1 @ n1)
    H = H + (w + params.mu2) * n2 + params.mu2 * (n2 @ n2)
    H = H + 0.5 * params.lam * (a1.conj().T @ a2 + a2.conj().T @ a1)
    return H


def hamiltonian_lab(params: SystemParams, space: TruncatedSpace) -> np.ndarray:
    """Full system Hamiltonian with quartic anharmonicity and q1 q2 coupling."""
    _require_two_modes(space)
    M = space.cutoff_per_mode
    w = params.omega0
    # q = x / sqrt(2w), p = i sqrt(w/2) y with x = a + a^dag, y = a^dag - a
    q = quadrature_power(M, 1) / math.sqrt(2 * w)
    q2 = quadrature_power(M, 2) / (2 * w)
    q4 = quadrature_power(M, 4) / (2 * w) ** 2
    p2 = -(w / 2) * momentum_squared(M)
    H = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    for mode, mu in ((1, params.mu1), (2, params.mu2)):
        single = 0.5 * p2 + 0.5 * w**2 * q2 + (2 * mu / 3) * q4
        H += embed(single, mode, space)
    H += w * params.lam * np.kron(q, q)
    return H


def lindblad_apply(X: np.ndarray, rho) -> np.ndarray:
    """L[X] rho = X^dag rho X - (X X^dag rho + rho X X^dag) / 2.

    The sandwich is X^dag rho X, so L[a^dag a^dag] removes two quanta.
    """
    r = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if X.shape != r.shape:
        raise InvalidDimensionError(f"shape mismatch {X.shape} vs {r.shape}")
    Xd = X.conj().T
    XXd = X @ Xd
    return Xd @ r @ X - 0.5 * (XXd @ r + r @ XXd)


@dataclass(frozen=True, eq=False)
class GeneratorRWA:
    space: TruncatedSpace
    params: SystemParams
    frame: str
    hamiltonian_rwa: np.ndarray
    # (jump operator X, rate) entering rate * L[X]
    jump_set: tuple
    upsilon_plus: float
    upsilon_minus: float
    number_difference: np.ndarray  # D = n1 - n2, diagonal
    hopping: np.ndarray  # J = a1^dag a2 - a2^dag a1
    # the four operator products of the Upsilon_minus block, prebuilt
    upsilon_minus_block: dict

    @property
    def rates(self) -> dict:
        names = ("loss1", "loss2", "gain1", "gain2", "dephasing")
        return {k: r for k, (_, r) in zip(names, self.jump_set)}


def build_rwa_generator(
    params: SystemParams, space: TruncatedSpace, frame: str = "rotating"
) -> GeneratorRWA:
    _require_two_modes(space)
    if not params.symmetric_dissipation:
        raise ValueError(
            "the RWA generator's cross dissipator assumes Gamma_1 = Gamma_2; "
            "use the Redfield solver for asymmetric dissipation"
        )
    spec = params.spectrum()
    two_w = 2 * params.omega0
    loss = rate_gamma(spec, two_w)
    gain = rate_gamma(spec, -two_w)
    up, um = upsilons(spec, params.lam)

    a1, a2 = mode_lower(space, 1), mode_lower(space, 2)
    a1d, a2d = a1.conj().T, a2.conj().T
    D = a1d @ a1 - a2d @ a2
    J = a1d @ a2 - a2d @ a1
    Jd = J.conj().T
    jumps = (
        (a1d @ a1d, loss),
        (a2d @ a2d, loss),
        (a1 @ a1, gain),
        (a2 @ a2, gain),
        (D, up),
    )
    block = {"DJ": D @ J, "J": J, "JdD": Jd @ D, "Jd": Jd, "D": D}
    return GeneratorRWA(
        space=space,
        params=params,
        frame=frame,
        hamiltonian_rwa=hamiltonian_rwa(params, space, frame),
        jump_set=jumps,
        upsilon_plus=up,
        upsilon_minus=um,
        number_difference=D,
        hopping=J,
        upsilon_minus_block=block,
    )


def cross_dissipator_apply(gen: GeneratorRWA, rho) -> np.ndarray:
    """Coupling-induced dephasing, Upsilon_+ L[D] rho - (Upsilon_-/2) [block].

    block = D J rho - J rho D + rho J^dag D - D rho J^dag, with D = n1 - n2
    and J = a1^dag a2 - a2^dag a1.
    """
    r = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if r.shape != gen.hamiltonian_rwa.shape:
        raise InvalidDimensionError(f"shape mismatch {r.shape}")
    b = gen.upsilon_minus_block
    D = b["D"]
    out = gen.upsilon_plus * lindblad_apply(D, r)
    blk = b["DJ"] @ r - b["J"] @ r @ D + r @ b["JdD"] - D @ r @ b["Jd"]
    return out - 0.5 * gen.upsilon_minus * blk


def number_conserving_part(op: np.ndarray, space: TruncatedSpace) -> np.ndarray:
    """Zero every element connecting different total quantum numbers."""
    N = space.total_number()
    return np.where(np.equal.outer(N, N), op, 0)


def rwa_superoperator(gen: GeneratorRWA) -> sp.csr_matrix:
    """Sparse Liouvillian of the RWA generator on row-major vec(rho).

    Row-major vectorisation gives vec(A X B) = kron(A, B.T) vec(X).
    """
    d = gen.space.total_dim
    eye = sp.identity(d, dtype=complex, format="csr")

    def S(A):
        return sp.csr_matrix(A)

    H = gen.hamiltonian_rwa
    L = -1j * (sp.kron(S(H), eye) - sp.kron(eye, S(H.T)))
    for X, rate in gen.jump_set:
        if rate == 0:
            continue
        Xd = X.conj().T
        XXd = X @ Xd
        L = L + rate * (
            sp.kron(S(Xd), S(X.T)) - 0.5 * sp.kron(S(XXd), eye) - 0.5 * sp.kron(eye, S(XXd.T))
        )
    if gen.upsilon_minus != 0:
        b = gen.upsilon_minus_block
        blk = (
            sp.kron(S(b["DJ"]), eye)
            - sp.kron(S(b["J"]), S(b["D"].T))
            + sp.kron(eye, S(b["JdD"].T))
            - sp.kron(S(b["D"]), S(b["Jd"].T))
        )
        L = L - 0.5 * gen.upsilon_minus * blk
    L = sp.csr_matrix(L)
    L.eliminate_zeros()
    return L
