"""State analysis: partial transpose, negativity, parity and Bloch observables."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .fock import DensityMatrix, InvalidDimensionError, TruncatedSpace

# eigenvalues of the partial transpose above -NEG_FLOOR count as zero
NEG_FLOOR = 1e-12
# negativity at or below this counts as "no entanglement" for death/rebirth detection
ESD_THRESHOLD = 1e-9


class ManifoldLeakageError(ValueError):
    pass


@dataclass(frozen=True)
class BlochRecord:
    time: float
    p00: float
    p10: float
    p01: float
    s: float
    u: float
    v: float
    w: float
    negativity: float
    p_even: float
    p_odd: float
    trace_dev: float = 0.0
    min_eig: float = 0.0


def _matrix(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)


def _cutoff(r: np.ndarray) -> int:
    M = math.isqrt(r.shape[0])
    if r.ndim != 2 or r.shape[0] != r.shape[1] or M * M != r.shape[0]:
        raise InvalidDimensionError(f"not a two-mode density matrix: shape {r.shape}")
    return M


def partial_transpose(rho, subsystem: int = 1) -> np.ndarray:
    """(rho^T1)_{(n,i),(n',i')} = rho_{(n',i),(n,i')}; subsystem 2 swaps i and i'."""
    r = _matrix(rho)
    M = _cutoff(r)
    t = r.reshape(M, M, M, M)
    if subsystem == 1:
        t = t.transpose(2, 1, 0, 3)
    elif subsystem == 2:
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"subsystem must be 1 or 2, got {subsystem}")
    return t.reshape(M * M, M * M)


def negativity(rho) -> float:
    """Magnitude of the negative spectrum of the partial transpose."""
    pt = partial_transpose(rho)
    ev = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return float(np.sum(-ev[ev < -NEG_FLOOR]))


def trace_norm_negativity(rho) -> float:
    """(||rho^T1||_1 - tr rho) / 2, computed from all eigenvalues."""
    pt = partial_transpose(rho)
    ev = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return float((np.sum(np.abs(ev)) - np.trace(_matrix(rho)).real) / 2)


def parity_populations(rho) -> tuple[float, float]:
    r = _matrix(rho)
    M = _cutoff(r)
    diag = np.diag(r).real
    odd = (np.add.outer(np.arange(M), np.arange(M)).ravel() % 2).astype(bool)
    return float(diag[~odd].sum()), float(diag[odd].sum())


def bloch_extract(rho, time: float = 0.0) -> BlochRecord:
    """Populations and Bloch vector on span{|0,0>, |0,1>, |1,0>}; no normalisation."""
    r = _matrix(rho)
    M = _cutoff(r)
    i00, i01, i10 = 0, 1, M
    p00 = r[i00, i00].real
    p01 = r[i01, i01].real
    p10 = r[i10, i10].real
    c = r[i10, i01]  # rho_{10,01}
    u = (r[i01, i10] + c).real
    v = (-1j * (c - r[i01, i10])).real
    p_even, p_odd = parity_populations(r)
    return BlochRecord(
        time=time,
        p00=float(p00),
        p10=float(p10),
        p01=float(p01),
        s=float(p01 + p10),
        u=float(u),
        v=float(v),
        w=float(p10 - p01),
        negativity=0.0,
        p_even=p_even,
        p_odd=p_odd,
    )


def analyse(rho, time: float, trace_dev: float = 0.0, min_eig: float | None = None) -> BlochRecord:
    """Full record for a sampled state: Bloch data, negativity, diagnostics."""
    r = _matrix(rho)
    if min_eig is None:
        min_eig = float(np.linalg.eigvalsh(0.5 * (r + r.conj().T))[0])
    rec = bloch_extract(r, time)
    return replace(rec, negativity=negativity(r), trace_dev=trace_dev, min_eig=min_eig)


def manifold_density(
    space: TruncatedSpace,
    p00: float,
    s: float,
    u: float,
    v: float,
    w: float,
    c00_10: complex = 0.0,
    c00_01: complex = 0.0,
) -> DensityMatrix:
    """State on span{|0,0>, |0,1>, |1,0>} with the given Bloch vector.

    Inverse of :func:`bloch_extract` on (s, u, v, w); ``c00_10`` and
    ``c00_01`` are the coherences rho_{00,10} and rho_{00,01}.
    """
    M = space.cutoff_per_mode
    rho = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    i00, i01, i10 = 0, 1, M
    rho[i00, i00] = p00
    rho[i10, i10] = (s + w) / 2
    rho[i01, i01] = (s - w) / 2
    c = (u + 1j * v) / 2  # rho_{10,01}
    rho[i10, i01] = c
    rho[i01, i10] = np.conj(c)
    rho[i00, i10] = c00_10
    rho[i10, i00] = np.conj(c00_10)
    rho[i00, i01] = c00_01
    rho[i01, i00] = np.conj(c00_01)
    return DensityMatrix(space, rho)


def manifold_leakage(rho) -> float:
    """Largest |rho_ij| with i or j outside span{|0,0>, |0,1>, |1,0>}."""
    r = _matrix(rho)
    M = _cutoff(r)
    mask = np.ones(r.shape, dtype=bool)
    keep = [0, 1, M]
    mask[np.ix_(keep, keep)] = False
    return float(np.max(np.abs(r[mask]), initial=0.0))


def vieta_product(rho, leakage_tol: float = 1e-6) -> tuple[float, float]:
    """Product of the four partial-transpose roots vs -|rho_{01,10}|^2 P10 P01.

    The roots are those of the partial transpose restricted to
    {|0,0>, |0,1>, |1,0>, |1,1>}; |1,1> carries the transposed coherence.
    """
    r = _matrix(rho)
    M = _cutoff(r)
    leak = manifold_leakage(r)
    if leak > leakage_tol:
        raise ManifoldLeakageError(f"state leaks {leak:.3g} outside the single-excitation manifold")
    pt = partial_transpose(r)
    idx = [0, 1, M, M + 1]
    block = pt[np.ix_(idx, idx)]
    lhs = float(np.prod(np.linalg.eigvalsh(0.5 * (block + block.conj().T))))
    rhs = float(-abs(r[1, M]) ** 2 * r[M, M].real * r[1, 1].real)
    return lhs, rhs


def asymptotic_negativity(p_odd: float) -> float:
    """Long-time negativity after full dephasing, given the odd-parity weight."""
    if not 0.0 <= p_odd <= 1.0:
        raise ValueError(f"p_odd must lie in [0, 1], got {p_odd}")
    q = p_odd - 1.0
    return 0.5 * (q + math.sqrt(q * q + p_odd * p_odd))


def detect_esd(times, negativities, threshold: float = ESD_THRESHOLD):
    """First entanglement death and the following rebirth.

    Death is the first sample with negativity <= threshold that is still
    <= threshold at the next sample, counted only after the state has been
    entangled (negativity > threshold) at least once.  Rebirth is the next
    sample above threshold after that.  Returns (esd_time, rebirth_time),
    each ``None`` if absent.
    """
    neg = np.asarray(negativities)
    t = np.asarray(times)
    alive = np.flatnonzero(neg > threshold)
    if alive.size == 0:
        return None, None
    esd_idx = None
    for k in range(alive[0] + 1, len(neg) - 1):
        if neg[k] <= threshold and neg[k + 1] <= threshold:
            esd_idx = k
            break
    if esd_idx is None:
        return None, None
    later = np.flatnonzero(neg[esd_idx:] > threshold)
    rebirth = float(t[esd_idx + later[0]]) if later.size else None
    return float(t[esd_idx]), rebirth
