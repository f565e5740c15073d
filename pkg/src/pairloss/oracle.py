"""Closed-form single-excitation manifold dynamics at zero temperature.

Valid in the regime lam >> Upsilon_+ = Upsilon_- = Upsilon, after the
initial two-quantum relaxation has emptied the higher Fock states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entanglement import BlochRecord, asymptotic_negativity


@dataclass(frozen=True)
class BlochInitial:
    s0: float
    u0: float
    v0: float
    w0: float
    p_odd: float
    lam: float
    upsilon: float

    @classmethod
    def from_record(cls, rec: BlochRecord, lam: float, upsilon: float) -> "BlochInitial":
        return cls(rec.s, rec.u, rec.v, rec.w, rec.p_odd, lam, upsilon)


def bloch_solution(init: BlochInitial, t):
    """(s, u, v, w) at time(s) ``t`` measured from the initial point."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    g = init.upsilon
    lt = init.lam * t
    damp = np.exp(-g * t)
    damp2 = np.exp(-2 * g * t)
    s = np.full_like(t, init.p_odd)
    u = init.p_odd * (damp2 - 1) + init.u0 * damp2
    v = damp * (init.v0 * np.cos(lt) + init.w0 * np.sin(lt))
    w = damp * (init.w0 * np.cos(lt) - init.v0 * np.sin(lt))
    if t.ndim == 0:
        return float(s), float(u), float(v), float(w)
    return s, u, v, w


def bloch_derivative(init: BlochInitial, s: float, u: float, v: float, w: float):
    """Right-hand side of the ODEs that ``bloch_solution`` solves."""
    g, lam = init.upsilon, init.lam
    return (
        0.0,
        -2 * g * (u + init.p_odd),
        -g * v + lam * w,
        -g * w - lam * v,
    )


def steady_negativity_two_displaced(p_odd: float) -> float:
    return asymptotic_negativity(p_odd)
