"""Time stepping shared by the RWA and Redfield solvers.

Two methods are available for a time-independent linear generator:

* ``"rk"``: adaptive embedded Runge-Kutta (Dormand-Prince 8(5,3)) on the
  matrix-free right-hand side, sampled through the stepper's dense output.
* ``"propagator"``: exact exponentials exp(L dt) of the Liouvillian, built
  per invariant block and cached per distinct sample spacing.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.integrate import DOP853
from scipy.sparse.csgraph import connected_components

log = logging.getLogger(__name__)

METHODS = ("rk", "propagator")
SAMPLINGS = ("linear", "log")


class IntegrationError(RuntimeError):
    def __init__(self, message: str, last_good_time: float):
        super().__init__(f"{message} (last good time {last_good_time:.6g})")
        self.last_good_time = last_good_time


@dataclass(frozen=True)
class IntegratorConfig:
    t_final: float
    sample_count: int = 2001
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    # None: 0.1 / lam for the RWA solver, unbounded otherwise
    max_step: float | None = None
    method: str = "rk"
    sampling: str = "linear"
    # decades covered by log sampling, ending at t_final
    log_decades: int = 5

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ValueError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if not self.t_final > 0:
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if self.sample_count < 2:
            raise ValueError(f"sample_count must be >= 2, got {self.sample_count}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.sampling not in SAMPLINGS:
            raise ValueError(f"sampling must be one of {SAMPLINGS}, got {self.sampling!r}")
        if self.log_decades < 1:
            raise ValueError("log_decades must be >= 1")

    def tightened(self) -> "IntegratorConfig":
        return replace(self, rel_tol=self.rel_tol / 10, abs_tol=self.abs_tol / 10)

    def sample_times(self) -> np.ndarray:
        """Sample grid starting at t = 0.

        Log sampling is piecewise uniform: after t = 0 the points are spread
        evenly over ``log_decades`` decades ending at ``t_final``, uniformly
        spaced inside each decade.  This keeps the number of distinct sample
        spacings small for the propagator method.
        """
        if self.sampling == "linear":
            return np.linspace(0.0, self.t_final, self.sample_count)
        n_dec = self.log_decades
        per = max(1, (self.sample_count - 2) // n_dec)
        edges = self.t_final * 10.0 ** np.arange(-n_dec, 1)
        parts = [np.array([0.0, edges[0]])]
        for lo, hi in zip(edges[:-1], edges[1:]):
            parts.append(np.linspace(lo, hi, per + 1)[1:])
        times = np.concatenate(parts)
        times[-1] = self.t_final
        return times


SampleCallback = Callable[[int, float, np.ndarray], None]


def run_rk(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    times: np.ndarray,
    cfg: IntegratorConfig,
    max_step: float,
    on_sample: SampleCallback,
) -> dict:
    """Integrate y' = rhs(t, y) and call ``on_sample`` at every sample time.

    Sampling reads the dense-output interpolant; the stepper state itself is
    never modified.
    """
    k = 0
    while k < len(times) and times[k] <= times[0]:
        on_sample(k, float(times[k]), y0)
        k += 1
    if k == len(times):
        return {"steps": 0, "nfev": 0}
    solver = DOP853(
        rhs,
        float(times[0]),
        y0,
        float(times[-1]),
        max_step=max_step,
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
    )
    steps = 0
    while k < len(times):
        t_prev = solver.t
        msg = solver.step()
        if solver.status == "failed":
            raise IntegrationError(f"integration failed: {msg}", last_good_time=t_prev)
        steps += 1
        t_now = solver.t
        if k < len(times) and times[k] <= t_now:
            dense = solver.dense_output()
            while k < len(times) and times[k] <= t_now:
                y = solver.y if times[k] == t_now else dense(times[k])
                on_sample(k, float(times[k]), y)
                k += 1
        if solver.status == "finished" and k < len(times):
            raise IntegrationError("stepper stopped before the last sample", last_good_time=t_now)
    return {"steps": steps, "nfev": solver.nfev}


class BlockPropagator:
    """exp(L dt) for a sparse Liouvillian, split into its invariant blocks.

    Blocks are the connected components of the sparsity graph of L, so the
    split is exact whatever symmetry produced it.
    """

    def __init__(self, superop, max_block: int = 4000):
        L = sp.csr_matrix(superop)
        pattern = (abs(L) + abs(L).T).tocsr()
        n_comp, labels = connected_components(pattern, directed=False)
        self.blocks = []
        for c in range(n_comp):
            idx = np.flatnonzero(labels == c)
            if len(idx) > max_block:
                raise MemoryError(
                    f"Liouvillian block of size {len(idx)} exceeds max_block={max_block}; "
                    "use the rk method"
                )
            self.blocks.append((idx, L[idx][:, idx].toarray()))
        self.dim = L.shape[0]
        self._cache: dict[float, list] = {}

    def _props(self, dt: float) -> list:
        key = float(f"{dt:.12g}")
        if key not in self._cache:
            self._cache[key] = [(idx, sla.expm(Lb * dt)) for idx, Lb in self.blocks]
        return self._cache[key]

    def step(self, y: np.ndarray, dt: float) -> np.ndarray:
        if dt == 0:
            return y.copy()
        out = np.empty_like(y)
        for idx, P in self._props(dt):
            out[idx] = P @ y[idx]
        return out


def run_propagator(
    prop: BlockPropagator, y0: np.ndarray, times: np.ndarray, on_sample: SampleCallback
) -> dict:
    y = y0.astype(complex, copy=True)
    on_sample(0, float(times[0]), y)
    for k in range(1, len(times)):
        y = prop.step(y, float(times[k] - times[k - 1]))
        if not np.all(np.isfinite(y)):
            raise IntegrationError("non-finite state", last_good_time=float(times[k - 1]))
        on_sample(k, float(times[k]), y)
    return {"steps": len(times) - 1, "distinct_spacings": len(prop._cache)}
