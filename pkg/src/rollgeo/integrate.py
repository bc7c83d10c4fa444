"""Adaptive Runge-Kutta integration with dense output and chart-exit events.

All flows in the library are smooth non-stiff ODEs; they share one wrapper
around :func:`scipy.integrate.solve_ivp` (RK45, order 5(4), dense output).
Integration proceeds in chunks so that state corrections such as frame
re-orthonormalization can be applied between chunks without disturbing the
stepper's order, and so that a domain-margin event can truncate a run with
an explicit flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

Array = np.ndarray

DEFAULT_TOL = 1e-9


@dataclass
class Trajectory:
    """Time-stamped states with dense output and invariant-monitor channels."""

    t: Array
    y: Array  # shape (len(t), dim), states at the accepted nodes
    segments: list = field(default_factory=list)  # scipy OdeSolution per chunk
    truncated: bool = False
    channels: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t1(self) -> float:
        return float(self.t[-1])

    def sample(self, ts) -> Array:
        """Evaluate the dense interpolant at times ``ts`` (within the run)."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        lo, hi = min(self.t0, self.t1), max(self.t0, self.t1)
        if ts.min() < lo - 1e-12 or ts.max() > hi + 1e-12:
            raise ValueError("sample times outside the integrated interval")
        out = np.empty((len(ts), self.y.shape[1]))
        for i, t in enumerate(ts):
            out[i] = self._eval(t)
        return out

    def _eval(self, t: float) -> Array:
        for sol in self.segments:
            a, b = sol.t_min, sol.t_max
            if a - 1e-12 <= t <= b + 1e-12:
                return sol(min(max(t, a), b))
        raise ValueError(f"time {t} not covered by dense output")

    def grid(self, m: int) -> Array:
        return np.linspace(self.t0, self.t1, m)


def integrate(
    rhs: Callable[[float, Array], Array],
    y0: Array,
    T: float,
    tol: float = DEFAULT_TOL,
    *,
    margin: Optional[Callable[[Array], float]] = None,
    reproject: Optional[Callable[[Array], Array]] = None,
    chunk: float = 0.5,
    t0: float = 0.0,
    max_step: float = np.inf,
) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t0 + T``.

    ``margin(y)`` positive means in-domain; a zero crossing terminates the
    run and sets the ``truncated`` flag.  ``reproject`` is applied to the
    state between chunks (drift correction); corrections are expected to be
    below the integration tolerance and are recorded in ``meta``.
    """
    y0 = np.asarray(y0, dtype=float)
    if margin is not None and margin(y0) <= 0.0:
        raise ValueError("initial state outside domain")

    direction = 1.0 if T >= 0 else -1.0
    t_end = t0 + T
    events = None
    if margin is not None:
        def exit_event(t, y):
            return margin(y)
        exit_event.terminal = True  # type: ignore[attr-defined]
        events = [exit_event]

    ts: list[Array] = []
    ys: list[Array] = []
    segments: list = []
    truncated = False
    max_correction = 0.0

    t_cur, y_cur = t0, y0
    while direction * (t_end - t_cur) > 1e-14:
        t_next = t_cur + direction * min(chunk, abs(t_end - t_cur))
        res = solve_ivp(
            rhs,
            (t_cur, t_next),
            y_cur,
            method="RK45",
            rtol=tol,
            atol=tol,
            dense_output=True,
            events=events,
            max_step=max_step,
        )
        if not res.success and res.status != 1:
            raise RuntimeError(f"integrator failed: {res.message}")
        segments.append(res.sol)
        ts.append(res.t if not ts else res.t[1:])
        ys.append(res.y.T if not ys else res.y.T[1:])
        if res.status == 1:  # terminated by the domain-exit event
            truncated = True
            break
        t_cur = res.t[-1]
        y_cur = res.y[:, -1]
        if reproject is not None:
            y_new = reproject(y_cur)
            max_correction = max(max_correction, float(np.abs(y_new - y_cur).max()))
            y_cur = y_new

    t_all = np.concatenate(ts)
    y_all = np.concatenate(ys, axis=0)
    return Trajectory(
        t=t_all,
        y=y_all,
        segments=segments,
        truncated=truncated,
        meta={"tol": tol, "max_reprojection": max_correction},
    )
