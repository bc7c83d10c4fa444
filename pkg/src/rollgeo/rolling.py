"""Rolling of one surface on another: configurations, development, diagnostics.

A rolling configuration is a pair of contact points with a pointwise
isometry between the tangent planes, encoded as a pair of positively
oriented orthonormal frames: the isometry q maps column j of the first
frame to column j of the second, so q = fhat f^-1 in chart components.
Rolling without slipping or twisting along a prescribed base curve
("development") keeps both frames parallel and matches velocities through
q; this makes the dynamics linear in the frame matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .charts import Array, ChartMetric
from .errors import DimensionError, FrameError
from .geometry import (
    FramePoint,
    cholesky_frame,
    cholesky_frame_deriv,
    christoffel,
    riemann,
    curvature_form_from_lowered,
)
from .integrate import DEFAULT_TOL, Trajectory, integrate
from .transport import gamma_contract


@dataclass(frozen=True)
class RollingConfiguration:
    """Contact points and frame pair encoding the tangent isometry."""

    chart: ChartMetric
    chart_hat: ChartMetric
    x: Array
    xhat: Array
    f: Array
    fhat: Array

    def __post_init__(self):
        if self.chart.dim != self.chart_hat.dim:
            raise DimensionError("both surfaces must have the same dimension")
        for name in ("x", "xhat", "f", "fhat"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))

    @property
    def q(self) -> Array:
        """Chart components of the tangent isometry."""
        return self.fhat @ np.linalg.inv(self.f)

    def validate(self, tol: float = 1e-8) -> None:
        FramePoint(self.x, self.f).validate(self.chart, tol)
        FramePoint(self.xhat, self.fhat).validate(self.chart_hat, tol)

    def isometry_defect(self) -> float:
        """How far q is from preserving inner products, on the frame basis."""
        g = self.chart.metric(self.x)
        ghat = self.chart_hat.metric(self.xhat)
        q = self.q
        return float(np.abs(q.T @ ghat @ q - g).max())


def aligned_configuration(
    chart: ChartMetric, chart_hat: ChartMetric, x: Array, xhat: Array
) -> RollingConfiguration:
    """The configuration whose frames are the canonical chart frames."""
    return RollingConfiguration(
        chart=chart, chart_hat=chart_hat, x=np.asarray(x, float),
        xhat=np.asarray(xhat, float),
        f=cholesky_frame(chart, np.asarray(x, float)),
        fhat=cholesky_frame(chart_hat, np.asarray(xhat, float)),
    )


@dataclass
class RollingPath:
    """A development run: the base curve plus the integrated frame data.

    The trajectory state is ``[xhat, f (row-major), fhat (row-major), t]``;
    the base point x comes from the prescribed curve at the clock value.
    """

    chart: ChartMetric
    chart_hat: ChartMetric
    curve: Callable[[float], Array]
    curve_dot: Callable[[float], Array]
    traj: Trajectory

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def t1(self) -> float:
        return self.traj.t1

    @property
    def truncated(self) -> bool:
        return self.traj.truncated

    def _split(self, z: Array) -> tuple[Array, Array, Array]:
        n = self.dim
        return z[:n], z[n:n + n * n].reshape(n, n), z[n + n * n:n + 2 * n * n].reshape(n, n)

    def configuration(self, t: float) -> RollingConfiguration:
        z = self.traj.sample([t])[0]
        xhat, f, fhat = self._split(z)
        return RollingConfiguration(
            chart=self.chart, chart_hat=self.chart_hat,
            x=self.curve(t), xhat=xhat, f=f, fhat=fhat,
        )

    def grid(self, m: int) -> Array:
        return self.traj.grid(m)


def frame_connection_form(chart: ChartMetric, x: Array, v: Array) -> Array:
    """Connection-form coefficients of the canonical frame field along v.

    Returns the skew matrix ``w[a, b] = g(E_a, nabla_v E_b)`` for the
    canonical orthonormal frame E of the chart.
    """
    E = cholesky_frame(chart, x)
    dE = cholesky_frame_deriv(chart, x)
    gam = christoffel(chart, x)
    DvE = np.einsum("kab,k->ab", dE, v) + gamma_contract(gam, v) @ E
    w = E.T @ chart.metric(x) @ DvE
    return 0.5 * (w - w.T)


def distribution_basis(cfg: RollingConfiguration) -> list[tuple[Array, Array, Array]]:
    """Basis of the admissible (no-slip, no-twist) velocities at ``cfg``.

    Uses the canonical frame field e = E(x) on the first surface and its
    q-image, extended with constant coefficients in the canonical hat
    field, on the second.  Direction j is returned as the triple

        (e_j on M,  q e_j on Mhat,  w_j in so(n)),

    where ``w_j[a, b] = g(e_a, nabla_{e_j} e_b)
    - ghat(q e_a, nablahat_{q e_j} q e_b)`` is the fiber velocity
    coefficient on the generators rotating the isometry.
    """
    n = cfg.chart.dim
    E = cholesky_frame(cfg.chart, cfg.x)
    Ehat = cholesky_frame(cfg.chart_hat, cfg.xhat)
    q = cfg.q
    C = np.linalg.solve(Ehat, q @ E)  # hat-field coefficients of the q-image frame
    out = []
    for j in range(n):
        ej = E[:, j]
        vhat = q @ ej
        w = frame_connection_form(cfg.chart, cfg.x, ej)
        what = C.T @ frame_connection_form(cfg.chart_hat, cfg.xhat, vhat) @ C
        out.append((ej, vhat, w - what))
    return out


def so_projection(f: Array, g: Array, tol: float = 0.5) -> Array:
    """Nearest g-orthonormal frame to ``f``, preserving orientation.

    Polar-type correction: with g = L L^T the matrix L^T f is taken to its
    orthogonal polar factor.  Frames farther than ``tol`` from orthogonal
    (smallest singular value below 1 - tol or above 1 + tol) are rejected.
    """
    L = np.linalg.cholesky(g)
    m = L.T @ f
    U, s, Vt = np.linalg.svd(m)
    if s.min() < 1.0 - tol or s.max() > 1.0 + tol:
        raise FrameError(f"frame too degenerate to reproject (singular values {s})")
    return np.linalg.solve(L.T, U @ Vt)


def develop(
    cfg0: RollingConfiguration,
    curve: Callable[[float], Array],
    curve_dot: Callable[[float], Array],
    T: float,
    tol: float = DEFAULT_TOL,
    max_step: float = 0.02,
) -> RollingPath:
    """Roll ``cfg0`` along the prescribed base curve without slip or twist.

    Both frames are kept parallel along their contact curves and the
    second contact point follows the isometry image of the base velocity;
    this is the unique admissible motion over the given curve.  Frames are
    re-orthonormalized between integration chunks; chart exit on either
    surface truncates the run.
    """
    n = cfg0.chart.dim
    chart, chart_hat = cfg0.chart, cfg0.chart_hat
    if np.abs(np.asarray(curve(0.0), float) - cfg0.x).max() > 1e-9:
        raise ValueError("curve(0) does not match the starting configuration")

    def rhs(t, z):
        xhat = z[:n]
        f = z[n:n + n * n].reshape(n, n)
        fhat = z[n + n * n:n + 2 * n * n].reshape(n, n)
        clock = z[-1]
        x = np.asarray(curve(clock), float)
        xdot = np.asarray(curve_dot(clock), float)
        gam = christoffel(chart, x)
        fdot = -gamma_contract(gam, xdot) @ f
        xhatdot = fhat @ np.linalg.solve(f, xdot)
        gamhat = christoffel(chart_hat, xhat)
        fhatdot = -gamma_contract(gamhat, xhatdot) @ fhat
        return np.concatenate([xhatdot, fdot.ravel(), fhatdot.ravel(), [1.0]])

    def margin(z):
        return min(chart.margin(np.asarray(curve(z[-1]), float)),
                   chart_hat.margin(z[:n]))

    def reproject(z):
        z = z.copy()
        x = np.asarray(curve(z[-1]), float)
        f = z[n:n + n * n].reshape(n, n)
        fhat = z[n + n * n:n + 2 * n * n].reshape(n, n)
        z[n:n + n * n] = so_projection(f, chart.metric(x)).ravel()
        z[n + n * n:n + 2 * n * n] = so_projection(fhat, chart_hat.metric(z[:n])).ravel()
        return z

    z0 = np.concatenate([cfg0.xhat, cfg0.f.ravel(), cfg0.fhat.ravel(), [0.0]])
    traj = integrate(rhs, z0, T, tol, margin=margin, reproject=reproject,
                     max_step=max_step)
    traj.meta["charts"] = (chart.label, chart_hat.label)
    return RollingPath(chart=chart, chart_hat=chart_hat,
                       curve=curve, curve_dot=curve_dot, traj=traj)


def noslip_notwist_residual(path: RollingPath, m: int = 100) -> dict:
    """Worst-case slip and twist violations along a development.

    Slip compares the isometry image of the base velocity with the actual
    velocity of the second contact point (finite difference of the dense
    output).  Twist measures the hat-side covariant derivative of the
    q-image of a parallel test field; the frame columns themselves are
    the transported test vectors.
    """
    n = path.dim
    h = 1e-6
    ts = np.clip(path.grid(m), path.traj.t0 + h, path.traj.t1 - h)
    slip = twist = 0.0
    for t in ts:
        zm, z0, zp = path.traj.sample([t - h, t, t + h])
        xhat, f, fhat = path._split(z0)
        x = np.asarray(path.curve(t), float)
        xdot = np.asarray(path.curve_dot(t), float)
        ghat = path.chart_hat.metric(xhat)
        xhatdot = (zp[:n] - zm[:n]) / (2 * h)
        q = fhat @ np.linalg.inv(f)
        dv = q @ xdot - xhatdot
        slip = max(slip, float(np.sqrt(dv @ ghat @ dv)))
        fhatdot = (zp[n + n * n:n + 2 * n * n] - zm[n + n * n:n + 2 * n * n]) / (2 * h)
        gamhat = christoffel(path.chart_hat, xhat)
        cov = fhatdot.reshape(n, n) + gamma_contract(gamhat, xhatdot) @ fhat
        for j in range(n):
            twist = max(twist, float(np.sqrt(cov[:, j] @ ghat @ cov[:, j])))
    return {"slip": slip, "twist": twist}


def curvature_gap(cfg: RollingConfiguration) -> dict:
    """The curvature-difference map on two-planes, in the frame basis.

    Entry ((a, b), (c, d)) is the (a, b) component of the difference of
    the two curvature forms evaluated on the frame pair (c, d).  The
    distribution is bracket generating at ``cfg`` exactly when this map is
    invertible; for surfaces the single entry is kappa - kappahat.
    """
    n = cfg.chart.dim
    _, low = riemann(cfg.chart, cfg.x)
    _, lowhat = riemann(cfg.chart_hat, cfg.xhat)
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    G = np.empty((len(pairs), len(pairs)))
    for col, (c, d) in enumerate(pairs):
        om = curvature_form_from_lowered(low, cfg.f, cfg.f[:, c], cfg.f[:, d])
        omhat = curvature_form_from_lowered(
            lowhat, cfg.fhat, cfg.fhat[:, c], cfg.fhat[:, d])
        diff = om - omhat
        for row, (a, b) in enumerate(pairs):
            G[row, col] = diff[a, b]
    s = np.linalg.svd(G, compute_uv=False)
    return {"map": G, "min_singular_value": float(s.min())}
