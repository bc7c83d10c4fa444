"""Chart-based tensor calculus: Christoffel symbols, curvature, frames.

Index conventions, fixed once for the whole library:

* ``christoffel(chart, x)[k, i, j]`` is Gamma^k_ij.
* ``riemann`` returns ``(up, low)`` with ``up[a, i, j, k]`` the component
  along d_a of R(d_i, d_j) d_k, where R(X, Y) = [nabla_X, nabla_Y] -
  nabla_[X,Y], and ``low[i, j, k, l] = g(R(d_i, d_j) d_l, d_k)``.  With
  this lowering the 2D Gaussian curvature is ``low[0,1,0,1] / det g``,
  positive on the sphere.
* ``curvature_form_in_frame`` evaluates Omega(f)(X, Y)_{ab} =
  g(R(X, Y) f_b, f_a) on an orthonormal frame.  On the unit sphere with
  X = f_1, Y = f_2 the realized (1, 2) entry is +kappa; the sphere
  regression test pins this sign and the geodesic equations in
  :mod:`rollgeo.geodesics` are locked against it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charts import Array, ChartMetric, fd_step
from .errors import DimensionError, FrameError

FRAME_TOL = 1e-8


@dataclass(frozen=True)
class TangentAtPoint:
    """A tangent vector given by chart components at a chart point."""

    x: Array
    v: Array

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))


@dataclass(frozen=True)
class FramePoint:
    """A positively oriented g-orthonormal frame at a chart point.

    Column ``j`` of ``f`` holds the chart components of frame vector f_j.
    """

    x: Array
    f: Array

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "f", np.asarray(self.f, dtype=float))

    def validate(self, chart: ChartMetric, tol: float = FRAME_TOL) -> None:
        gx = chart.metric(self.x)
        defect = self.f.T @ gx @ self.f - np.eye(chart.dim)
        if np.abs(defect).max() > tol:
            raise FrameError(
                f"frame not orthonormal (defect {np.abs(defect).max():.2e}) at {self.x}"
            )
        if np.linalg.det(self.f) <= 0:
            raise FrameError(f"frame not positively oriented at {self.x}")


def orthonormality_defect(chart: ChartMetric, x: Array, f: Array) -> float:
    gx = chart.metric(x)
    return float(np.abs(f.T @ gx @ f - np.eye(chart.dim)).max())


def christoffel(chart: ChartMetric, x: Array) -> Array:
    """Levi-Civita symbols Gamma^k_ij of the chart metric at ``x``."""
    x = chart.check_point(x)
    gx = chart.metric(x)
    dgx = chart.metric_deriv(x)
    ginv = np.linalg.inv(gx)
    # Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij); dgx[k] = d_k g
    low = dgx + dgx.transpose(1, 0, 2) - dgx.transpose(1, 2, 0)
    # low[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij  (g symmetric)
    return 0.5 * np.einsum("kl,ijl->kij", ginv, low)


def christoffel_deriv(chart: ChartMetric, x: Array) -> Array:
    """Partials dGamma[m, k, i, j] = d_m Gamma^k_ij by central differences."""
    x = chart.check_point(x)
    n = chart.dim
    h = fd_step(x)
    out = np.empty((n, n, n, n))
    for m in range(n):
        e = np.zeros(n)
        e[m] = h
        out[m] = (christoffel(chart, x + e) - christoffel(chart, x - e)) / (2 * h)
    return out


def riemann(chart: ChartMetric, x: Array) -> tuple[Array, Array]:
    """Riemann tensor at ``x``; see the module docstring for index layout."""
    x = chart.check_point(x)
    gam = christoffel(chart, x)
    dgam = christoffel_deriv(chart, x)
    # up[a, i, j, k]: d_i Gamma^a_jk - d_j Gamma^a_ik
    #                + Gamma^a_im Gamma^m_jk - Gamma^a_jm Gamma^m_ik
    up = (
        dgam.transpose(1, 0, 2, 3)  # [a, i, j, k] from dgam[i, a, j, k]
        - dgam.transpose(1, 2, 0, 3)
        + np.einsum("aim,mjk->aijk", gam, gam)
        - np.einsum("ajm,mik->aijk", gam, gam)
    )
    gx = chart.metric(x)
    low = np.einsum("ka,aijl->ijkl", gx, up)
    return up, low


def curvature_form_in_frame(
    chart: ChartMetric, fp: FramePoint, X: TangentAtPoint, Y: TangentAtPoint
) -> Array:
    """so(n)-valued curvature form Omega(f)(X, Y) on an orthonormal frame."""
    if not np.array_equal(fp.x, X.x) or not np.array_equal(fp.x, Y.x):
        raise DimensionError("frame and tangent arguments at different base points")
    _, low = riemann(chart, fp.x)
    return curvature_form_from_lowered(low, fp.f, X.v, Y.v)


def curvature_form_from_lowered(low: Array, f: Array, Xv: Array, Yv: Array) -> Array:
    """Omega_{ab} = g(R(X, Y) f_b, f_a) from the lowered curvature tensor."""
    return np.einsum("ijkl,i,j,ka,lb->ab", low, Xv, Yv, f, f)


def gauss_curvature(chart: ChartMetric, x: Array) -> float:
    """Gaussian curvature of a 2D chart; analytic shortcut when attached."""
    if chart.dim != 2:
        raise DimensionError("gauss_curvature requires a 2D chart")
    x = chart.check_point(x)
    if chart.kappa is not None:
        return float(chart.kappa(x))
    _, low = riemann(chart, x)
    return float(low[0, 1, 0, 1] / np.linalg.det(chart.metric(x)))


def gauss_curvature_tensor(chart: ChartMetric, x: Array) -> float:
    """Gaussian curvature from the curvature tensor, ignoring any shortcut."""
    if chart.dim != 2:
        raise DimensionError("gauss_curvature requires a 2D chart")
    _, low = riemann(chart, x)
    return float(low[0, 1, 0, 1] / np.linalg.det(chart.metric(x)))


def sharp(chart: ChartMetric, x: Array, p: Array) -> Array:
    """Raise a covector with the inverse metric."""
    gx = chart.metric(x)
    return np.linalg.solve(gx, np.asarray(p, dtype=float))


def flat(chart: ChartMetric, x: Array, v: Array) -> Array:
    """Lower a tangent vector with the metric."""
    gx = chart.metric(x)
    return gx @ np.asarray(v, dtype=float)


def orthonormal_frame_at(chart: ChartMetric, x: Array, seed: Array | None = None) -> FramePoint:
    """Gram-Schmidt a seed basis against g(x), correcting orientation."""
    x = chart.check_point(x)
    n = chart.dim
    if seed is None:
        seed = np.eye(n)
    seed = np.asarray(seed, dtype=float)
    gx = chart.metric(x)
    if abs(np.linalg.det(seed)) < 1e-12:
        raise FrameError("seed basis is degenerate")
    cols = []
    for j in range(n):
        v = seed[:, j].copy()
        for w in cols:
            v -= (w @ gx @ v) * w
        nrm = np.sqrt(v @ gx @ v)
        if nrm < 1e-12:
            raise FrameError("seed basis is numerically degenerate")
        cols.append(v / nrm)
    f = np.column_stack(cols)
    if np.linalg.det(f) < 0:
        f[:, -1] = -f[:, -1]
    return FramePoint(x=x, f=f)


def cholesky_frame(chart: ChartMetric, x: Array) -> Array:
    """The canonical orthonormal frame E(x) = L(x)^-T with g = L L^T.

    Smooth in ``x`` wherever the metric is, which makes it suitable as a
    reference section of the frame bundle.
    """
    gx = chart.metric(x)
    L = np.linalg.cholesky(gx)
    return np.linalg.inv(L).T


def cholesky_frame_deriv(chart: ChartMetric, x: Array) -> Array:
    """Partials dE[k] = d E / d x_k of the canonical frame, analytic in dg.

    Uses the standard Cholesky differential: with g = L L^T and
    Phi = L^-1 dg L^-T, dL = L (tril(Phi) - diag(Phi)/2) and
    dE = -E dL^T E^T ... spelled out below without forming E twice.
    """
    gx = chart.metric(x)
    dgx = chart.metric_deriv(x)
    n = chart.dim
    L = np.linalg.cholesky(gx)
    Linv = np.linalg.inv(L)
    E = Linv.T
    out = np.empty((n, n, n))
    for k in range(n):
        Phi = Linv @ dgx[k] @ Linv.T
        half = np.tril(Phi, -1) + 0.5 * np.diag(np.diag(Phi))
        dL = L @ half
        # E = L^-T  =>  dE = -L^-T dL^T L^-T
        out[k] = -E @ dL.T @ E
    return out
