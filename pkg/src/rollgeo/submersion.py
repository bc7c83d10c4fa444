"""Horizontal lifts over a coordinate submersion and projection checks.

The setting is a product chart (x, y) with x the base coordinates and y
the fiber coordinates of a submersion.  A connection is given through its
horizontal-lift coefficients A: the horizontal lift of the base coordinate
vector d_{x_i} is d_{x_i} + sum_k A[k, i] d_{y_k}.  Covectors upstairs are
written p = sum_i a_i dx_i + sum_k b_k (dy_k - sum_i A[k, i] dx_i), so the
(x, a) slots transform as a base covector and the b slots live in the
annihilator of the horizontal space.

Three flows are provided: the canonical Hamiltonian flow of the lifted
Hamiltonian upstairs, the transport of annihilator forms along horizontal
curves, and the projected flow downstairs in which the base Hamiltonian
flow picks up a curvature force coupled to the transported form.  The
projection identity says the first, pushed down, equals the second two;
``verify_projection`` measures this numerically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .charts import Array, ChartMetric, chart_by_name, fd_step
from .errors import DimensionError, HorizontalityError
from .geometry import cholesky_frame, cholesky_frame_deriv, christoffel
from .integrate import DEFAULT_TOL, Trajectory, integrate


@dataclass(frozen=True)
class SubmersionTestbed:
    """A coordinate submersion with connection coefficients ``A(x, y)``.

    ``A`` returns a (fiber_dim, base_dim) array; column i holds the fiber
    components of the horizontal lift of d_{x_i}.  ``dA``, when present,
    returns the pair ``(dAx, dAy)`` with ``dAx[j] = d A / d x_j`` and
    ``dAy[m] = d A / d y_m``; finite differences are used otherwise.
    ``margin(x, y)`` is positive on the working domain.
    """

    base_dim: int
    fiber_dim: int
    A: Callable[[Array, Array], Array]
    dA: Optional[Callable[[Array, Array], tuple[Array, Array]]] = None
    margin: Callable[[Array, Array], float] = lambda x, y: 1.0
    label: str = ""
    params: dict = field(default_factory=dict)

    def coefficients(self, x: Array, y: Array) -> Array:
        A = np.asarray(self.A(np.asarray(x, float), np.asarray(y, float)), float)
        if A.shape != (self.fiber_dim, self.base_dim):
            raise DimensionError(
                f"A has shape {A.shape}, expected ({self.fiber_dim}, {self.base_dim})"
            )
        return A

    def coefficient_derivs(self, x: Array, y: Array) -> tuple[Array, Array]:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if self.dA is not None:
            dAx, dAy = self.dA(x, y)
            return np.asarray(dAx, float), np.asarray(dAy, float)
        n, nu = self.base_dim, self.fiber_dim
        h = fd_step(np.concatenate([x, y]))
        dAx = np.empty((n, nu, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = h
            dAx[j] = (self.coefficients(x + e, y) - self.coefficients(x - e, y)) / (2 * h)
        dAy = np.empty((nu, nu, n))
        for m in range(nu):
            e = np.zeros(nu)
            e[m] = h
            dAy[m] = (self.coefficients(x, y + e) - self.coefficients(x, y - e)) / (2 * h)
        return dAx, dAy


@dataclass(frozen=True)
class CotangentState:
    """Covector upstairs in the adapted presentation (x, y, a, b)."""

    x: Array
    y: Array
    a: Array
    b: Array

    def __post_init__(self):
        for name in ("x", "y", "a", "b"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))


@dataclass(frozen=True)
class BaseHamiltonian:
    """A Hamiltonian H(x, a) on the base, with optional analytic gradient.

    ``grad(x, a)`` returns ``(dH_dx, dH_da)``; central differences are used
    when it is absent.
    """

    H: Callable[[Array, Array], float]
    grad: Optional[Callable[[Array, Array], tuple[Array, Array]]] = None
    label: str = ""

    def value(self, x: Array, a: Array) -> float:
        return float(self.H(x, a))

    def gradient(self, x: Array, a: Array) -> tuple[Array, Array]:
        if self.grad is not None:
            dx, da = self.grad(x, a)
            return np.asarray(dx, float), np.asarray(da, float)
        n = len(x)
        h = fd_step(np.concatenate([x, a]))
        dx = np.empty(n)
        da = np.empty(len(a))
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            dx[k] = (self.H(x + e, a) - self.H(x - e, a)) / (2 * h)
        for k in range(len(a)):
            e = np.zeros(len(a))
            e[k] = h
            da[k] = (self.H(x, a + e) - self.H(x, a - e)) / (2 * h)
        return dx, da


def free_hamiltonian(n: int = 2) -> BaseHamiltonian:
    """H = |a|^2 / 2 with the flat kinetic term."""
    return BaseHamiltonian(
        H=lambda x, a: 0.5 * float(a @ a),
        grad=lambda x, a: (np.zeros(n), np.asarray(a, float)),
        label="free",
    )


def kinetic_hamiltonian(chart: ChartMetric) -> BaseHamiltonian:
    """H = a . g^-1(x) a / 2, whose flow is the chart's geodesic flow."""

    def H(x, a):
        return 0.5 * float(a @ np.linalg.solve(chart.metric(x), a))

    def grad(x, a):
        ginv_a = np.linalg.solve(chart.metric(x), a)
        dg = chart.metric_deriv(x)
        dx = -0.5 * np.einsum("i,kij,j->k", ginv_a, dg, ginv_a)
        return dx, ginv_a

    return BaseHamiltonian(H=H, grad=grad, label=f"kinetic[{chart.label}]")


# ---------------------------------------------------------------------------
# Connection coefficients

def connection_coefficients(tb: SubmersionTestbed, x: Array, y: Array) -> tuple[Array, Array]:
    """Transport coefficients and curvature of the connection at (x, y).

    Returns ``(Gbar, R)`` with ``Gbar[m, i, k] = d A[m, i] / d y_k`` (the
    coefficient multiplying xdot_i b_m in the form-transport law) and
    ``R[k, i, j]`` the fiber components of the bracket of the horizontal
    lifts of d_{x_i} and d_{x_j}:

        R[k, i, j] = d_{x_i} A[k, j] - d_{x_j} A[k, i]
                     + A[m, i] d_{y_m} A[k, j] - A[m, j] d_{y_m} A[k, i].
    """
    A = tb.coefficients(x, y)
    dAx, dAy = tb.coefficient_derivs(x, y)
    Gbar = dAy.transpose(1, 2, 0)  # Gbar[m, i, k] = dAy[k, m, i]
    dxA = dAx.transpose(1, 0, 2)  # dxA[k, i, j] = d_{x_i} A[k, j]
    R = (
        dxA
        - dxA.transpose(0, 2, 1)
        + np.einsum("mi,mkj->kij", A, dAy)
        - np.einsum("mj,mki->kij", A, dAy)
    )
    return Gbar, R


# ---------------------------------------------------------------------------
# Flows

def _unpack(tb: SubmersionTestbed, z: Array) -> tuple[Array, Array, Array, Array]:
    n, nu = tb.base_dim, tb.fiber_dim
    return z[:n], z[n:n + nu], z[n + nu:2 * n + nu], z[2 * n + nu:]


def lifted_energy(tb: SubmersionTestbed, H: BaseHamiltonian, z: Array) -> float:
    """The lifted Hamiltonian evaluated on a canonical state [x, y, Px, Py]."""
    x, y, Px, Py = _unpack(tb, z)
    A = tb.coefficients(x, y)
    return H.value(x, Px + A.T @ Py)


def canonical_to_state(tb: SubmersionTestbed, z: Array) -> CotangentState:
    """Read a canonical state back into the adapted (x, y, a, b) presentation."""
    x, y, Px, Py = _unpack(tb, z)
    A = tb.coefficients(x, y)
    return CotangentState(x=x, y=y, a=Px + A.T @ Py, b=Py)


def state_to_canonical(tb: SubmersionTestbed, s: CotangentState) -> Array:
    A = tb.coefficients(s.x, s.y)
    return np.concatenate([s.x, s.y, s.a - A.T @ s.b, s.b])


def lifted_hamiltonian_flow(
    tb: SubmersionTestbed,
    H: BaseHamiltonian,
    s0: CotangentState,
    T: float,
    tol: float = DEFAULT_TOL,
    max_step: float = 0.05,
) -> Trajectory:
    """Canonical Hamiltonian flow of the lifted Hamiltonian upstairs.

    The integration state is canonical, ``[x, y, Px, Py]``, where the
    symplectic form has its standard coefficients; the adapted (a, b)
    presentation is recovered per sample with :func:`canonical_to_state`.
    """
    n = tb.base_dim

    def rhs(t, z):
        x, y, Px, Py = _unpack(tb, z)
        A = tb.coefficients(x, y)
        dAx, dAy = tb.coefficient_derivs(x, y)
        a = Px + A.T @ Py
        Hx, Ha = H.gradient(x, a)
        xdot = Ha
        ydot = A @ Ha
        Pxdot = -Hx - np.einsum("i,k,jki->j", Ha, Py, dAx)
        Pydot = -np.einsum("i,k,mki->m", Ha, Py, dAy)
        return np.concatenate([xdot, ydot, Pxdot, Pydot])

    def margin(z):
        return tb.margin(z[:n], z[n:n + tb.fiber_dim])

    traj = integrate(rhs, state_to_canonical(tb, s0), T, tol,
                     margin=margin, max_step=max_step)
    traj.meta["testbed"] = tb.label
    traj.meta["hamiltonian"] = H.label
    return traj


def nabla_bar_form_transport(
    tb: SubmersionTestbed,
    curve: Callable[[float], tuple[Array, Array]],
    curve_dot: Callable[[float], tuple[Array, Array]],
    beta0: Array,
    T: float,
    tol: float = DEFAULT_TOL,
    horizontal_tol: float = 1e-6,
) -> Trajectory:
    """Transport an annihilator form along a horizontal curve.

    ``curve(t)`` returns ``(x, y)`` and ``curve_dot(t)`` the velocities.
    The curve must be horizontal (``ydot = A xdot``); the worst compliance
    residual over a probe grid is checked first and a violation raises
    :class:`HorizontalityError`.  The transport law is

        bdot[k] = - sum_{i, m} xdot_i b_m Gbar[m, i, k].
    """
    worst = 0.0
    for t in np.linspace(0.0, T, 17):
        x, y = curve(t)
        xdot, ydot = curve_dot(t)
        res = np.abs(ydot - tb.coefficients(x, y) @ xdot).max() if tb.fiber_dim else 0.0
        worst = max(worst, float(res))
    if worst > horizontal_tol:
        raise HorizontalityError(
            f"curve is not horizontal: compliance residual {worst:.3e} > {horizontal_tol:g}"
        )

    def rhs(t, b):
        x, y = curve(t)
        xdot, _ = curve_dot(t)
        Gbar, _ = connection_coefficients(tb, x, y)
        return -np.einsum("i,m,mik->k", xdot, b, Gbar)

    return integrate(rhs, np.asarray(beta0, dtype=float), T, tol)


def projected_force_flow(
    tb: SubmersionTestbed,
    H: BaseHamiltonian,
    x0: Array,
    a0: Array,
    beta0: Array,
    T: float,
    tol: float = DEFAULT_TOL,
    y0: Optional[Array] = None,
    max_step: float = 0.05,
) -> Trajectory:
    """Base Hamiltonian flow with the curvature force, downstairs.

    State layout ``[x, a, b, y]``: the base covector (x, a) follows the
    Hamiltonian vector field of H plus the force term coupling b to the
    connection curvature; b follows the annihilator transport along the
    horizontal lift of the base curve, which is integrated simultaneously
    in the trailing y slots,

        adot[j] = -dH/dx_j + sum_{k, i} b_k R[k, i, j] xdot_i.
    """
    n, nu = tb.base_dim, tb.fiber_dim
    if y0 is None:
        y0 = np.zeros(nu)

    def rhs(t, z):
        x, a, b, y = z[:n], z[n:2 * n], z[2 * n:2 * n + nu], z[2 * n + nu:]
        A = tb.coefficients(x, y)
        Gbar, R = connection_coefficients(tb, x, y)
        Hx, Ha = H.gradient(x, a)
        xdot = Ha
        adot = -Hx + np.einsum("k,kij,i->j", b, R, xdot)
        bdot = -np.einsum("i,m,mik->k", xdot, b, Gbar)
        ydot = A @ xdot
        return np.concatenate([xdot, adot, bdot, ydot])

    def margin(z):
        return tb.margin(z[:n], z[2 * n + nu:])

    z0 = np.concatenate([np.asarray(x0, float), np.asarray(a0, float),
                         np.asarray(beta0, float), np.asarray(y0, float)])
    traj = integrate(rhs, z0, T, tol, margin=margin, max_step=max_step)
    traj.meta["testbed"] = tb.label
    traj.meta["hamiltonian"] = H.label
    return traj


def verify_projection(
    tb: SubmersionTestbed,
    H: BaseHamiltonian,
    s0: CotangentState,
    T: float,
    tol: float = DEFAULT_TOL,
    samples: int = 200,
    with_flows: bool = False,
) -> dict:
    """Measure agreement between the lifted flow, pushed down, and the
    projected force flow started from the matched initial data.

    Returns a report with the three sup-norm discrepancies: the base
    covector path (x, a), the transported form b, and the fiber path y of
    the horizontal lift.  With ``with_flows`` the report also carries the
    two trajectories so callers can sample them without re-integrating.
    """
    up = lifted_hamiltonian_flow(tb, H, s0, T, tol)
    down = projected_force_flow(tb, H, s0.x, s0.a, s0.b, T, tol, y0=s0.y)

    t1 = min(abs(up.t1), abs(down.t1)) * np.sign(T if T else 1.0)
    ts = np.linspace(0.0, t1, samples)
    n, nu = tb.base_dim, tb.fiber_dim

    err_lam = err_beta = err_lift = 0.0
    for t, zu, zd in zip(ts, up.sample(ts), down.sample(ts)):
        su = canonical_to_state(tb, zu)
        xd, ad = zd[:n], zd[n:2 * n]
        bd, yd = zd[2 * n:2 * n + nu], zd[2 * n + nu:]
        err_lam = max(err_lam, float(np.abs(su.x - xd).max()), float(np.abs(su.a - ad).max()))
        err_beta = max(err_beta, float(np.abs(su.b - bd).max()))
        err_lift = max(err_lift, float(np.abs(su.y - yd).max()))

    drift = max(
        abs(lifted_energy(tb, H, z) - lifted_energy(tb, H, up.y[0])) for z in up.sample(ts)
    )
    report = {
        "testbed": tb.label,
        "hamiltonian": H.label,
        "tol": tol,
        "T": float(T),
        "sup_error_lambda": err_lam,
        "sup_error_beta": err_beta,
        "sup_error_lift": err_lift,
        "energy_drift": float(drift),
        "truncated": bool(up.truncated or down.truncated),
    }
    if with_flows:
        report["flows"] = (up, down)
    return report


# ---------------------------------------------------------------------------
# Testbed catalog

def trivial(n: int = 2, nu: int = 1) -> SubmersionTestbed:
    """Product connection: A = 0, so the lift is flat and b is constant."""
    zero = np.zeros((nu, n))
    dzero = (np.zeros((n, nu, n)), np.zeros((nu, nu, n)))
    return SubmersionTestbed(
        base_dim=n, fiber_dim=nu,
        A=lambda x, y: zero,
        dA=lambda x, y: dzero,
        label=f"trivial({n},{nu})",
        params={"n": n, "nu": nu},
    )


def heisenberg() -> SubmersionTestbed:
    """The standard contact-type connection on R^2 x R.

    A = (-x2/2, x1/2): the curvature is the constant area form, the
    transport coefficients vanish, and free projected motion is circular.
    """
    dAx = np.zeros((2, 1, 2))
    dAx[0, 0, 1] = 0.5
    dAx[1, 0, 0] = -0.5
    dzero = np.zeros((1, 1, 2))
    return SubmersionTestbed(
        base_dim=2, fiber_dim=1,
        A=lambda x, y: np.array([[-0.5 * x[1], 0.5 * x[0]]]),
        dA=lambda x, y: (dAx, dzero),
        label="heisenberg",
    )


def _rot(psi: float) -> Array:
    c, s = np.cos(psi), np.sin(psi)
    return np.array([[c, -s], [s, c]])


def frame_bundle(chart: ChartMetric, chart_hat: ChartMetric) -> SubmersionTestbed:
    """Rolling of one surface on another, viewed as a submersion testbed.

    Base coordinates are the contact point x on the first surface.  Fiber
    coordinates ``y = (psi, xhat, psihat)`` hold the frame angle on the
    first surface, the contact point on the second, and the frame angle
    there; frames are ``f = E(x) Rot(psi)`` with E the canonical
    orthonormal frame of each chart.  The horizontal lift of a base
    direction moves both frames by parallel transport and the second
    contact point by the no-slip rule, so horizontal curves are exactly
    the rolling motions.
    """
    if chart.dim != 2 or chart_hat.dim != 2:
        raise DimensionError("frame_bundle testbed requires two 2D charts")
    J = np.array([[0.0, -1.0], [1.0, 0.0]])

    def A(x, y):
        psi, xhat, psihat = y[0], y[1:3], y[3]
        E = cholesky_frame(chart, x)
        dE = cholesky_frame_deriv(chart, x)
        gam = christoffel(chart, x)
        f = E @ _rot(psi)
        Ehat = cholesky_frame(chart_hat, xhat)
        dEhat = cholesky_frame_deriv(chart_hat, xhat)
        gamhat = christoffel(chart_hat, xhat)
        fhat = Ehat @ _rot(psihat)
        q = fhat @ np.linalg.inv(f)
        Einv = np.linalg.inv(E)
        Ehatinv = np.linalg.inv(Ehat)
        out = np.empty((4, 2))
        for i in range(2):
            B = Einv @ (-gam[:, i, :] @ E - dE[i])
            psidot = 0.5 * (B[1, 0] - B[0, 1])
            xhatdot = q[:, i]
            gamhat_v = np.einsum("kil,i->kl", gamhat, xhatdot)
            dEhat_v = np.einsum("kab,k->ab", dEhat, xhatdot)
            Bh = Ehatinv @ (-gamhat_v @ Ehat - dEhat_v)
            psihatdot = 0.5 * (Bh[1, 0] - Bh[0, 1])
            out[:, i] = [psidot, xhatdot[0], xhatdot[1], psihatdot]
        return out

    def margin(x, y):
        return min(chart.margin(x), chart_hat.margin(y[1:3]))

    return SubmersionTestbed(
        base_dim=2, fiber_dim=4, A=A, margin=margin,
        label=f"frame-bundle({chart.label},{chart_hat.label})",
        params={"chart": chart.label, "chart_hat": chart_hat.label},
    )


_TB_RE = re.compile(r"^([a-z-]+)(?:\((.*)\))?$")


def testbed_names() -> list[str]:
    return ["trivial", "heisenberg", "frame-bundle"]


def testbed_by_name(name: str) -> SubmersionTestbed:
    """Resolve names like ``trivial(2,1)`` or ``frame-bundle(sphere(1),euclidean(2))``."""
    m = _TB_RE.match(name.strip())
    if not m:
        raise KeyError(f"malformed testbed name '{name}'")
    base, argstr = m.group(1), m.group(2) or ""
    if base == "trivial":
        args = [int(a) for a in argstr.split(",")] if argstr else []
        return trivial(*args)
    if base == "heisenberg":
        return heisenberg()
    if base == "frame-bundle":
        depth = 0
        parts, cur = [], ""
        for ch in argstr:
            depth += ch == "("
            depth -= ch == ")"
            if ch == "," and depth == 0:
                parts.append(cur)
                cur = ""
            else:
                cur += ch
        if cur:
            parts.append(cur)
        if len(parts) != 2:
            raise KeyError(f"frame-bundle needs two chart names, got '{argstr}'")
        return frame_bundle(chart_by_name(parts[0]), chart_by_name(parts[1]))
    raise KeyError(f"unknown testbed '{base}'; have {testbed_names()}")
