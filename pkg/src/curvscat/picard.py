"""Fixed-point iteration schemes on discrete time grids.

Past zone (t below the explicit eta = 0 lower bound): the coupled integral
equations

    xi(t)  = xi_in + t - II[eta * e^{2 xi}](t)
    eta(t) = eta_in    - II[e^{2 xi}](t) / 2

with II[] the double integral from -infinity, are iterated starting from
eta_0 == eta_in.  Given the current eta, the xi equation is itself implicit;
it is solved exactly on the grid by marching with trapezoid quadrature and a
scalar Newton solve per node (the node equation is x + a*e^{2x} = c with
a >= 0).  Solving the discrete equation, rather than pasting in the
continuum closed form, keeps the discrete iterates exactly monotone:
xi increases and eta decreases pointwise in the iteration index.  The
(-inf, t_min] tails are evaluated from the free-motion asymptotics of the
integrands (~ e^{2(xi_in+s)}), with error O(e^{4(xi_in+t_min)}).

Future zone (t above the eta = 0 crossing): the damped maps

    F_eps(X, Y) = X - eps*(X - linear_X + II_T0[Y e^{2X}])
    G_eps(X, Y) = Y - eps*(Y - linear_Y + II_T0[e^{2X}/2])

are iterated from the linear starting functions built from the crossing
state; X increases and Y decreases pointwise, and the limit solves the
equations of motion on [T0, t_max] with asymptotically linear behavior.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .closed_forms import AsymptoticData, explicit_bounds
from .dynamics import PhasePoint


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values of one scalar function on a uniform time grid."""

    t_min: float
    t_max: float
    step: float
    values: np.ndarray

    def __post_init__(self):
        if not self.step > 0.0:
            raise ValueError("step must be positive")
        n = int(round((self.t_max - self.t_min) / self.step))
        if len(self.values) != n + 1:
            raise ValueError(
                f"expected {n + 1} values on [{self.t_min}, {self.t_max}] "
                f"at step {self.step}, got {len(self.values)}")
        self.values.setflags(write=False)

    @property
    def t(self) -> np.ndarray:
        return self.t_min + self.step * np.arange(len(self.values))

    def sup_diff(self, other: "GridFunction") -> float:
        return float(np.max(np.abs(self.values - other.values)))


@dataclass
class PicardRun:
    """Iterate ladder of one fixed-point run.

    For the past zone, iterates_xi/iterates_eta hold the xi and eta ladders;
    for the future zone they hold the X and Y ladders (same orientation:
    the first component increases, the second decreases).
    """

    iterates_xi: list[GridFunction]
    iterates_eta: list[GridFunction]
    converged: bool
    sup_diff_history: list[float] = field(default_factory=list)

    @property
    def xi_limit(self) -> GridFunction:
        return self.iterates_xi[-1]

    @property
    def eta_limit(self) -> GridFunction:
        return self.iterates_eta[-1]


@dataclass(frozen=True)
class MonotonicityReport:
    ordered: bool
    worst_violation: float
    node: int


def _cumtrapz(values: np.ndarray, step: float, initial: float) -> np.ndarray:
    out = np.empty_like(values)
    out[0] = initial
    np.cumsum(0.5 * step * (values[1:] + values[:-1]), out=out[1:])
    out[1:] += initial
    return out


def _march_xi(t: np.ndarray, eta: np.ndarray, a: AsymptoticData,
              step: float) -> np.ndarray:
    """Solve the discrete implicit xi equation for a fixed eta grid function.

    Trapezoid composition of the double integral; the node unknown satisfies
    x + (h^2/4)*eta_j*e^{2x} = c_j, solved by three Newton steps seeded from
    the previous node (the correction is O(h^2), so this is ample).
    """
    h = step
    w_min = math.exp(2.0 * (a.xi_in + float(t[0])))
    xi = np.empty_like(eta)
    P = 0.5 * a.eta_in * w_min   # inner integral tail at t_min
    Q = 0.25 * a.eta_in * w_min  # outer integral tail at t_min
    xi[0] = a.xi_in + t[0] - Q
    g_prev = eta[0] * math.exp(2.0 * xi[0])
    xi_in = a.xi_in
    exp_ = math.exp
    for j in range(1, len(t)):
        c = xi_in + t[j] - (Q + h * P + 0.25 * h * h * g_prev)
        aj = 0.25 * h * h * eta[j]
        x = xi[j - 1]
        for _ in range(3):
            e = exp_(2.0 * x)
            x -= (x + aj * e - c) / (1.0 + 2.0 * aj * e)
        xi[j] = x
        g_new = eta[j] * exp_(2.0 * x)
        P_new = P + 0.5 * h * (g_prev + g_new)
        Q += 0.5 * h * (P + P_new)
        P = P_new
        g_prev = g_new
    return xi


def _eta_update(t: np.ndarray, xi: np.ndarray, a: AsymptoticData,
                step: float) -> np.ndarray:
    f = np.exp(2.0 * xi)
    w_min = math.exp(2.0 * (a.xi_in + float(t[0])))
    P = _cumtrapz(f, step, initial=0.5 * w_min)
    Q = _cumtrapz(P, step, initial=0.25 * w_min)
    return a.eta_in - 0.5 * Q


def iterate_past(a: AsymptoticData, t_handoff: float, step: float,
                 tol: float = 1e-10, max_iter: int = 50,
                 t_min: Optional[float] = None) -> PicardRun:
    """Monotone fixed-point iteration on the past zone grid [t_min, t_handoff].

    t_handoff must not exceed the explicit eta = 0 lower bound (the zone
    where the monotone sandwich holds).  Stops when the summed sup-norm of
    consecutive differences drops to tol, or after max_iter new iterate
    pairs (converged flag False, final sup-difference in the history).
    """
    if a.eta_in <= 0.0:
        raise ValueError("iterate_past needs eta_in > 0")
    t0_lower = explicit_bounds(a).t0_lower
    if t_handoff > t0_lower + 1e-12:
        raise ValueError(
            f"t_handoff = {t_handoff} beyond the monotone zone bound {t0_lower}")
    if t_min is None:
        t_min = t0_lower - 14.0
    n = int(round((t_handoff - t_min) / step))
    t = t_min + step * np.arange(n + 1)
    t_hi = float(t[-1])

    def gf(values):
        return GridFunction(float(t_min), t_hi, step, values)

    eta = np.full(n + 1, a.eta_in, dtype=float)
    xi = _march_xi(t, eta, a, step)
    xis = [gf(xi)]
    etas = [gf(eta)]
    history: list[float] = []
    converged = False
    for _ in range(max_iter):
        eta_next = _eta_update(t, xi, a, step)
        xi_next = _march_xi(t, eta_next, a, step)
        d = float(np.max(np.abs(xi_next - xi)) + np.max(np.abs(eta_next - eta)))
        history.append(d)
        xi, eta = xi_next, eta_next
        xis.append(gf(xi))
        etas.append(gf(eta))
        if d <= tol:
            converged = True
            break
    return PicardRun(iterates_xi=xis, iterates_eta=etas,
                     converged=converged, sup_diff_history=history)


def iterate_future(p0: PhasePoint, t_max: float, step: float,
                   epsilon: float = 0.1, tol: float = 1e-10,
                   max_iter: int = 500, eta_tol: float = 1e-6) -> PicardRun:
    """Damped fixed-point iteration on [p0.t, t_max] from an eta = 0 state.

    p0 must be (close to) the eta = 0 crossing state with xi_dot < 0 and
    eta_dot in (-1, 0).  Raises ValueError if an iterate of the second
    component turns positive, which signals data outside the monotone
    regime.
    """
    if abs(p0.eta) > eta_tol:
        raise ValueError(f"p0.eta = {p0.eta} is not an eta = 0 crossing state")
    if not p0.xi_dot < 0.0:
        raise ValueError("need xi_dot < 0 at the crossing state")
    if not (-1.0 - 1e-9 < p0.eta_dot < 0.0):
        raise ValueError("need eta_dot in (-1, 0) at the crossing state")
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    T0 = p0.t
    n = int(round((t_max - T0) / step))
    t = T0 + step * np.arange(n + 1)
    t_hi = float(t[-1])
    dt = t - T0
    LX = p0.xi_dot * dt + p0.xi
    LY = p0.eta_dot * dt

    def gf(values):
        return GridFunction(float(T0), t_hi, step, values)

    X = LX.copy()
    Y = LY.copy()
    xs = [gf(X)]
    ys = [gf(Y)]
    history: list[float] = []
    converged = False
    for _ in range(max_iter):
        e2x = np.exp(2.0 * X)
        IIy = _cumtrapz(_cumtrapz(Y * e2x, step, 0.0), step, 0.0)
        IIh = _cumtrapz(_cumtrapz(0.5 * e2x, step, 0.0), step, 0.0)
        X_next = X - epsilon * (X - LX + IIy)
        Y_next = Y - epsilon * (Y - LY + IIh)
        if np.max(Y_next) > 0.0:
            raise ValueError("second component turned positive: data outside "
                             "the monotone regime")
        d = float(np.max(np.abs(X_next - X)) + np.max(np.abs(Y_next - Y)))
        history.append(d)
        X, Y = X_next, Y_next
        xs.append(gf(X))
        ys.append(gf(Y))
        if d <= tol:
            converged = True
            break
    return PicardRun(iterates_xi=xs, iterates_eta=ys,
                     converged=converged, sup_diff_history=history)


def monotonicity_report(run: PicardRun, allowance: float = 0.0) -> MonotonicityReport:
    """Scan consecutive iterates for ordering violations.

    The first ladder must not decrease, the second must not increase; the
    worst signed violation and its node index are reported.  A single-iterate
    run is vacuously ordered.
    """
    worst = 0.0
    node = -1
    for prev, nxt in zip(run.iterates_xi, run.iterates_xi[1:]):
        viol = prev.values - nxt.values
        k = int(np.argmax(viol))
        if viol[k] > worst:
            worst, node = float(viol[k]), k
    for prev, nxt in zip(run.iterates_eta, run.iterates_eta[1:]):
        viol = nxt.values - prev.values
        k = int(np.argmax(viol))
        if viol[k] > worst:
            worst, node = float(viol[k]), k
    return MonotonicityReport(ordered=worst <= allowance,
                              worst_violation=worst, node=node)


def final_residual(run: PicardRun) -> tuple[float, float]:
    """Centered-difference residuals of the limit against the motion equations.

    Both are O(step^2) for a converged past-zone run; interior nodes only.
    """
    xi = run.xi_limit.values
    eta = run.eta_limit.values
    h = run.xi_limit.step
    e2 = np.exp(2.0 * xi[1:-1])
    r_xi = (xi[2:] - 2 * xi[1:-1] + xi[:-2]) / h**2 + eta[1:-1] * e2
    r_eta = (eta[2:] - 2 * eta[1:-1] + eta[:-2]) / h**2 + 0.5 * e2
    return float(np.max(np.abs(r_xi))), float(np.max(np.abs(r_eta)))


def write_csv(gf: GridFunction, path) -> None:
    """Export one iterate as CSV with columns t, value (12 significant digits)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "value"])
        for tv, v in zip(gf.t, gf.values):
            w.writerow([format(tv, ".12g"), format(v, ".12g")])
